//! Text form of symbols.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := ('+' | '-')* base ('^' uint)?
//! base   := number | 'i' | var | '(' expr ')'
//! ```
//!
//! Numbers accept a decimal point and an exponent (`2.5e-3`). Variables are
//! `q1 q2 p1 p2` (phase chart), `z1 zb1 z2 zb2` (two complex variables) or
//! `z zb` (one complex variable); one expression may not mix groups.

use num_complex::Complex64;

use super::{Chart, Poly, PolySymbol};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i];
        let start = i;
        match ch {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((Tok::Plus, i)),
            b'-' => out.push((Tok::Minus, i)),
            b'*' => out.push((Tok::Star, i)),
            b'^' => out.push((Tok::Caret, i)),
            b'(' => out.push((Tok::LParen, i)),
            b')' => out.push((Tok::RParen, i)),
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let s = &text[start..i];
                let v: f64 = s.parse().map_err(|_| Error::SyntaxError {
                    pos: start,
                    msg: format!("malformed number `{s}`"),
                })?;
                out.push((Tok::Num(v), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let c = text[i..].chars().next().unwrap_or('?');
                return Err(Error::SyntaxError {
                    pos: i,
                    msg: format!("unexpected character `{c}`"),
                });
            }
        }
        i += 1;
    }
    Ok(out)
}

const PHASE: [&str; 4] = ["q1", "q2", "p1", "p2"];
const COMPLEX2: [&str; 4] = ["z1", "zb1", "z2", "zb2"];
const COMPLEX1: [&str; 2] = ["z", "zb"];

fn chart_of(name: &str) -> Option<Chart> {
    if PHASE.contains(&name) {
        Some(Chart::Phase)
    } else if COMPLEX2.contains(&name) {
        Some(Chart::Complex(2))
    } else if COMPLEX1.contains(&name) {
        Some(Chart::Complex(1))
    } else {
        None
    }
}

fn infer_chart(toks: &[(Tok, usize)], forced: Option<Chart>) -> Result<Chart> {
    let mut chart = forced;
    for (t, pos) in toks {
        let Tok::Ident(name) = t else { continue };
        if name == "i" {
            continue;
        }
        let c = chart_of(name).ok_or_else(|| Error::UnknownVariable {
            name: name.clone(),
            pos: *pos,
        })?;
        match chart {
            None => chart = Some(c),
            Some(prev) if prev != c => {
                return Err(Error::ChartMismatch {
                    expected: prev.describe(),
                    found: format!("`{name}` at position {pos}"),
                })
            }
            _ => {}
        }
    }
    Ok(chart.unwrap_or(Chart::Phase))
}

struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    end: usize,
    chart: Chart,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, p)| *p)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::SyntaxError {
            pos: self.here(),
            msg: msg.into(),
        })
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc += &self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc -= &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.factor()?;
        while let Some(Tok::Star) = self.peek() {
            self.pos += 1;
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Poly> {
        let mut negate = false;
        loop {
            match self.peek() {
                Some(Tok::Minus) => negate = !negate,
                Some(Tok::Plus) => {}
                _ => break,
            }
            self.pos += 1;
        }
        let mut b = self.base()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            match self.peek() {
                Some(Tok::Num(v)) if v.fract() == 0.0 && *v >= 0.0 && *v <= u32::MAX as f64 => {
                    let k = *v as u32;
                    self.pos += 1;
                    b = b.pow(k);
                }
                _ => return self.err("exponent must be a nonnegative integer"),
            }
        }
        Ok(if negate { -b } else { b })
    }

    fn base(&mut self) -> Result<Poly> {
        let n = self.chart.nvars();
        let pos = self.here();
        match self.toks.get(self.pos).map(|(t, _)| t.clone()) {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Poly::constant(n, Complex64::new(v, 0.0)))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if name == "i" {
                    return Ok(Poly::constant(n, Complex64::new(0.0, 1.0)));
                }
                let idx = self
                    .chart
                    .var_index(&name)
                    .ok_or(Error::UnknownVariable { name, pos })?;
                Ok(Poly::var(n, idx))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => self.err("expected `)`"),
                }
            }
            Some(_) => self.err("expected a number, variable or `(`"),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parses a symbol, inferring its chart from the variables used.
/// Expressions without variables land in the phase chart.
pub fn parse_symbol(text: &str) -> Result<PolySymbol> {
    parse_inner(text, None)
}

/// Parses a symbol in a prescribed chart.
pub fn parse_symbol_in(text: &str, chart: Chart) -> Result<PolySymbol> {
    parse_inner(text, Some(chart))
}

fn parse_inner(text: &str, forced: Option<Chart>) -> Result<PolySymbol> {
    let toks = lex(text)?;
    let chart = infer_chart(&toks, forced)?;
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        end: text.len(),
        chart,
    };
    let poly = p.expr()?;
    if p.pos != toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(PolySymbol::from_parts(chart, poly))
}

fn coeff_text(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{:?}", c.re)
    } else if c.re == 0.0 {
        format!("{:?}*i", c.im)
    } else if c.im < 0.0 {
        format!("({:?} - {:?}*i)", c.re, -c.im)
    } else {
        format!("({:?} + {:?}*i)", c.re, c.im)
    }
}

pub(super) fn print(s: &PolySymbol) -> String {
    let names = s.chart().var_names();
    let mut out = String::new();
    for (m, c) in s.poly().terms() {
        let mono: Vec<String> = m
            .exps()
            .iter()
            .zip(&names)
            .filter(|(e, _)| **e > 0)
            .map(|(e, n)| {
                if *e == 1 {
                    n.clone()
                } else {
                    format!("{n}^{e}")
                }
            })
            .collect();
        let mono = mono.join("*");
        let mut piece = if mono.is_empty() {
            coeff_text(*c)
        } else if *c == Complex64::new(1.0, 0.0) {
            mono
        } else if *c == Complex64::new(-1.0, 0.0) {
            format!("-{mono}")
        } else {
            format!("{}*{mono}", coeff_text(*c))
        };
        if !out.is_empty() {
            if let Some(rest) = piece.strip_prefix('-') {
                out.push_str(" - ");
                piece = rest.to_string();
            } else {
                out.push_str(" + ");
            }
        }
        out.push_str(&piece);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn parse_examples() {
        let f = parse_symbol("q1*p1 + 2").unwrap();
        assert_eq!(f.chart(), Chart::Phase);
        assert_eq!(f.term_list().len(), 2);
        assert_eq!(f.coeff(&[1, 0, 1, 0]), c(1.0, 0.0));
        assert_eq!(f.coeff(&[0, 0, 0, 0]), c(2.0, 0.0));

        let g = parse_symbol("p1^2 - i*q2").unwrap();
        assert_eq!(g.coeff(&[0, 1, 0, 0]), c(0.0, -1.0));
        assert_eq!(g.coeff(&[0, 0, 2, 0]), c(1.0, 0.0));

        let h = parse_symbol("q1*(p1+p2)^2").unwrap();
        assert_eq!(h.term_list().len(), 3);
        assert_eq!(h.coeff(&[1, 0, 1, 1]), c(2.0, 0.0));
    }

    #[test]
    fn chart_inference() {
        assert_eq!(parse_symbol("z1*zb2").unwrap().chart(), Chart::Complex(2));
        assert_eq!(parse_symbol("z*zb").unwrap().chart(), Chart::Complex(1));
        assert_eq!(parse_symbol("3").unwrap().chart(), Chart::Phase);
        assert!(matches!(
            parse_symbol("q1*z1"),
            Err(Error::ChartMismatch { .. })
        ));
        let k = parse_symbol_in("3", Chart::Complex(1)).unwrap();
        assert_eq!(k.chart(), Chart::Complex(1));
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(
            parse_symbol("q1 + x3"),
            Err(Error::UnknownVariable {
                name: "x3".into(),
                pos: 5
            })
        );
        assert!(matches!(
            parse_symbol("q1 +"),
            Err(Error::SyntaxError { pos: 4, .. })
        ));
        assert!(matches!(
            parse_symbol("(q1"),
            Err(Error::SyntaxError { .. })
        ));
        assert!(matches!(
            parse_symbol("q1^1.5"),
            Err(Error::SyntaxError { .. })
        ));
        assert!(matches!(
            parse_symbol("q1 $"),
            Err(Error::SyntaxError { pos: 3, .. })
        ));
        assert!(matches!(
            parse_symbol("q1 q2"),
            Err(Error::SyntaxError { pos: 3, .. })
        ));
    }

    #[test]
    fn unary_signs_and_exponents() {
        let f = parse_symbol("-q1^2 + -2.5e-1*p2").unwrap();
        assert_eq!(f.coeff(&[2, 0, 0, 0]), c(-1.0, 0.0));
        assert_eq!(f.coeff(&[0, 0, 0, 1]), c(-0.25, 0.0));
    }

    #[test]
    fn print_round_trip() {
        for s in [
            "q1*p1 + 2",
            "p1^2 - i*q2",
            "(0.3 - 1.7*i)*z1*zb2^3 + z2",
            "-q1 - 0.1*p2^2 + 1e-7",
            "0",
            "z*zb - 2*i",
        ] {
            let a = parse_symbol(s).unwrap();
            let printed = a.to_string();
            let b = parse_symbol_in(&printed, a.chart()).unwrap();
            assert_eq!(a, b, "{s} -> {printed}");
            assert_eq!(printed, b.to_string());
        }
    }
}
