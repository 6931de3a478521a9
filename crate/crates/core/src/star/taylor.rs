//! Joint expansion of the star product in `(B, T)` around `(0, 0)`.
//!
//! `iota` and `A` depend on `hbar` only through `(B, T, S)`, with powers of
//! `1/(1 - BT)`. Replacing those by truncated geometric series turns every
//! `CC_j` into a polynomial in the phase variables and in `B, T`.

use num_complex::Complex64;

use super::{c_j_poly, require_phase};
use crate::error::{Error, Result};
use crate::symbols::{complex_to_pair, pair_to_complex, var, Chart, Poly, PolySymbol};

/// Index of `B` in the six-variable polynomials `(x1..x4, B, T)`.
pub const B_VAR: usize = 4;
/// Index of `T` in the six-variable polynomials.
pub const T_VAR: usize = 5;
const BT: [usize; 2] = [B_VAR, T_VAR];

fn cr(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn check_expandable(b: f64, t: f64) -> Result<()> {
    let bt = (b * t).abs();
    if !(bt < 1.0) {
        return Err(Error::NotExpandable(bt));
    }
    Ok(())
}

/// `1/(1 - BT)` truncated at total degree `m` in `(B, T)`, as a polynomial
/// in the two variables `(B, T)`.
pub fn geometric_series(m: u32) -> Poly {
    let bt = &Poly::var(2, 0) * &Poly::var(2, 1);
    let mut out = Poly::zero(2);
    for k in 0..=m / 2 {
        out += &bt.pow(k);
    }
    out
}

/// Embeds a `(B, T)` polynomial into the six-variable ring.
fn embed(p: &Poly) -> Poly {
    p.compose(&[Poly::var(6, B_VAR), Poly::var(6, T_VAR)])
}

/// Matrix of `iota` (rows `q1, q2, p1, p2`; columns `z1, zb1, z2, zb2`) at
/// `hbar = 1`, `s = S`, entries in `(B, T)`.
fn iota_series(s: f64, m: u32) -> Vec<Vec<Poly>> {
    let blk = complex_to_pair(1.0, s);
    let mut znc = vec![vec![Poly::zero(2); 4]; 4];
    for j in 0..2 {
        for k in 0..2 {
            znc[j][2 * j + k] = Poly::constant(2, blk[0][k]);
            znc[2 + j][2 * j + k] = Poly::constant(2, blk[1][k]);
        }
    }
    let g = geometric_series(m);
    let b = Poly::var(2, 0);
    let t = Poly::var(2, 1);
    let mut inv = vec![vec![Poly::zero(2); 4]; 4];
    inv[0][0] = Poly::one(2);
    inv[3][3] = Poly::one(2);
    inv[1][1] = g.clone();
    inv[1][2] = -(&t * &g);
    inv[2][1] = -(&b * &g);
    inv[2][2] = g;
    let mut out = vec![vec![Poly::zero(2); 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            for k in 0..4 {
                if inv[r][k].is_zero() || znc[k][c].is_zero() {
                    continue;
                }
                out[r][c] += &(&inv[r][k] * &znc[k][c]);
            }
            out[r][c] = out[r][c].truncate(&[0, 1], m);
        }
    }
    out
}

/// Six-variable images of the phase variables under `iota`.
fn iota_images(s: f64, m: u32) -> Vec<Poly> {
    let mat = iota_series(s, m);
    let mut images: Vec<Poly> = (0..4)
        .map(|r| {
            let mut acc = Poly::zero(6);
            for (c, e) in mat[r].iter().enumerate() {
                acc += &(&embed(e) * &Poly::var(6, c));
            }
            acc
        })
        .collect();
    images.push(Poly::var(6, B_VAR));
    images.push(Poly::var(6, T_VAR));
    images
}

/// Six-variable images of `(z1, zb1, z2, zb2)` under `iota^{-1}`; exact.
fn iota_inverse_images(s: f64) -> Vec<Poly> {
    let x = |i: usize| Poly::var(6, i);
    let nc = [
        x(var::Q1),
        &x(var::Q2) + &(&x(T_VAR) * &x(var::P1)),
        &x(var::P1) + &(&x(B_VAR) * &x(var::Q2)),
        x(var::P2),
    ];
    let blk = pair_to_complex(1.0, s);
    let mut images = Vec::with_capacity(6);
    for j in 0..2 {
        for row in blk {
            images.push(&nc[j].scale(row[0]) + &nc[2 + j].scale(row[1]));
        }
    }
    images.push(x(B_VAR));
    images.push(x(T_VAR));
    images
}

fn lift(f: &PolySymbol) -> Poly {
    let images: Vec<Poly> = (0..4).map(|i| Poly::var(6, i)).collect();
    f.poly().compose(&images)
}

/// `A` with entries in `(B, T)`, truncated at total degree `m`; rows and
/// columns ordered `(p1, p2, q1, q2)`.
pub fn matrix_a_series(s: f64, m: u32) -> Vec<Vec<Poly>> {
    let mat = iota_series(s, m);
    let rows = [var::P1, var::P2, var::Q1, var::Q2];
    rows.iter()
        .map(|&r| {
            rows.iter()
                .map(|&c| {
                    let mut acc = Poly::zero(2);
                    for j in 0..2 {
                        acc -= &(&mat[r][var::z(j)] * &mat[c][var::zb(j)]);
                    }
                    acc.truncate(&[0, 1], m)
                })
                .collect()
        })
        .collect()
}

/// `CC_0..CC_n` as polynomials in `(q1, q2, p1, p2, B, T)`, truncated at
/// total degree `m` in `(B, T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StarTaylor {
    pub s_ratio: f64,
    pub order: u32,
    pub bt_order: u32,
    pub coeffs: Vec<Poly>,
}

impl StarTaylor {
    /// Coefficient of `hbar^j B^bp T^tp`.
    pub fn coefficient(&self, j: usize, bp: u32, tp: u32) -> PolySymbol {
        let mut out = Poly::zero(4);
        for (mono, c) in self.coeffs[j].terms() {
            let e = mono.exps();
            if e[B_VAR] == bp && e[T_VAR] == tp {
                out.add_term(crate::symbols::Monomial::new(e[..4].to_vec()), *c);
            }
        }
        PolySymbol::new(Chart::Phase, out).expect("four variables")
    }

    /// Partial sum of the series for `CC_j` at numeric `(B, T)`.
    pub fn at(&self, j: usize, b: f64, t: f64) -> Result<PolySymbol> {
        check_expandable(b, t)?;
        let mut images: Vec<Poly> = (0..4).map(|i| Poly::var(4, i)).collect();
        images.push(Poly::constant(4, cr(b)));
        images.push(Poly::constant(4, cr(t)));
        PolySymbol::new(Chart::Phase, self.coeffs[j].compose(&images))
    }

    pub fn leading_terms(&self) -> Result<PrintedTerms> {
        if self.order < 2 || self.bt_order < 1 {
            return Err(Error::BadCutoff(
                "leading terms need hbar order >= 2 and (B, T) order >= 1".into(),
            ));
        }
        Ok(PrintedTerms {
            hbar: self.coefficient(1, 0, 0),
            hbar_b: self.coefficient(1, 1, 0),
            hbar_t: self.coefficient(1, 0, 1),
            hbar2: self.coefficient(2, 0, 0),
        })
    }

    fn sub(&self, other: &Self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
            ..self.clone()
        }
    }
}

pub fn taylor_star(
    f: &PolySymbol,
    g: &PolySymbol,
    s_ratio: f64,
    n: u32,
    m: u32,
) -> Result<StarTaylor> {
    require_phase(f)?;
    require_phase(g)?;
    if !(s_ratio > 0.0) {
        return Err(Error::NonPositiveWidth(s_ratio));
    }
    let fwd = iota_images(s_ratio, m);
    let back = iota_inverse_images(s_ratio);
    let fz = lift(f).compose(&fwd).truncate(&BT, m);
    let gz = lift(g).compose(&fwd).truncate(&BT, m);
    let coeffs = (0..=n)
        .map(|j| {
            let c = c_j_poly(&fz, &gz, 2, j).truncate(&BT, m);
            c.compose(&back).truncate(&BT, m)
        })
        .collect();
    Ok(StarTaylor {
        s_ratio,
        order: n,
        bt_order: m,
        coeffs,
    })
}

/// Expansion of `F * G - G * F`.
pub fn taylor_commutator(
    f: &PolySymbol,
    g: &PolySymbol,
    s_ratio: f64,
    n: u32,
    m: u32,
) -> Result<StarTaylor> {
    Ok(taylor_star(f, g, s_ratio, n, m)?.sub(&taylor_star(g, f, s_ratio, n, m)?))
}

/// The terms of orders `hbar`, `hbar B`, `hbar T` and `hbar^2` (at
/// `B = T = 0`) of an expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct PrintedTerms {
    pub hbar: PolySymbol,
    pub hbar_b: PolySymbol,
    pub hbar_t: PolySymbol,
    pub hbar2: PolySymbol,
}

impl PrintedTerms {
    pub fn labeled(&self) -> [(&'static str, &PolySymbol); 4] {
        [
            ("hbar", &self.hbar),
            ("hbar*B", &self.hbar_b),
            ("hbar*T", &self.hbar_t),
            ("hbar^2", &self.hbar2),
        ]
    }
}

fn d(f: &Poly, v: usize) -> Poly {
    f.derivative(v, 1)
}

/// `d/dp_k + sign * i d/dq_k`, `k` zero-based.
fn dpm(f: &Poly, k: usize, sign: f64) -> Poly {
    let (q, p) = [(var::Q1, var::P1), (var::Q2, var::P2)][k];
    &d(f, p) + &d(f, q).scale(Complex64::new(0.0, sign))
}

fn sym(p: Poly) -> PolySymbol {
    PolySymbol::new(Chart::Phase, p).expect("phase chart")
}

/// Second-order bracket pieces `(sum_k d+k^2 G d-k^2 F, d+1 d+2 G d-1 d-2 F)`.
fn second_order(f: &Poly, g: &Poly) -> (Poly, Poly) {
    let mut diag = Poly::zero(4);
    for k in 0..2 {
        diag += &(&dpm(&dpm(g, k, 1.0), k, 1.0) * &dpm(&dpm(f, k, -1.0), k, -1.0));
    }
    let mixed = &dpm(&dpm(g, 0, 1.0), 1, 1.0) * &dpm(&dpm(f, 0, -1.0), 1, -1.0);
    (diag, mixed)
}

/// The closed-form low-order terms of `F * G` at `S = 1`.
pub fn printed_star_terms(f: &PolySymbol, g: &PolySymbol) -> Result<PrintedTerms> {
    require_phase(f)?;
    require_phase(g)?;
    let (f, g) = (f.poly(), g.poly());
    let i = Complex64::new(0.0, 1.0);
    let mut h1 = Poly::zero(4);
    for k in 0..2 {
        h1 += &(&dpm(f, k, -1.0) * &dpm(g, k, 1.0));
    }
    let hb = &(&d(g, var::P1) * &dpm(f, 1, -1.0)).scale(i)
        - &(&d(f, var::P1) * &dpm(g, 1, 1.0)).scale(i);
    let ht = &(&d(f, var::Q2) * &dpm(g, 0, 1.0)) + &(&d(g, var::Q2) * &dpm(f, 0, -1.0));
    let (diag, mixed) = second_order(f, g);
    let h2 = &diag + &mixed.scale(cr(2.0));
    Ok(PrintedTerms {
        hbar: sym(h1.scale(cr(-0.5))),
        hbar_b: sym(hb.scale(cr(0.5))),
        hbar_t: sym(ht.scale(cr(0.5))),
        hbar2: sym(h2.scale(cr(0.125))),
    })
}

/// The closed-form low-order terms of `F * G - G * F` at `S = 1`.
pub fn printed_commutator_terms(f: &PolySymbol, g: &PolySymbol) -> Result<PrintedTerms> {
    require_phase(f)?;
    require_phase(g)?;
    let i = Complex64::new(0.0, 1.0);
    let pb = crate::symbols::poisson_bracket(f, g)?;
    let (f, g) = (f.poly(), g.poly());
    let hb = &(&d(f, var::P2) * &d(g, var::P1)) - &(&d(f, var::P1) * &d(g, var::P2));
    let ht = &(&d(f, var::Q2) * &d(g, var::Q1)) - &(&d(f, var::Q1) * &d(g, var::Q2));
    let (diag_gf, mixed_gf) = second_order(f, g);
    let (diag_fg, mixed_fg) = second_order(g, f);
    let h2 = &(&(&mixed_gf - &mixed_fg).scale(cr(2.0)) + &diag_gf) - &diag_fg;
    Ok(PrintedTerms {
        hbar: sym(pb.poly().scale(i)),
        hbar_b: sym(hb.scale(i)),
        hbar_t: sym(ht.scale(i)),
        hbar2: sym(h2.scale(cr(0.125))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::DeformationParams;
    use crate::star::{cc_j, matrix_a_renormalized};
    use crate::symbols::parse_symbol;

    #[test]
    fn geometric() {
        let g = geometric_series(5);
        assert_eq!(g.len(), 3);
        assert_eq!(g.coeff(&[2, 2]), cr(1.0));
        assert_eq!(g.coeff(&[3, 3]), cr(0.0));
        assert_eq!(check_expandable(2.0, 0.5), Err(Error::NotExpandable(1.0)));
        assert!(check_expandable(0.9, 0.9).is_ok());
    }

    #[test]
    fn a_series_converges_to_a() {
        let (b, t, s) = (0.2, -0.15, 1.3);
        let ser = matrix_a_series(s, 30);
        let a = matrix_a_renormalized(b, t, s);
        let pt = [cr(b), cr(t)];
        for r in 0..4 {
            for c in 0..4 {
                assert!((ser[r][c].eval(&pt) - a[(r, c)]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn series_partial_sums_approach_exact_coefficients() {
        let f = parse_symbol("q1*q2 + p1^2").unwrap();
        let g = parse_symbol("p2*q1 - q2^2").unwrap();
        let (b, t) = (0.05, 0.08);
        let st = taylor_star(&f, &g, 1.0, 2, 16).unwrap();
        let p = DeformationParams::from_renormalized(0.37, b, t, 1.0).unwrap();
        for j in 0..=2 {
            let exact = cc_j(&p, &f, &g, j as u32).unwrap();
            assert!(st.at(j, b, t).unwrap().approx_eq(&exact, 1e-12));
        }
        assert!(matches!(st.at(1, 3.0, 0.5), Err(Error::NotExpandable(_))));
    }

    #[test]
    fn zeroth_order_is_pointwise_product() {
        let f = parse_symbol("q1 + p2^2").unwrap();
        let g = parse_symbol("q2*p1").unwrap();
        let st = taylor_star(&f, &g, 1.0, 0, 3).unwrap();
        assert!(st.coefficient(0, 0, 0).approx_eq(&(&f * &g), 1e-14));
        for (bp, tp) in [(1, 0), (0, 1), (1, 1), (2, 1)] {
            assert!(st.coefficient(0, bp, tp).poly().max_abs_coeff() < 1e-14);
        }
    }

    #[test]
    fn printed_terms_match_machine() {
        let f = parse_symbol("q1^2 + 2*q1*p2 - p1*q2 + 0.5*p2 + 3*q2^2").unwrap();
        let g = parse_symbol("p1^2 - q1*q2 + 1.5*p2*p1 - q1").unwrap();
        let mach = taylor_star(&f, &g, 1.0, 2, 1)
            .unwrap()
            .leading_terms()
            .unwrap();
        let closed = printed_star_terms(&f, &g).unwrap();
        for ((name, a), (_, b)) in mach.labeled().into_iter().zip(closed.labeled()) {
            assert!(a.approx_eq(b, 1e-12), "{name}: {a} vs {b}");
        }
        let mach = taylor_commutator(&f, &g, 1.0, 2, 1)
            .unwrap()
            .leading_terms()
            .unwrap();
        let closed = printed_commutator_terms(&f, &g).unwrap();
        for ((name, a), (_, b)) in mach.labeled().into_iter().zip(closed.labeled()) {
            assert!(a.approx_eq(b, 1e-12), "{name}: {a} vs {b}");
        }
    }
}
