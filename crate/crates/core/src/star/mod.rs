//! Star-product coefficients.
//!
//! On the Fock side `T_f T_g ~ sum_j hbar^j T_{C_j(f, g)}` with
//! `C_j(f, g) = (-1)^j sum_{|alpha| = j} (1/alpha!) d^alpha_z f d^alpha_zb g`.
//! Transporting through `iota` gives the phase-space coefficients
//! `CC_j(F, G) = C_j(F o iota, G o iota) o iota^{-1}`.

mod degenerate;
mod residual;
mod taylor;

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::factorial;
use crate::io::{self, dec, dec_pair, Dec17};
use crate::params::{DeformationParams, ParamSet};
use crate::symbols::{
    from_complex_chart, iota_chart, to_complex_chart, var, Chart, Poly, PolySymbol,
};

pub use degenerate::{
    cc1_degenerate_closed, cc_j_degenerate, cc_j_degenerate_literal, degenerate_star_coeffs,
    normal_moment, restrict_to_plane, varrho, varrho_star,
};
pub use residual::{
    expansion_residual, expansion_residual_joint, fit_slope, ExpansionReport, ResidualSample,
    SweepMode,
};
pub use taylor::{
    check_expandable, geometric_series, matrix_a_series, printed_commutator_terms,
    printed_star_terms, taylor_commutator, taylor_star, PrintedTerms, StarTaylor, B_VAR, T_VAR,
};

/// All multi-indices in `N^d` of length `j`, in lexicographically
/// decreasing order.
pub fn multi_indices(d: usize, j: u32) -> Vec<Vec<u32>> {
    if d == 0 {
        return if j == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=j).rev() {
        for mut rest in multi_indices(d - 1, j - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `C_j` acting on the first `2d` variables (interleaved `z_k, zb_k`);
/// any further variables are parameters.
pub(crate) fn c_j_poly(f: &Poly, g: &Poly, d: usize, j: u32) -> Poly {
    let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut out = Poly::zero(f.nvars());
    for alpha in multi_indices(d, j) {
        let mut df = f.clone();
        let mut dg = g.clone();
        let mut fact = 1.0;
        for (k, &a) in alpha.iter().enumerate() {
            if a > 0 {
                df = df.derivative(var::z(k), a);
                dg = dg.derivative(var::zb(k), a);
                fact *= factorial(a);
            }
        }
        if df.is_zero() || dg.is_zero() {
            continue;
        }
        out += &(&df * &dg).scale(Complex64::new(sign / fact, 0.0));
    }
    out
}

/// Fock-side coefficient `C_j(f, g)` for symbols in a complex chart.
pub fn c_j(f: &PolySymbol, g: &PolySymbol, j: u32) -> Result<PolySymbol> {
    let Chart::Complex(d) = f.chart() else {
        return Err(Error::ChartMismatch {
            expected: "a complex chart".into(),
            found: f.chart().describe(),
        });
    };
    if g.chart() != f.chart() {
        return Err(Error::ChartMismatch {
            expected: f.chart().describe(),
            found: g.chart().describe(),
        });
    }
    PolySymbol::new(f.chart(), c_j_poly(f.poly(), g.poly(), d, j))
}

fn require_phase(f: &PolySymbol) -> Result<()> {
    if f.chart() != Chart::Phase {
        return Err(Error::ChartMismatch {
            expected: Chart::Phase.describe(),
            found: f.chart().describe(),
        });
    }
    Ok(())
}

/// `CC_j(F, G) = C_j(F o iota, G o iota) o iota^{-1}`.
pub fn cc_j(p: &DeformationParams, f: &PolySymbol, g: &PolySymbol, j: u32) -> Result<PolySymbol> {
    require_phase(f)?;
    require_phase(g)?;
    let fz = to_complex_chart(p, f)?;
    let gz = to_complex_chart(p, g)?;
    from_complex_chart(p, &c_j(&fz, &gz, j)?)
}

/// The coefficients `CC_0, ..., CC_n` of `F * G`.
#[derive(Debug, Clone)]
pub struct StarCoeffs {
    pub order: u32,
    pub params: ParamSet,
    pub coeffs: Vec<PolySymbol>,
}

pub fn star_coeffs(
    p: &DeformationParams,
    f: &PolySymbol,
    g: &PolySymbol,
    n: u32,
) -> Result<StarCoeffs> {
    require_phase(f)?;
    require_phase(g)?;
    let fz = to_complex_chart(p, f)?;
    let gz = to_complex_chart(p, g)?;
    let coeffs = (0..=n)
        .map(|j| from_complex_chart(p, &c_j(&fz, &gz, j)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(StarCoeffs {
        order: n,
        params: ParamSet::Generic(*p),
        coeffs,
    })
}

#[derive(Serialize)]
pub struct TermRecord {
    pub exps: Vec<u32>,
    pub coeff: [Dec17; 2],
}

#[derive(Serialize)]
pub struct SymbolRecord {
    pub chart: String,
    pub text: String,
    pub terms: Vec<TermRecord>,
}

impl SymbolRecord {
    pub fn new(f: &PolySymbol) -> Self {
        Self {
            chart: f.chart().describe(),
            text: f.to_string(),
            terms: f
                .term_list()
                .into_iter()
                .map(|(exps, c)| TermRecord {
                    exps,
                    coeff: dec_pair(c),
                })
                .collect(),
        }
    }
}

#[derive(Serialize)]
pub(crate) struct ParamsRecord {
    kind: &'static str,
    hbar: Dec17,
    theta: Dec17,
    #[serde(rename = "calB")]
    calb: Dec17,
    s: Dec17,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa: Option<Dec17>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<Dec17>,
    #[serde(skip_serializing_if = "Option::is_none")]
    base_point: Option<[Dec17; 2]>,
}

impl ParamsRecord {
    pub(crate) fn new(p: &ParamSet) -> Self {
        match p {
            ParamSet::Generic(p) => Self {
                kind: "generic",
                hbar: dec(p.hbar()),
                theta: dec(p.theta()),
                calb: dec(p.calb()),
                s: dec(p.s()),
                kappa: None,
                delta: None,
                base_point: None,
            },
            ParamSet::Degenerate(d) => Self {
                kind: "degenerate",
                hbar: dec(d.hbar()),
                theta: dec(d.theta()),
                calb: dec(d.calb()),
                s: dec(d.s()),
                kappa: Some(dec(d.kappa())),
                delta: Some(dec(d.delta())),
                base_point: Some([dec(d.base_point().0), dec(d.base_point().1)]),
            },
        }
    }
}

impl StarCoeffs {
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Coeff {
            j: u32,
            symbol: SymbolRecord,
        }
        #[derive(Serialize)]
        struct Out {
            order: u32,
            params: ParamsRecord,
            coefficients: Vec<Coeff>,
        }
        io::to_json(&Out {
            order: self.order,
            params: ParamsRecord::new(&self.params),
            coefficients: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(j, c)| Coeff {
                    j: j as u32,
                    symbol: SymbolRecord::new(c),
                })
                .collect(),
        })
    }
}

/// Row and column order of the matrix `A`.
pub const A_ORDER: [&str; 4] = ["p1", "p2", "q1", "q2"];
const A_VARS: [usize; 4] = [var::P1, var::P2, var::Q1, var::Q2];

pub fn a_index(name: &str) -> Option<usize> {
    A_ORDER.iter().position(|n| *n == name)
}

/// `A` in the renormalized parameters `B = calB/hbar`, `T = theta/hbar`,
/// `S = s/sqrt(hbar)`.
pub fn matrix_a(p: &DeformationParams) -> Result<Matrix4<Complex64>> {
    p.require_generic()?;
    Ok(matrix_a_renormalized(p.b(), p.t(), p.s_ratio()))
}

pub fn matrix_a_renormalized(b: f64, t: f64, s: f64) -> Matrix4<Complex64> {
    let r = |x: f64| Complex64::new(x, 0.0);
    let im = |x: f64| Complex64::new(0.0, x);
    let d = 1.0 - b * t;
    let s2 = s * s;
    let s4 = s2 * s2;
    let dd = 2.0 * s2 * d * d;
    let off = r((b * s4 + t) / dd);
    #[rustfmt::skip]
    let a = Matrix4::new(
        r(-(1.0 + b * b * s4) / dd), im(-b / (2.0 * d)),  im(-1.0 / (2.0 * d)), off,
        im(b / (2.0 * d)),           r(-1.0 / (2.0 * s2)), r(0.0),              im(-1.0 / (2.0 * d)),
        im(1.0 / (2.0 * d)),         r(0.0),               r(-s2 / 2.0),        im(-t / (2.0 * d)),
        off,                         im(1.0 / (2.0 * d)),  im(t / (2.0 * d)),   r(-(s4 + t * t) / dd),
    );
    a
}

/// `A` written in the physical parameters `(hbar, calB, theta, s)`.
pub fn matrix_a_physical(p: &DeformationParams) -> Result<Matrix4<Complex64>> {
    p.require_generic()?;
    let (h, cb, th, s) = (p.hbar(), p.calb(), p.theta(), p.s());
    let r = |x: f64| Complex64::new(x, 0.0);
    let im = |x: f64| Complex64::new(0.0, x);
    let g = h * h - cb * th;
    let s2 = s * s;
    let s4 = s2 * s2;
    let off = r(h * h * (cb * s4 + h * h * th) / (2.0 * s2 * g * g));
    #[rustfmt::skip]
    let a = Matrix4::new(
        r(-h * (h.powi(4) + cb * cb * s4) / (2.0 * s2 * g * g)),
            im(-cb * h / (2.0 * g)), im(-h * h / (2.0 * g)), off,
        im(cb * h / (2.0 * g)), r(-h / (2.0 * s2)), r(0.0), im(-h * h / (2.0 * g)),
        im(h * h / (2.0 * g)), r(0.0), r(-s2 / (2.0 * h)), im(-h * th / (2.0 * g)),
        off, im(h * h / (2.0 * g)), im(h * th / (2.0 * g)),
            r(-h.powi(3) * (s4 + th * th) / (2.0 * s2 * g * g)),
    );
    Ok(a)
}

/// `A = -sum_j (d iota / d z_j)(d iota / d zb_j)^T`, read off the linear
/// chart `iota`.
pub fn matrix_a_from_chart(p: &DeformationParams) -> Result<Matrix4<Complex64>> {
    let m = iota_chart(p)?;
    let m = m.matrix();
    Ok(Matrix4::from_fn(|r, c| {
        let (vr, vc) = (A_VARS[r], A_VARS[c]);
        -(0..2)
            .map(|j| m[(vr, var::z(j))] * m[(vc, var::zb(j))])
            .sum::<Complex64>()
    }))
}

/// `grad F . A . grad G` with gradients ordered `(p1, p2, q1, q2)`.
pub fn contract_a(a: &Matrix4<Complex64>, f: &PolySymbol, g: &PolySymbol) -> Result<PolySymbol> {
    require_phase(f)?;
    require_phase(g)?;
    let df: Vec<Poly> = A_VARS.iter().map(|&v| f.poly().derivative(v, 1)).collect();
    let dg: Vec<Poly> = A_VARS.iter().map(|&v| g.poly().derivative(v, 1)).collect();
    let mut out = Poly::zero(4);
    for r in 0..4 {
        for c in 0..4 {
            if a[(r, c)] == Complex64::new(0.0, 0.0) {
                continue;
            }
            out += &(&df[r] * &dg[c]).scale(a[(r, c)]);
        }
    }
    PolySymbol::new(Chart::Phase, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_params;
    use crate::symbols::{parse_symbol, parse_symbol_in};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn multi_index_counts() {
        assert_eq!(
            multi_indices(2, 3),
            vec![vec![3, 0], vec![2, 1], vec![1, 2], vec![0, 3]]
        );
        assert_eq!(multi_indices(1, 4), vec![vec![4]]);
        assert_eq!(multi_indices(3, 2).len(), 6);
    }

    #[test]
    fn c_j_examples() {
        let z = parse_symbol_in("z", Chart::Complex(1)).unwrap();
        let zb = parse_symbol_in("zb", Chart::Complex(1)).unwrap();
        assert_eq!(c_j(&z, &zb, 0).unwrap(), &z * &zb);
        assert_eq!(
            c_j(&z, &zb, 1).unwrap(),
            PolySymbol::constant(Chart::Complex(1), c(-1.0, 0.0))
        );
        assert!(c_j(&zb, &z, 1).unwrap().is_zero());
        let w = parse_symbol("z1").unwrap();
        assert!(matches!(c_j(&z, &w, 0), Err(Error::ChartMismatch { .. })));
    }

    #[test]
    fn c_2_mixed_multi_index() {
        let f = parse_symbol("z1^2*z2").unwrap();
        let g = parse_symbol("zb1^2*zb2").unwrap();
        let r = c_j(&f, &g, 2).unwrap();
        // alpha = (2,0): 1/2 * 2 z2 * 2 zb2; alpha = (1,1): 2 z1 * 2 zb1
        let want = parse_symbol("2*z2*zb2 + 4*z1*zb1").unwrap();
        assert!(r.approx_eq(&want, 1e-15), "{r}");
    }

    #[test]
    fn a_display_spot_values() {
        let p = DeformationParams::from_renormalized(1.0, 0.0, 0.0, 1.0).unwrap();
        let a = matrix_a(&p).unwrap();
        let (q1, p1) = (a_index("q1").unwrap(), a_index("p1").unwrap());
        assert_eq!(a[(q1, q1)], c(-0.5, 0.0));
        assert_eq!(a[(q1, p1)], c(0.0, 0.5));
        let p = DeformationParams::from_renormalized(1.0, 0.2, 0.1, 1.0).unwrap();
        let a = matrix_a(&p).unwrap();
        let want = -(1.0 + 0.04) / (2.0 * 0.98 * 0.98);
        assert!((a[(p1, p1)].re - want).abs() < 1e-15);
        assert!((want + 0.541_441).abs() < 1e-6);
    }

    #[test]
    fn three_forms_of_a_agree() {
        for (h, th, cb, s) in [
            (1.0, 0.3, -0.7, 1.2),
            (0.01, 0.002, 0.004, 0.2),
            (2.0, 5.0, 0.1, 0.9),
        ] {
            let p = make_params(h, th, cb, s).unwrap();
            let a = matrix_a(&p).unwrap();
            let b = matrix_a_physical(&p).unwrap();
            let c = matrix_a_from_chart(&p).unwrap();
            let scale = a.camax().max(1.0);
            assert!((a - b).camax() < 1e-12 * scale);
            assert!((a - c).camax() < 1e-12 * scale, "{a}\n{c}");
        }
    }

    #[test]
    fn cc_examples() {
        let p = DeformationParams::from_renormalized(0.3, 0.0, 0.0, 1.0).unwrap();
        let q1 = parse_symbol("q1").unwrap();
        let p1 = parse_symbol("p1").unwrap();
        let c0 = cc_j(&p, &q1, &p1, 0).unwrap();
        assert!(c0.approx_eq(&parse_symbol("q1*p1").unwrap(), 1e-14));
        let c1 = cc_j(&p, &q1, &p1, 1).unwrap();
        assert!((c1.coeff(&[0, 0, 0, 0]) - c(0.0, 0.5)).norm() < 1e-14);
        let r = cc_j(&p, &p1, &q1, 1).unwrap();
        assert!((c1.coeff(&[0; 4]) - r.coeff(&[0; 4]) - c(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn cc_rejects_degenerate_params() {
        let p = make_params(1.0, 0.5, 2.0, 1.0).unwrap();
        let q1 = parse_symbol("q1").unwrap();
        assert_eq!(cc_j(&p, &q1, &q1, 1), Err(Error::DegenerateParams));
        assert_eq!(matrix_a(&p).unwrap_err(), Error::DegenerateParams);
    }

    #[test]
    fn contraction_matches_cc1() {
        let p = make_params(0.7, 0.2, -0.4, 0.8).unwrap();
        let f = parse_symbol("q1^2*p2 + 3*q2 - p1*q1 + 0.5*p2^3").unwrap();
        let g = parse_symbol("p1^2 + q2*p2*q1 - 2*q1").unwrap();
        let a = matrix_a(&p).unwrap();
        let lhs = contract_a(&a, &f, &g).unwrap();
        let rhs = cc_j(&p, &f, &g, 1).unwrap();
        assert!(lhs.approx_eq(&rhs, 1e-12), "{lhs}\n{rhs}");
    }

    #[test]
    fn coefficients_json_lists_terms() {
        let p = DeformationParams::from_renormalized(1.0, 0.1, 0.0, 1.0).unwrap();
        let sc = star_coeffs(
            &p,
            &parse_symbol("q1").unwrap(),
            &parse_symbol("p1").unwrap(),
            2,
        )
        .unwrap();
        assert_eq!(sc.coeffs.len(), 3);
        assert!(sc.coeffs[2].is_zero());
        let v = io::parse_json(&sc.to_json()).unwrap();
        assert_eq!(v["coefficients"].as_array().unwrap().len(), 3);
        assert_eq!(v["params"]["kind"], "generic");
    }
}
