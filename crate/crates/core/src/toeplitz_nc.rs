//! Noncommutative Toeplitz operators.
//!
//! The generic operator `TT_F` is realized on the two-variable Fock space as
//! `V* TT_F V = T_{F o iota}`; the degenerate one on the one-variable Fock
//! space as `T_{rho F}`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{
    interior_columns, spectral_norm, toeplitz_poly, toeplitz_quad, CMatrix, FockBasis,
    TruncatedOperator,
};
use crate::io::{self, dec, dec_pair, Dec17};
use crate::params::{iota, real_coordinates, ComplexPoint, ParamSet, PhasePoint};
use crate::star::varrho;
use crate::symbols::{parse_symbol, to_complex_chart, PolySymbol};

/// Phase-space symbol of a noncommutative Toeplitz operator.
#[derive(Clone)]
pub enum NcSymbol {
    Poly(PolySymbol),
    /// Evaluated by Gauss-Hermite quadrature with the given nodes per
    /// real dimension.
    Callable {
        f: Arc<dyn Fn(&PhasePoint) -> Complex64 + Send + Sync>,
        nodes: usize,
    },
}

impl std::fmt::Debug for NcSymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NcSymbol::Poly(p) => write!(f, "Poly({p})"),
            NcSymbol::Callable { nodes, .. } => write!(f, "Callable {{ nodes: {nodes} }}"),
        }
    }
}

impl From<PolySymbol> for NcSymbol {
    fn from(p: PolySymbol) -> Self {
        NcSymbol::Poly(p)
    }
}

#[derive(Debug, Clone)]
pub struct NCToeplitzBuild {
    pub params: ParamSet,
    pub basis: FockBasis,
    pub symbol: NcSymbol,
}

impl NCToeplitzBuild {
    /// Checks that the basis dimension and `hbar` fit the parameters.
    pub fn new(params: ParamSet, basis: FockBasis, symbol: impl Into<NcSymbol>) -> Result<Self> {
        let want = match params {
            ParamSet::Generic(_) => 2,
            ParamSet::Degenerate(_) => 1,
        };
        if basis.d() != want {
            return Err(Error::KindMismatch(match params {
                ParamSet::Generic(_) => "generic operators live on the d = 2 Fock space",
                ParamSet::Degenerate(_) => "degenerate operators live on the d = 1 Fock space",
            }));
        }
        if basis.hbar() != params.hbar() {
            return Err(Error::BasisMismatch);
        }
        Ok(Self {
            params,
            basis,
            symbol: symbol.into(),
        })
    }
}

pub fn build_nc_toeplitz(b: &NCToeplitzBuild) -> Result<TruncatedOperator> {
    let b = NCToeplitzBuild::new(b.params, b.basis.clone(), b.symbol.clone())?;
    match (&b.params, &b.symbol) {
        (ParamSet::Generic(p), NcSymbol::Poly(f)) => {
            toeplitz_poly(&b.basis, &to_complex_chart(p, f)?)
        }
        (ParamSet::Generic(p), NcSymbol::Callable { f, nodes }) => {
            p.require_generic()?;
            let p = *p;
            let f = f.clone();
            toeplitz_quad(
                &b.basis,
                move |z| {
                    let x = iota(&p, &ComplexPoint::new(z.to_vec())).expect("generic params");
                    f(&x)
                },
                *nodes,
            )
        }
        (ParamSet::Degenerate(dp), NcSymbol::Poly(f)) => {
            dp.require_dirac()?;
            toeplitz_poly(&b.basis, &varrho(dp, f)?)
        }
        (ParamSet::Degenerate(dp), NcSymbol::Callable { f, nodes }) => {
            dp.require_dirac()?;
            let dp = *dp;
            let (q2, p2) = dp.base_point();
            let f = f.clone();
            toeplitz_quad(
                &b.basis,
                move |z| {
                    let (q1nc, p1nc) = real_coordinates(dp.hbar(), dp.s(), z[0]);
                    f(&dp.from_nc_coords(q1nc, p1nc, q2, p2))
                },
                *nodes,
            )
        }
    }
}

/// Shorthand for a polynomial symbol on a fresh basis of cutoff `n`.
pub fn nc_toeplitz(params: &ParamSet, n: usize, f: &PolySymbol) -> Result<TruncatedOperator> {
    let d = match params {
        ParamSet::Generic(_) => 2,
        ParamSet::Degenerate(_) => 1,
    };
    let basis = FockBasis::new(d, n, params.hbar())?;
    build_nc_toeplitz(&NCToeplitzBuild::new(*params, basis, f.clone())?)
}

/// `AB - BA`.
pub fn commutator(a: &TruncatedOperator, b: &TruncatedOperator) -> Result<TruncatedOperator> {
    a.compose(b)?.sub(&b.compose(a)?)
}

/// The six generator pairs, in report order.
pub const PAIRS: [(&str, &str); 6] = [
    ("p1", "p2"),
    ("p1", "q1"),
    ("p2", "q2"),
    ("q1", "q2"),
    ("q1", "p2"),
    ("q2", "p1"),
];

/// Scalar `c` with `[TT_lhs, TT_rhs] = c I`.
pub fn expected_scalar(params: &ParamSet, lhs: &str, rhs: &str) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    let (val, swapped) = match params {
        ParamSet::Generic(p) => {
            let (h, th, cb) = (p.hbar(), p.theta(), p.calb());
            let g = h * h - cb * th;
            let v = |a: &str, b: &str| match (a, b) {
                ("p1", "p2") => Some(-i * cb * h * h / g),
                ("p1", "q1") | ("p2", "q2") => Some(-i * h.powi(3) / g),
                ("q1", "q2") => Some(-i * h * h * th / g),
                _ => None,
            };
            match (v(lhs, rhs), v(rhs, lhs)) {
                (Some(c), _) => (c, false),
                (None, Some(c)) => (c, true),
                _ => (Complex64::new(0.0, 0.0), false),
            }
        }
        ParamSet::Degenerate(d) => match (lhs, rhs) {
            ("q1", "p1") => (i * d.hbar(), false),
            ("p1", "q1") => (i * d.hbar(), true),
            _ => (Complex64::new(0.0, 0.0), false),
        },
    };
    if swapped {
        -val
    } else {
        val
    }
}

/// Scalar of `[X_lhs, X_rhs]` for the quantum observables, which satisfy
/// `[Q1, Q2] = i theta`, `[P1, P2] = i calB`, `[Q_j, P_j] = i hbar`.
pub fn quantum_scalar(hbar: f64, theta: f64, calb: f64, lhs: &str, rhs: &str) -> Complex64 {
    let v = |a: &str, b: &str| match (a, b) {
        ("q1", "q2") => Some(theta),
        ("p1", "p2") => Some(calb),
        ("q1", "p1") | ("q2", "p2") => Some(hbar),
        _ => None,
    };
    let i = Complex64::new(0.0, 1.0);
    match (v(lhs, rhs), v(rhs, lhs)) {
        (Some(c), _) => i * c,
        (None, Some(c)) => -i * c,
        _ => Complex64::new(0.0, 0.0),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommutatorEntry {
    pub lhs: &'static str,
    pub rhs: &'static str,
    pub expected: Complex64,
    /// Spectral norm of `[A, B] - c I` on interior columns, relative to `|c|`
    /// when `c != 0`.
    pub deviation: f64,
    /// Generic case only.
    pub quantum: Option<Complex64>,
    /// `expected / quantum` when both are defined and nonzero.
    pub ratio: Option<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommutatorReport {
    pub params: ParamSet,
    pub cutoff: usize,
    pub interior_degree: usize,
    pub pairs: Vec<CommutatorEntry>,
}

impl CommutatorReport {
    pub fn max_deviation(&self) -> f64 {
        self.pairs.iter().map(|e| e.deviation).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Pair {
            lhs: &'static str,
            rhs: &'static str,
            expected_scalar: [Dec17; 2],
            deviation: Dec17,
            #[serde(skip_serializing_if = "Option::is_none")]
            quantum_scalar: Option<[Dec17; 2]>,
            #[serde(skip_serializing_if = "Option::is_none")]
            ratio: Option<[Dec17; 2]>,
        }
        #[derive(Serialize)]
        struct Out {
            kind: &'static str,
            params: crate::star::ParamsRecord,
            pairs: Vec<Pair>,
            #[serde(rename = "N")]
            n: usize,
            interior_degree: usize,
            max_deviation: Dec17,
        }
        io::to_json(&Out {
            kind: self.params.kind_str(),
            params: crate::star::ParamsRecord::new(&self.params),
            pairs: self
                .pairs
                .iter()
                .map(|e| Pair {
                    lhs: e.lhs,
                    rhs: e.rhs,
                    expected_scalar: dec_pair(e.expected),
                    deviation: dec(e.deviation),
                    quantum_scalar: e.quantum.map(dec_pair),
                    ratio: e.ratio.map(dec_pair),
                })
                .collect(),
            n: self.cutoff,
            interior_degree: self.interior_degree,
            max_deviation: dec(self.max_deviation()),
        })
    }
}

/// Builds the four coordinate operators at cutoff `n` and compares all six
/// commutators with their scalar values on columns of degree `<= n - 2`.
pub fn commutator_table(params: &ParamSet, n: usize) -> Result<CommutatorReport> {
    if n < 4 {
        return Err(Error::CutoffTooSmall { n, needed: 4 });
    }
    if let ParamSet::Generic(p) = params {
        p.require_generic()?;
    }
    let names = ["q1", "q2", "p1", "p2"];
    let ops = names
        .par_iter()
        .map(|v| nc_toeplitz(params, n, &parse_symbol(v)?))
        .collect::<Result<Vec<_>>>()?;
    let op = |name: &str| &ops[names.iter().position(|v| *v == name).expect("generator")];
    let interior = n - 2;
    let pairs = PAIRS
        .par_iter()
        .map(|&(lhs, rhs)| {
            let c = commutator(op(lhs), op(rhs))?;
            let cols = interior_columns(&c, interior)?;
            let expected = expected_scalar(params, lhs, rhs);
            let mut diff: CMatrix = cols;
            for k in 0..diff.ncols() {
                diff[(k, k)] -= expected;
            }
            let norm = spectral_norm(&diff);
            let deviation = if expected.norm() > 0.0 {
                norm / expected.norm()
            } else {
                norm
            };
            let (quantum, ratio) = match params {
                ParamSet::Generic(p) => {
                    let q = quantum_scalar(p.hbar(), p.theta(), p.calb(), lhs, rhs);
                    let r = (q.norm() > 0.0 && expected.norm() > 0.0).then(|| expected / q);
                    (Some(q), r)
                }
                ParamSet::Degenerate(_) => (None, None),
            };
            Ok(CommutatorEntry {
                lhs,
                rhs,
                expected,
                deviation,
                quantum,
                ratio,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CommutatorReport {
        params: *params,
        cutoff: n,
        interior_degree: interior,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::toeplitz_poly;
    use crate::params::{make_params, DeformationParams, DegenerateParams, Measure};
    use crate::symbols::{parse_symbol_in, Chart};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_symbol_is_identity() {
        let p = ParamSet::Generic(make_params(0.7, 0.2, 0.1, 1.0).unwrap());
        let one = nc_toeplitz(&p, 5, &PolySymbol::one(Chart::Phase)).unwrap();
        let id = TruncatedOperator::identity(one.basis());
        assert!((one.matrix() - id.matrix()).camax() < 1e-15);
    }

    #[test]
    fn canonical_position_operator() {
        let p = ParamSet::Generic(DeformationParams::new(1.0, 0.0, 0.0, 1.0).unwrap());
        let t = nc_toeplitz(&p, 6, &parse_symbol("q1").unwrap()).unwrap();
        let basis = t.basis().clone();
        let want = toeplitz_poly(
            &basis,
            &parse_symbol_in("z1 + zb1", Chart::Complex(2))
                .unwrap()
                .scale(c(std::f64::consts::FRAC_1_SQRT_2, 0.0)),
        )
        .unwrap();
        assert!((t.matrix() - want.matrix()).camax() < 1e-14);
        assert!((t.matrix() - t.matrix().adjoint()).camax() < 1e-15);
        let e1 = basis.index_of(&[1, 0]).unwrap();
        let e2 = basis.index_of(&[2, 0]).unwrap();
        assert!((t.matrix()[(e2, e1)] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn quadrature_build_matches_polynomial_build() {
        let p = ParamSet::Generic(make_params(0.8, 0.3, -0.2, 1.1).unwrap());
        let basis = FockBasis::new(2, 3, 0.8).unwrap();
        let f = parse_symbol("q1*p2 + q2^2").unwrap();
        let exact =
            build_nc_toeplitz(&NCToeplitzBuild::new(p, basis.clone(), f.clone()).unwrap()).unwrap();
        let g = f.clone();
        let sym = NcSymbol::Callable {
            f: Arc::new(move |x| g.eval_phase(x).unwrap()),
            nodes: 8,
        };
        let quad = build_nc_toeplitz(&NCToeplitzBuild::new(p, basis, sym).unwrap()).unwrap();
        assert!((exact.matrix() - quad.matrix()).camax() < 1e-11);
    }

    #[test]
    fn degenerate_build() {
        let dp = DegenerateParams::new(0.5, 0.2, 0.1, 0.3, 0.7)
            .unwrap()
            .with_base_point(1.5, -0.25);
        let p = ParamSet::Degenerate(dp);
        let t = nc_toeplitz(&p, 6, &parse_symbol("p2").unwrap()).unwrap();
        let id = TruncatedOperator::identity(t.basis()).scale(c(-0.25, 0.0));
        assert!((t.matrix() - id.matrix()).camax() < 1e-15);
        let spread = ParamSet::Degenerate(dp.with_measure(Measure::ProductGaussian {
            mean: [0.0, 0.0],
            std: [1.0, 1.0],
        }));
        assert_eq!(
            nc_toeplitz(&spread, 4, &parse_symbol("q1").unwrap()).unwrap_err(),
            Error::NonDiracMeasure
        );
        let basis2 = FockBasis::new(2, 4, 0.5).unwrap();
        assert!(matches!(
            NCToeplitzBuild::new(p, basis2, parse_symbol("q1").unwrap()),
            Err(Error::KindMismatch(_))
        ));
    }

    #[test]
    fn commutator_basics() {
        let basis = FockBasis::new(1, 8, 0.6).unwrap();
        let z = toeplitz_poly(&basis, &parse_symbol_in("z", Chart::Complex(1)).unwrap()).unwrap();
        let zb = toeplitz_poly(&basis, &parse_symbol_in("zb", Chart::Complex(1)).unwrap()).unwrap();
        let id = TruncatedOperator::identity(&basis);
        assert!(commutator(&id, &z).unwrap().matrix().camax() < 1e-15);
        assert!(commutator(&z, &z).unwrap().matrix().camax() < 1e-15);
        let cz = commutator(&z, &zb).unwrap();
        let cols = interior_columns(&cz, 7).unwrap();
        for k in 0..cols.ncols() {
            for r in 0..cols.nrows() {
                let want = if r == k { c(-0.6, 0.0) } else { c(0.0, 0.0) };
                assert!((cols[(r, k)] - want).norm() < 1e-13);
            }
        }
        let other = TruncatedOperator::identity(&FockBasis::new(1, 8, 0.5).unwrap());
        assert_eq!(commutator(&z, &other).unwrap_err(), Error::BasisMismatch);
    }

    #[test]
    fn canonical_table() {
        let p = ParamSet::Generic(DeformationParams::new(1.0, 0.0, 0.0, 1.0).unwrap());
        let r = commutator_table(&p, 6).unwrap();
        assert!(r.max_deviation() < 1e-12);
        let e = r
            .pairs
            .iter()
            .find(|e| e.lhs == "p1" && e.rhs == "q1")
            .unwrap();
        assert_eq!(e.expected, c(0.0, -1.0));
    }

    #[test]
    fn deformed_table() {
        let p = ParamSet::Generic(DeformationParams::with_default_width(1.0, 0.5, 0.5).unwrap());
        let r = commutator_table(&p, 10).unwrap();
        assert!(r.max_deviation() < 1e-10, "{}", r.max_deviation());
        let e = r
            .pairs
            .iter()
            .find(|e| e.lhs == "q1" && e.rhs == "q2")
            .unwrap();
        assert!((e.expected - c(0.0, -2.0 / 3.0)).norm() < 1e-15);
        // ratio hbar^2/(calB theta - hbar^2) for like pairs, opposite for q-p pairs
        assert!((e.ratio.unwrap() - c(1.0 / (0.25 - 1.0), 0.0)).norm() < 1e-14);
        let e = r
            .pairs
            .iter()
            .find(|e| e.lhs == "p1" && e.rhs == "q1")
            .unwrap();
        assert!((e.ratio.unwrap() - c(-1.0 / (0.25 - 1.0), 0.0)).norm() < 1e-14);
        let v = io::parse_json(&r.to_json()).unwrap();
        assert_eq!(v["N"], 10);
        assert_eq!(v["interior_degree"], 8);
        assert_eq!(v["pairs"].as_array().unwrap().len(), 6);
    }

    #[test]
    fn degenerate_table() {
        let dp = DegenerateParams::new(1.0, 0.4, 0.3, -0.2, 1.0)
            .unwrap()
            .with_base_point(0.5, 2.0);
        let r = commutator_table(&ParamSet::Degenerate(dp), 8).unwrap();
        assert!(r.max_deviation() <= 1e-10);
        let e = r
            .pairs
            .iter()
            .find(|e| e.lhs == "p1" && e.rhs == "q1")
            .unwrap();
        assert_eq!(e.expected, c(0.0, -1.0));
        assert_eq!(
            commutator_table(&ParamSet::Degenerate(dp), 3).unwrap_err(),
            Error::CutoffTooSmall { n: 3, needed: 4 }
        );
    }
}
