//! Polynomial symbols on phase space `(q1, q2, p1, p2)` and on the complex
//! chart `(z1, zb1, z2, zb2)`.
//!
//! In the complex chart `z_j` and `zb_j` are independent formal variables.

mod parse;
mod poly;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{DeformationParams, PhasePoint};

pub use parse::{parse_symbol, parse_symbol_in};
pub use poly::{Monomial, Poly};

/// Variable indices of the phase chart.
pub mod var {
    pub const Q1: usize = 0;
    pub const Q2: usize = 1;
    pub const P1: usize = 2;
    pub const P2: usize = 3;

    /// Index of `z_j` (0-based `j`) in a complex chart.
    pub const fn z(j: usize) -> usize {
        2 * j
    }
    /// Index of `zb_j` (0-based `j`) in a complex chart.
    pub const fn zb(j: usize) -> usize {
        2 * j + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Chart {
    Phase,
    /// Interleaved `(z1, zb1, ..., zd, zbd)`.
    Complex(usize),
}

impl Chart {
    pub fn nvars(self) -> usize {
        match self {
            Chart::Phase => 4,
            Chart::Complex(d) => 2 * d,
        }
    }

    pub fn var_names(self) -> Vec<String> {
        match self {
            Chart::Phase => ["q1", "q2", "p1", "p2"].map(String::from).to_vec(),
            Chart::Complex(1) => vec!["z".into(), "zb".into()],
            Chart::Complex(d) => (1..=d)
                .flat_map(|j| [format!("z{j}"), format!("zb{j}")])
                .collect(),
        }
    }

    pub fn var_index(self, name: &str) -> Option<usize> {
        self.var_names().iter().position(|n| n == name)
    }

    pub fn describe(self) -> String {
        match self {
            Chart::Phase => "phase".into(),
            Chart::Complex(d) => format!("complex({d})"),
        }
    }
}

fn mismatch(expected: Chart, found: Chart) -> Error {
    Error::ChartMismatch {
        expected: expected.describe(),
        found: found.describe(),
    }
}

/// A polynomial tied to a chart.
#[derive(Debug, Clone, PartialEq)]
pub struct PolySymbol {
    chart: Chart,
    poly: Poly,
}

impl PolySymbol {
    pub fn new(chart: Chart, poly: Poly) -> Result<Self> {
        if poly.nvars() != chart.nvars() {
            return Err(Error::DimensionMismatch {
                expected: chart.nvars(),
                found: poly.nvars(),
            });
        }
        Ok(Self { chart, poly })
    }

    pub(crate) fn from_parts(chart: Chart, poly: Poly) -> Self {
        debug_assert_eq!(poly.nvars(), chart.nvars());
        Self { chart, poly }
    }

    pub fn zero(chart: Chart) -> Self {
        Self::from_parts(chart, Poly::zero(chart.nvars()))
    }

    pub fn constant(chart: Chart, c: Complex64) -> Self {
        Self::from_parts(chart, Poly::constant(chart.nvars(), c))
    }

    pub fn one(chart: Chart) -> Self {
        Self::constant(chart, Complex64::new(1.0, 0.0))
    }

    pub fn var(chart: Chart, index: usize) -> Self {
        Self::from_parts(chart, Poly::var(chart.nvars(), index))
    }

    pub fn named(chart: Chart, name: &str) -> Result<Self> {
        chart
            .var_index(name)
            .map(|i| Self::var(chart, i))
            .ok_or_else(|| Error::UnknownVariable {
                name: name.to_string(),
                pos: 0,
            })
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }
    pub fn poly(&self) -> &Poly {
        &self.poly
    }
    pub fn into_poly(self) -> Poly {
        self.poly
    }
    pub fn degree(&self) -> Option<u32> {
        self.poly.degree()
    }
    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    /// Coefficient of the monomial with the given exponents.
    pub fn coeff(&self, exps: &[u32]) -> Complex64 {
        self.poly.coeff(exps)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_parts(self.chart, self.poly.scale(c))
    }

    pub fn pow(&self, k: u32) -> Self {
        Self::from_parts(self.chart, self.poly.pow(k))
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.same_chart(other)?;
        Ok(Self::from_parts(self.chart, &self.poly + &other.poly))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.same_chart(other)?;
        Ok(Self::from_parts(self.chart, &self.poly * &other.poly))
    }

    fn same_chart(&self, other: &Self) -> Result<()> {
        if self.chart != other.chart {
            return Err(mismatch(self.chart, other.chart));
        }
        Ok(())
    }

    /// Partial derivative by variable index.
    pub fn derivative(&self, var: usize, order: u32) -> Result<Self> {
        if var >= self.chart.nvars() {
            return Err(Error::ChartMismatch {
                expected: self.chart.describe(),
                found: format!("variable index {var}"),
            });
        }
        Ok(Self::from_parts(
            self.chart,
            self.poly.derivative(var, order),
        ))
    }

    /// Partial derivative by variable name.
    pub fn differentiate(&self, var: &str, order: u32) -> Result<Self> {
        let i = self
            .chart
            .var_index(var)
            .ok_or_else(|| Error::ChartMismatch {
                expected: self.chart.describe(),
                found: format!("variable `{var}`"),
            })?;
        self.derivative(i, order)
    }

    pub fn eval(&self, point: &[Complex64]) -> Result<Complex64> {
        if point.len() != self.chart.nvars() {
            return Err(Error::DimensionMismatch {
                expected: self.chart.nvars(),
                found: point.len(),
            });
        }
        Ok(self.poly.eval(point))
    }

    pub fn eval_phase(&self, x: &PhasePoint) -> Result<Complex64> {
        if self.chart != Chart::Phase {
            return Err(mismatch(Chart::Phase, self.chart));
        }
        let pt = x.to_array().map(|v| Complex64::new(v, 0.0));
        Ok(self.poly.eval(&pt))
    }

    /// Evaluates a complex-chart symbol at `z`, feeding `conj(z_j)` to `zb_j`.
    pub fn eval_holomorphic_pair(&self, z: &[Complex64]) -> Result<Complex64> {
        let Chart::Complex(d) = self.chart else {
            return Err(mismatch(Chart::Complex(z.len()), self.chart));
        };
        if z.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: z.len(),
            });
        }
        let pt: Vec<Complex64> = z.iter().flat_map(|w| [*w, w.conj()]).collect();
        Ok(self.poly.eval(&pt))
    }

    /// Exchanges `z_j <-> zb_j` and conjugates coefficients.
    ///
    /// A complex-chart symbol takes real values on the diagonal `zb = conj(z)`
    /// iff it is fixed by this map.
    pub fn bar_swap(&self) -> Result<Self> {
        let Chart::Complex(d) = self.chart else {
            return Err(mismatch(Chart::Complex(2), self.chart));
        };
        let perm: Vec<usize> = (0..2 * d).map(|i| i ^ 1).collect();
        Ok(Self::from_parts(
            self.chart,
            self.poly.permute_vars(&perm).conj_coeffs(),
        ))
    }

    /// Real-valuedness: real coefficients in the phase chart, bar-swap
    /// symmetry in a complex chart (relative tolerance `tol`).
    pub fn is_real(&self, tol: f64) -> bool {
        match self.chart {
            Chart::Phase => {
                let scale = self.poly.max_abs_coeff().max(1.0);
                self.poly.terms().all(|(_, c)| c.im.abs() <= tol * scale)
            }
            Chart::Complex(_) => self
                .bar_swap()
                .map(|b| b.poly.approx_eq(&self.poly, tol))
                .unwrap_or(false),
        }
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.chart == other.chart && self.poly.approx_eq(&other.poly, tol)
    }

    pub fn pruned(&self, tol: f64) -> Self {
        Self::from_parts(self.chart, self.poly.pruned(tol))
    }

    /// Terms as `(exponents, coefficient)` in graded order.
    pub fn term_list(&self) -> Vec<(Vec<u32>, Complex64)> {
        self.poly
            .terms()
            .map(|(m, c)| (m.exps().to_vec(), *c))
            .collect()
    }
}

impl fmt::Display for PolySymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&parse::print(self))
    }
}

macro_rules! symbol_binop {
    ($tr:ident, $f:ident) => {
        /// Panics when the charts differ; see the `checked_*` methods.
        impl $tr<&PolySymbol> for &PolySymbol {
            type Output = PolySymbol;
            fn $f(self, rhs: &PolySymbol) -> PolySymbol {
                assert_eq!(self.chart, rhs.chart, "chart mismatch in symbol arithmetic");
                PolySymbol::from_parts(self.chart, (&self.poly).$f(&rhs.poly))
            }
        }
        impl $tr<PolySymbol> for PolySymbol {
            type Output = PolySymbol;
            fn $f(self, rhs: PolySymbol) -> PolySymbol {
                (&self).$f(&rhs)
            }
        }
    };
}
symbol_binop!(Add, add);
symbol_binop!(Sub, sub);
symbol_binop!(Mul, mul);

impl Neg for &PolySymbol {
    type Output = PolySymbol;
    fn neg(self) -> PolySymbol {
        PolySymbol::from_parts(self.chart, -&self.poly)
    }
}

/// `{F, G} = sum_k (dF/dq_k dG/dp_k - dF/dp_k dG/dq_k)`.
pub fn poisson_bracket(f: &PolySymbol, g: &PolySymbol) -> Result<PolySymbol> {
    for s in [f, g] {
        if s.chart != Chart::Phase {
            return Err(mismatch(Chart::Phase, s.chart));
        }
    }
    let mut out = Poly::zero(4);
    for (q, p) in [(var::Q1, var::P1), (var::Q2, var::P2)] {
        out += &(&f.poly.derivative(q, 1) * &g.poly.derivative(p, 1));
        out -= &(&f.poly.derivative(p, 1) * &g.poly.derivative(q, 1));
    }
    Ok(PolySymbol::from_parts(Chart::Phase, out))
}

/// Affine substitution `x = M y + b` from the variables `y` of `source` to
/// the variables `x` of `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearChart {
    source: Chart,
    target: Chart,
    matrix: DMatrix<Complex64>,
    offset: DVector<Complex64>,
}

impl LinearChart {
    pub fn new(
        source: Chart,
        target: Chart,
        matrix: DMatrix<Complex64>,
        offset: DVector<Complex64>,
    ) -> Result<Self> {
        let (r, c) = matrix.shape();
        if r != target.nvars() || offset.len() != target.nvars() {
            return Err(Error::DimensionMismatch {
                expected: target.nvars(),
                found: r,
            });
        }
        if c != source.nvars() {
            return Err(Error::DimensionMismatch {
                expected: source.nvars(),
                found: c,
            });
        }
        Ok(Self {
            source,
            target,
            matrix,
            offset,
        })
    }

    pub fn linear(source: Chart, target: Chart, matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = target.nvars();
        Self::new(source, target, matrix, DVector::zeros(n))
    }

    pub fn source(&self) -> Chart {
        self.source
    }
    pub fn target(&self) -> Chart {
        self.target
    }
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }
    pub fn offset(&self) -> &DVector<Complex64> {
        &self.offset
    }

    /// Images of the target variables as polynomials in the source variables.
    pub fn images(&self) -> Vec<Poly> {
        let ns = self.source.nvars();
        (0..self.target.nvars())
            .map(|k| {
                let mut p = Poly::constant(ns, self.offset[k]);
                for l in 0..ns {
                    p += &Poly::var(ns, l).scale(self.matrix[(k, l)]);
                }
                p
            })
            .collect()
    }

    /// `f` composed with this map: a symbol in the source chart.
    pub fn pullback(&self, f: &PolySymbol) -> Result<PolySymbol> {
        if f.chart != self.target {
            return Err(mismatch(self.target, f.chart));
        }
        Ok(PolySymbol::from_parts(
            self.source,
            f.poly.compose(&self.images()),
        ))
    }

    pub fn apply(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        if y.len() != self.source.nvars() {
            return Err(Error::DimensionMismatch {
                expected: self.source.nvars(),
                found: y.len(),
            });
        }
        let v = &self.matrix * DVector::from_column_slice(y) + &self.offset;
        Ok(v.iter().copied().collect())
    }

    /// The inverse map; requires a square invertible matrix.
    pub fn inverse(&self) -> Option<Self> {
        if self.source.nvars() != self.target.nvars() {
            return None;
        }
        let inv = self.matrix.clone().try_inverse()?;
        let off = -(&inv * &self.offset);
        Some(Self {
            source: self.target,
            target: self.source,
            matrix: inv,
            offset: off,
        })
    }

    /// `self` after `first`: `y -> self(first(y))`.
    pub fn after(&self, first: &LinearChart) -> Result<Self> {
        if first.target != self.source {
            return Err(mismatch(self.source, first.target));
        }
        Ok(Self {
            source: first.source,
            target: self.target,
            matrix: &self.matrix * &first.matrix,
            offset: &self.matrix * &first.offset + &self.offset,
        })
    }
}

fn cr(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Block of the pair chart `(q, p) -> (z, zb)`:
/// `z = a q + b p`, `zb = a q + conj(b) p`.
pub(crate) fn pair_to_complex(hbar: f64, s: f64) -> [[Complex64; 2]; 2] {
    let a = cr((hbar / 2.0).sqrt() / s);
    let b = Complex64::new(0.0, -s / (2.0 * hbar).sqrt());
    [[a, b], [a, b.conj()]]
}

/// Block of the inverse pair chart `(z, zb) -> (q, p)`:
/// `q = c (z + zb)`, `p = e (zb - z)` with `e = sqrt(hbar/2)/(i s)`.
pub(crate) fn complex_to_pair(hbar: f64, s: f64) -> [[Complex64; 2]; 2] {
    let c = cr(s / (2.0 * hbar).sqrt());
    let e = Complex64::new(0.0, -(hbar / 2.0).sqrt() / s);
    [[c, c], [-e, e]]
}

/// The map `iota`: complex chart (d = 2) to phase space.
pub fn iota_chart(p: &DeformationParams) -> Result<LinearChart> {
    p.require_generic()?;
    let blk = complex_to_pair(p.hbar(), p.s());
    // nc rows (q1, q2, p1, p2) from (z1, zb1, z2, zb2)
    let mut znc = DMatrix::<Complex64>::zeros(4, 4);
    for j in 0..2 {
        for k in 0..2 {
            znc[(j, 2 * j + k)] = blk[0][k];
            znc[(2 + j, 2 * j + k)] = blk[1][k];
        }
    }
    let (b, t) = (p.b(), p.t());
    let den = 1.0 - b * t;
    let mut inv = DMatrix::<Complex64>::identity(4, 4);
    inv[(1, 1)] = cr(1.0 / den);
    inv[(1, 2)] = cr(-t / den);
    inv[(2, 1)] = cr(-b / den);
    inv[(2, 2)] = cr(1.0 / den);
    LinearChart::linear(Chart::Complex(2), Chart::Phase, inv * znc)
}

/// The map `iota^{-1}`: phase space to the complex chart (d = 2).
pub fn iota_inverse_chart(p: &DeformationParams) -> Result<LinearChart> {
    p.require_generic()?;
    let blk = pair_to_complex(p.hbar(), p.s());
    let mut m = DMatrix::<Complex64>::zeros(4, 4);
    for j in 0..2 {
        for r in 0..2 {
            m[(2 * j + r, j)] = blk[r][0];
            m[(2 * j + r, 2 + j)] = blk[r][1];
        }
    }
    let nc = crate::params::nc_matrix(p).map(cr);
    let nc = DMatrix::from_iterator(4, 4, nc.iter().copied());
    LinearChart::linear(Chart::Phase, Chart::Complex(2), m * nc)
}

/// `F o iota` as a polynomial in `(z1, zb1, z2, zb2)`.
pub fn to_complex_chart(p: &DeformationParams, f: &PolySymbol) -> Result<PolySymbol> {
    iota_chart(p)?.pullback(f)
}

/// `f o iota^{-1}` as a phase-space polynomial.
pub fn from_complex_chart(p: &DeformationParams, f: &PolySymbol) -> Result<PolySymbol> {
    iota_inverse_chart(p)?.pullback(f)
}
