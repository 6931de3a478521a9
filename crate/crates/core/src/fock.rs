//! Truncated Fock spaces over `C^d` (`d = 1, 2`) with weight
//! `exp(-|z|^2/hbar) (pi hbar)^{-d}`, and Toeplitz matrices on them.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::{self, Dec17};
use crate::quadrature::GaussHermite;
use crate::symbols::{Chart, PolySymbol};

pub type CMatrix = DMatrix<Complex64>;

/// Monomials `z^alpha`, `|alpha| <= N`, in graded-lex order: by degree, and
/// within a degree by decreasing power of `z1`.
#[derive(Debug, Clone)]
pub struct FockBasis {
    d: usize,
    cutoff: usize,
    hbar: f64,
    multi: Arc<Vec<Vec<u32>>>,
    index: Arc<HashMap<Vec<u32>, usize>>,
}

impl PartialEq for FockBasis {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.cutoff == other.cutoff && self.hbar == other.hbar
    }
}

impl FockBasis {
    pub fn new(d: usize, cutoff: usize, hbar: f64) -> Result<Self> {
        if d != 1 && d != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: d,
            });
        }
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(Error::NonPositiveHbar(hbar));
        }
        let mut multi = Vec::new();
        for k in 0..=cutoff as u32 {
            if d == 1 {
                multi.push(vec![k]);
            } else {
                for a in (0..=k).rev() {
                    multi.push(vec![a, k - a]);
                }
            }
        }
        let index = multi
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        Ok(Self {
            d,
            cutoff,
            hbar,
            multi: Arc::new(multi),
            index: Arc::new(index),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }
    pub fn hbar(&self) -> f64 {
        self.hbar
    }
    pub fn dim(&self) -> usize {
        self.multi.len()
    }
    pub fn multi_index(&self, i: usize) -> &[u32] {
        &self.multi[i]
    }
    pub fn index_of(&self, alpha: &[u32]) -> Option<usize> {
        self.index.get(alpha).copied()
    }
    pub fn degree(&self, i: usize) -> u32 {
        self.multi[i].iter().sum()
    }

    /// Number of basis elements of degree `<= m`.
    pub fn dim_upto(&self, m: usize) -> usize {
        match self.d {
            1 => m + 1,
            _ => (m + 1) * (m + 2) / 2,
        }
    }

    /// `e_alpha(z) = z^alpha / sqrt(hbar^|alpha| alpha!)`.
    pub fn eval_element(&self, i: usize, z: &[Complex64]) -> Complex64 {
        let a = &self.multi[i];
        let mut v = Complex64::new(1.0, 0.0);
        for (zk, &ak) in z.iter().zip(a) {
            v *= zk.powu(ak) / (self.hbar.powi(ak as i32) * factorial(ak)).sqrt();
        }
        v
    }
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `int z^a zbar^b exp(-|z|^2/hbar) dA/(pi hbar) = delta_ab hbar^a a!`.
pub fn gaussian_moment(hbar: f64, a: u32, b: u32) -> f64 {
    if a != b {
        0.0
    } else {
        hbar.powi(a as i32) * factorial(a)
    }
}

/// Product of [`gaussian_moment`] over coordinates.
pub fn gaussian_moment_multi(hbar: f64, a: &[u32], b: &[u32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| gaussian_moment(hbar, *x, *y))
        .product()
}

/// A dense operator on a truncated Fock space; entry `(alpha, beta)` is
/// `<T e_beta, e_alpha>`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    basis: FockBasis,
    matrix: CMatrix,
}

impl TruncatedOperator {
    pub fn new(basis: FockBasis, matrix: CMatrix) -> Result<Self> {
        let n = basis.dim();
        if matrix.shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { basis, matrix })
    }

    pub fn identity(basis: &FockBasis) -> Self {
        let n = basis.dim();
        Self {
            basis: basis.clone(),
            matrix: CMatrix::identity(n, n),
        }
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch);
        }
        Ok(())
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            basis: self.basis.clone(),
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            basis: self.basis.clone(),
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            basis: self.basis.clone(),
            matrix: &self.matrix - &other.matrix,
        })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            basis: self.basis.clone(),
            matrix: self.matrix.map(|v| v * c),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            basis: self.basis.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn to_json(&self) -> String {
        io::to_json(&MatrixRecord::for_operator(self))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v = io::parse_json(text)?;
        let d = io::as_usize(io::field(&v, "d")?)?;
        let n = io::as_usize(io::field(&v, "N")?)?;
        let hbar = io::as_f64(io::field(&v, "hbar")?)?;
        let order = io::field(&v, "order")?.as_str().unwrap_or_default();
        if order != "graded-lex" {
            return Err(Error::Format(format!("unsupported basis order `{order}`")));
        }
        let re = io::as_rows(io::field(&v, "re")?)?;
        let im = io::as_rows(io::field(&v, "im")?)?;
        let basis = FockBasis::new(d, n, hbar)?;
        let dim = basis.dim();
        if re.len() != dim || im.len() != dim {
            return Err(Error::Format(format!("expected {dim} rows")));
        }
        let mut m = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            if re[i].len() != dim || im[i].len() != dim {
                return Err(Error::Format(format!("row {i} must have {dim} entries")));
            }
            for j in 0..dim {
                m[(i, j)] = Complex64::new(re[i][j], im[i][j]);
            }
        }
        Self::new(basis, m)
    }
}

/// Serialized dense matrix. The Fock fields are absent for matrices that do
/// not live on a Fock basis (Gram matrices).
#[derive(Debug, Clone, Serialize)]
pub struct MatrixRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hbar: Option<Dec17>,
    pub order: String,
    pub re: Vec<Vec<Dec17>>,
    pub im: Vec<Vec<Dec17>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_eig: Option<Dec17>,
}

impl MatrixRecord {
    pub fn from_matrix(order: &str, m: &CMatrix) -> Self {
        let rows = |f: fn(&Complex64) -> f64| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| Dec17(f(&m[(i, j)]))).collect())
                .collect()
        };
        Self {
            d: None,
            n: None,
            hbar: None,
            order: order.to_string(),
            re: rows(|c| c.re),
            im: rows(|c| c.im),
            min_eig: None,
        }
    }

    pub fn for_operator(op: &TruncatedOperator) -> Self {
        let b = op.basis();
        Self {
            d: Some(b.d()),
            n: Some(b.cutoff()),
            hbar: Some(Dec17(b.hbar())),
            ..Self::from_matrix("graded-lex", op.matrix())
        }
    }
}

fn require_chart(basis: &FockBasis, f: &PolySymbol) -> Result<()> {
    let want = Chart::Complex(basis.d());
    if f.chart() != want {
        return Err(Error::ChartMismatch {
            expected: want.describe(),
            found: f.chart().describe(),
        });
    }
    Ok(())
}

/// `T_f` for a polynomial `f` in `(z, zb)`, assembled from Gaussian moments.
///
/// The monomial `z^a zb^b` maps `e_beta` to a multiple of `e_alpha` with
/// `alpha = beta + a - b`.
pub fn toeplitz_poly(basis: &FockBasis, f: &PolySymbol) -> Result<TruncatedOperator> {
    require_chart(basis, f)?;
    let d = basis.d();
    let dim = basis.dim();
    let h = basis.hbar();
    let mut m = CMatrix::zeros(dim, dim);
    let terms = f.term_list();
    let mut alpha = vec![0u32; d];
    for col in 0..dim {
        let beta = basis.multi_index(col);
        'term: for (e, c) in &terms {
            let mut deg = 0u32;
            for k in 0..d {
                let (a, b) = (e[2 * k], e[2 * k + 1]);
                let top = beta[k] + a;
                if top < b {
                    continue 'term;
                }
                alpha[k] = top - b;
                deg += a + b;
            }
            let Some(row) = basis.index_of(&alpha) else {
                continue;
            };
            let mut v = h.powf(f64::from(deg) / 2.0);
            for k in 0..d {
                let top = beta[k] + e[2 * k];
                v *= (rising(alpha[k], top) * rising(beta[k], top)).sqrt();
            }
            m[(row, col)] += c * v;
        }
    }
    TruncatedOperator::new(basis.clone(), m)
}

/// `m! / a!` for `a <= m`.
fn rising(a: u32, m: u32) -> f64 {
    (a + 1..=m).map(f64::from).product()
}

pub const DEFAULT_NODES_D1: usize = 32;
pub const DEFAULT_NODES_D2: usize = 16;

pub fn default_nodes(d: usize) -> usize {
    if d == 1 {
        DEFAULT_NODES_D1
    } else {
        DEFAULT_NODES_D2
    }
}

/// `T_f` for a callable symbol by tensor Gauss-Hermite quadrature in the
/// real coordinates of `w = z / sqrt(hbar)`.
///
/// Exact for polynomial `f` when `nodes_per_dim` exceeds half the largest
/// total power of each real coordinate in `f e_beta conj(e_alpha)`.
pub fn toeplitz_quad<F>(basis: &FockBasis, f: F, nodes_per_dim: usize) -> Result<TruncatedOperator>
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
{
    if nodes_per_dim < 2 {
        return Err(Error::BadNodeCount {
            got: nodes_per_dim,
            min: 2,
        });
    }
    let gh = GaussHermite::new(nodes_per_dim)?;
    let d = basis.d();
    let dim = basis.dim();
    let sh = basis.hbar().sqrt();
    let n = nodes_per_dim;
    let total = n.pow(2 * d as u32);
    let inv_sqrt_fact: Vec<Vec<f64>> = (0..dim)
        .map(|i| {
            basis
                .multi_index(i)
                .iter()
                .map(|&a| 1.0 / factorial(a).sqrt())
                .collect()
        })
        .collect();
    let norm = std::f64::consts::PI.powi(-(d as i32));

    const CHUNK: usize = 1024;
    let partials: Vec<CMatrix> = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|ci| {
            let lo = ci * CHUNK;
            let hi = (lo + CHUNK).min(total);
            let rows = hi - lo;
            let mut v = CMatrix::zeros(rows, dim);
            let mut dv = CMatrix::zeros(rows, dim);
            let mut w = vec![Complex64::new(0.0, 0.0); d];
            let mut z = vec![Complex64::new(0.0, 0.0); d];
            for (r, flat) in (lo..hi).enumerate() {
                let mut rem = flat;
                let mut weight = norm;
                for k in 0..d {
                    let ix = rem % n;
                    rem /= n;
                    let iy = rem % n;
                    rem /= n;
                    w[k] = Complex64::new(gh.nodes()[ix], gh.nodes()[iy]);
                    weight *= gh.weights()[ix] * gh.weights()[iy];
                    z[k] = w[k] * sh;
                }
                let fw = f(&z) * weight;
                for col in 0..dim {
                    let a = basis.multi_index(col);
                    let mut val = Complex64::new(1.0, 0.0);
                    for k in 0..d {
                        val *= w[k].powu(a[k]) * inv_sqrt_fact[col][k];
                    }
                    v[(r, col)] = val;
                    dv[(r, col)] = val * fw;
                }
            }
            // sum_r conj(v_alpha) f v_beta
            v.adjoint() * dv
        })
        .collect();
    let mut m = CMatrix::zeros(dim, dim);
    for p in &partials {
        m += p;
    }
    TruncatedOperator::new(basis.clone(), m)
}

/// Square restriction to rows and columns of degree `<= m`.
pub fn interior_block(op: &TruncatedOperator, m: usize) -> Result<TruncatedOperator> {
    let b = op.basis();
    if m > b.cutoff() {
        return Err(Error::BadCutoff(format!(
            "interior degree {m} exceeds cutoff {}",
            b.cutoff()
        )));
    }
    let k = b.dim_upto(m);
    let basis = FockBasis::new(b.d(), m, b.hbar())?;
    TruncatedOperator::new(basis, op.matrix().view((0, 0), (k, k)).into_owned())
}

/// All rows, columns of degree `<= m`.
pub fn interior_columns(op: &TruncatedOperator, m: usize) -> Result<CMatrix> {
    let b = op.basis();
    if m > b.cutoff() {
        return Err(Error::BadCutoff(format!(
            "interior degree {m} exceeds cutoff {}",
            b.cutoff()
        )));
    }
    let k = b.dim_upto(m);
    Ok(op.matrix().columns(0, k).into_owned())
}

/// Largest singular value by power iteration on `A^H A`.
///
/// Stops once the Rayleigh quotient changes by less than `1e-12` relative
/// for three consecutive steps.
pub fn spectral_norm(a: &CMatrix) -> f64 {
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return 0.0;
    }
    let scale = a.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let a = a / Complex64::new(scale, 0.0);
    let g = a.adjoint() * &a;
    let mut v = nalgebra::DVector::from_fn(n, |i, _| {
        Complex64::new(1.0 + 1.0 / (i as f64 + 2.0), 0.3 / (i as f64 + 1.0))
    });
    v /= Complex64::new(v.norm(), 0.0);
    let mut lambda = 0.0f64;
    let mut calm = 0;
    for _ in 0..20_000 {
        let w = &g * &v;
        let next = v.dotc(&w).re;
        let wn = w.norm();
        if wn == 0.0 {
            return 0.0;
        }
        v = w / Complex64::new(wn, 0.0);
        if (next - lambda).abs() <= 1e-12 * next.abs() {
            calm += 1;
            if calm >= 3 {
                lambda = next;
                break;
            }
        } else {
            calm = 0;
        }
        lambda = next;
    }
    scale * lambda.max(0.0).sqrt()
}

pub fn operator_norm(op: &TruncatedOperator) -> f64 {
    spectral_norm(op.matrix())
}

/// Eigenvalues of the Hermitian part `(A + A^H)/2`, ascending.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let h = (a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::parse_symbol;

    fn approx(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        (a - b).iter().all(|c| c.norm() <= tol)
    }

    #[test]
    fn basis_layout() {
        let b = FockBasis::new(2, 2, 1.0).unwrap();
        assert_eq!(b.dim(), 6);
        let order: Vec<&[u32]> = (0..6).map(|i| b.multi_index(i)).collect();
        assert_eq!(
            order,
            vec![&[0, 0][..], &[1, 0], &[0, 1], &[2, 0], &[1, 1], &[0, 2]]
        );
        assert_eq!(FockBasis::new(1, 7, 1.0).unwrap().dim(), 8);
        assert!(FockBasis::new(3, 2, 1.0).is_err());
    }

    #[test]
    fn moment_examples() {
        assert_eq!(gaussian_moment(1.0, 0, 0), 1.0);
        assert_eq!(gaussian_moment(1.0, 1, 2), 0.0);
        assert_eq!(gaussian_moment(0.5, 3, 3), 0.75);
    }

    #[test]
    fn toeplitz_of_constant_and_number() {
        let b = FockBasis::new(1, 6, 0.7).unwrap();
        let one = toeplitz_poly(&b, &parse_symbol("q1").unwrap()).unwrap_err();
        assert!(matches!(one, Error::ChartMismatch { .. }));
        let one = crate::symbols::parse_symbol_in("1", Chart::Complex(1)).unwrap();
        let t = toeplitz_poly(&b, &one).unwrap();
        assert_eq!(t.matrix(), &CMatrix::identity(7, 7));
        let t = toeplitz_poly(&b, &parse_symbol("z*zb").unwrap()).unwrap();
        for n in 0..7 {
            assert!((t.matrix()[(n, n)].re - 0.7 * (n as f64 + 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn creation_annihilation_commutator() {
        let h = 0.3;
        let b = FockBasis::new(1, 8, h).unwrap();
        let tz = toeplitz_poly(&b, &parse_symbol("z").unwrap()).unwrap();
        let tzb = toeplitz_poly(&b, &parse_symbol("zb").unwrap()).unwrap();
        let c = tz
            .compose(&tzb)
            .unwrap()
            .sub(&tzb.compose(&tz).unwrap())
            .unwrap();
        let inner = interior_block(&c, 7).unwrap();
        let expect = CMatrix::identity(8, 8) * Complex64::new(-h, 0.0);
        assert!(approx(inner.matrix(), &expect, 1e-14));
        // zb acts as hbar d/dz
        for n in 1..9 {
            assert!((tzb.matrix()[(n - 1, n)].re - (h * n as f64).sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn quadrature_matches_polynomial_path() {
        let b = FockBasis::new(1, 8, 0.6).unwrap();
        let f = parse_symbol("z*zb").unwrap();
        let exact = toeplitz_poly(&b, &f).unwrap();
        let q = toeplitz_quad(&b, |z| z[0].norm_sqr().into(), 20).unwrap();
        assert!(approx(q.matrix(), exact.matrix(), 1e-12));
        let b2 = FockBasis::new(2, 4, 1.3).unwrap();
        let f2 = parse_symbol("z1*zb2 + 2*zb1^2 - i*z2*zb2").unwrap();
        let exact = toeplitz_poly(&b2, &f2).unwrap();
        let q = toeplitz_quad(&b2, |z| f2.eval_holomorphic_pair(z).unwrap(), 10).unwrap();
        assert!(approx(q.matrix(), exact.matrix(), 1e-11));
        assert!(matches!(
            toeplitz_quad(&b, |_| 1.0.into(), 1),
            Err(Error::BadNodeCount { .. })
        ));
    }

    #[test]
    fn gaussian_symbol_diagonal() {
        // <T e_n, e_n> for exp(-|z|^2) is (1 + hbar)^{-(n+1)}
        let h = 0.5;
        let b = FockBasis::new(1, 6, h).unwrap();
        let g = |z: &[Complex64]| Complex64::new((-z[0].norm_sqr()).exp(), 0.0);
        let a = toeplitz_quad(&b, g, 40).unwrap();
        let c = toeplitz_quad(&b, g, 60).unwrap();
        for n in 0..7 {
            let want = (1.0 + h).powi(-(n as i32 + 1));
            assert!((a.matrix()[(n, n)].re - c.matrix()[(n, n)].re).abs() < 1e-10);
            assert!((a.matrix()[(n, n)].re - want).abs() < 1e-10);
        }
    }

    #[test]
    fn norms() {
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(3.0, 0.0),
        ]));
        assert!((spectral_norm(&d) - 3.0).abs() < 1e-12);
        assert_eq!(spectral_norm(&CMatrix::zeros(3, 3)), 0.0);
        let b = FockBasis::new(2, 3, 1.0).unwrap();
        let id = TruncatedOperator::identity(&b);
        assert_eq!(
            interior_block(&id, 1).unwrap().matrix(),
            &CMatrix::identity(3, 3)
        );
        assert!(matches!(interior_block(&id, 4), Err(Error::BadCutoff(_))));
    }

    #[test]
    fn json_round_trip() {
        let b = FockBasis::new(2, 2, 0.1).unwrap();
        let f = parse_symbol("(0.1 + 0.2*i)*z1*zb2 + zb1 / 1").unwrap_err();
        assert!(matches!(f, Error::SyntaxError { .. }));
        let f = parse_symbol("(0.1 + 0.2*i)*z1*zb2 + zb1").unwrap();
        let t = toeplitz_poly(&b, &f).unwrap();
        let back = TruncatedOperator::from_json(&t.to_json()).unwrap();
        assert_eq!(back, t);
    }
}
