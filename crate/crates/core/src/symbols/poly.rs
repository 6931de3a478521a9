//! Sparse multivariate polynomials with complex coefficients.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

/// Exponent vector of a monomial.
///
/// Ordered by total degree first, then so that higher powers of earlier
/// variables come first (`x0^2 < x0 x1 < x1^2` within degree two).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial(exps)
    }
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }
    pub fn exps(&self) -> &[u32] {
        &self.0
    }
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
    pub fn degree_in(&self, vars: &[usize]) -> u32 {
        vars.iter().map(|&v| self.0[v]).sum()
    }
    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, Complex64>,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Complex64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, ONE)
    }

    pub fn var(nvars: usize, index: usize) -> Self {
        assert!(
            index < nvars,
            "variable {index} out of range for {nvars} variables"
        );
        let mut e = vec![0; nvars];
        e[index] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(Monomial(e), ONE);
        p
    }

    pub fn from_terms<I>(nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, Complex64)>,
    {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length mismatch");
            p.add_term(Monomial(e), c);
        }
        p
    }

    /// Adds `c * m`, dropping the term when it cancels exactly.
    pub fn add_term(&mut self, m: Monomial, c: Complex64) {
        debug_assert_eq!(m.0.len(), self.nvars);
        if c == ZERO {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v += c;
                if *v == ZERO {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }
    pub fn len(&self) -> usize {
        self.terms.len()
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Complex64)> {
        self.terms.iter()
    }
    pub fn coeff(&self, exps: &[u32]) -> Complex64 {
        self.terms
            .get(&Monomial(exps.to_vec()))
            .copied()
            .unwrap_or(ZERO)
    }

    /// Total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn degree_in(&self, vars: &[usize]) -> Option<u32> {
        self.terms.keys().map(|m| m.degree_in(vars)).max()
    }

    pub fn scale(&self, c: Complex64) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v * c);
        }
        out
    }

    pub fn map_coeffs(&self, f: impl Fn(Complex64) -> Complex64) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m, v) in &self.terms {
            out.add_term(m.clone(), f(*v));
        }
        out
    }

    pub fn conj_coeffs(&self) -> Poly {
        self.map_coeffs(|c| c.conj())
    }

    /// Permutes variables: variable `i` becomes variable `perm[i]`.
    pub fn permute_vars(&self, perm: &[usize]) -> Poly {
        assert_eq!(perm.len(), self.nvars);
        let mut out = Poly::zero(self.nvars);
        for (m, v) in &self.terms {
            let mut e = vec![0; self.nvars];
            for (i, &k) in m.0.iter().enumerate() {
                e[perm[i]] = k;
            }
            out.add_term(Monomial(e), *v);
        }
        out
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one(self.nvars);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// `order`-th partial derivative in variable `var`.
    pub fn derivative(&self, var: usize, order: u32) -> Poly {
        assert!(var < self.nvars);
        let mut out = Poly::zero(self.nvars);
        for (m, v) in &self.terms {
            let e = m.0[var];
            if e < order {
                continue;
            }
            let mut factor = 1.0;
            for k in 0..order {
                factor *= f64::from(e - k);
            }
            let mut ne = m.0.clone();
            ne[var] -= order;
            out.add_term(Monomial(ne), v * factor);
        }
        out
    }

    /// Substitutes `images[i]` for variable `i`; all images share one variable count.
    pub fn compose(&self, images: &[Poly]) -> Poly {
        assert_eq!(images.len(), self.nvars, "one image per variable");
        let target = images.first().map_or(0, Poly::nvars);
        assert!(images.iter().all(|p| p.nvars == target));
        // powers[i][k] = images[i]^k, built lazily up to the needed exponent
        let mut max_exp = vec![0u32; self.nvars];
        for m in self.terms.keys() {
            for (i, &e) in m.0.iter().enumerate() {
                max_exp[i] = max_exp[i].max(e);
            }
        }
        let powers: Vec<Vec<Poly>> = images
            .iter()
            .zip(&max_exp)
            .map(|(img, &k)| {
                let mut v = vec![Poly::one(target)];
                for j in 0..k as usize {
                    let next = &v[j] * img;
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = Poly::zero(target);
        for (m, c) in &self.terms {
            let mut t = Poly::constant(target, *c);
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t = &t * &powers[i][e as usize];
                }
            }
            out += &t;
        }
        out
    }

    pub fn eval(&self, point: &[Complex64]) -> Complex64 {
        assert_eq!(point.len(), self.nvars);
        let mut acc = ZERO;
        for (m, c) in &self.terms {
            let mut t = *c;
            for (x, &e) in point.iter().zip(&m.0) {
                if e > 0 {
                    t *= x.powu(e);
                }
            }
            acc += t;
        }
        acc
    }

    /// Drops every term whose degree in `vars` exceeds `max_degree`.
    pub fn truncate(&self, vars: &[usize], max_degree: u32) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree_in(vars) <= max_degree)
                .map(|(m, c)| (m.clone(), *c))
                .collect(),
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Coefficientwise comparison: `max |a - b| <= tol * max(1, max |a|, max |b|)`.
    pub fn approx_eq(&self, other: &Poly, tol: f64) -> bool {
        if self.nvars != other.nvars {
            return false;
        }
        let scale = 1f64.max(self.max_abs_coeff()).max(other.max_abs_coeff());
        (self - other).max_abs_coeff() <= tol * scale
    }

    /// Removes terms with `|c| <= tol * max |c|`.
    pub fn pruned(&self, tol: f64) -> Poly {
        let cut = tol * self.max_abs_coeff();
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.norm() > cut)
                .map(|(m, c)| (m.clone(), *c))
                .collect(),
        }
    }
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), *c);
        }
    }
}

impl SubAssign<&Poly> for Poly {
    fn sub_assign(&mut self, rhs: &Poly) {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c);
        }
    }
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.map_coeffs(|c| -c)
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = Poly::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr<Poly> for Poly {
            type Output = Poly;
            fn $f(self, rhs: Poly) -> Poly {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&Poly> for Poly {
            type Output = Poly;
            fn $f(self, rhs: &Poly) -> Poly {
                (&self).$f(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn cancellation_removes_terms() {
        let x = Poly::var(2, 0);
        let d = &x - &x;
        assert!(d.is_zero());
        assert_eq!(d.degree(), None);
    }

    #[test]
    fn derivative_and_power() {
        // d^2/dx^2 x^3 = 6x
        let x3 = Poly::var(1, 0).pow(3);
        let d2 = x3.derivative(0, 2);
        assert_eq!(d2, Poly::var(1, 0).scale(c(6.0)));
        assert!(Poly::constant(1, c(4.0)).derivative(0, 1).is_zero());
    }

    #[test]
    fn compose_binomial() {
        // x^2 with x -> y + 1 gives y^2 + 2y + 1
        let sq = Poly::var(1, 0).pow(2);
        let img = &Poly::var(1, 0) + &Poly::one(1);
        let out = sq.compose(&[img]);
        assert_eq!(out.coeff(&[2]), c(1.0));
        assert_eq!(out.coeff(&[1]), c(2.0));
        assert_eq!(out.coeff(&[0]), c(1.0));
    }

    #[test]
    fn graded_order() {
        let mut keys: Vec<Monomial> = vec![
            Monomial::new(vec![0, 2]),
            Monomial::new(vec![1, 0]),
            Monomial::new(vec![2, 0]),
            Monomial::new(vec![0, 0]),
            Monomial::new(vec![1, 1]),
        ];
        keys.sort();
        let e: Vec<&[u32]> = keys.iter().map(Monomial::exps).collect();
        assert_eq!(e, vec![&[0, 0][..], &[1, 0], &[2, 0], &[1, 1], &[0, 2]]);
    }

    #[test]
    fn truncation_by_subset_degree() {
        let x = Poly::var(3, 0);
        let b = Poly::var(3, 1);
        let t = Poly::var(3, 2);
        let p = &(&x * &b) + &(&(&x * &b) * &t);
        let tr = p.truncate(&[1, 2], 1);
        assert_eq!(tr, &x * &b);
    }
}
