//! Deformation parameters and the coordinate changes between phase space,
//! noncommutative (NC) coordinates and the complex Fock chart.
//!
//! Phase-space points are ordered `(q1, q2, p1, p2)` throughout the crate.

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative width of the band around `hbar^2 = calB*theta` inside which a
/// parameter triple is refused rather than classified.
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Generic,
    Degenerate,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Generic => "generic",
            Kind::Degenerate => "degenerate",
        }
    }
}

/// The triple `(hbar, theta, calB)` together with the Gaussian width `s`.
///
/// Renormalized quantities `B = calB/hbar`, `T = theta/hbar` and
/// `S = s/sqrt(hbar)` are derived on demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformationParams {
    hbar: f64,
    theta: f64,
    calb: f64,
    s: f64,
    kind: Kind,
}

impl DeformationParams {
    pub fn new(hbar: f64, theta: f64, calb: f64, s: f64) -> Result<Self> {
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(Error::NonPositiveHbar(hbar));
        }
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::NonPositiveWidth(s));
        }
        let kind = classify(hbar, theta, calb)?;
        Ok(Self {
            hbar,
            theta,
            calb,
            s,
            kind,
        })
    }

    /// Uses `s = sqrt(hbar)`, i.e. `S = 1`.
    pub fn with_default_width(hbar: f64, theta: f64, calb: f64) -> Result<Self> {
        Self::new(hbar, theta, calb, hbar.max(0.0).sqrt())
    }

    /// Builds the parameters from `hbar` and the renormalized `(B, T, S)`.
    pub fn from_renormalized(hbar: f64, b: f64, t: f64, s_ratio: f64) -> Result<Self> {
        Self::new(hbar, t * hbar, b * hbar, s_ratio * hbar.max(0.0).sqrt())
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn calb(&self) -> f64 {
        self.calb
    }
    pub fn s(&self) -> f64 {
        self.s
    }
    pub fn kind(&self) -> Kind {
        self.kind
    }
    pub fn is_generic(&self) -> bool {
        self.kind == Kind::Generic
    }

    /// `B = calB / hbar`.
    pub fn b(&self) -> f64 {
        self.calb / self.hbar
    }
    /// `T = theta / hbar`.
    pub fn t(&self) -> f64 {
        self.theta / self.hbar
    }
    /// `S = s / sqrt(hbar)`.
    pub fn s_ratio(&self) -> f64 {
        self.s / self.hbar.sqrt()
    }

    /// `hbar^2 - calB*theta`; nonzero exactly for generic parameters.
    pub fn det_factor(&self) -> f64 {
        self.hbar * self.hbar - self.calb * self.theta
    }

    pub fn require_generic(&self) -> Result<()> {
        match self.kind {
            Kind::Generic => Ok(()),
            Kind::Degenerate => Err(Error::DegenerateParams),
        }
    }

    /// Same `(hbar, theta, calB)` with a different width.
    pub fn with_width(&self, s: f64) -> Result<Self> {
        Self::new(self.hbar, self.theta, self.calb, s)
    }

    /// Converts degenerate parameters into the data needed by the
    /// degenerate coherent states (Dirac measure at the origin by default).
    pub fn to_degenerate(&self, kappa: f64, delta: f64) -> Result<DegenerateParams> {
        if self.kind != Kind::Degenerate {
            return Err(Error::KindMismatch(
                "degenerate data requested from generic parameters",
            ));
        }
        DegenerateParams::new(self.hbar, self.theta, kappa, delta, self.s)
    }
}

fn classify(hbar: f64, theta: f64, calb: f64) -> Result<Kind> {
    let h2 = hbar * hbar;
    let bt = calb * theta;
    let gap = h2 - bt;
    if gap == 0.0 {
        // hbar > 0 forces theta != 0 here.
        return Ok(Kind::Degenerate);
    }
    if gap.abs() <= DEGENERACY_TOLERANCE * h2.max(bt.abs()) {
        return Err(Error::AmbiguouslyDegenerate { gap });
    }
    Ok(Kind::Generic)
}

/// Alias for [`DeformationParams::new`].
pub fn make_params(hbar: f64, theta: f64, calb: f64, s: f64) -> Result<DeformationParams> {
    DeformationParams::new(hbar, theta, calb, s)
}

/// Labels `(rho, sigma, tau)` of a unitary irreducible representation and the
/// central-extension constants `(alpha, beta, gamma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupParams {
    pub rho: f64,
    pub sigma: f64,
    pub tau: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformationTriple {
    pub hbar: f64,
    pub theta: f64,
    pub calb: f64,
}

pub fn from_group_params(g: &GroupParams) -> Result<DeformationTriple> {
    let ra = g.rho * g.alpha;
    if ra == 0.0 {
        return Err(Error::DegenerateLabel);
    }
    Ok(DeformationTriple {
        hbar: 1.0 / ra,
        theta: -g.sigma * g.beta / (ra * ra),
        calb: -g.tau * g.gamma / (ra * ra),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhasePoint {
    pub q1: f64,
    pub q2: f64,
    pub p1: f64,
    pub p2: f64,
}

impl PhasePoint {
    pub const fn new(q1: f64, q2: f64, p1: f64, p2: f64) -> Self {
        Self { q1, q2, p1, p2 }
    }
    pub fn to_array(self) -> [f64; 4] {
        [self.q1, self.q2, self.p1, self.p2]
    }
    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }
}

impl From<[f64; 4]> for PhasePoint {
    fn from(a: [f64; 4]) -> Self {
        Self::from_array(a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NcCoords {
    pub q1: f64,
    pub q2: f64,
    pub p1: f64,
    pub p2: f64,
}

impl NcCoords {
    pub const fn new(q1: f64, q2: f64, p1: f64, p2: f64) -> Self {
        Self { q1, q2, p1, p2 }
    }
    pub fn to_array(self) -> [f64; 4] {
        [self.q1, self.q2, self.p1, self.p2]
    }
}

/// A point of `C^d` in the Fock chart (`d = 2` generic, `d = 1` degenerate).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPoint {
    pub z: Vec<Complex64>,
}

impl ComplexPoint {
    pub fn new(z: Vec<Complex64>) -> Self {
        Self { z }
    }
    pub fn dim(&self) -> usize {
        self.z.len()
    }
    pub fn norm_sqr(&self) -> f64 {
        self.z.iter().map(|z| z.norm_sqr()).sum()
    }
    /// `<z, w> = sum_j z_j conj(w_j)`.
    pub fn inner(&self, other: &ComplexPoint) -> Complex64 {
        self.z.iter().zip(&other.z).map(|(a, b)| a * b.conj()).sum()
    }
}

/// `q2 -> q2 + T p1`, `p1 -> p1 + B q2`; linear, bijective iff generic.
pub fn to_nc_coords(p: &DeformationParams, x: &PhasePoint) -> NcCoords {
    NcCoords {
        q1: x.q1,
        q2: x.q2 + p.t() * x.p1,
        p1: x.p1 + p.b() * x.q2,
        p2: x.p2,
    }
}

pub fn from_nc_coords(p: &DeformationParams, nc: &NcCoords) -> Result<PhasePoint> {
    p.require_generic()?;
    let (b, t) = (p.b(), p.t());
    let den = 1.0 - b * t;
    Ok(PhasePoint {
        q1: nc.q1,
        q2: (nc.q2 - t * nc.p1) / den,
        p1: (nc.p1 - b * nc.q2) / den,
        p2: nc.p2,
    })
}

/// Matrix of [`to_nc_coords`] acting on `(q1, q2, p1, p2)`.
pub fn nc_matrix(p: &DeformationParams) -> Matrix4<f64> {
    let (b, t) = (p.b(), p.t());
    #[rustfmt::skip]
    let m = Matrix4::new(
        1.0, 0.0, 0.0, 0.0,
        0.0, 1.0, t,   0.0,
        0.0, b,   1.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
    );
    m
}

/// `z = sqrt(hbar/2) q / s - i s p / sqrt(2 hbar)` for one conjugate pair.
pub fn complex_coordinate(hbar: f64, s: f64, q: f64, p: f64) -> Complex64 {
    Complex64::new((hbar / 2.0).sqrt() * q / s, -s * p / (2.0 * hbar).sqrt())
}

/// Inverse of [`complex_coordinate`]: `(q, p)` from `z`.
pub fn real_coordinates(hbar: f64, s: f64, z: Complex64) -> (f64, f64) {
    // q = s/sqrt(2 hbar) (z + zbar), p = sqrt(hbar/2)/(i s) (zbar - z)
    let q = s / (2.0 * hbar).sqrt() * 2.0 * z.re;
    let p = (hbar / 2.0).sqrt() / s * (-2.0 * z.im);
    (q, p)
}

pub fn complexify(p: &DeformationParams, nc: &NcCoords) -> ComplexPoint {
    ComplexPoint::new(vec![
        complex_coordinate(p.hbar, p.s, nc.q1, nc.p1),
        complex_coordinate(p.hbar, p.s, nc.q2, nc.p2),
    ])
}

pub fn decomplexify(p: &DeformationParams, z: &ComplexPoint) -> Result<NcCoords> {
    if z.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: z.dim(),
        });
    }
    let (q1, p1) = real_coordinates(p.hbar, p.s, z.z[0]);
    let (q2, p2) = real_coordinates(p.hbar, p.s, z.z[1]);
    Ok(NcCoords::new(q1, q2, p1, p2))
}

/// The map from the Fock chart back to phase space.
pub fn iota(p: &DeformationParams, z: &ComplexPoint) -> Result<PhasePoint> {
    p.require_generic()?;
    let nc = decomplexify(p, z)?;
    let (h, th, cb) = (p.hbar, p.theta, p.calb);
    let den = p.det_factor();
    Ok(PhasePoint {
        q1: nc.q1,
        q2: (h * h * nc.q2 - h * th * nc.p1) / den,
        p1: (h * h * nc.p1 - h * cb * nc.q2) / den,
        p2: nc.p2,
    })
}

/// The 4x4 matrix `omega^NC` pairing NC coordinates with the generators.
pub fn omega_nc(p: &DeformationParams) -> Result<Matrix4<f64>> {
    p.require_generic()?;
    // renormalized form keeps both limits exact in floating point
    let (b, t) = (p.b(), p.t());
    let d = 1.0 - b * t;
    #[rustfmt::skip]
    let m = Matrix4::new(
        0.0,        0.0, -1.0, 0.0,
        -b / d,     0.0, 0.0,  -1.0 / d,
        1.0 / d,    0.0, 0.0,  t / d,
        0.0,        1.0, 0.0,  0.0,
    );
    Ok(m)
}

/// The three antisymmetric bilinear local exponents on `R^4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalExponents {
    /// `1/2 (q.p' - p.q')`
    pub xi: f64,
    /// `1/2 (p1 p2' - p2 p1')`
    pub xi_p: f64,
    /// `1/2 (q1 q2' - q2 q1')`
    pub xi_q: f64,
}

pub fn local_exponents(x: &PhasePoint, y: &PhasePoint) -> LocalExponents {
    LocalExponents {
        xi: 0.5 * (x.q1 * y.p1 + x.q2 * y.p2 - x.p1 * y.q1 - x.p2 * y.q2),
        xi_p: 0.5 * (x.p1 * y.p2 - x.p2 * y.p1),
        xi_q: 0.5 * (x.q1 * y.q2 - x.q2 * y.q1),
    }
}

/// Probability measure on the `(q2, p2)` plane entering the degenerate
/// resolution of the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measure {
    /// Point mass at the base point.
    Dirac,
    /// Independent Gaussians in `q2` and `p2`.
    ProductGaussian { mean: [f64; 2], std: [f64; 2] },
}

/// Data of the degenerate family `hbar^2 = calB*theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegenerateParams {
    hbar: f64,
    theta: f64,
    kappa: f64,
    delta: f64,
    s: f64,
    base_point: (f64, f64),
    measure: Measure,
}

impl DegenerateParams {
    pub fn new(hbar: f64, theta: f64, kappa: f64, delta: f64, s: f64) -> Result<Self> {
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(Error::NonPositiveHbar(hbar));
        }
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::NonPositiveWidth(s));
        }
        if theta == 0.0 || !theta.is_finite() {
            return Err(Error::ZeroTheta);
        }
        Ok(Self {
            hbar,
            theta,
            kappa,
            delta,
            s,
            base_point: (0.0, 0.0),
            measure: Measure::Dirac,
        })
    }

    pub fn with_base_point(mut self, q2: f64, p2: f64) -> Self {
        self.base_point = (q2, p2);
        self
    }

    pub fn with_measure(mut self, measure: Measure) -> Self {
        self.measure = measure;
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Result<Self> {
        if theta == 0.0 || !theta.is_finite() {
            return Err(Error::ZeroTheta);
        }
        self.theta = theta;
        Ok(self)
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    /// Implied `calB = hbar^2 / theta`.
    pub fn calb(&self) -> f64 {
        self.hbar * self.hbar / self.theta
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn s(&self) -> f64 {
        self.s
    }
    pub fn base_point(&self) -> (f64, f64) {
        self.base_point
    }
    pub fn measure(&self) -> Measure {
        self.measure
    }
    pub fn require_dirac(&self) -> Result<()> {
        match self.measure {
            Measure::Dirac => Ok(()),
            _ => Err(Error::NonDiracMeasure),
        }
    }

    /// Degenerate change of variables:
    /// `q1 - (theta/hbar) p2, q2, p1 + (hbar/theta) q2 + 2 kappa hbar, p2`.
    pub fn to_nc_coords(&self, x: &PhasePoint) -> NcCoords {
        NcCoords {
            q1: x.q1 - self.theta / self.hbar * x.p2,
            q2: x.q2,
            p1: x.p1 + self.hbar / self.theta * x.q2 + 2.0 * self.kappa * self.hbar,
            p2: x.p2,
        }
    }

    /// Phase-space point with the given `(q1^NC, p1^NC)` lying over `(q2, p2)`.
    pub fn from_nc_coords(&self, q1nc: f64, p1nc: f64, q2: f64, p2: f64) -> PhasePoint {
        PhasePoint {
            q1: q1nc + self.theta / self.hbar * p2,
            q2,
            p1: p1nc - self.hbar / self.theta * q2 - 2.0 * self.kappa * self.hbar,
            p2,
        }
    }

    /// The single complex coordinate of the degenerate Fock chart.
    pub fn complexify(&self, x: &PhasePoint) -> Complex64 {
        let nc = self.to_nc_coords(x);
        complex_coordinate(self.hbar, self.s, nc.q1, nc.p1)
    }

    /// Unimodular prefactor `exp(i delta q2 + i kappa theta p2 / hbar)`.
    pub fn phase_prefactor(&self, x: &PhasePoint) -> Complex64 {
        Complex64::from_polar(
            1.0,
            self.delta * x.q2 + self.kappa * self.theta * x.p2 / self.hbar,
        )
    }
}

/// Either parameter family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamSet {
    Generic(DeformationParams),
    Degenerate(DegenerateParams),
}

impl ParamSet {
    pub fn kind_str(&self) -> &'static str {
        match self {
            ParamSet::Generic(_) => "generic",
            ParamSet::Degenerate(_) => "degenerate",
        }
    }

    pub fn hbar(&self) -> f64 {
        match self {
            ParamSet::Generic(p) => p.hbar(),
            ParamSet::Degenerate(d) => d.hbar(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn zero_deformation_is_generic() {
        let p = make_params(1.0, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(p.kind(), Kind::Generic);
        assert_eq!((p.b(), p.t(), p.s_ratio()), (0.0, 0.0, 1.0));
    }

    #[test]
    fn exact_product_is_degenerate() {
        let p = make_params(1.0, 0.5, 2.0, 1.0).unwrap();
        assert_eq!(p.kind(), Kind::Degenerate);
        assert_eq!((p.b(), p.t()), (2.0, 0.5));
        assert!(p.require_generic().is_err());
    }

    #[test]
    fn renormalized_values() {
        let p = make_params(2.0, 0.1, 0.3, 1.0).unwrap();
        assert_eq!(p.kind(), Kind::Generic);
        assert!(close(p.b(), 0.15, 1e-15));
        assert!(close(p.t(), 0.05, 1e-15));
        assert!(close(p.s_ratio(), 1.0 / 2f64.sqrt(), 1e-15));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(
            make_params(0.0, 0.0, 0.0, 1.0),
            Err(Error::NonPositiveHbar(0.0))
        );
        assert_eq!(
            make_params(1.0, 0.0, 0.0, -1.0),
            Err(Error::NonPositiveWidth(-1.0))
        );
        let near = make_params(1.0, 0.5, 2.0 * (1.0 + 1e-14), 1.0);
        assert!(matches!(near, Err(Error::AmbiguouslyDegenerate { .. })));
    }

    #[test]
    fn group_parameter_conversion() {
        let g = |rho, sigma, tau| GroupParams {
            rho,
            sigma,
            tau,
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
        };
        let t = from_group_params(&g(1.0, 0.0, 0.0)).unwrap();
        assert_eq!((t.hbar, t.theta, t.calb), (1.0, 0.0, 0.0));
        let t = from_group_params(&g(1.0, -1.0, -1.0)).unwrap();
        assert_eq!((t.hbar, t.theta, t.calb), (1.0, 1.0, 1.0));
        let p = make_params(t.hbar, t.theta, t.calb, 1.0).unwrap();
        assert_eq!(p.kind(), Kind::Degenerate);
        let t = from_group_params(&g(2.0, -4.0, 0.0)).unwrap();
        assert_eq!((t.hbar, t.theta, t.calb), (0.5, 1.0, 0.0));
        assert_eq!(
            from_group_params(&g(0.0, 1.0, 1.0)),
            Err(Error::DegenerateLabel)
        );
    }

    #[test]
    fn nc_coordinates() {
        let p = make_params(1.0, 0.0, 0.0, 1.0).unwrap();
        let x = PhasePoint::new(1.0, 2.0, 3.0, 4.0);
        assert_eq!(to_nc_coords(&p, &x).to_array(), x.to_array());
        let p = make_params(1.0, 0.1, 0.2, 1.0).unwrap();
        let nc = to_nc_coords(&p, &x);
        let expect = [1.0, 2.3, 3.4, 4.0];
        for (a, b) in nc.to_array().iter().zip(expect) {
            assert!(close(*a, b, 1e-15));
        }
        let back = from_nc_coords(&p, &nc).unwrap();
        for (a, b) in back.to_array().iter().zip(x.to_array()) {
            assert!(close(*a, b, 1e-15));
        }
    }

    #[test]
    fn nc_determinant_matches_jacobian() {
        let p = make_params(1.3, 0.4, -0.7, 1.0).unwrap();
        let det = nc_matrix(&p).determinant();
        assert!(close(det, p.det_factor() / (p.hbar() * p.hbar()), 1e-14));
    }

    #[test]
    fn complexify_examples() {
        let p = make_params(1.0, 0.0, 0.0, 1.0).unwrap();
        let z = complexify(&p, &NcCoords::default());
        assert_eq!(z.z, vec![Complex64::new(0.0, 0.0); 2]);
        let z = complexify(&p, &NcCoords::new(2f64.sqrt(), 0.0, 0.0, 0.0));
        assert!((z.z[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(z.z[1], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn iota_rejects_degenerate() {
        let p = make_params(1.0, 0.5, 2.0, 1.0).unwrap();
        let z = ComplexPoint::new(vec![Complex64::new(0.0, 0.0); 2]);
        assert_eq!(iota(&p, &z), Err(Error::DegenerateParams));
    }

    #[test]
    fn omega_limits() {
        let canonical = Matrix4::new(
            0.0, 0.0, -1.0, 0.0, //
            0.0, 0.0, 0.0, -1.0, //
            1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0,
        );
        let p = make_params(1.0, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(omega_nc(&p).unwrap(), canonical);

        let (h, th) = (0.7, 0.3);
        let p = make_params(h, th, 0.0, 1.0).unwrap();
        let mut b0 = canonical;
        b0[(2, 3)] = th / h;
        assert_eq!(omega_nc(&p).unwrap(), b0);

        let cb = 0.4;
        let p = make_params(h, 0.0, cb, 1.0).unwrap();
        let mut t0 = canonical;
        t0[(1, 0)] = -cb / h;
        assert_eq!(omega_nc(&p).unwrap(), t0);

        let p = make_params(1.0, 0.5, 0.5, 1.0).unwrap();
        assert!(close(omega_nc(&p).unwrap()[(1, 0)], -2.0 / 3.0, 1e-15));
    }

    #[test]
    fn local_exponent_examples() {
        let x = PhasePoint::new(1.0, 0.0, 0.0, 0.0);
        let y = PhasePoint::new(0.0, 0.0, 1.0, 0.0);
        let e = local_exponents(&x, &y);
        assert_eq!((e.xi, e.xi_p, e.xi_q), (0.5, 0.0, 0.0));
        let e = local_exponents(&x, &x);
        assert_eq!((e.xi, e.xi_p, e.xi_q), (0.0, 0.0, 0.0));
    }

    #[test]
    fn degenerate_coordinates_round_trip() {
        let dp = DegenerateParams::new(0.8, 0.6, 0.3, -0.4, 1.1).unwrap();
        assert!(close(dp.calb(), 0.64 / 0.6, 1e-15));
        let x = PhasePoint::new(0.3, -0.2, 0.9, 1.4);
        let nc = dp.to_nc_coords(&x);
        let back = dp.from_nc_coords(nc.q1, nc.p1, x.q2, x.p2);
        for (a, b) in back.to_array().iter().zip(x.to_array()) {
            assert!(close(*a, b, 1e-14));
        }
        assert_eq!(
            DegenerateParams::new(1.0, 0.0, 0.0, 0.0, 1.0),
            Err(Error::ZeroTheta)
        );
    }
}
