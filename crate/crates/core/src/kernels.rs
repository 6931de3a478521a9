//! Coherent states and reproducing kernels, generic and degenerate.
//!
//! Every kernel is available in two independent forms: the closed form in
//! phase-space coordinates and the Fock-side form
//! `exp(-|z|^2/2hbar - |w|^2/2hbar + <z, w>/hbar)` in complex coordinates.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{hermitian_eigenvalues, CMatrix, MatrixRecord};
use crate::io::{self, Dec17};
use crate::params::{
    complexify, from_nc_coords, local_exponents, to_nc_coords, DeformationParams, DegenerateParams,
    Measure, NcCoords, ParamSet, PhasePoint,
};
use crate::quadrature::GaussHermite;

const I: Complex64 = Complex64::new(0.0, 1.0);

pub const DEFAULT_REPRO_NODES: usize = 24;

/// Normalized Gaussian ground state in one or two dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundState {
    d: usize,
    s: f64,
}

impl GroundState {
    pub fn new(d: usize, s: f64) -> Result<Self> {
        if d != 1 && d != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: d,
            });
        }
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::NonPositiveWidth(s));
        }
        Ok(Self { d, s })
    }

    pub fn d(&self) -> usize {
        self.d
    }
    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn eval(&self, r: &[f64]) -> f64 {
        let r2: f64 = r.iter().map(|x| x * x).sum();
        let g = (-r2 / (2.0 * self.s * self.s)).exp();
        let pi = std::f64::consts::PI;
        match self.d {
            1 => g / (pi.powf(0.25) * self.s.sqrt()),
            _ => g / (pi.sqrt() * self.s),
        }
    }
}

/// Generic coherent state at `r`, from its defining formula.
pub fn coherent_eval(p: &DeformationParams, x: &PhasePoint, r: [f64; 2]) -> Result<Complex64> {
    p.require_generic()?;
    let (h, th, cb) = (p.hbar(), p.theta(), p.calb());
    let phase = ((r[0] - 0.5 * x.q1) * x.p1 + (r[1] - 0.5 * x.q2) * x.p2) / h
        - th / (2.0 * h * h) * x.p1 * x.p2
        + cb / (h * h) * (x.q2 * r[0] - 0.5 * x.q1 * x.q2);
    let eta = GroundState::new(2, p.s())?;
    let amp = eta.eval(&[r[0] - x.q1, r[1] - x.q2 - th / h * x.p1]);
    Ok(Complex64::from_polar(amp, phase))
}

/// Generic coherent state at `r` in NC coordinates:
/// `exp(i (r - q/2).p / hbar) eta(r - q)`.
pub fn coherent_eval_nc(p: &DeformationParams, x: &PhasePoint, r: [f64; 2]) -> Result<Complex64> {
    p.require_generic()?;
    let nc = to_nc_coords(p, x);
    let phase = ((r[0] - 0.5 * nc.q1) * nc.p1 + (r[1] - 0.5 * nc.q2) * nc.p2) / p.hbar();
    let eta = GroundState::new(2, p.s())?;
    Ok(Complex64::from_polar(
        eta.eval(&[r[0] - nc.q1, r[1] - nc.q2]),
        phase,
    ))
}

/// Degenerate coherent state at `r`, from its defining formula.
pub fn degenerate_coherent_eval(dp: &DegenerateParams, x: &PhasePoint, r: f64) -> Complex64 {
    let (h, th) = (dp.hbar(), dp.theta());
    let phase = -dp.kappa() * x.q1
        - dp.delta() * x.q2
        - r / h * (x.p1 + h / th * x.q2)
        - (x.q1 * x.p1 - x.q2 * x.p2) / (2.0 * h)
        + 0.5 * (-x.q1 * x.q2 / th + th / (h * h) * x.p1 * x.p2);
    let eta = GroundState { d: 1, s: dp.s() };
    Complex64::from_polar(eta.eval(&[r + x.q1 - th / h * x.p2]), phase)
}

/// Degenerate coherent state at `r` in degenerate NC coordinates.
pub fn degenerate_coherent_eval_nc(dp: &DegenerateParams, x: &PhasePoint, r: f64) -> Complex64 {
    let (h, th, k) = (dp.hbar(), dp.theta(), dp.kappa());
    let nc = dp.to_nc_coords(x);
    let phase = -dp.delta() * nc.q2
        - r / h * (nc.p1 - 2.0 * k * h)
        - nc.q1 * nc.p1 / (2.0 * h)
        - th / h * k * nc.p2;
    let eta = GroundState { d: 1, s: dp.s() };
    Complex64::from_polar(eta.eval(&[r + nc.q1]), phase)
}

/// `<eta_x, eta_y> = int conj(eta_x(r)) eta_y(r) dr` by Gauss-Hermite
/// quadrature centred between the two states.
pub fn coherent_overlap(
    p: &DeformationParams,
    x: &PhasePoint,
    y: &PhasePoint,
    nodes: usize,
) -> Result<Complex64> {
    p.require_generic()?;
    let gh = GaussHermite::new(nodes)?;
    let (a, b) = (to_nc_coords(p, x), to_nc_coords(p, y));
    let c = [0.5 * (a.q1 + b.q1), 0.5 * (a.q2 + b.q2)];
    let s = p.s();
    let mut acc = Complex64::new(0.0, 0.0);
    for (u, wu) in gh.nodes().iter().zip(gh.weights()) {
        for (v, wv) in gh.nodes().iter().zip(gh.weights()) {
            let r = [c[0] + s * u, c[1] + s * v];
            let f = coherent_eval(p, x, r)?.conj() * coherent_eval(p, y, r)?;
            acc += f * (wu * wv * (u * u + v * v).exp());
        }
    }
    Ok(acc * (s * s))
}

/// Degenerate analogue of [`coherent_overlap`].
pub fn degenerate_overlap(
    dp: &DegenerateParams,
    x: &PhasePoint,
    y: &PhasePoint,
    nodes: usize,
) -> Result<Complex64> {
    let gh = GaussHermite::new(nodes)?;
    let c = -0.5 * (dp.to_nc_coords(x).q1 + dp.to_nc_coords(y).q1);
    let s = dp.s();
    let mut acc = Complex64::new(0.0, 0.0);
    for (u, w) in gh.nodes().iter().zip(gh.weights()) {
        let r = c + s * u;
        let f = degenerate_coherent_eval(dp, x, r).conj() * degenerate_coherent_eval(dp, y, r);
        acc += f * (w * (u * u).exp());
    }
    Ok(acc * s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelVariant {
    GenericClosedForm,
    GenericFockSide,
    DegenerateClosedForm,
    DegenerateFockSide,
    WeylHeisenbergLimit,
}

impl KernelVariant {
    pub const ALL: [KernelVariant; 5] = [
        KernelVariant::GenericClosedForm,
        KernelVariant::GenericFockSide,
        KernelVariant::DegenerateClosedForm,
        KernelVariant::DegenerateFockSide,
        KernelVariant::WeylHeisenbergLimit,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            KernelVariant::GenericClosedForm => "generic-closed-form",
            KernelVariant::GenericFockSide => "generic-fock-side",
            KernelVariant::DegenerateClosedForm => "degenerate-closed-form",
            KernelVariant::DegenerateFockSide => "degenerate-fock-side",
            KernelVariant::WeylHeisenbergLimit => "weyl-heisenberg-limit",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.as_str() == s)
    }

    fn wants_degenerate(self) -> bool {
        matches!(
            self,
            KernelVariant::DegenerateClosedForm | KernelVariant::DegenerateFockSide
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    variant: KernelVariant,
    params: ParamSet,
}

impl KernelSpec {
    pub fn new(variant: KernelVariant, params: ParamSet) -> Result<Self> {
        let ok = match params {
            ParamSet::Generic(p) => !variant.wants_degenerate() && p.is_generic(),
            ParamSet::Degenerate(_) => variant.wants_degenerate(),
        };
        if !ok {
            let kind = match params {
                ParamSet::Generic(p) => p.kind().as_str(),
                ParamSet::Degenerate(_) => "degenerate",
            };
            return Err(Error::VariantParamsMismatch {
                variant: variant.as_str(),
                kind,
            });
        }
        Ok(Self { variant, params })
    }

    pub fn generic(variant: KernelVariant, p: DeformationParams) -> Result<Self> {
        Self::new(variant, ParamSet::Generic(p))
    }

    pub fn degenerate(variant: KernelVariant, dp: DegenerateParams) -> Result<Self> {
        Self::new(variant, ParamSet::Degenerate(dp))
    }

    pub fn variant(&self) -> KernelVariant {
        self.variant
    }
    pub fn params(&self) -> &ParamSet {
        &self.params
    }
    pub fn hbar(&self) -> f64 {
        self.params.hbar()
    }

    /// Same parameters, other form of the kernel.
    pub fn with_variant(&self, variant: KernelVariant) -> Result<Self> {
        Self::new(variant, self.params)
    }
}

/// Natural logarithm of the kernel (the exponent of its closed form).
pub fn log_kernel(spec: &KernelSpec, x: &PhasePoint, y: &PhasePoint) -> Complex64 {
    match (spec.variant, &spec.params) {
        (KernelVariant::GenericClosedForm, ParamSet::Generic(p)) => generic_closed(p, x, y),
        (KernelVariant::GenericFockSide, ParamSet::Generic(p)) => {
            let z = complexify(p, &to_nc_coords(p, x));
            let w = complexify(p, &to_nc_coords(p, y));
            fock_exponent(&z.z, &w.z, p.hbar())
        }
        (KernelVariant::WeylHeisenbergLimit, ParamSet::Generic(p)) => {
            wh_exponent(p.hbar(), p.s(), x, y)
        }
        (KernelVariant::DegenerateClosedForm, ParamSet::Degenerate(d)) => {
            degenerate_closed(d, x, y)
        }
        (KernelVariant::DegenerateFockSide, ParamSet::Degenerate(d)) => {
            let z = d.complexify(x);
            let w = d.complexify(y);
            let pre = d.delta() * (x.q2 - y.q2) + d.kappa() * d.theta() * (x.p2 - y.p2) / d.hbar();
            fock_exponent(&[z], &[w], d.hbar()) + I * pre
        }
        _ => unreachable!("KernelSpec::new rejects mismatched pairs"),
    }
}

/// `K(x, y) = <eta_x, eta_y>`.
pub fn kernel(spec: &KernelSpec, x: &PhasePoint, y: &PhasePoint) -> Complex64 {
    log_kernel(spec, x, y).exp()
}

fn fock_exponent(z: &[Complex64], w: &[Complex64], h: f64) -> Complex64 {
    let zz: f64 = z.iter().map(|a| a.norm_sqr()).sum();
    let ww: f64 = w.iter().map(|a| a.norm_sqr()).sum();
    let zw: Complex64 = z.iter().zip(w).map(|(a, b)| a * b.conj()).sum();
    Complex64::new(-(zz + ww) / (2.0 * h), 0.0) + zw / h
}

fn wh_exponent(h: f64, s: f64, x: &PhasePoint, y: &PhasePoint) -> Complex64 {
    let e = local_exponents(x, y);
    let dq2 = (x.q1 - y.q1).powi(2) + (x.q2 - y.q2).powi(2);
    let dp2 = (x.p1 - y.p1).powi(2) + (x.p2 - y.p2).powi(2);
    Complex64::new(-s * s / (4.0 * h * h) * dp2 - dq2 / (4.0 * s * s), e.xi / h)
}

fn generic_closed(p: &DeformationParams, x: &PhasePoint, y: &PhasePoint) -> Complex64 {
    let (h, th, cb, s) = (p.hbar(), p.theta(), p.calb(), p.s());
    let e = local_exponents(x, y);
    let dq2 = x.q2 - y.q2;
    let dp1 = x.p1 - y.p1;
    let s2 = s * s;
    let h2 = h * h;
    let re = -1.0 / (4.0 * s2) * (th * th / h2 * dp1 * dp1 + 2.0 * th / h * dq2 * dp1)
        - s2 / (4.0 * h2) * (cb * cb / h2 * dq2 * dq2 + 2.0 * cb / h * dp1 * dq2);
    let im = th / h2 * e.xi_p + cb / h2 * e.xi_q;
    wh_exponent(h, s, x, y) + Complex64::new(re, im)
}

fn degenerate_closed(d: &DegenerateParams, x: &PhasePoint, y: &PhasePoint) -> Complex64 {
    let (h, th, s) = (d.hbar(), d.theta(), d.s());
    let e = local_exponents(x, y);
    let (dq1, dq2) = (x.q1 - y.q1, x.q2 - y.q2);
    let (dp1, dp2) = (x.p1 - y.p1, x.p2 - y.p2);
    let s2 = s * s;
    let h2 = h * h;
    let im = e.xi / h + e.xi_q / th + th / h2 * e.xi_p + d.kappa() * dq1 + d.delta() * dq2;
    let re = -dq1 * dq1 / (4.0 * s2)
        - s2 / (4.0 * th * th) * dq2 * dq2
        - s2 / (4.0 * h2) * dp1 * dp1
        - th * th / (4.0 * s2 * h2) * dp2 * dp2
        + th / (2.0 * s2 * h) * dq1 * dp2
        - s2 / (2.0 * h * th) * dp1 * dq2;
    Complex64::new(re, im)
}

/// Gram matrix `G_ij = K(x_i, x_j)` with the extreme eigenvalues of its
/// Hermitian part.
#[derive(Debug, Clone)]
pub struct GramReport {
    pub matrix: CMatrix,
    pub min_eig: f64,
    pub max_eig: f64,
}

impl GramReport {
    pub fn to_json(&self) -> String {
        let mut rec = MatrixRecord::from_matrix("points", &self.matrix);
        rec.min_eig = Some(Dec17(self.min_eig));
        io::to_json(&rec)
    }
}

pub fn gram_psd(spec: &KernelSpec, points: &[PhasePoint]) -> GramReport {
    let n = points.len();
    let rows: Vec<Vec<Complex64>> = points
        .par_iter()
        .map(|x| points.iter().map(|y| kernel(spec, x, y)).collect())
        .collect();
    let matrix = CMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let ev = hermitian_eigenvalues(&matrix);
    GramReport {
        min_eig: ev.first().copied().unwrap_or(0.0),
        max_eig: ev.last().copied().unwrap_or(0.0),
        matrix,
    }
}

/// `| int K(x, y) K(y, x') dnu(y) - K(x, x') |` by tensor Gauss-Hermite
/// quadrature in NC coordinates, centred at the midpoint of `x` and `x'`.
///
/// Generic kernels integrate over `R^4`; degenerate kernels over the
/// `(q1, p1)` plane, with the `(q2, p2)` measure either a point mass or a
/// product Gaussian.
pub fn reproducing_check(
    spec: &KernelSpec,
    x: &PhasePoint,
    xp: &PhasePoint,
    nodes: usize,
) -> Result<f64> {
    let gh = GaussHermite::new(nodes)?;
    let target = kernel(spec, x, xp);
    let integral = match &spec.params {
        ParamSet::Generic(p) => {
            // the limit kernel lives on undeformed coordinates
            let chart = if spec.variant == KernelVariant::WeylHeisenbergLimit {
                DeformationParams::new(p.hbar(), 0.0, 0.0, p.s())?
            } else {
                *p
            };
            generic_resolution(spec, &chart, x, xp, &gh)?
        }
        ParamSet::Degenerate(d) => degenerate_resolution(spec, d, x, xp, &gh),
    };
    Ok((integral - target).norm())
}

fn generic_resolution(
    spec: &KernelSpec,
    p: &DeformationParams,
    x: &PhasePoint,
    xp: &PhasePoint,
    gh: &GaussHermite,
) -> Result<Complex64> {
    let (a, b) = (to_nc_coords(p, x), to_nc_coords(p, xp));
    let m = NcCoords::new(
        0.5 * (a.q1 + b.q1),
        0.5 * (a.q2 + b.q2),
        0.5 * (a.p1 + b.p1),
        0.5 * (a.p2 + b.p2),
    );
    let sq = std::f64::consts::SQRT_2 * p.s();
    let sp = std::f64::consts::SQRT_2 * p.hbar() / p.s();
    let n = gh.len();
    let nodes = gh.nodes();
    let weights = gh.weights();
    let partial: Vec<Complex64> = (0..n * n)
        .into_par_iter()
        .map(|outer| {
            let (i, j) = (outer / n, outer % n);
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                for l in 0..n {
                    let (u1, u2, v1, v2) = (nodes[i], nodes[j], nodes[k], nodes[l]);
                    let nc = NcCoords::new(
                        m.q1 + sq * u1,
                        m.q2 + sq * u2,
                        m.p1 + sp * v1,
                        m.p2 + sp * v2,
                    );
                    let y = from_nc_coords(p, &nc).expect("generic chart");
                    let g = u1 * u1 + u2 * u2 + v1 * v1 + v2 * v2;
                    let w = weights[i] * weights[j] * weights[k] * weights[l];
                    acc += (log_kernel(spec, x, &y) + log_kernel(spec, &y, xp) + g).exp() * w;
                }
            }
            acc
        })
        .collect();
    let sum: Complex64 = partial.iter().sum();
    Ok(sum / std::f64::consts::PI.powi(2))
}

fn degenerate_resolution(
    spec: &KernelSpec,
    d: &DegenerateParams,
    x: &PhasePoint,
    xp: &PhasePoint,
    gh: &GaussHermite,
) -> Complex64 {
    let (a, b) = (d.to_nc_coords(x), d.to_nc_coords(xp));
    let (mq, mp) = (0.5 * (a.q1 + b.q1), 0.5 * (a.p1 + b.p1));
    let sq = std::f64::consts::SQRT_2 * d.s();
    let sp = std::f64::consts::SQRT_2 * d.hbar() / d.s();
    let plane = |q2: f64, p2: f64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (u, wu) in gh.nodes().iter().zip(gh.weights()) {
            for (v, wv) in gh.nodes().iter().zip(gh.weights()) {
                let y = d.from_nc_coords(mq + sq * u, mp + sp * v, q2, p2);
                let g = u * u + v * v;
                acc += (log_kernel(spec, x, &y) + log_kernel(spec, &y, xp) + g).exp() * (wu * wv);
            }
        }
        acc / std::f64::consts::PI
    };
    match d.measure() {
        Measure::Dirac => {
            let (q2, p2) = d.base_point();
            plane(q2, p2)
        }
        Measure::ProductGaussian { mean, std } => {
            let pairs: Vec<(usize, usize)> = (0..gh.len())
                .flat_map(|i| (0..gh.len()).map(move |j| (i, j)))
                .collect();
            let parts: Vec<Complex64> = pairs
                .par_iter()
                .map(|&(i, j)| {
                    let q2 = mean[0] + std::f64::consts::SQRT_2 * std[0] * gh.nodes()[i];
                    let p2 = mean[1] + std::f64::consts::SQRT_2 * std[1] * gh.nodes()[j];
                    plane(q2, p2) * (gh.weights()[i] * gh.weights()[j])
                })
                .collect();
            parts.iter().sum::<Complex64>() / std::f64::consts::PI
        }
    }
}

/// `|K^NC - K_WH|` at `(theta, calB) = t (theta0, calB0)`.
pub fn wh_limit_gap(
    hbar: f64,
    s: f64,
    theta0: f64,
    calb0: f64,
    t: f64,
    x: &PhasePoint,
    xp: &PhasePoint,
) -> Result<f64> {
    let p = DeformationParams::new(hbar, t * theta0, t * calb0, s)?;
    let k = kernel(
        &KernelSpec::generic(KernelVariant::GenericClosedForm, p)?,
        x,
        xp,
    );
    let w = kernel(
        &KernelSpec::generic(KernelVariant::WeylHeisenbergLimit, p)?,
        x,
        xp,
    );
    Ok((k - w).norm())
}

#[derive(Serialize)]
struct PointSet {
    points: Vec<[Dec17; 4]>,
}

pub fn points_to_json(points: &[PhasePoint]) -> String {
    io::to_json(&PointSet {
        points: points.iter().map(|p| p.to_array().map(Dec17)).collect(),
    })
}

pub fn points_from_json(text: &str) -> Result<Vec<PhasePoint>> {
    let v = io::parse_json(text)?;
    let rows = io::as_rows(io::field(&v, "points")?)?;
    rows.into_iter()
        .map(|r| {
            <[f64; 4]>::try_from(r.as_slice())
                .map(PhasePoint::from_array)
                .map_err(|_| Error::Format("each point needs four coordinates".into()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_params;

    fn pt(a: f64, b: f64, c: f64, d: f64) -> PhasePoint {
        PhasePoint::new(a, b, c, d)
    }

    #[test]
    fn coherent_forms_agree() {
        let p = make_params(0.8, 0.2, 0.3, 1.1).unwrap();
        let x = pt(0.4, -0.3, 0.7, 0.2);
        for r in [[0.0, 0.0], [0.5, -1.0], [-0.2, 0.9]] {
            let a = coherent_eval(&p, &x, r).unwrap();
            let b = coherent_eval_nc(&p, &x, r).unwrap();
            assert!((a - b).norm() < 1e-13);
        }
        let origin = coherent_eval(&p, &PhasePoint::default(), [0.3, 0.1]).unwrap();
        let eta = GroundState::new(2, 1.1).unwrap().eval(&[0.3, 0.1]);
        assert!((origin - Complex64::new(eta, 0.0)).norm() < 1e-15);
        let n = coherent_overlap(&p, &x, &x, 24).unwrap();
        assert!((n - 1.0).norm() < 1e-10);
    }

    #[test]
    fn generic_kernel_is_the_overlap() {
        let p = make_params(1.0, 0.2, 0.3, 1.0).unwrap();
        let spec = KernelSpec::generic(KernelVariant::GenericClosedForm, p).unwrap();
        let (x, y) = (pt(0.3, -0.2, 0.5, 0.1), pt(-0.1, 0.4, 0.2, -0.3));
        let k = kernel(&spec, &x, &y);
        let o = coherent_overlap(&p, &x, &y, 40).unwrap();
        assert!((k - o).norm() < 1e-12, "{k} vs {o}");
        let f = kernel(
            &spec.with_variant(KernelVariant::GenericFockSide).unwrap(),
            &x,
            &y,
        );
        assert!((k - f).norm() < 1e-14);
    }

    #[test]
    fn degenerate_kernel_is_the_overlap() {
        let dp = DegenerateParams::new(0.9, 0.6, 0.3, -0.7, 1.2).unwrap();
        let x = pt(0.3, -0.2, 0.5, 0.1);
        let y = pt(-0.1, 0.4, 0.2, -0.3);
        for r in [-0.4, 0.0, 0.7] {
            let a = degenerate_coherent_eval(&dp, &x, r);
            let b = degenerate_coherent_eval_nc(&dp, &x, r);
            assert!((a - b).norm() < 1e-13);
        }
        let spec = KernelSpec::degenerate(KernelVariant::DegenerateClosedForm, dp).unwrap();
        let k = kernel(&spec, &x, &y);
        let o = degenerate_overlap(&dp, &x, &y, 40).unwrap();
        assert!((k - o).norm() < 1e-12, "{k} vs {o}");
        let f = kernel(
            &spec
                .with_variant(KernelVariant::DegenerateFockSide)
                .unwrap(),
            &x,
            &y,
        );
        assert!((k - f).norm() < 1e-13);
    }

    #[test]
    fn variant_checks() {
        let g = make_params(1.0, 0.2, 0.3, 1.0).unwrap();
        assert!(matches!(
            KernelSpec::generic(KernelVariant::DegenerateFockSide, g),
            Err(Error::VariantParamsMismatch { .. })
        ));
        let d = make_params(1.0, 0.5, 2.0, 1.0).unwrap();
        assert!(KernelSpec::generic(KernelVariant::GenericClosedForm, d).is_err());
        for v in KernelVariant::ALL {
            assert_eq!(KernelVariant::parse(v.as_str()), Some(v));
        }
    }

    #[test]
    fn diagonal_and_hermitian() {
        let g = make_params(1.0, 0.2, 0.3, 1.0).unwrap();
        let dp = DegenerateParams::new(1.0, 0.5, 0.1, 0.2, 1.0).unwrap();
        let specs = [
            KernelSpec::generic(KernelVariant::GenericClosedForm, g).unwrap(),
            KernelSpec::generic(KernelVariant::GenericFockSide, g).unwrap(),
            KernelSpec::generic(KernelVariant::WeylHeisenbergLimit, g).unwrap(),
            KernelSpec::degenerate(KernelVariant::DegenerateClosedForm, dp).unwrap(),
            KernelSpec::degenerate(KernelVariant::DegenerateFockSide, dp).unwrap(),
        ];
        let (x, y) = (pt(1.0, 2.0, -0.5, 0.3), pt(0.2, -0.1, 0.4, 0.9));
        for s in &specs {
            assert!((kernel(s, &x, &x) - 1.0).norm() < 1e-14);
            assert!((kernel(s, &x, &y) - kernel(s, &y, &x).conj()).norm() < 1e-14);
            assert!(kernel(s, &x, &y).norm() < 1.0);
        }
    }

    #[test]
    fn gram_examples() {
        let g = make_params(1.0, 0.2, 0.3, 1.0).unwrap();
        let spec = KernelSpec::generic(KernelVariant::GenericClosedForm, g).unwrap();
        let x = pt(0.1, 0.2, 0.3, 0.4);
        let one = gram_psd(&spec, &[x]);
        assert!((one.min_eig - 1.0).abs() < 1e-14);
        let two = gram_psd(&spec, &[x, x]);
        assert!(two.min_eig.abs() < 1e-14);
        assert!((two.max_eig - 2.0).abs() < 1e-14);
    }

    #[test]
    fn resolution_of_identity_at_origin() {
        let g = make_params(1.0, 0.1, 0.1, 1.0).unwrap();
        let spec = KernelSpec::generic(KernelVariant::GenericFockSide, g).unwrap();
        let o = PhasePoint::default();
        assert!(reproducing_check(&spec, &o, &o, 12).unwrap() < 1e-8);
        let dp = DegenerateParams::new(1.0, 0.5, 0.2, 0.1, 1.0).unwrap();
        let spec = KernelSpec::degenerate(KernelVariant::DegenerateClosedForm, dp).unwrap();
        let (x, y) = (pt(0.2, 0.1, -0.3, 0.4), pt(-0.1, 0.3, 0.2, 0.0));
        assert!(reproducing_check(&spec, &x, &y, 24).unwrap() < 1e-8);
        let gauss = dp.with_measure(Measure::ProductGaussian {
            mean: [0.3, -0.2],
            std: [0.5, 0.8],
        });
        let spec2 = KernelSpec::degenerate(KernelVariant::DegenerateClosedForm, gauss).unwrap();
        assert_eq!(kernel(&spec, &x, &y), kernel(&spec2, &x, &y));
        assert!(reproducing_check(&spec2, &x, &y, 16).unwrap() < 1e-8);
    }

    #[test]
    fn limit_gap() {
        let (x, y) = (pt(0.5, -0.3, 0.2, 0.8), pt(-0.4, 0.1, 0.6, -0.2));
        assert_eq!(wh_limit_gap(1.0, 1.0, 0.1, 0.1, 0.0, &x, &y).unwrap(), 0.0);
        let a = wh_limit_gap(1.0, 1.0, 0.1, 0.1, 2e-3, &x, &y).unwrap();
        let b = wh_limit_gap(1.0, 1.0, 0.1, 0.1, 1e-3, &x, &y).unwrap();
        let ratio = a / b;
        assert!((1.5..=2.5).contains(&ratio), "{ratio}");
        assert!(b <= 1e-2);
    }

    #[test]
    fn point_json_round_trip() {
        let pts = vec![pt(0.1, -2.0, 3.5e-9, 1.0), pt(0.0, 0.0, 0.0, 0.0)];
        let back = points_from_json(&points_to_json(&pts)).unwrap();
        assert_eq!(back, pts);
        assert!(points_from_json("{\"points\": [[1, 2]]}").is_err());
    }
}
