//! Degenerate reduction `rho` to one complex variable and back.

use num_complex::Complex64;

use super::{c_j_poly, require_phase, StarCoeffs};
use crate::error::Result;
use crate::params::{DegenerateParams, Measure, ParamSet};
use crate::symbols::{complex_to_pair, pair_to_complex, var, Chart, Poly, PolySymbol};

fn cr(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `E[X^k]` for `X ~ N(mean, std^2)`.
pub fn normal_moment(mean: f64, std: f64, k: u32) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for j in 1..=k {
        let next = mean * cur + f64::from(j - 1) * std * std * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `rho F`: substitute the degenerate NC coordinates, rewrite `(q1^NC, p1^NC)`
/// through `z`, and average over `(q2, p2)` with the measure `mu`.
///
/// For a point mass the average is evaluation at the base point; for a
/// product Gaussian it uses exact moments.
pub fn varrho(dp: &DegenerateParams, f: &PolySymbol) -> Result<PolySymbol> {
    require_phase(f)?;
    let (h, th, ka) = (dp.hbar(), dp.theta(), dp.kappa());
    let blk = complex_to_pair(h, dp.s());
    // work in (z, zb, q2, p2)
    let z = Poly::var(4, 0);
    let zb = Poly::var(4, 1);
    let q2 = Poly::var(4, 2);
    let p2 = Poly::var(4, 3);
    let q1nc = &z.scale(blk[0][0]) + &zb.scale(blk[0][1]);
    let p1nc = &z.scale(blk[1][0]) + &zb.scale(blk[1][1]);
    let mut images = vec![Poly::zero(4); 4];
    images[var::Q1] = &q1nc + &p2.scale(cr(th / h));
    images[var::Q2] = q2.clone();
    images[var::P1] = &(&p1nc - &q2.scale(cr(h / th))) - &Poly::constant(4, cr(2.0 * ka * h));
    images[var::P2] = p2;
    let full = f.poly().compose(&images);

    let (m, sd) = match dp.measure() {
        Measure::Dirac => {
            let (a, b) = dp.base_point();
            ([a, b], [0.0, 0.0])
        }
        Measure::ProductGaussian { mean, std } => (mean, std),
    };
    let mut out = Poly::zero(2);
    for (mono, c) in full.terms() {
        let e = mono.exps();
        let w = normal_moment(m[0], sd[0], e[2]) * normal_moment(m[1], sd[1], e[3]);
        let mut t = Poly::constant(2, c * w);
        t = &t * &Poly::var(2, 0).pow(e[0]);
        t = &t * &Poly::var(2, 1).pow(e[1]);
        out += &t;
    }
    PolySymbol::new(Chart::Complex(1), out)
}

/// The right inverse `rho* f (q, p) = f(z^NC(q, p))`.
pub fn varrho_star(dp: &DegenerateParams, f: &PolySymbol) -> Result<PolySymbol> {
    if f.chart() != Chart::Complex(1) {
        return Err(crate::Error::ChartMismatch {
            expected: Chart::Complex(1).describe(),
            found: f.chart().describe(),
        });
    }
    let (h, th, ka) = (dp.hbar(), dp.theta(), dp.kappa());
    let blk = pair_to_complex(h, dp.s());
    let q1nc = &Poly::var(4, var::Q1) - &Poly::var(4, var::P2).scale(cr(th / h));
    let p1nc = &(&Poly::var(4, var::P1) + &Poly::var(4, var::Q2).scale(cr(h / th)))
        + &Poly::constant(4, cr(2.0 * ka * h));
    let images = [
        &q1nc.scale(blk[0][0]) + &p1nc.scale(blk[0][1]),
        &q1nc.scale(blk[1][0]) + &p1nc.scale(blk[1][1]),
    ];
    PolySymbol::new(Chart::Phase, f.poly().compose(&images))
}

/// Sets `(q2, p2)` to the base point.
pub fn restrict_to_plane(dp: &DegenerateParams, f: &PolySymbol) -> Result<PolySymbol> {
    require_phase(f)?;
    let (q2, p2) = dp.base_point();
    let mut images: Vec<Poly> = (0..4).map(|i| Poly::var(4, i)).collect();
    images[var::Q2] = Poly::constant(4, cr(q2));
    images[var::P2] = Poly::constant(4, cr(p2));
    PolySymbol::new(Chart::Phase, f.poly().compose(&images))
}

/// `CC~_j` computed on the plane: the constant shifts of `rho` and `rho*`
/// cancel there and `C~_j` commutes with translations, so only the linear
/// part `(q1, p1) <-> z` is applied. This avoids the cancellation of the
/// literal composition when `hbar q2* / theta` or `theta p2* / hbar` is large.
fn reduced(dp: &DegenerateParams, f: &PolySymbol, g: &PolySymbol, j: u32) -> Result<PolySymbol> {
    let (h, s) = (dp.hbar(), dp.s());
    let to_pair = complex_to_pair(h, s);
    let to_z = pair_to_complex(h, s);
    let (z, zb) = (Poly::var(2, 0), Poly::var(2, 1));
    let mut fwd = vec![Poly::zero(2); 4];
    fwd[var::Q1] = &z.scale(to_pair[0][0]) + &zb.scale(to_pair[0][1]);
    fwd[var::P1] = &z.scale(to_pair[1][0]) + &zb.scale(to_pair[1][1]);
    let lift =
        |x: &PolySymbol| -> Result<Poly> { Ok(restrict_to_plane(dp, x)?.poly().compose(&fwd)) };
    let c = c_j_poly(&lift(f)?, &lift(g)?, 1, j);
    let (q1, p1) = (Poly::var(4, var::Q1), Poly::var(4, var::P1));
    let back = [
        &q1.scale(to_z[0][0]) + &p1.scale(to_z[0][1]),
        &q1.scale(to_z[1][0]) + &p1.scale(to_z[1][1]),
    ];
    PolySymbol::new(Chart::Phase, c.compose(&back))
}

/// `CC~_j(F, G) = rho* C~_j(rho F, rho G)`, needs a point mass.
///
/// Symbols are only defined on the plane `(q2, p2) = (q2*, p2*)`; the
/// result is returned restricted to it, as a polynomial in `(q1, p1)`.
pub fn cc_j_degenerate(
    dp: &DegenerateParams,
    f: &PolySymbol,
    g: &PolySymbol,
    j: u32,
) -> Result<PolySymbol> {
    dp.require_dirac()?;
    require_phase(f)?;
    require_phase(g)?;
    reduced(dp, f, g, j)
}

pub fn degenerate_star_coeffs(
    dp: &DegenerateParams,
    f: &PolySymbol,
    g: &PolySymbol,
    n: u32,
) -> Result<StarCoeffs> {
    dp.require_dirac()?;
    require_phase(f)?;
    require_phase(g)?;
    let coeffs = (0..=n)
        .map(|j| reduced(dp, f, g, j))
        .collect::<Result<Vec<_>>>()?;
    Ok(StarCoeffs {
        order: n,
        params: ParamSet::Degenerate(*dp),
        coeffs,
    })
}

/// The literal composition `rho* C~_j(rho F, rho G)` restricted to the plane.
/// Same value as [`cc_j_degenerate`], but loses accuracy with large shifts.
pub fn cc_j_degenerate_literal(
    dp: &DegenerateParams,
    f: &PolySymbol,
    g: &PolySymbol,
    j: u32,
) -> Result<PolySymbol> {
    dp.require_dirac()?;
    let (rf, rg) = (varrho(dp, f)?, varrho(dp, g)?);
    let c = PolySymbol::new(Chart::Complex(1), c_j_poly(rf.poly(), rg.poly(), 1, j))?;
    restrict_to_plane(dp, &varrho_star(dp, &c)?)
}

/// `-(1/(2 hbar s^2)) (hbar dF/dp1 - i s^2 dF/dq1)(hbar dG/dp1 + i s^2 dG/dq1)`.
pub fn cc1_degenerate_closed(
    dp: &DegenerateParams,
    f: &PolySymbol,
    g: &PolySymbol,
) -> Result<PolySymbol> {
    require_phase(f)?;
    require_phase(g)?;
    let (h, s2) = (dp.hbar(), dp.s() * dp.s());
    let is2 = Complex64::new(0.0, s2);
    let lf =
        &f.poly().derivative(var::P1, 1).scale(cr(h)) - &f.poly().derivative(var::Q1, 1).scale(is2);
    let lg =
        &g.poly().derivative(var::P1, 1).scale(cr(h)) + &g.poly().derivative(var::Q1, 1).scale(is2);
    PolySymbol::new(Chart::Phase, (&lf * &lg).scale(cr(-1.0 / (2.0 * h * s2))))
}
