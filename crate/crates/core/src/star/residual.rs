//! Finite-dimensional surrogate for the operator-norm expansion
//! `T_F T_G ~ sum_j hbar^j T_{CC_j(F, G)}`.

use rayon::prelude::*;
use serde::Serialize;

use super::{c_j, require_phase};
use crate::error::{Error, Result};
use crate::fock::{interior_columns, spectral_norm, toeplitz_poly, FockBasis};
use crate::io::{self, dec, fmt17, Dec17};
use crate::params::DeformationParams;
use crate::symbols::{to_complex_chart, PolySymbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    /// `(B, T, S)` fixed while `hbar` varies.
    Fixed,
    /// `(hbar, B, T) = t (hbar0, B0, T0)` with `S` fixed.
    Joint,
}

impl SweepMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepMode::Fixed => "fixed",
            SweepMode::Joint => "joint",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualSample {
    pub hbar: f64,
    pub b: f64,
    pub t: f64,
    pub s: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionReport {
    pub mode: SweepMode,
    pub f: String,
    pub g: String,
    pub order: u32,
    pub cutoff: usize,
    pub interior_degree: usize,
    pub samples: Vec<ResidualSample>,
    /// Least-squares slope of `log residual` against `log hbar`.
    pub slope: f64,
}

impl ExpansionReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("hbar,B,T,S,order,interior_degree,residual,slope\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                fmt17(s.hbar),
                fmt17(s.b),
                fmt17(s.t),
                fmt17(s.s),
                self.order,
                self.interior_degree,
                fmt17(s.residual),
                fmt17(self.slope)
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Sample {
            hbar: Dec17,
            #[serde(rename = "B")]
            b: Dec17,
            #[serde(rename = "T")]
            t: Dec17,
            #[serde(rename = "S")]
            s: Dec17,
            residual: Dec17,
        }
        #[derive(Serialize)]
        struct Out<'a> {
            mode: &'a str,
            #[serde(rename = "F")]
            f: &'a str,
            #[serde(rename = "G")]
            g: &'a str,
            order: u32,
            #[serde(rename = "N")]
            n: usize,
            interior_degree: usize,
            slope: Dec17,
            samples: Vec<Sample>,
        }
        io::to_json(&Out {
            mode: self.mode.as_str(),
            f: &self.f,
            g: &self.g,
            order: self.order,
            n: self.cutoff,
            interior_degree: self.interior_degree,
            slope: dec(self.slope),
            samples: self
                .samples
                .iter()
                .map(|s| Sample {
                    hbar: dec(s.hbar),
                    b: dec(s.b),
                    t: dec(s.t),
                    s: dec(s.s),
                    residual: dec(s.residual),
                })
                .collect(),
        })
    }
}

/// Least-squares slope of `log y` against `log x` over the pairs with
/// `x, y > 0`; `NaN` with fewer than two such pairs.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

fn degrees(f: &PolySymbol, g: &PolySymbol, n: u32, cutoff: usize) -> Result<usize> {
    let df = f.degree().unwrap_or(0) as usize;
    let dg = g.degree().unwrap_or(0) as usize;
    let needed = df + dg + n as usize + 2;
    if cutoff < needed {
        return Err(Error::CutoffTooSmall { n: cutoff, needed });
    }
    Ok(cutoff - df - dg)
}

/// Spectral norm of `T_F T_G - sum_{j <= n} hbar^j T_{CC_j}` on the columns
/// of degree `<= interior`.
fn residual_at(
    p: &DeformationParams,
    f: &PolySymbol,
    g: &PolySymbol,
    n: u32,
    cutoff: usize,
    interior: usize,
) -> Result<f64> {
    let h = p.hbar();
    let basis = FockBasis::new(2, cutoff, h)?;
    let fz = to_complex_chart(p, f)?;
    let gz = to_complex_chart(p, g)?;
    let tf = toeplitz_poly(&basis, &fz)?;
    let tg = toeplitz_poly(&basis, &gz)?;
    let mut diff = tf.matrix() * tg.matrix();
    for j in 0..=n {
        let c = c_j(&fz, &gz, j)?;
        if c.is_zero() {
            continue;
        }
        let t = toeplitz_poly(&basis, &c)?;
        diff -= t.matrix() * num_complex::Complex64::new(h.powi(j as i32), 0.0);
    }
    let op = crate::fock::TruncatedOperator::new(basis, diff)?;
    Ok(spectral_norm(&interior_columns(&op, interior)?))
}

fn sweep(
    mode: SweepMode,
    params: Vec<DeformationParams>,
    f: &PolySymbol,
    g: &PolySymbol,
    n: u32,
    cutoff: usize,
) -> Result<ExpansionReport> {
    require_phase(f)?;
    require_phase(g)?;
    if params.is_empty() {
        return Err(Error::BadCutoff("empty hbar list".into()));
    }
    let interior = degrees(f, g, n, cutoff)?;
    let samples = params
        .par_iter()
        .map(|p| {
            Ok(ResidualSample {
                hbar: p.hbar(),
                b: p.b(),
                t: p.t(),
                s: p.s_ratio(),
                residual: residual_at(p, f, g, n, cutoff, interior)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let hs: Vec<f64> = samples.iter().map(|s| s.hbar).collect();
    let rs: Vec<f64> = samples.iter().map(|s| s.residual).collect();
    Ok(ExpansionReport {
        mode,
        f: f.to_string(),
        g: g.to_string(),
        order: n,
        cutoff,
        interior_degree: interior,
        slope: fit_slope(&hs, &rs),
        samples,
    })
}

/// Residual sweep over `hbar_list` with the renormalized `(B, T, S)` of
/// `params` held fixed.
pub fn expansion_residual(
    params: &DeformationParams,
    f: &PolySymbol,
    g: &PolySymbol,
    n: u32,
    cutoff: usize,
    hbar_list: &[f64],
) -> Result<ExpansionReport> {
    params.require_generic()?;
    let (b, t, s) = (params.b(), params.t(), params.s_ratio());
    let ps = hbar_list
        .iter()
        .map(|&h| DeformationParams::from_renormalized(h, b, t, s))
        .collect::<Result<Vec<_>>>()?;
    sweep(SweepMode::Fixed, ps, f, g, n, cutoff)
}

/// Residual sweep along `(hbar, B, T) = t (hbar0, B0, T0)` for `t` in
/// `scales`, with `S` fixed; `base` supplies `(hbar0, B0, T0, S)`.
pub fn expansion_residual_joint(
    base: &DeformationParams,
    f: &PolySymbol,
    g: &PolySymbol,
    n: u32,
    cutoff: usize,
    scales: &[f64],
) -> Result<ExpansionReport> {
    base.require_generic()?;
    let (h0, b0, t0, s) = (base.hbar(), base.b(), base.t(), base.s_ratio());
    let ps = scales
        .iter()
        .map(|&k| DeformationParams::from_renormalized(k * h0, k * b0, k * t0, s))
        .collect::<Result<Vec<_>>>()?;
    sweep(SweepMode::Joint, ps, f, g, n, cutoff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::parse_symbol;

    const HS: [f64; 5] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];

    #[test]
    fn slope_fit_recovers_power() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(1.7)).collect();
        assert!((fit_slope(&x, &y) - 1.7).abs() < 1e-12);
        assert!(fit_slope(&[1.0], &[1.0]).is_nan());
    }

    #[test]
    fn linear_symbols_first_order() {
        let p = DeformationParams::from_renormalized(0.1, 0.1, 0.05, 1.0).unwrap();
        let q1 = parse_symbol("q1").unwrap();
        let p1 = parse_symbol("p1").unwrap();
        let r = expansion_residual(&p, &q1, &p1, 0, 14, &HS).unwrap();
        assert_eq!(r.interior_degree, 12);
        assert!((r.slope - 1.0).abs() < 0.05, "{}", r.slope);
        let r = expansion_residual(&p, &q1, &p1, 1, 14, &HS).unwrap();
        assert!(r.samples.iter().all(|s| s.residual < 1e-10));
    }

    #[test]
    fn quadratic_second_order() {
        let p = DeformationParams::from_renormalized(0.1, 0.1, 0.05, 1.0).unwrap();
        let f = parse_symbol("q1^2 + p2^2").unwrap();
        let r = expansion_residual(&p, &f, &f, 1, 14, &HS).unwrap();
        assert!((r.slope - 2.0).abs() < 0.05, "{}", r.slope);
        let scales = [1.0, 0.3, 0.1, 0.03, 0.01];
        let r = expansion_residual_joint(&p, &f, &f, 1, 14, &scales).unwrap();
        assert!((r.slope - 2.0).abs() < 0.05, "{}", r.slope);
        let q1 = parse_symbol("q1").unwrap();
        let p1 = parse_symbol("p1").unwrap();
        let r = expansion_residual_joint(&p, &q1, &p1, 0, 14, &scales).unwrap();
        assert!((r.slope - 1.0).abs() < 0.05, "{}", r.slope);
    }

    #[test]
    fn cutoff_guard() {
        let p = DeformationParams::from_renormalized(0.1, 0.0, 0.0, 1.0).unwrap();
        let f = parse_symbol("q1^2").unwrap();
        assert_eq!(
            expansion_residual(&p, &f, &f, 1, 6, &HS).unwrap_err(),
            Error::CutoffTooSmall { n: 6, needed: 7 }
        );
    }

    #[test]
    fn csv_layout() {
        let p = DeformationParams::from_renormalized(0.1, 0.1, 0.05, 1.0).unwrap();
        let q1 = parse_symbol("q1").unwrap();
        let r = expansion_residual(&p, &q1, &q1, 0, 6, &[0.1, 0.01]).unwrap();
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "hbar,B,T,S,order,interior_degree,residual,slope");
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1].split(',').count(), 8);
    }
}
