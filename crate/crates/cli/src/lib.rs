//! `ncbt` command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage or input errors, 2 when a
//! verification exceeds its tolerance. The thread count comes from
//! `NCBT_THREADS` (default: available parallelism).

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ncbt::io::{self as nio, dec, dec_pair, dec_vec, fmt17, Dec17};
use ncbt::kernels::{self, gram_psd, kernel, reproducing_check, wh_limit_gap};
use ncbt::params::{make_params, omega_nc};
use ncbt::star::{self, fit_slope, SymbolRecord};
use ncbt::toeplitz_nc::{commutator_table, nc_toeplitz};
use ncbt::{
    parse_symbol, DeformationParams, DegenerateParams, KernelSpec, KernelVariant, Kind, Measure,
    ParamSet, PhasePoint, PolySymbol,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const THREADS_ENV: &str = "NCBT_THREADS";

const GRAMMAR: &str = "\
Symbols are polynomials written with + - * ^ and parentheses, e.g.
  \"q1^2 + 2*q1*p2 - 0.5\"        phase-space chart: q1 q2 p1 p2
  \"z1*zb2 + i*z2\"               complex chart: z1 zb1 z2 zb2 (or z zb)
Numbers accept decimals and exponents; `i` is the imaginary unit.
Points are four comma-separated numbers q1,q2,p1,p2.

Exit codes: 0 success, 1 usage or input error, 2 verification failure.
Set NCBT_THREADS to fix the number of worker threads.";

#[derive(Parser, Debug)]
#[command(name = "ncbt", version, about = "Noncommutative Berezin-Toeplitz toolkit", after_help = GRAMMAR)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Artifact format, where both apply.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Seed for random point and parameter sets.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
struct ParamArgs {
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    theta: f64,
    /// Momentum deformation calB; degenerate commands default to hbar^2/theta.
    #[arg(long = "B", allow_negative_numbers = true)]
    calb: Option<f64>,
    /// Gaussian width; defaults to sqrt(hbar).
    #[arg(long)]
    s: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    kappa: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    delta: f64,
    #[arg(long = "q2-star", default_value_t = 0.0, allow_negative_numbers = true)]
    q2_star: f64,
    #[arg(long = "p2-star", default_value_t = 0.0, allow_negative_numbers = true)]
    p2_star: f64,
    /// Product-Gaussian spread "std_q2,std_p2" of the (q2, p2) measure,
    /// centred at the base point; omitted means a point mass.
    #[arg(long = "measure-std")]
    measure_std: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Classify parameters and print derived quantities.
    ParamsCheck(ParamArgs),
    /// Evaluate a kernel at one pair of points.
    KernelEval {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
        #[arg(long)]
        variant: Option<String>,
    },
    /// Compare closed-form and Fock-side kernels on random pairs.
    KernelCross {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Gram matrix of a kernel on random points and its extreme eigenvalues.
    GramPsd {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long, default_value_t = 60)]
        points: usize,
        /// JSON array of points instead of random ones.
        #[arg(long)]
        points_file: Option<PathBuf>,
        #[arg(long)]
        variant: Option<String>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Scalar resolution-of-identity residuals by quadrature.
    ReproCheck {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long, default_value_t = 20)]
        pairs: usize,
        #[arg(long, default_value_t = kernels::DEFAULT_REPRO_NODES)]
        nodes: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Gap to the Weyl-Heisenberg kernel along (theta, calB) = t (theta, B).
    WhLimit {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long, default_value = "1e-1,3e-2,1e-2,3e-3,1e-3")]
        scales: String,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        y: Option<String>,
    },
    /// Matrix of a noncommutative Toeplitz operator.
    ToeplitzBuild {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long = "F")]
        f: String,
        #[arg(long = "N", default_value_t = 8)]
        n: usize,
    },
    /// Commutators of the coordinate Toeplitz operators.
    CommutatorTable {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long = "N", default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Star-product coefficients CC_0..CC_n.
    StarCoeffs {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long = "F")]
        f: String,
        #[arg(long = "G")]
        g: String,
        #[arg(long, default_value_t = 2)]
        order: u32,
    },
    /// The bidifferential matrix A of CC_1.
    MatrixA(ParamArgs),
    /// Low-order terms of F*G and of the commutator, machine versus closed form.
    ExpandPrint {
        #[arg(long = "F")]
        f: String,
        #[arg(long = "G")]
        g: String,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Residuals of the truncated star expansion and their order in hbar.
    ResidualSweep {
        #[arg(long = "F")]
        f: String,
        #[arg(long = "G")]
        g: String,
        #[arg(long, default_value_t = 0)]
        order: u32,
        #[arg(long = "N", default_value_t = 14)]
        n: usize,
        #[arg(long = "b-ren", default_value_t = 0.1, allow_negative_numbers = true)]
        b: f64,
        #[arg(long = "t-ren", default_value_t = 0.05, allow_negative_numbers = true)]
        t: f64,
        #[arg(long = "s-ren", default_value_t = 1.0)]
        s: f64,
        #[arg(long, default_value = "1e-1,3e-2,1e-2,3e-3,1e-3")]
        hbars: String,
        /// `joint` scales (hbar, B, T) together from the largest hbar.
        #[arg(long, value_enum, default_value_t = Mode::Fixed)]
        mode: Mode,
        #[arg(long)]
        expect_slope: Option<f64>,
        #[arg(long, default_value_t = 0.05)]
        slope_tol: f64,
    },
    /// Degenerate commutator table.
    DegenerateTable {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long = "N", default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Degenerate star-product coefficients and the closed form of the first.
    DegenerateCoeffs {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long = "F")]
        f: String,
        #[arg(long = "G")]
        g: String,
        #[arg(long, default_value_t = 2)]
        order: u32,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Fixed,
    Joint,
}

/// Usage or input error; verification failures travel in [`Artifact`].
#[derive(Debug)]
enum Fail {
    Usage(String),
}

impl From<ncbt::Error> for Fail {
    fn from(e: ncbt::Error) -> Self {
        Fail::Usage(e.to_string())
    }
}

type CmdResult = Result<Artifact, Fail>;

struct Artifact {
    text: String,
    failure: Option<String>,
}

impl Artifact {
    fn ok(text: String) -> Self {
        Self {
            text,
            failure: None,
        }
    }
    fn checked(text: String, failure: Option<String>) -> Self {
        Self { text, failure }
    }
}

impl ParamArgs {
    fn s(&self) -> f64 {
        self.s.unwrap_or_else(|| self.hbar.sqrt())
    }

    fn measure(&self) -> Result<Measure, Fail> {
        match &self.measure_std {
            None => Ok(Measure::Dirac),
            Some(text) => {
                let v = parse_list(text)?;
                if v.len() != 2 || v.iter().any(|x| x.is_nan() || *x <= 0.0) {
                    return Err(Fail::Usage(
                        "--measure-std needs two positive numbers".into(),
                    ));
                }
                Ok(Measure::ProductGaussian {
                    mean: [self.q2_star, self.p2_star],
                    std: [v[0], v[1]],
                })
            }
        }
    }

    fn degenerate(&self) -> Result<DegenerateParams, Fail> {
        Ok(
            DegenerateParams::new(self.hbar, self.theta, self.kappa, self.delta, self.s())?
                .with_base_point(self.q2_star, self.p2_star)
                .with_measure(self.measure()?),
        )
    }

    /// Generic or degenerate according to `hbar^2 - calB theta`.
    fn param_set(&self) -> Result<ParamSet, Fail> {
        let p = make_params(self.hbar, self.theta, self.calb.unwrap_or(0.0), self.s())?;
        Ok(match p.kind() {
            Kind::Generic => ParamSet::Generic(p),
            Kind::Degenerate => ParamSet::Degenerate(self.degenerate()?),
        })
    }

    fn generic(&self) -> Result<DeformationParams, Fail> {
        match self.param_set()? {
            ParamSet::Generic(p) => Ok(p),
            ParamSet::Degenerate(_) => Err(Fail::Usage(
                "this command needs generic parameters (hbar^2 != calB*theta)".into(),
            )),
        }
    }

    /// Degenerate family; `--B` may be omitted and is then `hbar^2/theta`.
    fn degenerate_only(&self) -> Result<DegenerateParams, Fail> {
        if self.calb.is_some() {
            if let ParamSet::Generic(_) = self.param_set()? {
                return Err(Fail::Usage(
                    "this command needs degenerate parameters (hbar^2 = calB*theta)".into(),
                ));
            }
        }
        self.degenerate()
    }
}

fn parse_list(text: &str) -> Result<Vec<f64>, Fail> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Fail::Usage(format!("not a number: `{t}`")))
        })
        .collect()
}

fn parse_point(text: &str) -> Result<PhasePoint, Fail> {
    let v = parse_list(text)?;
    if v.len() != 4 {
        return Err(Fail::Usage(format!(
            "a point needs four numbers, got `{text}`"
        )));
    }
    Ok(PhasePoint::new(v[0], v[1], v[2], v[3]))
}

fn symbol(text: &str) -> Result<PolySymbol, Fail> {
    parse_symbol(text).map_err(|e| Fail::Usage(format!("{e}\n\n{GRAMMAR}")))
}

fn random_point(rng: &mut ChaCha8Rng, r: f64) -> PhasePoint {
    PhasePoint::new(
        rng.random_range(-r..r),
        rng.random_range(-r..r),
        rng.random_range(-r..r),
        rng.random_range(-r..r),
    )
}

fn variant_for(p: &ParamSet, name: Option<&str>) -> Result<KernelVariant, Fail> {
    match name {
        Some(n) => KernelVariant::parse(n).ok_or_else(|| {
            let names: Vec<&str> = KernelVariant::ALL.iter().map(|v| v.as_str()).collect();
            Fail::Usage(format!(
                "unknown variant `{n}`; one of {}",
                names.join(", ")
            ))
        }),
        None => Ok(match p {
            ParamSet::Generic(_) => KernelVariant::GenericClosedForm,
            ParamSet::Degenerate(_) => KernelVariant::DegenerateClosedForm,
        }),
    }
}

fn fock_variant(p: &ParamSet) -> (KernelVariant, KernelVariant) {
    match p {
        ParamSet::Generic(_) => (
            KernelVariant::GenericClosedForm,
            KernelVariant::GenericFockSide,
        ),
        ParamSet::Degenerate(_) => (
            KernelVariant::DegenerateClosedForm,
            KernelVariant::DegenerateFockSide,
        ),
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Option<String> {
    (!ok).then(msg)
}

fn cmd_params_check(a: &ParamArgs) -> CmdResult {
    #[derive(Serialize)]
    struct Out {
        kind: &'static str,
        hbar: Dec17,
        theta: Dec17,
        #[serde(rename = "calB")]
        calb: Dec17,
        s: Dec17,
        gap: Dec17,
        #[serde(rename = "B")]
        b: Dec17,
        #[serde(rename = "T")]
        t: Dec17,
        #[serde(rename = "S")]
        s_ratio: Dec17,
        #[serde(skip_serializing_if = "Option::is_none")]
        omega_nc: Option<Vec<Vec<Dec17>>>,
    }
    let p = make_params(a.hbar, a.theta, a.calb.unwrap_or(0.0), a.s())?;
    let omega = match p.kind() {
        Kind::Generic => {
            let m = omega_nc(&p)?;
            Some(
                (0..4)
                    .map(|r| (0..4).map(|c| dec(m[(r, c)])).collect())
                    .collect(),
            )
        }
        Kind::Degenerate => None,
    };
    Ok(Artifact::ok(nio::to_json(&Out {
        kind: p.kind().as_str(),
        hbar: dec(p.hbar()),
        theta: dec(p.theta()),
        calb: dec(p.calb()),
        s: dec(p.s()),
        gap: dec(p.det_factor()),
        b: dec(p.b()),
        t: dec(p.t()),
        s_ratio: dec(p.s_ratio()),
        omega_nc: omega,
    })))
}

fn cmd_kernel_eval(a: &ParamArgs, x: &str, y: &str, variant: Option<&str>) -> CmdResult {
    #[derive(Serialize)]
    struct Out {
        kind: &'static str,
        variant: &'static str,
        x: Vec<Dec17>,
        y: Vec<Dec17>,
        value: [Dec17; 2],
    }
    let ps = a.param_set()?;
    let v = variant_for(&ps, variant)?;
    let spec = KernelSpec::new(v, ps)?;
    let (x, y) = (parse_point(x)?, parse_point(y)?);
    Ok(Artifact::ok(nio::to_json(&Out {
        kind: ps.kind_str(),
        variant: v.as_str(),
        x: dec_vec(&x.to_array()),
        y: dec_vec(&y.to_array()),
        value: dec_pair(kernel(&spec, &x, &y)),
    })))
}

fn cmd_kernel_cross(a: &ParamArgs, pairs: usize, tol: f64, seed: u64) -> CmdResult {
    #[derive(Serialize)]
    struct Out {
        kind: &'static str,
        closed_form: &'static str,
        fock_side: &'static str,
        pairs: usize,
        max_relative_deviation: Dec17,
        tolerance: Dec17,
    }
    let ps = a.param_set()?;
    let (va, vb) = fock_variant(&ps);
    let (ka, kb) = (KernelSpec::new(va, ps)?, KernelSpec::new(vb, ps)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let x = random_point(&mut rng, 2.0);
        let y = random_point(&mut rng, 2.0);
        let (u, v) = (kernel(&ka, &x, &y), kernel(&kb, &x, &y));
        let scale = u.norm().max(v.norm());
        if scale > 0.0 {
            worst = worst.max((u - v).norm() / scale);
        }
    }
    let text = nio::to_json(&Out {
        kind: ps.kind_str(),
        closed_form: va.as_str(),
        fock_side: vb.as_str(),
        pairs,
        max_relative_deviation: dec(worst),
        tolerance: dec(tol),
    });
    Ok(Artifact::checked(
        text,
        check(worst <= tol, || {
            format!("kernel forms differ by {worst:e} > {tol:e}")
        }),
    ))
}

fn cmd_gram(
    a: &ParamArgs,
    n: usize,
    file: Option<&PathBuf>,
    variant: Option<&str>,
    tol: f64,
    seed: u64,
) -> CmdResult {
    let ps = a.param_set()?;
    let spec = KernelSpec::new(variant_for(&ps, variant)?, ps)?;
    let points = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))?;
            kernels::points_from_json(&text)?
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| random_point(&mut rng, 2.0)).collect()
        }
    };
    let rep = gram_psd(&spec, &points);
    let ok = rep.min_eig >= -tol * rep.max_eig;
    Ok(Artifact::checked(
        rep.to_json(),
        check(ok, || {
            format!(
                "Gram matrix has eigenvalue {:e} below -{tol:e} * {:e}",
                rep.min_eig, rep.max_eig
            )
        }),
    ))
}

fn cmd_repro(a: &ParamArgs, pairs: usize, nodes: usize, tol: f64, seed: u64) -> CmdResult {
    #[derive(Serialize)]
    struct Out {
        kind: &'static str,
        nodes: usize,
        residuals: Vec<Dec17>,
        max_residual: Dec17,
        tolerance: Dec17,
    }
    let ps = a.param_set()?;
    let spec = KernelSpec::new(fock_variant(&ps).0, ps)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<(PhasePoint, PhasePoint)> = (0..pairs)
        .map(|_| (random_point(&mut rng, 1.0), random_point(&mut rng, 1.0)))
        .collect();
    let res = pts
        .iter()
        .map(|(x, y)| reproducing_check(&spec, x, y, nodes))
        .collect::<Result<Vec<f64>, _>>()?;
    let worst = res.iter().copied().fold(0.0, f64::max);
    let text = nio::to_json(&Out {
        kind: ps.kind_str(),
        nodes,
        residuals: dec_vec(&res),
        max_residual: dec(worst),
        tolerance: dec(tol),
    });
    Ok(Artifact::checked(
        text,
        check(worst <= tol, || {
            format!("reproducing residual {worst:e} > {tol:e}")
        }),
    ))
}

fn cmd_wh(
    a: &ParamArgs,
    scales: &str,
    x: Option<&str>,
    y: Option<&str>,
    seed: u64,
    format: Format,
) -> CmdResult {
    let scales = parse_list(scales)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = match x {
        Some(t) => parse_point(t)?,
        None => random_point(&mut rng, 1.0),
    };
    let y = match y {
        Some(t) => parse_point(t)?,
        None => random_point(&mut rng, 1.0),
    };
    let calb = a.calb.unwrap_or(0.0);
    let gaps = scales
        .iter()
        .map(|&t| wh_limit_gap(a.hbar, a.s(), a.theta, calb, t, &x, &y))
        .collect::<Result<Vec<f64>, _>>()?;
    let slope = fit_slope(&scales, &gaps);
    let text = match format {
        Format::Csv => {
            let mut s = String::from("t,gap,slope\n");
            for (t, g) in scales.iter().zip(&gaps) {
                s.push_str(&format!("{},{},{}\n", fmt17(*t), fmt17(*g), fmt17(slope)));
            }
            s
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Out {
                x: Vec<Dec17>,
                y: Vec<Dec17>,
                scales: Vec<Dec17>,
                gaps: Vec<Dec17>,
                slope: Dec17,
            }
            nio::to_json(&Out {
                x: dec_vec(&x.to_array()),
                y: dec_vec(&y.to_array()),
                scales: dec_vec(&scales),
                gaps: dec_vec(&gaps),
                slope: dec(slope),
            })
        }
    };
    Ok(Artifact::checked(
        text,
        check((slope - 1.0).abs() <= 0.1, || {
            format!("gap slope {slope} is not 1 +- 0.1")
        }),
    ))
}

fn cmd_toeplitz(a: &ParamArgs, f: &str, n: usize) -> CmdResult {
    let ps = a.param_set()?;
    let op = nc_toeplitz(&ps, n, &symbol(f)?)?;
    Ok(Artifact::ok(op.to_json()))
}

fn cmd_table(ps: ParamSet, n: usize, tol: f64) -> CmdResult {
    let rep = commutator_table(&ps, n)?;
    let worst = rep.max_deviation();
    Ok(Artifact::checked(
        rep.to_json(),
        check(worst <= tol, || {
            format!("commutator deviation {worst:e} > {tol:e}")
        }),
    ))
}

fn cmd_star(a: &ParamArgs, f: &str, g: &str, order: u32) -> CmdResult {
    let (f, g) = (symbol(f)?, symbol(g)?);
    let sc = match a.param_set()? {
        ParamSet::Generic(p) => star::star_coeffs(&p, &f, &g, order)?,
        ParamSet::Degenerate(d) => star::degenerate_star_coeffs(&d, &f, &g, order)?,
    };
    Ok(Artifact::ok(sc.to_json()))
}

fn cmd_matrix_a(a: &ParamArgs) -> CmdResult {
    #[derive(Serialize)]
    struct Out {
        order: [&'static str; 4],
        #[serde(rename = "B")]
        b: Dec17,
        #[serde(rename = "T")]
        t: Dec17,
        #[serde(rename = "S")]
        s: Dec17,
        re: Vec<Vec<Dec17>>,
        im: Vec<Vec<Dec17>>,
        chart_deviation: Dec17,
    }
    let p = a.generic()?;
    let m = star::matrix_a(&p)?;
    let from_chart = star::matrix_a_from_chart(&p)?;
    let dev = (m - from_chart).camax() / m.camax().max(1.0);
    let re = (0..4)
        .map(|r| (0..4).map(|c| dec(m[(r, c)].re)).collect())
        .collect();
    let im = (0..4)
        .map(|r| (0..4).map(|c| dec(m[(r, c)].im)).collect())
        .collect();
    let text = nio::to_json(&Out {
        order: star::A_ORDER,
        b: dec(p.b()),
        t: dec(p.t()),
        s: dec(p.s_ratio()),
        re,
        im,
        chart_deviation: dec(dev),
    });
    Ok(Artifact::checked(
        text,
        check(dev <= 1e-12, || {
            format!("displayed A differs from the chart-derived A by {dev:e}")
        }),
    ))
}

/// Largest coefficient difference relative to `max(1, largest coefficient)`.
fn deviation(a: &PolySymbol, b: &PolySymbol) -> f64 {
    let scale = a
        .poly()
        .max_abs_coeff()
        .max(b.poly().max_abs_coeff())
        .max(1.0);
    (a.poly() - b.poly()).max_abs_coeff() / scale
}

fn cmd_expand(f: &str, g: &str, tol: f64) -> CmdResult {
    #[derive(Serialize)]
    struct Term {
        term: &'static str,
        machine: SymbolRecord,
        printed: SymbolRecord,
        deviation: Dec17,
    }
    #[derive(Serialize)]
    struct Out {
        #[serde(rename = "F")]
        f: String,
        #[serde(rename = "G")]
        g: String,
        star: Vec<Term>,
        commutator: Vec<Term>,
        max_deviation: Dec17,
    }
    let (f, g) = (symbol(f)?, symbol(g)?);
    let mut worst: f64 = 0.0;
    let mut compare = |mach: star::PrintedTerms, closed: star::PrintedTerms| -> Vec<Term> {
        mach.labeled()
            .into_iter()
            .zip(closed.labeled())
            .map(|((name, a), (_, b))| {
                let d = deviation(a, b);
                worst = worst.max(d);
                Term {
                    term: name,
                    machine: SymbolRecord::new(&a.pruned(1e-14)),
                    printed: SymbolRecord::new(b),
                    deviation: dec(d),
                }
            })
            .collect()
    };
    let s = compare(
        star::taylor_star(&f, &g, 1.0, 2, 1)?.leading_terms()?,
        star::printed_star_terms(&f, &g)?,
    );
    let c = compare(
        star::taylor_commutator(&f, &g, 1.0, 2, 1)?.leading_terms()?,
        star::printed_commutator_terms(&f, &g)?,
    );
    let text = nio::to_json(&Out {
        f: f.to_string(),
        g: g.to_string(),
        star: s,
        commutator: c,
        max_deviation: dec(worst),
    });
    Ok(Artifact::checked(
        text,
        check(worst <= tol, || {
            format!("machine expansion differs from the closed form by {worst:e}")
        }),
    ))
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    f: &str,
    g: &str,
    order: u32,
    n: usize,
    (b, t, s): (f64, f64, f64),
    hbars: &str,
    mode: Mode,
    expect: Option<f64>,
    slope_tol: f64,
    format: Format,
) -> CmdResult {
    let (f, g) = (symbol(f)?, symbol(g)?);
    let hbars = parse_list(hbars)?;
    let rep = match mode {
        Mode::Fixed => {
            let p = DeformationParams::from_renormalized(hbars[0], b, t, s)?;
            star::expansion_residual(&p, &f, &g, order, n, &hbars)?
        }
        Mode::Joint => {
            let h0 = hbars.iter().copied().fold(f64::MIN, f64::max);
            let base = DeformationParams::from_renormalized(h0, b, t, s)?;
            let scales: Vec<f64> = hbars.iter().map(|h| h / h0).collect();
            star::expansion_residual_joint(&base, &f, &g, order, n, &scales)?
        }
    };
    let text = match format {
        Format::Csv => rep.to_csv(),
        Format::Json => rep.to_json(),
    };
    let failure = expect.and_then(|e| {
        check((rep.slope - e).abs() <= slope_tol, || {
            format!("fitted slope {} is not {e} +- {slope_tol}", rep.slope)
        })
    });
    Ok(Artifact::checked(text, failure))
}

fn cmd_degenerate_coeffs(a: &ParamArgs, f: &str, g: &str, order: u32, tol: f64) -> CmdResult {
    let dp = a.degenerate_only()?;
    let (f, g) = (symbol(f)?, symbol(g)?);
    let sc = star::degenerate_star_coeffs(&dp, &f, &g, order.max(1))?;
    let closed = star::restrict_to_plane(&dp, &star::cc1_degenerate_closed(&dp, &f, &g)?)?;
    let dev = deviation(&sc.coeffs[1], &closed);
    let mut doc = nio::parse_json(&sc.to_json())?;
    if let Some(obj) = doc.as_object_mut() {
        let closed = serde_json::to_value(SymbolRecord::new(&closed))
            .map_err(|e| Fail::Usage(e.to_string()))?;
        let dev = serde_json::to_value(dec(dev)).map_err(|e| Fail::Usage(e.to_string()))?;
        obj.insert("closed_form_c1".into(), closed);
        obj.insert("c1_deviation".into(), dev);
    }
    let text = nio::to_json(&doc);
    Ok(Artifact::checked(
        text,
        check(dev <= tol, || {
            format!("first coefficient differs from its closed form by {dev:e}")
        }),
    ))
}

fn dispatch(cli: &Cli) -> CmdResult {
    let json = cli.format.unwrap_or(Format::Json);
    match &cli.cmd {
        Cmd::ParamsCheck(a) => cmd_params_check(a),
        Cmd::KernelEval { p, x, y, variant } => cmd_kernel_eval(p, x, y, variant.as_deref()),
        Cmd::KernelCross { p, pairs, tol } => cmd_kernel_cross(p, *pairs, *tol, cli.seed),
        Cmd::GramPsd {
            p,
            points,
            points_file,
            variant,
            tol,
        } => cmd_gram(
            p,
            *points,
            points_file.as_ref(),
            variant.as_deref(),
            *tol,
            cli.seed,
        ),
        Cmd::ReproCheck {
            p,
            pairs,
            nodes,
            tol,
        } => cmd_repro(p, *pairs, *nodes, *tol, cli.seed),
        Cmd::WhLimit { p, scales, x, y } => {
            cmd_wh(p, scales, x.as_deref(), y.as_deref(), cli.seed, json)
        }
        Cmd::ToeplitzBuild { p, f, n } => cmd_toeplitz(p, f, *n),
        Cmd::CommutatorTable { p, n, tol } => cmd_table(p.param_set()?, *n, *tol),
        Cmd::StarCoeffs { p, f, g, order } => cmd_star(p, f, g, *order),
        Cmd::MatrixA(p) => cmd_matrix_a(p),
        Cmd::ExpandPrint { f, g, tol } => cmd_expand(f, g, *tol),
        Cmd::ResidualSweep {
            f,
            g,
            order,
            n,
            b,
            t,
            s,
            hbars,
            mode,
            expect_slope,
            slope_tol,
        } => cmd_sweep(
            f,
            g,
            *order,
            *n,
            (*b, *t, *s),
            hbars,
            *mode,
            *expect_slope,
            *slope_tol,
            cli.format.unwrap_or(Format::Csv),
        ),
        Cmd::DegenerateTable { p, n, tol } => {
            cmd_table(ParamSet::Degenerate(p.degenerate_only()?), *n, *tol)
        }
        Cmd::DegenerateCoeffs {
            p,
            f,
            g,
            order,
            tol,
        } => cmd_degenerate_coeffs(p, f, g, *order, *tol),
    }
}

fn thread_count() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n| n > 0)
}

/// Runs one command line; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count() {
        builder = builder.num_threads(n);
    }
    let result = match builder.build() {
        Ok(pool) => pool.install(|| dispatch(&cli)),
        Err(e) => Err(Fail::Usage(format!("thread pool: {e}"))),
    };
    let art = match result {
        Ok(a) => a,
        Err(Fail::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            return 1;
        }
    };
    let written = match &cli.out {
        Some(path) => {
            std::fs::write(path, &art.text).map_err(|e| format!("{}: {e}", path.display()))
        }
        None => out
            .write_all(art.text.as_bytes())
            .map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: {e}");
        return 1;
    }
    match art.failure {
        Some(msg) => {
            let _ = writeln!(err, "verification failed: {msg}");
            2
        }
        None => 0,
    }
}
