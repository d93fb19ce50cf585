use crate::args::*;
use crate::manifest::SCHEMA_VERSION;
use gbp_spectra::crt::crt_report;
use gbp_spectra::rconst::{compute_R, compute_R_leading};
use gbp_spectra::renewal::{phase_grid, spectral_roots, spectral_roots_with, Regime, RenewalSpectrum, RootMethod};
use gbp_spectra::string::{box_counting_dimension, sample_replicate, two_stage_clt, write_samples_csv};
use gbp_spectra::seed::run_replicates;
use gbp_spectra::{Complex64, Error, WeightSpec};
use serde::Serialize;
use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or parameters: exit 2.
    Config(String),
    /// A numeric budget or convergence failure: exit 3.
    Numeric(String),
    /// Anything else (I/O, replay mismatch): exit 1.
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Other(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric error: {m}"),
            CliError::Other(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_budget() || matches!(e, Error::Pole(_) | Error::Multiplicity(_)) {
            CliError::Numeric(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

/// Files produced by a command; the first is echoed to stdout.
pub struct Outputs {
    pub files: Vec<(String, Vec<u8>)>,
}

fn json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut v = serde_json::to_vec_pretty(&Versioned {
        schema_version: SCHEMA_VERSION,
        payload: value,
    })?;
    v.push(b'\n');
    Ok(v)
}

#[derive(Serialize)]
struct Versioned<'a, T> {
    schema_version: u32,
    #[serde(flatten)]
    payload: &'a T,
}

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

impl WeightArgs {
    pub fn spec(&self) -> Result<WeightSpec, CliError> {
        match (&self.alpha, self.sym_alpha) {
            (Some(a), None) => Ok(WeightSpec::new(a.clone(), self.gamma)?),
            (None, Some(a)) => Ok(WeightSpec::symmetric(a, self.n, self.gamma)?),
            _ => Err(CliError::Config("give either --alpha a1,a2,... or --sym-alpha A".into())),
        }
    }
}

fn seed_of(seed: Option<u64>) -> Result<u64, CliError> {
    seed.ok_or_else(|| CliError::Config("--seed is required".into()))
}

#[derive(Serialize)]
struct RootsReport<'a> {
    #[serde(flatten)]
    spectrum: &'a RenewalSpectrum,
    leading_root: Option<Complex64>,
}

fn roots(a: &RootsArgs) -> Result<Outputs, CliError> {
    let spec = a.weights.spec()?;
    let spectrum = if a.direct {
        spectral_roots_with(&spec, RootMethod::DirectSearch)?
    } else {
        spectral_roots(&spec)?
    };
    let report = RootsReport {
        leading_root: spectrum.leading_root(),
        spectrum: &spectrum,
    };
    Ok(Outputs {
        files: vec![("roots.json".into(), json(&report)?)],
    })
}

#[derive(Serialize)]
struct SweepReport {
    gamma: f64,
    n: usize,
    a_max: u32,
    /// Largest alpha with a CLT verdict.
    last_clt_alpha: Option<u32>,
    /// Smallest alpha with a NoCLT verdict.
    first_noclt_alpha: Option<u32>,
    boundary_alphas: Vec<u32>,
}

fn sweep(a: &SweepArgs) -> Result<Outputs, CliError> {
    if a.a_max == 0 {
        return Err(CliError::Config("--a-max must be positive".into()));
    }
    let mut csv = String::from("alpha,eta,leading_re,leading_im,regime\n");
    let mut report = SweepReport {
        gamma: a.gamma,
        n: a.n,
        a_max: a.a_max,
        last_clt_alpha: None,
        first_noclt_alpha: None,
        boundary_alphas: vec![],
    };
    for alpha in 1..=a.a_max {
        let s = spectral_roots(&WeightSpec::symmetric(alpha as f64, a.n, a.gamma)?)?;
        match s.leading_root() {
            Some(z) => csv.push_str(&format!("{alpha},{},{},{},{}\n", real(s.eta.unwrap_or(f64::NEG_INFINITY)), real(z.re), real(z.im), s.regime)),
            None => csv.push_str(&format!("{alpha},-inf,nan,nan,{}\n", s.regime)),
        }
        match s.regime {
            Regime::Clt => report.last_clt_alpha = Some(alpha),
            Regime::NoClt => {
                report.first_noclt_alpha.get_or_insert(alpha);
            }
            Regime::Boundary => report.boundary_alphas.push(alpha),
        }
    }
    Ok(Outputs {
        files: vec![("sweep.json".into(), json(&report)?), ("sweep.csv".into(), csv.into_bytes())],
    })
}

#[derive(Serialize)]
struct GridReport {
    alphas: Vec<f64>,
    gamma: f64,
    resolution: usize,
    cells: usize,
    poles: usize,
    /// Grid point of smallest `|1 - psi(1 - w)|`.
    min_modulus_w: Option<Complex64>,
    min_modulus: Option<f64>,
}

fn grid(a: &PhaseGridArgs) -> Result<Outputs, CliError> {
    let spec = a.weights.spec()?;
    let g = phase_grid(&spec, (a.re_min, a.re_max), (a.im_min, a.im_max), a.resolution)?;
    let mut csv = Vec::new();
    g.write_csv(&mut csv)?;
    let min = g.min_modulus();
    let report = GridReport {
        alphas: spec.alphas().to_vec(),
        gamma: spec.gamma(),
        resolution: a.resolution,
        cells: g.cells.len(),
        poles: g.cells.iter().filter(|c| c.is_pole()).count(),
        min_modulus_w: min.map(|c| c.w),
        min_modulus: min.map(|c| c.abs),
    };
    Ok(Outputs {
        files: vec![("phase_grid.json".into(), json(&report)?), ("phase_grid.csv".into(), csv)],
    })
}

#[derive(Serialize)]
struct StringSimReport {
    alphas: Vec<f64>,
    gamma: f64,
    lambda: f64,
    replicates: usize,
    seed: u64,
    center: f64,
    mean_scaled: f64,
    mean_count: f64,
}

fn string_sim(a: &StringSimArgs) -> Result<Outputs, CliError> {
    let spec = a.weights.spec()?;
    let seed = seed_of(a.seed)?;
    if a.replicates == 0 {
        return Err(CliError::Config("--replicates must be positive".into()));
    }
    let samples = run_replicates(a.replicates, seed, |r, s| sample_replicate(&spec, a.lambda, r, s, a.center))?;
    let mut csv = Vec::new();
    write_samples_csv(&samples, &mut csv)?;
    let m = samples.len() as f64;
    let report = StringSimReport {
        alphas: spec.alphas().to_vec(),
        gamma: spec.gamma(),
        lambda: a.lambda,
        replicates: a.replicates,
        seed,
        center: a.center,
        mean_scaled: samples.iter().map(|s| s.scaled).sum::<f64>() / m,
        mean_count: samples.iter().map(|s| s.count as f64).sum::<f64>() / m,
    };
    Ok(Outputs {
        files: vec![("string_sim.json".into(), json(&report)?), ("string_sim.csv".into(), csv)],
    })
}

#[derive(Serialize)]
struct CltReport<'a> {
    config: &'a CltArgs,
    pilot: gbp_spectra::string::FrakEstimate,
    #[serde(flatten)]
    summary: &'a gbp_spectra::string::CltSummary,
}

fn clt(a: &CltArgs) -> Result<Outputs, CliError> {
    let spec = a.weights.spec()?;
    let seed = seed_of(a.seed)?;
    let (pilot, summary) = two_stage_clt(
        &spec,
        a.lambda,
        a.replicates,
        a.pilot_lambda.unwrap_or(a.lambda),
        a.pilot_replicates.unwrap_or(a.replicates),
        seed,
    )?;
    let mut csv = Vec::new();
    write_samples_csv(&summary.samples, &mut csv)?;
    let report = CltReport {
        config: a,
        pilot,
        summary: &summary,
    };
    Ok(Outputs {
        files: vec![("clt_test.json".into(), json(&report)?), ("clt_test.csv".into(), csv)],
    })
}

fn r_constant(a: &RConstArgs) -> Result<Outputs, CliError> {
    let cert = match (a.rho_re, a.rho_im) {
        (Some(re), Some(im)) => compute_R(a.alpha, a.gamma, Complex64::new(re, im), a.tol)?,
        _ => compute_R_leading(a.alpha, a.gamma, a.tol)?,
    };
    Ok(Outputs {
        files: vec![("r_constant.json".into(), json(&cert)?)],
    })
}

#[derive(Serialize)]
struct BoxdimReport {
    alphas: Vec<f64>,
    gamma: f64,
    replicates: usize,
    seed: u64,
    #[serde(flatten)]
    fit: gbp_spectra::string::BoxCounting,
}

fn boxdim(a: &BoxdimArgs) -> Result<Outputs, CliError> {
    let spec = a.weights.spec()?;
    let seed = seed_of(a.seed)?;
    let fit = box_counting_dimension(&spec, &a.eps, a.replicates, seed)?;
    let report = BoxdimReport {
        alphas: spec.alphas().to_vec(),
        gamma: spec.gamma(),
        replicates: a.replicates,
        seed,
        fit,
    };
    Ok(Outputs {
        files: vec![("boxdim.json".into(), json(&report)?)],
    })
}

fn crt_check(a: &CrtArgs) -> Result<Outputs, CliError> {
    let seed = seed_of(a.seed)?;
    let report = crt_report(a.replicates, a.t, a.martingale_replicates, seed)?;
    Ok(Outputs {
        files: vec![("crt_check.json".into(), json(&report)?)],
    })
}

/// Runs every command except `replay`.
pub fn execute(command: &Command) -> Result<Outputs, CliError> {
    match command {
        Command::Roots(a) => roots(a),
        Command::Sweep(a) => sweep(a),
        Command::PhaseGrid(a) => grid(a),
        Command::StringSim(a) => string_sim(a),
        Command::CltTest(a) => clt(a),
        Command::RConstant(a) => r_constant(a),
        Command::Boxdim(a) => boxdim(a),
        Command::CrtCheck(a) => crt_check(a),
        Command::Replay(_) => Err(CliError::Config("replay cannot be nested".into())),
    }
}
