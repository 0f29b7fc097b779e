//! Command-line surface: argument parsing, reproducible runs, CSV output and replay.
//!
//! Every command resolves its arguments into a [`Parameters`] value, executes
//! it into an in-memory [`RunOutput`], and writes the files together with a
//! JSON [`RunManifest`]. Replaying a manifest re-executes the stored
//! parameters and compares the bytes against the recorded files.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{estimate_noise, outcome_labels, run_experiment, ExperimentConfig};
use crate::fisher::{
    coarse_fi_formula, fi_curve, mprime_fi_formula, noise_reduction_factor, noisy_fi_formula,
    qfi_formula_mixed, qfi_mixed, qfi_pure, thresholds, Degeneracy,
};
use crate::fock::{build_basis, hamiltonian};
use crate::measurement::{
    coarse_measurement, noisy_optimal_measurement, probabilities, standard_measurement, Probe,
    ProjectiveMeasurement,
};
use crate::probes::{mixed_probe, pure_probe, ProbeSpec};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "INDIST_PHASE_OUT";
pub const MANIFEST_FILE: &str = "manifest.json";
const DEFAULT_OUT: &str = "indist-phase-out";
const SIGNIFICANT: usize = 12;

/// `%.12g`-style formatting: 12 significant digits, trailing zeros trimmed.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent in scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= SIGNIFICANT as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (SIGNIFICANT as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A CSV table with `#` comment lines above the header row.
#[derive(Debug, Clone, Default)]
pub struct Csv {
    comments: Vec<String>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            comments: Vec::new(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn comment(mut self, line: impl Into<String>) -> Self {
        self.comments.push(line.into());
        self
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            let _ = writeln!(out, "# {c}");
        }
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        // writing into memory cannot fail
        w.write_record(&self.header).expect("in-memory csv");
        for r in &self.rows {
            w.write_record(r).expect("in-memory csv");
        }
        let bytes = w.into_inner().expect("in-memory csv");
        out.push_str(&String::from_utf8(bytes).expect("utf-8 cells"));
        out
    }
}

fn f(x: f64) -> String {
    format_float(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum QfiChoice {
    Formula,
    Variance,
    Spectral,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MeasurementChoice {
    Standard,
    Coarse,
    NoisyOptimal,
}

impl MeasurementChoice {
    fn build(self) -> Result<ProjectiveMeasurement> {
        let basis = build_basis(1)?;
        match self {
            MeasurementChoice::Standard => standard_measurement(&basis),
            MeasurementChoice::Coarse => coarse_measurement(&basis),
            MeasurementChoice::NoisyOptimal => noisy_optimal_measurement(&basis),
        }
    }

    fn name(self) -> &'static str {
        match self {
            MeasurementChoice::Standard => "standard",
            MeasurementChoice::Coarse => "coarse",
            MeasurementChoice::NoisyOptimal => "noisy-optimal",
        }
    }
}

/// Fully resolved arguments of one run; angles are always in radians here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Parameters {
    Qfi {
        n: u32,
        indistinguishability: f64,
        noise: f64,
        method: QfiChoice,
    },
    FiSweep {
        indistinguishability: Vec<f64>,
        noise: f64,
        measurement: MeasurementChoice,
        phi_start: f64,
        phi_stop: f64,
        points: usize,
    },
    Thresholds {
        n: u32,
        noise: f64,
    },
    Probs {
        indistinguishability: f64,
        noise: f64,
        phi: f64,
        measurement: MeasurementChoice,
    },
    Experiment {
        config: ExperimentConfig,
    },
    EstimateNoise {
        target: f64,
    },
}

impl Parameters {
    pub fn command(&self) -> &'static str {
        match self {
            Parameters::Qfi { .. } => "qfi",
            Parameters::FiSweep { .. } => "fi-sweep",
            Parameters::Thresholds { .. } => "thresholds",
            Parameters::Probs { .. } => "probs",
            Parameters::Experiment { .. } => "experiment",
            Parameters::EstimateNoise { .. } => "estimate-noise",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Parameters::Experiment { config } => Some(config.seed),
            _ => None,
        }
    }
}

/// Record written next to every run's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Parameters,
    pub seed: Option<u64>,
    pub version: String,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Human-readable report plus named output files.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub report: String,
    pub files: Vec<(String, String)>,
}

fn provenance_comment(params: &Parameters) -> String {
    format!(
        "indist-phase {} {}",
        env!("CARGO_PKG_VERSION"),
        params.command()
    )
}

/// Runs `params` without touching the filesystem.
pub fn execute(params: &Parameters) -> Result<RunOutput> {
    match params {
        Parameters::Qfi {
            n,
            indistinguishability,
            noise,
            method,
        } => cmd_qfi(params, *n, *indistinguishability, *noise, *method),
        Parameters::FiSweep {
            indistinguishability,
            noise,
            measurement,
            phi_start,
            phi_stop,
            points,
        } => cmd_fi_sweep(
            params,
            indistinguishability,
            *noise,
            *measurement,
            (*phi_start, *phi_stop, *points),
        ),
        Parameters::Thresholds { n, noise } => cmd_thresholds(params, *n, *noise),
        Parameters::Probs {
            indistinguishability,
            noise,
            phi,
            measurement,
        } => cmd_probs(params, *indistinguishability, *noise, *phi, *measurement),
        Parameters::Experiment { config } => cmd_experiment(params, config),
        Parameters::EstimateNoise { target } => cmd_estimate_noise(params, *target),
    }
}

fn cmd_qfi(params: &Parameters, n: u32, i: f64, eps: f64, method: QfiChoice) -> Result<RunOutput> {
    let spec = ProbeSpec::new(n, i, eps)?;
    let basis = build_basis(n)?;
    let h = hamiltonian(&basis);
    let mut values: Vec<(&str, f64)> = Vec::new();
    let want = |m: QfiChoice| method == m || method == QfiChoice::All;
    if want(QfiChoice::Formula) {
        values.push((
            "formula",
            qfi_formula_mixed(n, spec.indistinguishability, spec.noise)?,
        ));
    }
    if want(QfiChoice::Variance) {
        // the variance route is exact for the pure probe; white noise rescales it
        let probe = pure_probe(&basis, spec.indistinguishability)?;
        let v = qfi_pure(&probe, &h)?.value * noise_reduction_factor(n, spec.noise)?;
        values.push(("variance", v));
    }
    if want(QfiChoice::Spectral) {
        let rho = mixed_probe(&basis, spec.indistinguishability, spec.noise)?;
        values.push(("spectral", qfi_mixed(&rho, &h)?.value));
    }
    let mut csv = Csv::new(&["n", "indistinguishability", "noise", "method", "qfi"])
        .comment(provenance_comment(params))
        .comment("qfi: quantum Fisher information of the probe under the phase generator");
    let mut report = String::new();
    for (name, v) in &values {
        csv.row(vec![n.to_string(), f(i), f(eps), name.to_string(), f(*v)]);
        let _ = writeln!(report, "{name:<9} {}", f(*v));
    }
    if values.len() > 1 {
        let lo = values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
        let hi = values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
        let _ = writeln!(report, "max discrepancy {}", f(hi - lo));
    }
    Ok(RunOutput {
        report,
        files: vec![("qfi.csv".into(), csv.render())],
    })
}

fn phase_grid(start: f64, stop: f64, points: usize) -> Result<Vec<f64>> {
    if points == 0 || stop.partial_cmp(&start) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::Config(format!(
            "phase range [{start}, {stop}) with {points} points is empty"
        )));
    }
    let step = (stop - start) / points as f64;
    Ok((0..points).map(|k| start + k as f64 * step).collect())
}

fn sweep_formula(measurement: MeasurementChoice, i: f64, eps: f64, phi: f64) -> Option<f64> {
    match measurement {
        MeasurementChoice::Standard => noisy_fi_formula(i, eps, phi).ok(),
        MeasurementChoice::Coarse if eps == 0.0 => coarse_fi_formula(i, phi).ok(),
        MeasurementChoice::NoisyOptimal if i == 1.0 => mprime_fi_formula(eps, phi).ok(),
        _ => None,
    }
}

fn cmd_fi_sweep(
    params: &Parameters,
    i_values: &[f64],
    eps: f64,
    measurement: MeasurementChoice,
    (start, stop, points): (f64, f64, usize),
) -> Result<RunOutput> {
    if i_values.is_empty() {
        return Err(Error::Config("no indistinguishability values given".into()));
    }
    let grid = phase_grid(start, stop, points)?;
    let meas = measurement.build()?;
    let basis = meas.basis().clone();
    let curves = i_values
        .par_iter()
        .map(|&i| {
            let spec = ProbeSpec::new(1, i, eps)?;
            let probe = Probe::Pure(pure_probe(&basis, spec.indistinguishability)?);
            fi_curve(
                &probe,
                Some(spec),
                &meas,
                &grid,
                spec.noise,
                Degeneracy::LimitOrSkip,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let mut csv = Csv::new(&[
        "indistinguishability",
        "phi",
        "fi_numeric",
        "fi_formula",
        "status",
    ])
    .comment(provenance_comment(params))
    .comment(format!(
        "measurement: {}; noise: {}",
        measurement.name(),
        f(eps)
    ))
    .comment("fi_numeric: classical Fisher information from the projector probabilities")
    .comment("fi_formula: closed form where one exists for this measurement, else empty")
    .comment("status: ok, or the reason a degenerate phase was excluded");
    let mut report = String::new();
    for (&i, curve) in i_values.iter().zip(&curves) {
        let mut values = curve.phis.iter().zip(&curve.values).peekable();
        let mut excluded = curve.excluded.iter().peekable();
        for &phi in &grid {
            let formula = sweep_formula(measurement, i, eps, phi)
                .map(f)
                .unwrap_or_default();
            if values.peek().is_some_and(|(p, _)| **p == phi) {
                let (_, v) = values.next().expect("peeked");
                csv.row(vec![f(i), f(phi), f(*v), formula, "ok".into()]);
            } else if excluded.peek().is_some_and(|e| e.phi == phi) {
                let e = excluded.next().expect("peeked");
                csv.row(vec![f(i), f(phi), String::new(), formula, e.reason.clone()]);
            }
        }
        let (argmax, max) = curve.max().unwrap_or((f64::NAN, f64::NAN));
        let _ = writeln!(
            report,
            "I={} max fi {} at phi {} ({} excluded)",
            f(i),
            f(max),
            f(argmax),
            curve.excluded.len()
        );
    }
    Ok(RunOutput {
        report,
        files: vec![("fi_sweep.csv".into(), csv.render())],
    })
}

fn cmd_thresholds(params: &Parameters, n: u32, eps: f64) -> Result<RunOutput> {
    let t = thresholds(n, eps)?;
    let mut csv = Csv::new(&["n", "noise", "dimension", "i_min", "eps_max"])
        .comment(provenance_comment(params))
        .comment("i_min: least indistinguishability whose mixed-probe QFI reaches 2n")
        .comment("eps_max: noise at which i_min reaches 1");
    csv.row(vec![
        n.to_string(),
        f(t.noise),
        t.dimension.to_string(),
        f(t.i_min),
        f(t.eps_max),
    ]);
    let mut report = format!(
        "dimension {}\ni_min     {}\neps_max   {}\n",
        t.dimension,
        f(t.i_min),
        f(t.eps_max)
    );
    if t.i_min > 1.0 {
        report.push_str("no indistinguishability beats the shot-noise limit at this noise\n");
    }
    Ok(RunOutput {
        report,
        files: vec![("thresholds.csv".into(), csv.render())],
    })
}

fn cmd_probs(
    params: &Parameters,
    i: f64,
    eps: f64,
    phi: f64,
    measurement: MeasurementChoice,
) -> Result<RunOutput> {
    let spec = ProbeSpec::new(1, i, eps)?;
    let meas = measurement.build()?;
    let probe = Probe::Pure(pure_probe(meas.basis(), spec.indistinguishability)?);
    let table = probabilities(&probe, &meas, phi, spec.noise)?;
    let mut csv = Csv::new(&["outcome", "probability", "derivative"])
        .comment(provenance_comment(params))
        .comment(format!(
            "measurement: {}; indistinguishability: {}; noise: {}; phi: {}",
            measurement.name(),
            f(i),
            f(eps),
            f(phi)
        ));
    let mut report = String::new();
    for e in &table.entries {
        csv.row(vec![e.label.clone(), f(e.probability), f(e.derivative)]);
        let _ = writeln!(report, "{:<24} {}", e.label, f(e.probability));
    }
    let _ = writeln!(report, "total {}", f(table.total()));
    Ok(RunOutput {
        report,
        files: vec![("probs.csv".into(), csv.render())],
    })
}

fn cmd_experiment(params: &Parameters, config: &ExperimentConfig) -> Result<RunOutput> {
    let r = run_experiment(config)?;
    let labels = outcome_labels();
    let head = provenance_comment(params);

    let mut header = vec!["indistinguishability", "varphi", "phi"];
    header.extend(labels.iter().map(String::as_str));
    let mut counts = Csv::new(&header)
        .comment(head.clone())
        .comment(format!(
            "seed: {}; noise: {}; mean_total_counts: {}; i_max: {}",
            config.seed,
            f(config.noise),
            f(config.mean_total_counts),
            f(r.i_max)
        ))
        .comment("varphi: preparation wave-plate angle giving this indistinguishability");
    let angles = config.i_values.iter().zip(&r.preparation_angles);
    for rec in &r.records {
        let varphi = angles
            .clone()
            .find(|(i, _)| **i == rec.indistinguishability)
            .map_or(f64::NAN, |(_, a)| a.varphi);
        let mut row = vec![f(rec.indistinguishability), f(varphi), f(rec.phi)];
        row.extend(rec.counts.iter().map(|(_, c)| c.to_string()));
        counts.row(row);
    }

    let mut fits = Csv::new(&[
        "indistinguishability",
        "outcome",
        "kind",
        "a",
        "b",
        "residual",
        "var_a",
        "var_b",
        "cov_ab",
        "negative_scale",
    ])
    .comment(head.clone())
    .comment("model: normalized rate = a * p(outcome|phi) + b");
    for a in &r.analyses {
        for fit in &a.fits {
            let kind = match fit.kind {
                crate::experiment::FitKind::Linear => "linear",
                crate::experiment::FitKind::ZeroBackground => "zero-background",
                crate::experiment::FitKind::BackgroundOnly => "background-only",
            };
            fits.row(vec![
                f(a.indistinguishability),
                fit.label.clone(),
                kind.into(),
                f(fit.a),
                f(fit.b),
                f(fit.residual),
                f(fit.covariance[0][0]),
                f(fit.covariance[1][1]),
                f(fit.covariance[0][1]),
                fit.negative_scale.to_string(),
            ]);
        }
    }

    let mut curves = Csv::new(&["indistinguishability", "phi", "fi_fitted", "status"])
        .comment(head.clone())
        .comment("fi_fitted: Fisher information of the renormalized fitted distribution");
    for (a, c) in r.analyses.iter().zip(&r.fitted_curves) {
        for (phi, v) in c.phis.iter().zip(&c.values) {
            curves.row(vec![f(a.indistinguishability), f(*phi), f(*v), "ok".into()]);
        }
        for e in &c.excluded {
            curves.row(vec![
                f(a.indistinguishability),
                f(e.phi),
                String::new(),
                e.reason.clone(),
            ]);
        }
    }

    let mut mc = Csv::new(&["indistinguishability", "replica", "max_fi"])
        .comment(head.clone())
        .comment("bootstrap replicas of the maximum fitted Fisher information");
    for s in &r.monte_carlo {
        for (k, v) in s.samples.iter().enumerate() {
            mc.row(vec![f(s.indistinguishability), (k + 1).to_string(), f(*v)]);
        }
    }

    let noise_line = match r.noise_estimate {
        Some(e) => format!(
            "noise estimated from I=0: {} (simulated {})",
            f(e.eps_hat),
            f(config.noise)
        ),
        None => format!(
            "no I=0 estimate; theory uses the simulated noise {}",
            f(config.noise)
        ),
    };
    let mut table = Csv::new(&[
        "indistinguishability",
        "fitted_max",
        "error_bar",
        "analytic_max",
        "qfi_mixed",
        "qfi_pure",
    ])
    .comment(head)
    .comment(noise_line.clone())
    .comment("analytic_max: maximum over phase of the noisy closed form; qfi_mixed and qfi_pure: quantum bounds");
    let mut report = format!("{noise_line}\n");
    let _ = writeln!(
        report,
        "I          fitted_max      error_bar       analytic_max    qfi_mixed       qfi_pure"
    );
    for row in &r.table {
        table.row(vec![
            f(row.indistinguishability),
            f(row.fitted_max),
            f(row.error_bar),
            f(row.analytic_max),
            f(row.qfi_mixed),
            f(row.qfi_pure),
        ]);
        let _ = writeln!(
            report,
            "{:<10} {:<15.6} {:<15.6} {:<15.6} {:<15.6} {:.6}",
            f(row.indistinguishability),
            row.fitted_max,
            row.error_bar,
            row.analytic_max,
            row.qfi_mixed,
            row.qfi_pure
        );
    }
    Ok(RunOutput {
        report,
        files: vec![
            ("counts.csv".into(), counts.render()),
            ("fits.csv".into(), fits.render()),
            ("fi_curves.csv".into(), curves.render()),
            ("montecarlo.csv".into(), mc.render()),
            ("figure4b.csv".into(), table.render()),
        ],
    })
}

fn cmd_estimate_noise(params: &Parameters, target: f64) -> Result<RunOutput> {
    let e = estimate_noise(target)?;
    let mut csv = Csv::new(&[
        "target",
        "eps_hat",
        "bracket_lo",
        "bracket_hi",
        "iterations",
    ])
    .comment(provenance_comment(params))
    .comment("eps_hat: noise whose I=0 maximum Fisher information equals the target");
    csv.row(vec![
        f(target),
        f(e.eps_hat),
        f(e.bracket.0),
        f(e.bracket.1),
        e.iterations.to_string(),
    ]);
    Ok(RunOutput {
        report: format!(
            "eps_hat {} after {} bisections\n",
            f(e.eps_hat),
            e.iterations
        ),
        files: vec![("noise_estimate.csv".into(), csv.render())],
    })
}

/// Writes the outputs and their manifest into `dir`.
pub fn write_run(dir: &Path, params: &Parameters, output: &RunOutput) -> Result<RunManifest> {
    std::fs::create_dir_all(dir)?;
    for (name, content) in &output.files {
        std::fs::write(dir.join(name), content)?;
    }
    let manifest = RunManifest {
        command: params.command().into(),
        parameters: params.clone(),
        seed: params.seed(),
        version: env!("CARGO_PKG_VERSION").into(),
        outputs: output.files.iter().map(|(n, _)| n.clone()).collect(),
    };
    std::fs::write(
        dir.join(MANIFEST_FILE),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(manifest)
}

/// Re-executes a manifest and checks its outputs against the files beside it.
pub fn replay(manifest_path: &Path) -> Result<RunOutput> {
    let manifest = RunManifest::read(manifest_path)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let output = execute(&manifest.parameters)?;
    let mut differing = Vec::new();
    for name in &manifest.outputs {
        let recorded = std::fs::read_to_string(dir.join(name))?;
        match output.files.iter().find(|(n, _)| n == name) {
            Some((_, fresh)) if *fresh == recorded => {}
            _ => differing.push(name.clone()),
        }
    }
    if !differing.is_empty() {
        return Err(Error::ReplayMismatch(differing.join(", ")));
    }
    let mut report = output.report.clone();
    let _ = writeln!(
        report,
        "replay of {}: {} outputs identical",
        manifest.command,
        manifest.outputs.len()
    );
    Ok(RunOutput {
        report,
        files: output.files,
    })
}

#[derive(Debug, Parser)]
#[command(
    name = "indist-phase",
    version,
    about = "Fisher information of partially indistinguishable photon pairs"
)]
pub struct Cli {
    /// Output directory (default: $INDIST_PHASE_OUT, else ./indist-phase-out).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps and bootstrap replicas (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Read angle arguments in degrees instead of radians.
    #[arg(long, global = true)]
    pub degrees: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quantum Fisher information of the (noisy) probe.
    Qfi(QfiArgs),
    /// Classical Fisher information of a two-photon measurement along a phase grid.
    FiSweep(SweepArgs),
    /// Indistinguishability and noise thresholds for beating the shot-noise limit.
    Thresholds(ThresholdArgs),
    /// Outcome probabilities of a two-photon measurement at one phase.
    Probs(ProbsArgs),
    /// Simulated counting experiment with fits, bootstrap error bars and summary table.
    Experiment(ExperimentArgs),
    /// Noise level reproducing a measured maximum Fisher information at I = 0.
    EstimateNoise(EstimateArgs),
    /// Re-run a manifest and verify that its outputs are reproduced byte for byte.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct QfiArgs {
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    #[arg(long)]
    pub indist: f64,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, value_enum, default_value_t = QfiChoice::Formula)]
    pub method: QfiChoice,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated indistinguishability values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub indist: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, value_enum, default_value_t = MeasurementChoice::Standard)]
    pub measurement: MeasurementChoice,
    #[arg(long, default_value_t = 0.0)]
    pub phi_start: f64,
    /// End of the half-open phase range (default pi, or 180 with --degrees).
    #[arg(long)]
    pub phi_stop: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
}

#[derive(Debug, Args)]
pub struct ProbsArgs {
    #[arg(long)]
    pub indist: f64,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long)]
    pub phi: f64,
    #[arg(long, value_enum, default_value_t = MeasurementChoice::Standard)]
    pub measurement: MeasurementChoice,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// TOML configuration; built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the simulated white-noise weight.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub replicas: Option<usize>,
    /// Overrides the mean total counts per setting.
    #[arg(long)]
    pub counts: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub target: f64,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}

fn angle(value: f64, degrees: bool) -> f64 {
    if degrees {
        value.to_radians()
    } else {
        value
    }
}

/// Turns parsed arguments into stored parameters; `None` for `replay`.
pub fn resolve(cli: &Cli) -> Result<Option<Parameters>> {
    let deg = cli.degrees;
    Ok(Some(match &cli.command {
        Command::Qfi(a) => Parameters::Qfi {
            n: a.n,
            indistinguishability: a.indist,
            noise: a.noise,
            method: a.method,
        },
        Command::FiSweep(a) => Parameters::FiSweep {
            indistinguishability: a.indist.clone(),
            noise: a.noise,
            measurement: a.measurement,
            phi_start: angle(a.phi_start, deg),
            phi_stop: a.phi_stop.map_or(PI, |v| angle(v, deg)),
            points: a.points,
        },
        Command::Thresholds(a) => Parameters::Thresholds {
            n: a.n,
            noise: a.noise,
        },
        Command::Probs(a) => Parameters::Probs {
            indistinguishability: a.indist,
            noise: a.noise,
            phi: angle(a.phi, deg),
            measurement: a.measurement,
        },
        Command::Experiment(a) => {
            let mut config = match &a.config {
                Some(path) => ExperimentConfig::from_file(path)?,
                None => ExperimentConfig::default(),
            };
            if let Some(s) = a.seed {
                config.seed = s;
            }
            if let Some(e) = a.noise {
                config.noise = e;
            }
            if let Some(r) = a.replicas {
                config.replicas = r;
            }
            if let Some(c) = a.counts {
                config.mean_total_counts = c;
            }
            if deg {
                for p in &mut config.phases {
                    *p = p.to_radians();
                }
            }
            config.validate()?;
            Parameters::Experiment { config }
        }
        Command::EstimateNoise(a) => Parameters::EstimateNoise { target: a.target },
        Command::Replay(_) => return Ok(None),
    }))
}

/// Output directory: `--out`, then the environment variable, then a local default.
pub fn output_dir(cli: &Cli) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Executes a parsed command line and returns the report to print.
pub fn run(cli: &Cli) -> Result<String> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| match resolve(cli)? {
        Some(params) => {
            let output = execute(&params)?;
            let dir = output_dir(cli);
            write_run(&dir, &params, &output)?;
            Ok(format!("{}wrote {}\n", output.report, dir.display()))
        }
        None => {
            let Command::Replay(a) = &cli.command else {
                unreachable!("only replay resolves to no parameters")
            };
            let output = replay(&a.manifest)?;
            if let Some(dir) = &cli.out {
                let manifest = RunManifest::read(&a.manifest)?;
                write_run(dir, &manifest.parameters, &output)?;
            }
            Ok(output.report)
        }
    })
}

/// Entry point of the binary: parses `std::env::args`, prints, and returns the exit code.
pub fn main_from_env() -> i32 {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            print!("{report}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format() {
        assert_eq!(format_float(4.0), "4");
        assert_eq!(format_float(0.0), "0");
        assert_eq!(format_float(-0.0), "0");
        assert_eq!(format_float(0.5), "0.5");
        assert_eq!(format_float(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_float(3.712613784), "3.712613784");
        assert_eq!(format_float(1e-7), "1e-07");
        assert_eq!(format_float(-2.5e-9), "-2.5e-09");
        assert_eq!(format_float(123456789012.0), "123456789012");
        assert_eq!(format_float(1234567890123.0), "1.23456789012e+12");
        assert_eq!(format_float(9.9999999999999), "10");
        assert_eq!(format_float(0.0001), "0.0001");
        assert_eq!(format_float(f64::NAN), "nan");
        assert_eq!(format_float(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn csv_layout() {
        let mut csv = Csv::new(&["a", "b"]).comment("note");
        csv.row(vec!["1".into(), "2".into()]);
        assert_eq!(csv.render(), "# note\na,b\n1,2\n");
    }

    #[test]
    fn qfi_examples() {
        let run = |i, eps, method| {
            execute(&Parameters::Qfi {
                n: 1,
                indistinguishability: i,
                noise: eps,
                method,
            })
            .unwrap()
        };
        assert!(run(1.0, 0.0, QfiChoice::Formula)
            .report
            .contains("formula   4\n"));
        assert!(run(0.0, 0.0, QfiChoice::Formula)
            .report
            .contains("formula   2\n"));
        let all = run(1.0, 0.06, QfiChoice::All);
        assert_eq!(
            all.files[0]
                .1
                .lines()
                .filter(|l| l.starts_with("1,"))
                .count(),
            3
        );
        for line in all.files[0].1.lines().filter(|l| l.starts_with("1,")) {
            let v: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
            assert!((v - 3.71261).abs() < 5e-6, "{line}");
        }
        assert!(all.report.contains("max discrepancy"));
    }

    #[test]
    fn domain_errors_exit_two() {
        let e = execute(&Parameters::Qfi {
            n: 1,
            indistinguishability: 1.5,
            noise: 0.0,
            method: QfiChoice::Formula,
        })
        .unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let e = execute(&Parameters::Thresholds { n: 0, noise: 0.1 }).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn probs_hom() {
        let out = execute(&Parameters::Probs {
            indistinguishability: 1.0,
            noise: 0.0,
            phi: PI / 2.0,
            measurement: MeasurementChoice::Standard,
        })
        .unwrap();
        let csv = &out.files[0].1;
        assert!(csv.contains("\n2h000,0.5,"));
        assert!(csv.contains("\n02v00,0.5,"));
    }

    #[test]
    fn degrees_flag_converts_angles() {
        let cli = Cli::parse_from([
            "indist-phase",
            "--degrees",
            "probs",
            "--indist",
            "1",
            "--phi",
            "90",
        ]);
        match resolve(&cli).unwrap().unwrap() {
            Parameters::Probs { phi, .. } => assert!((phi - PI / 2.0).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sweep_reports_every_phase() {
        let out = execute(&Parameters::FiSweep {
            indistinguishability: vec![0.0, 1.0],
            noise: 0.0,
            measurement: MeasurementChoice::Standard,
            phi_start: 0.0,
            phi_stop: PI,
            points: 8,
        })
        .unwrap();
        let rows: Vec<&str> = out.files[0]
            .1
            .lines()
            .filter(|l| !l.starts_with('#'))
            .skip(1)
            .collect();
        assert_eq!(rows.len(), 16);
        for r in rows {
            let cells: Vec<&str> = r.split(',').collect();
            let i: f64 = cells[0].parse().unwrap();
            let v: f64 = cells[2].parse().unwrap();
            assert!((v - (2.0 * i + 2.0)).abs() < 1e-9, "{r}");
        }
    }

    #[test]
    fn manifest_round_trip() {
        let p = Parameters::Experiment {
            config: ExperimentConfig::default(),
        };
        let m = RunManifest {
            command: p.command().into(),
            parameters: p.clone(),
            seed: p.seed(),
            version: "0".into(),
            outputs: vec!["counts.csv".into()],
        };
        let back: RunManifest = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
