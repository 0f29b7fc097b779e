//! Simulation of the two-photon counting experiment.
//!
//! Coincidence counts are drawn as independent Poisson variables around
//! `mean_total_counts * p'(m|phi)`, normalized per phase, fitted outcome by
//! outcome with `A p(m|phi) + B`, and turned into a Fisher-information curve.
//! Error bars come from a parametric bootstrap of the observed counts; the
//! white-noise weight is recovered from the `I = 0` maximum.

use std::f64::consts::PI;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fisher::{
    fi_at, max_noisy_fi, maximize_over_phase, qfi_formula_mixed, qfi_formula_pure, CurveMethod,
    Degeneracy, FisherCurve, Provenance,
};
use crate::fock::occupation_label;
use crate::measurement::{
    standard_closed_form, standard_closed_form_derivative, OutcomeProbability, ProbabilityTable,
    STANDARD_OUTCOMES,
};
use crate::probes::{noise_level, unit_interval, PreparationAngle};

const OUTCOMES: usize = STANDARD_OUTCOMES.len();
const CONSTANT_TOL: f64 = 1e-12;
const NOISE_BRACKET: (f64, f64) = (0.0, 0.9);
const NOISE_TOL: f64 = 1e-6;
const MONOTONE_SAMPLES: usize = 16;
const TOP_TOL: f64 = 1e-9;

/// Labels of the occupation-resolved outcomes, in measurement order.
pub fn outcome_labels() -> Vec<String> {
    STANDARD_OUTCOMES.iter().map(occupation_label).collect()
}

/// `I_max = 2V / (1 + V)`: one minus the normalized dip minimum `(1 - V) / (1 + V)`.
pub fn i_max_from_visibility(visibility: f64) -> Result<f64> {
    let v = unit_interval("visibility", visibility)?;
    Ok(2.0 * v / (1.0 + v))
}

/// Settings of one simulated experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub i_values: Vec<f64>,
    /// Explicit phase grid; when empty, `phase_points` equally spaced phases on `[0, pi)`.
    pub phases: Vec<f64>,
    pub phase_points: usize,
    pub mean_total_counts: f64,
    /// White-noise weight of the simulated source.
    pub noise: f64,
    /// Indistinguishability ceiling; derived from `visibility` when absent.
    pub i_max: Option<f64>,
    pub visibility: f64,
    pub seed: u64,
    pub replicas: usize,
    /// Resolution of the fitted Fisher-information curves on `[0, pi)`.
    pub fi_points: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            i_values: vec![0.0, 0.23, 0.47, 0.70, 0.93],
            phases: Vec::new(),
            phase_points: 48,
            mean_total_counts: 1e5,
            noise: 0.06,
            i_max: None,
            visibility: 0.87,
            seed: 2019,
            replicas: 100,
            fi_points: 400,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn effective_i_max(&self) -> Result<f64> {
        match self.i_max {
            Some(v) => unit_interval("i_max", v),
            None => i_max_from_visibility(self.visibility),
        }
    }

    pub fn phase_grid(&self) -> Vec<f64> {
        if self.phases.is_empty() {
            uniform_grid(self.phase_points)
        } else {
            self.phases.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        unit_interval("visibility", self.visibility)?;
        let i_max = self.effective_i_max()?;
        noise_level(self.noise)?;
        if self.i_values.is_empty() {
            return Err(Error::Config("i_values is empty".into()));
        }
        for &i in &self.i_values {
            if !(0.0..=i_max + 1e-12).contains(&i) {
                return Err(Error::domain("indistinguishability", i, "[0, i_max]"));
            }
        }
        if self.phase_grid().len() < 3 {
            return Err(Error::Config(
                "at least three phases are needed to fit".into(),
            ));
        }
        if self.phase_grid().iter().any(|p| !p.is_finite()) {
            return Err(Error::Config("phases must be finite".into()));
        }
        if !(self.mean_total_counts > 0.0 && self.mean_total_counts.is_finite()) {
            return Err(Error::domain(
                "mean_total_counts",
                self.mean_total_counts,
                "(0, inf)",
            ));
        }
        if self.fi_points == 0 {
            return Err(Error::Config("fi_points must be positive".into()));
        }
        Ok(())
    }
}

/// `points` equally spaced phases on `[0, pi)`.
pub fn uniform_grid(points: usize) -> Vec<f64> {
    (0..points).map(|k| k as f64 * PI / points as f64).collect()
}

/// Noisy outcome distribution `(1 - eps) p + eps / 10` and its phase derivative.
pub fn noisy_standard_probabilities(
    indistinguishability: f64,
    noise: f64,
    phi: f64,
) -> ([f64; OUTCOMES], [f64; OUTCOMES]) {
    let p = standard_closed_form(indistinguishability, phi);
    let dp = standard_closed_form_derivative(indistinguishability, phi);
    let floor = noise / OUTCOMES as f64;
    (
        p.map(|v| (1.0 - noise) * v + floor),
        dp.map(|v| (1.0 - noise) * v),
    )
}

/// Coincidence counts of all outcomes at one setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub indistinguishability: f64,
    pub phi: f64,
    pub counts: Vec<(String, u64)>,
}

impl CountRecord {
    pub fn count(&self, label: &str) -> Option<u64> {
        self.counts
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, c)| *c)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|(_, c)| c).sum()
    }
}

/// Generator for replica `stream`; stream 0 is the observed run.
pub fn replica_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    // the mean is positive and finite, which is all the constructor checks
    Poisson::new(mean)
        .expect("positive Poisson mean")
        .sample(rng) as u64
}

fn simulate_with(config: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Vec<CountRecord> {
    let labels = outcome_labels();
    let mut records = Vec::new();
    for &i in &config.i_values {
        for phi in config.phase_grid() {
            let (p, _) = noisy_standard_probabilities(i, config.noise, phi);
            let counts = labels
                .iter()
                .zip(p)
                .map(|(l, p)| (l.clone(), poisson(rng, config.mean_total_counts * p)))
                .collect();
            records.push(CountRecord {
                indistinguishability: i,
                phi,
                counts,
            });
        }
    }
    records
}

/// One record per `(I, phi)`; deterministic in `config.seed`.
pub fn simulate_counts(config: &ExperimentConfig) -> Result<Vec<CountRecord>> {
    config.validate()?;
    Ok(simulate_with(config, &mut replica_rng(config.seed, 0)))
}

/// Normalized count rates of one indistinguishability value, outcome-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSeries {
    pub indistinguishability: f64,
    pub phis: Vec<f64>,
    /// `rates[m][j]`: fraction of the counts at phase `j` falling on outcome `m`.
    pub rates: Vec<Vec<f64>>,
}

/// Groups records by `I` (in first-seen order) and divides by the total counts at each phase.
///
/// Phases with no counts at all carry no rate information and are dropped.
pub fn normalized_rates(records: &[CountRecord]) -> Vec<RateSeries> {
    let mut out: Vec<RateSeries> = Vec::new();
    for r in records {
        let total = r.total();
        let idx = match out
            .iter()
            .position(|s| s.indistinguishability == r.indistinguishability)
        {
            Some(k) => k,
            None => {
                out.push(RateSeries {
                    indistinguishability: r.indistinguishability,
                    phis: Vec::new(),
                    rates: vec![Vec::new(); r.counts.len()],
                });
                out.len() - 1
            }
        };
        if total == 0 {
            continue;
        }
        let series = &mut out[idx];
        series.phis.push(r.phi);
        for (m, (_, c)) in r.counts.iter().enumerate() {
            series.rates[m].push(*c as f64 / total as f64);
        }
    }
    out
}

/// Exact rates of the forward model: the infinite-count limit of [`normalized_rates`].
pub fn expected_rates(config: &ExperimentConfig) -> Result<Vec<RateSeries>> {
    config.validate()?;
    let phis = config.phase_grid();
    Ok(config
        .i_values
        .iter()
        .map(|&i| {
            let mut rates: Vec<Vec<f64>> = (0..OUTCOMES)
                .map(|_| Vec::with_capacity(phis.len()))
                .collect();
            for &phi in &phis {
                let (p, _) = noisy_standard_probabilities(i, config.noise, phi);
                for (m, v) in p.into_iter().enumerate() {
                    rates[m].push(v);
                }
            }
            RateSeries {
                indistinguishability: i,
                phis: phis.clone(),
                rates,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitKind {
    /// Unconstrained least squares in `(A, B)`.
    Linear,
    /// The unconstrained background came out negative; refitted with `B = 0`.
    ZeroBackground,
    /// Constant theory curve: only the background `B` is estimated, `A = 0`.
    BackgroundOnly,
}

/// Least-squares fit of `A p(m|phi) + B` to the normalized rates of one outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub label: String,
    pub a: f64,
    pub b: f64,
    /// Sum of squared residuals.
    pub residual: f64,
    /// Covariance of `(A, B)`.
    pub covariance: [[f64; 2]; 2],
    pub kind: FitKind,
    /// Set when the fitted scale is negative, which no physical outcome produces.
    pub negative_scale: bool,
}

fn check_series(rates: &[f64], theory: &[f64]) -> Result<()> {
    if rates.len() != theory.len() {
        return Err(Error::Config(format!(
            "{} rates against {} theory points",
            rates.len(),
            theory.len()
        )));
    }
    if rates.len() < 3 {
        return Err(Error::Config(
            "at least three phases are needed to fit".into(),
        ));
    }
    Ok(())
}

/// Ordinary least squares of `rates ~ A theory + B`.
///
/// A negative `B` is replaced by the fit through the origin, since rates can
/// not go below zero where the theory vanishes.
pub fn fit_probability(label: &str, rates: &[f64], theory: &[f64]) -> Result<FitResult> {
    check_series(rates, theory)?;
    let m = rates.len() as f64;
    let (lo, hi) = theory
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &t| {
            (l.min(t), h.max(t))
        });
    if hi - lo < CONSTANT_TOL {
        return Err(Error::Unidentifiable(label.to_string()));
    }
    let sx: f64 = theory.iter().sum();
    let sy: f64 = rates.iter().sum();
    let sxx: f64 = theory.iter().map(|x| x * x).sum();
    let sxy: f64 = theory.iter().zip(rates).map(|(x, y)| x * y).sum();
    let det = m * sxx - sx * sx;
    let a = (m * sxy - sx * sy) / det;
    let b = (sxx * sy - sx * sxy) / det;
    let rss = |a: f64, b: f64| -> f64 {
        theory
            .iter()
            .zip(rates)
            .map(|(x, y)| (y - a * x - b).powi(2))
            .sum()
    };
    let (a, b, kind, covariance, residual) = if b >= 0.0 {
        let residual = rss(a, b);
        let s2 = if m > 2.0 { residual / (m - 2.0) } else { 0.0 };
        let cov = [
            [s2 * m / det, -s2 * sx / det],
            [-s2 * sx / det, s2 * sxx / det],
        ];
        (a, b, FitKind::Linear, cov, residual)
    } else {
        let a = sxy / sxx;
        let residual = rss(a, 0.0);
        let s2 = residual / (m - 1.0);
        (
            a,
            0.0,
            FitKind::ZeroBackground,
            [[s2 / sxx, 0.0], [0.0, 0.0]],
            residual,
        )
    };
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Numerical(format!(
            "fit of outcome {label} is not finite"
        )));
    }
    Ok(FitResult {
        label: label.to_string(),
        a,
        b,
        residual,
        covariance,
        kind,
        negative_scale: a < 0.0,
    })
}

/// Fit of a constant rate, used where the theory curve carries no phase information.
pub fn fit_background(label: &str, rates: &[f64]) -> Result<FitResult> {
    if rates.is_empty() {
        return Err(Error::Config("no rates to fit".into()));
    }
    let m = rates.len() as f64;
    let b = rates.iter().sum::<f64>() / m;
    let residual: f64 = rates.iter().map(|y| (y - b).powi(2)).sum();
    let s2 = if m > 1.0 { residual / (m - 1.0) } else { 0.0 };
    Ok(FitResult {
        label: label.to_string(),
        a: 0.0,
        b,
        residual,
        covariance: [[0.0, 0.0], [0.0, s2 / m]],
        kind: FitKind::BackgroundOnly,
        negative_scale: false,
    })
}

/// Fits every outcome of one series against the noiseless theory at its `I`.
///
/// Outcomes whose theory is constant on the grid keep a background-only fit so
/// that their share of the counts still enters the normalization.
pub fn fit_series(series: &RateSeries) -> Result<Vec<FitResult>> {
    let labels = outcome_labels();
    let theory: Vec<[f64; OUTCOMES]> = series
        .phis
        .iter()
        .map(|&phi| standard_closed_form(series.indistinguishability, phi))
        .collect();
    labels
        .iter()
        .enumerate()
        .map(|(m, label)| {
            let curve: Vec<f64> = theory.iter().map(|p| p[m]).collect();
            match fit_probability(label, &series.rates[m], &curve) {
                Err(Error::Unidentifiable(_)) => fit_background(label, &series.rates[m]),
                other => other,
            }
        })
        .collect()
}

fn ordered_fits(fits: &[FitResult]) -> Result<Vec<&FitResult>> {
    outcome_labels()
        .iter()
        .map(|l| {
            fits.iter()
                .find(|f| &f.label == l)
                .ok_or_else(|| Error::Config(format!("no fit for outcome {l}")))
        })
        .collect()
}

/// Renormalized fitted distribution and its analytic phase derivative at `phi`.
pub fn fitted_table(
    fits: &[FitResult],
    indistinguishability: f64,
    phi: f64,
) -> Result<ProbabilityTable> {
    let fits = ordered_fits(fits)?;
    let p = standard_closed_form(indistinguishability, phi);
    let dp = standard_closed_form_derivative(indistinguishability, phi);
    let raw: Vec<f64> = fits
        .iter()
        .zip(p)
        .map(|(f, p)| (f.a * p + f.b).max(0.0))
        .collect();
    let draw: Vec<f64> = fits.iter().zip(dp).map(|(f, dp)| f.a * dp).collect();
    let s: f64 = raw.iter().sum();
    if s <= 0.0 {
        return Err(Error::Numerical(format!(
            "fitted distribution vanishes at phi = {phi}"
        )));
    }
    let ds: f64 = draw.iter().sum();
    let entries = fits
        .iter()
        .zip(raw.iter().zip(&draw))
        .map(|(f, (&r, &dr))| {
            let q = r / s;
            OutcomeProbability {
                label: f.label.clone(),
                probability: q,
                derivative: (dr - q * ds) / s,
            }
        })
        .collect();
    Ok(ProbabilityTable {
        phi,
        complete: true,
        entries,
    })
}

/// Fisher information of the fitted, renormalized distribution along `grid`.
pub fn fi_from_fit(
    fits: &[FitResult],
    indistinguishability: f64,
    grid: &[f64],
    policy: Degeneracy,
) -> Result<FisherCurve> {
    crate::fisher::check_grid(grid)?;
    ordered_fits(fits)?;
    let mut curve = FisherCurve::new(Provenance {
        probe: None,
        measurement: "standard".into(),
        method: CurveMethod::Fitted,
    });
    let eval = |phi| fitted_table(fits, indistinguishability, phi);
    for &phi in grid {
        match fi_at(eval, phi, policy) {
            Ok(v) => curve.push(phi, v),
            Err(e @ Error::DivergentTerm { .. }) if policy == Degeneracy::LimitOrSkip => {
                curve.exclude(phi, e.to_string())
            }
            Err(e) => return Err(e),
        }
    }
    Ok(curve)
}

/// `(argmax, max)` of the fitted Fisher information, refined beyond any sampling grid.
pub fn max_fitted_fi(fits: &[FitResult], indistinguishability: f64) -> Result<(f64, f64)> {
    ordered_fits(fits)?;
    maximize_over_phase(|phi| {
        fi_at(
            |x| fitted_table(fits, indistinguishability, x),
            phi,
            Degeneracy::Limit,
        )
        .ok()
    })
    .ok_or_else(|| Error::Numerical("fitted Fisher information undefined everywhere".into()))
}

/// Fits and maximum Fisher information for one indistinguishability value.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesAnalysis {
    pub indistinguishability: f64,
    pub fits: Vec<FitResult>,
    pub argmax: f64,
    pub max_fi: f64,
}

fn analyse_series(series: &RateSeries) -> Result<SeriesAnalysis> {
    let fits = fit_series(series)?;
    let (argmax, max_fi) = max_fitted_fi(&fits, series.indistinguishability)?;
    Ok(SeriesAnalysis {
        indistinguishability: series.indistinguishability,
        fits,
        argmax,
        max_fi,
    })
}

/// Fits every series of a set of records.
pub fn analyse_records(records: &[CountRecord]) -> Result<Vec<SeriesAnalysis>> {
    normalized_rates(records)
        .iter()
        .map(analyse_series)
        .collect()
}

/// Bootstrap distribution of the maximum fitted Fisher information at one `I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub indistinguishability: f64,
    pub mean: f64,
    pub std: f64,
    pub samples: Vec<f64>,
}

/// Redraws every observed count as a Poisson variable with that mean.
pub fn resample(records: &[CountRecord], rng: &mut ChaCha8Rng) -> Vec<CountRecord> {
    records
        .iter()
        .map(|r| CountRecord {
            indistinguishability: r.indistinguishability,
            phi: r.phi,
            counts: r
                .counts
                .iter()
                .map(|(l, c)| (l.clone(), poisson(rng, *c as f64)))
                .collect(),
        })
        .collect()
}

fn mean_std(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Parametric bootstrap around `observed`: replica `r` uses stream `r + 1` of the seed.
///
/// Replicas are independent and run in parallel; the result does not depend on
/// the number of threads.
pub fn bootstrap_errorbars(
    observed: &[CountRecord],
    seed: u64,
    replicas: usize,
) -> Result<Vec<MonteCarloSummary>> {
    if replicas < 2 {
        return Err(Error::Config(format!(
            "need at least 2 replicas, got {replicas}"
        )));
    }
    let runs = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(seed, r as u64 + 1);
            analyse_records(&resample(observed, &mut rng))
        })
        .collect::<Result<Vec<_>>>()?;
    let n_series = runs[0].len();
    Ok((0..n_series)
        .map(|k| {
            let samples: Vec<f64> = runs.iter().map(|run| run[k].max_fi).collect();
            let (mean, std) = mean_std(&samples);
            MonteCarloSummary {
                indistinguishability: runs[0][k].indistinguishability,
                mean,
                std,
                samples,
            }
        })
        .collect())
}

/// Simulates the observed run and bootstraps it with `replicas` resamplings.
pub fn monte_carlo_errorbars(
    config: &ExperimentConfig,
    replicas: usize,
) -> Result<Vec<MonteCarloSummary>> {
    let observed = simulate_counts(config)?;
    bootstrap_errorbars(&observed, config.seed, replicas)
}

/// White-noise weight that reproduces a measured `I = 0` maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseEstimate {
    pub eps_hat: f64,
    pub bracket: (f64, f64),
    pub iterations: u32,
}

fn max_fi_at_zero(eps: f64) -> Result<f64> {
    Ok(max_noisy_fi(0.0, eps)?.1)
}

/// Bisection for `max_phi F'(0, eps, phi) = target` on `eps in [0, 0.9]`.
pub fn estimate_noise(target: f64) -> Result<NoiseEstimate> {
    let (lo, hi) = NOISE_BRACKET;
    let top = max_fi_at_zero(lo)?;
    let bottom = max_fi_at_zero(hi)?;
    if target.is_nan() || target <= 0.0 || target > top + 1e-12 || target < bottom {
        return Err(Error::TargetOutOfRange {
            target,
            lo: bottom,
            hi: top,
        });
    }
    let mut previous = top;
    for k in 1..=MONOTONE_SAMPLES {
        let eps = lo + (hi - lo) * k as f64 / MONOTONE_SAMPLES as f64;
        let v = max_fi_at_zero(eps)?;
        if v >= previous {
            return Err(Error::Numerical(format!(
                "maximum noisy Fisher information is not decreasing near eps = {eps}"
            )));
        }
        previous = v;
    }
    if target >= top - TOP_TOL {
        return Ok(NoiseEstimate {
            eps_hat: lo,
            bracket: (lo, lo),
            iterations: 0,
        });
    }
    let (mut a, mut b) = (lo, hi);
    let mut iterations = 0;
    while b - a > NOISE_TOL {
        let mid = (a + b) / 2.0;
        if max_fi_at_zero(mid)? > target {
            a = mid;
        } else {
            b = mid;
        }
        iterations += 1;
    }
    Ok(NoiseEstimate {
        eps_hat: (a + b) / 2.0,
        bracket: (a, b),
        iterations,
    })
}

/// One row of the summary table: measured maximum against the three theory curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Figure4bRow {
    pub indistinguishability: f64,
    pub fitted_max: f64,
    pub error_bar: f64,
    pub analytic_max: f64,
    pub qfi_mixed: f64,
    pub qfi_pure: f64,
}

/// Everything produced by one experiment run.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub i_max: f64,
    pub preparation_angles: Vec<PreparationAngle>,
    pub records: Vec<CountRecord>,
    pub analyses: Vec<SeriesAnalysis>,
    pub fitted_curves: Vec<FisherCurve>,
    pub monte_carlo: Vec<MonteCarloSummary>,
    /// Noise recovered from the `I = 0` series, when there is one and it is in range.
    pub noise_estimate: Option<NoiseEstimate>,
    /// Noise used for the theory columns: the estimate if available, else the simulated value.
    pub theory_noise: f64,
    pub table: Vec<Figure4bRow>,
}

/// Runs the full pipeline: counts, fits, curves, bootstrap, noise estimate and summary table.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let i_max = config.effective_i_max()?;
    let preparation_angles = config
        .i_values
        .iter()
        .map(|&i| PreparationAngle::for_indistinguishability(i, i_max))
        .collect::<Result<Vec<_>>>()?;
    let records = simulate_counts(config)?;
    let analyses = analyse_records(&records)?;
    let grid = uniform_grid(config.fi_points);
    let fitted_curves = analyses
        .iter()
        .map(|a| {
            fi_from_fit(
                &a.fits,
                a.indistinguishability,
                &grid,
                Degeneracy::LimitOrSkip,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let monte_carlo = bootstrap_errorbars(&records, config.seed, config.replicas)?;
    let noise_estimate = analyses
        .iter()
        .find(|a| a.indistinguishability == 0.0)
        .and_then(|a| estimate_noise(a.max_fi).ok());
    let theory_noise = noise_estimate.map_or(config.noise, |e| e.eps_hat);
    let table = analyses
        .iter()
        .zip(&monte_carlo)
        .map(|(a, mc)| {
            let i = a.indistinguishability;
            Ok(Figure4bRow {
                indistinguishability: i,
                fitted_max: a.max_fi,
                error_bar: mc.std,
                analytic_max: max_noisy_fi(i, theory_noise)?.1,
                qfi_mixed: qfi_formula_mixed(1, i, theory_noise)?,
                qfi_pure: qfi_formula_pure(1, i)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport {
        config: config.clone(),
        i_max,
        preparation_angles,
        records,
        analyses,
        fitted_curves,
        monte_carlo,
        noise_estimate,
        theory_noise,
        table,
    })
}

/// The summary table of [`run_experiment`].
pub fn figure4b_table(config: &ExperimentConfig) -> Result<Vec<Figure4bRow>> {
    Ok(run_experiment(config)?.table)
}
