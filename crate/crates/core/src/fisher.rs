//! Classical and quantum Fisher information, closed forms, and the Cramér-Rao bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::PhaseEncoder;
use crate::fock::{
    eigendecompose, expectation, DensityOperator, FockBasis, HermitianMatrix, HermitianOperator,
    PureState, QuantumState,
};
use crate::measurement::{probabilities_with, ProbabilityTable, Probe, ProjectiveMeasurement};
use crate::probes::{noise_level, unit_interval, ProbeSpec};

/// Probabilities below this are treated as zero in Fisher sums.
pub const P_FLOOR: f64 = 1e-12;
/// A derivative this large on a vanishing probability makes the term divergent.
pub const DP_TOL: f64 = 1e-9;
/// Eigenvalue-pair support cutoff for the spectral QFI.
pub const LAMBDA_FLOOR: f64 = 1e-12;

const LIMIT_STEP: f64 = 1e-3;
const MAX_GRID: usize = 2000;
const GOLDEN_TOL: f64 = 1e-8;

/// `sum_m (dp_m)^2 / p_m`.
///
/// Outcomes with `p < P_FLOOR` are dropped when their derivative is negligible and
/// reported as [`Error::DivergentTerm`] otherwise.
pub fn classical_fi(table: &ProbabilityTable) -> Result<f64> {
    let mut total = 0.0;
    for e in &table.entries {
        if e.probability < P_FLOOR {
            if e.derivative.abs() >= DP_TOL {
                return Err(Error::DivergentTerm {
                    outcome: e.label.clone(),
                    phi: table.phi,
                });
            }
            continue;
        }
        total += e.derivative * e.derivative / e.probability;
    }
    Ok(total)
}

/// What to do at phases where some outcome probability vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Degeneracy {
    /// Plain [`classical_fi`]: vanishing terms are dropped or raise a divergence.
    Strict,
    /// Replace vanishing terms by their limit, extrapolated from both sides.
    Limit,
    /// As `Limit`, but record the phase as excluded instead of failing.
    LimitOrSkip,
}

fn term(p: f64, dp: f64) -> Option<f64> {
    if p < P_FLOOR {
        (dp.abs() < DP_TOL).then_some(0.0)
    } else {
        Some(dp * dp / p)
    }
}

/// Fisher information at `phi` for a family of tables produced by `eval`.
///
/// With [`Degeneracy::Limit`], each vanishing-probability term is evaluated at
/// `phi +- h` and `phi +- h/2` and Richardson-extrapolated to `h -> 0`, which
/// recovers removable `0/0` limits such as `d(cos^2)^2 / cos^2` at `pi/2`.
pub fn fi_at<F>(eval: F, phi: f64, policy: Degeneracy) -> Result<f64>
where
    F: Fn(f64) -> Result<ProbabilityTable>,
{
    let table = eval(phi)?;
    if policy == Degeneracy::Strict {
        return classical_fi(&table);
    }
    let degenerate: Vec<usize> = table
        .entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.probability < P_FLOOR)
        .map(|(i, _)| i)
        .collect();
    let mut total: f64 = table
        .entries
        .iter()
        .filter(|e| e.probability >= P_FLOOR)
        .map(|e| e.derivative * e.derivative / e.probability)
        .sum();
    if degenerate.is_empty() {
        return Ok(total);
    }
    let offsets = [LIMIT_STEP, -LIMIT_STEP, LIMIT_STEP / 2.0, -LIMIT_STEP / 2.0];
    let tables = offsets
        .iter()
        .map(|h| eval(phi + h))
        .collect::<Result<Vec<_>>>()?;
    for &i in &degenerate {
        let mut values = [0.0; 4];
        for (slot, t) in values.iter_mut().zip(&tables) {
            let e = &t.entries[i];
            *slot = term(e.probability, e.derivative).ok_or_else(|| Error::DivergentTerm {
                outcome: e.label.clone(),
                phi,
            })?;
        }
        let coarse = (values[0] + values[1]) / 2.0;
        let fine = (values[2] + values[3]) / 2.0;
        total += ((4.0 * fine - coarse) / 3.0).max(0.0);
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveMethod {
    Analytic,
    Numeric,
    Fitted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub probe: Option<ProbeSpec>,
    pub measurement: String,
    pub method: CurveMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedPoint {
    pub phi: f64,
    pub reason: String,
}

/// Sampled `phi -> F(phi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherCurve {
    pub phis: Vec<f64>,
    pub values: Vec<f64>,
    pub provenance: Provenance,
    pub excluded: Vec<ExcludedPoint>,
}

impl FisherCurve {
    pub fn new(provenance: Provenance) -> Self {
        Self {
            phis: Vec::new(),
            values: Vec::new(),
            provenance,
            excluded: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, phi: f64, value: f64) {
        self.phis.push(phi);
        self.values.push(value.max(0.0));
    }

    pub(crate) fn exclude(&mut self, phi: f64, reason: String) {
        self.excluded.push(ExcludedPoint { phi, reason });
    }

    /// `(argmax, max)` over the sampled points.
    pub fn max(&self) -> Option<(f64, f64)> {
        self.phis
            .iter()
            .zip(&self.values)
            .map(|(&p, &v)| (p, v))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn min_value(&self) -> Option<f64> {
        self.values.iter().copied().min_by(|a, b| a.total_cmp(b))
    }
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config("phase grid is empty".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(
            "phase grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Classical Fisher information of `measurement` along a phase grid.
pub fn fi_curve(
    probe: &Probe,
    spec: Option<ProbeSpec>,
    measurement: &ProjectiveMeasurement,
    grid: &[f64],
    noise: f64,
    policy: Degeneracy,
) -> Result<FisherCurve> {
    check_grid(grid)?;
    let encoder = PhaseEncoder::new(probe.basis())?;
    let mut curve = FisherCurve::new(Provenance {
        probe: spec,
        measurement: measurement.kind().name().to_string(),
        method: CurveMethod::Numeric,
    });
    let eval = |phi| probabilities_with(&encoder, probe, measurement, phi, noise);
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

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QfiMethod {
    Variance,
    Spectral,
    Formula,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QfiResult {
    pub value: f64,
    pub method: QfiMethod,
    pub probe: Option<ProbeSpec>,
}

/// `4 (<H^2> - <H>^2)` for a pure probe.
pub fn qfi_pure(state: &PureState, h: &HermitianOperator) -> Result<QfiResult> {
    let norm_sqr = state.norm_sqr();
    if (norm_sqr - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm_sqr });
    }
    let mean = expectation(state, h)?;
    let h2 = state.expect_matrix(&(h.matrix() * h.matrix())).re;
    Ok(QfiResult {
        value: (4.0 * (h2 - mean * mean)).max(0.0),
        method: QfiMethod::Variance,
        probe: None,
    })
}

/// `2 sum_{ij} (l_i - l_j)^2 / (l_i + l_j) |<e_i|H|e_j>|^2` over pairs with `l_i + l_j > LAMBDA_FLOOR`.
pub fn qfi_mixed(rho: &DensityOperator, h: &HermitianOperator) -> Result<QfiResult> {
    rho.basis().ensure_same(h.basis())?;
    let spec = eigendecompose(rho)?;
    if let Some(&low) = spec.eigenvalues.first() {
        if low < -1e-10 {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {low:e}"
            )));
        }
    }
    let v = &spec.eigenvectors;
    let h_eig = v.adjoint() * h.matrix() * v;
    let l = &spec.eigenvalues;
    let mut total = 0.0;
    for i in 0..l.len() {
        for j in 0..l.len() {
            let sum = l[i] + l[j];
            if sum <= LAMBDA_FLOOR {
                continue;
            }
            let diff = l[i] - l[j];
            total += diff * diff / sum * h_eig[(i, j)].norm_sqr();
        }
    }
    Ok(QfiResult {
        value: 2.0 * total,
        method: QfiMethod::Spectral,
        probe: None,
    })
}

fn check_pairs(n: u32) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidPhotonNumber(n))
    } else {
        Ok(())
    }
}

/// `2 n^2 I + 2 n`.
pub fn qfi_formula_pure(n: u32, indistinguishability: f64) -> Result<f64> {
    check_pairs(n)?;
    let i = unit_interval("indistinguishability", indistinguishability)?;
    let n = n as f64;
    Ok(2.0 * n * n * i + 2.0 * n)
}

/// The two endpoints whose `I`-weighted mixture is the pure-probe QFI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexDecomposition {
    /// `2n(n+1)`, the twin-Fock value.
    pub indistinguishable: f64,
    /// `2n`, the single-port value.
    pub distinguishable: f64,
    pub weight: f64,
}

impl ConvexDecomposition {
    pub fn value(&self) -> f64 {
        self.weight * self.indistinguishable + (1.0 - self.weight) * self.distinguishable
    }
}

pub fn qfi_convex_decomposition(n: u32, indistinguishability: f64) -> Result<ConvexDecomposition> {
    check_pairs(n)?;
    let weight = unit_interval("indistinguishability", indistinguishability)?;
    let nf = n as f64;
    Ok(ConvexDecomposition {
        indistinguishable: 2.0 * nf * (nf + 1.0),
        distinguishable: 2.0 * nf,
        weight,
    })
}

/// `(1 - eps)^2 / (1 - (1 - 2/d) eps)`, the white-noise reduction of the QFI.
pub fn noise_reduction_factor(n: u32, noise: f64) -> Result<f64> {
    check_pairs(n)?;
    let eps = noise_level(noise)?;
    let d = FockBasis::dimension_for(2 * n) as f64;
    Ok((1.0 - eps).powi(2) / (1.0 - (1.0 - 2.0 / d) * eps))
}

pub fn qfi_formula_mixed(n: u32, indistinguishability: f64, noise: f64) -> Result<f64> {
    Ok(noise_reduction_factor(n, noise)? * qfi_formula_pure(n, indistinguishability)?)
}

/// Noise-dependent thresholds for beating the shot-noise limit `2n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub n: u32,
    pub noise: f64,
    pub dimension: usize,
    /// Least indistinguishability whose mixed-probe QFI reaches `2n`.
    pub i_min: f64,
    /// Noise level at which `i_min` reaches 1.
    pub eps_max: f64,
}

pub fn thresholds(n: u32, noise: f64) -> Result<Thresholds> {
    check_pairs(n)?;
    let eps = noise_level(noise)?;
    let dimension = FockBasis::dimension_for(2 * n);
    let (d, nf) = (dimension as f64, n as f64);
    let i_min = (2.0 + d * (1.0 - eps)) * eps / (nf * d * (1.0 - eps).powi(2));
    let eps_max = (2.0 + (2.0 * nf + 1.0) * d - (4.0 + 4.0 * d + d * d + 8.0 * nf * d).sqrt())
        / (2.0 * (nf + 1.0) * d);
    Ok(Thresholds {
        n,
        noise: eps,
        dimension,
        i_min,
        eps_max,
    })
}

/// One term `num / den` of a closed form; identically-zero numerators are skipped.
fn ratio(coeff: f64, num: f64, den: f64, phi: f64) -> Result<f64> {
    if coeff == 0.0 {
        return Ok(0.0);
    }
    if den.abs() <= P_FLOOR {
        return Err(Error::DenominatorUnderflow { phi });
    }
    Ok(coeff * num / den)
}

/// Fisher information of the occupation-resolved measurement on the noisy two-photon probe.
///
/// Five terms grouped by outcome pair; a term whose prefactor vanishes
/// identically (`I = 0`, `I = 1` or `eps = 1`) is skipped.
pub fn noisy_fi_formula(indistinguishability: f64, noise: f64, phi: f64) -> Result<f64> {
    let i = unit_interval("indistinguishability", indistinguishability)?;
    let eps = noise_level(noise)?;
    let (sh, ch) = (phi / 2.0).sin_cos();
    let (s, c) = phi.sin_cos();
    let q = 1.0 - eps;
    let dis = (1.0 - i).powi(2) * q * q;
    let ind = i * i * q * q;
    Ok(ratio(
        4.0 * dis,
        ch.powi(6) * sh * sh,
        eps / 10.0 + (1.0 - i) * q * ch.powi(4),
        phi,
    )? + ratio(
        4.0 * dis,
        ch * ch * sh.powi(6),
        eps / 10.0 + (1.0 - i) * q * sh.powi(4),
        phi,
    )? + ratio(4.0 * ind, c * c * s * s, eps / 10.0 + i * q * c * c, phi)?
        + ratio(
            dis,
            c * c * s * s,
            eps / 5.0 + (1.0 - i) * q * s * s / 2.0,
            phi,
        )?
        + ratio(
            2.0 * ind,
            c * c * s * s,
            eps / 10.0 + i * q * s * s / 2.0,
            phi,
        )?)
}

/// `4 (1 + I)(1 + cos 2phi) / (3 - I + (1 + I) cos 2phi)` for the coarse measurement.
pub fn coarse_fi_formula(indistinguishability: f64, phi: f64) -> Result<f64> {
    let i = unit_interval("indistinguishability", indistinguishability)?;
    let c2 = (2.0 * phi).cos();
    let den = 3.0 - i + (1.0 + i) * c2;
    if den <= P_FLOOR {
        return Err(Error::DenominatorUnderflow { phi });
    }
    Ok(4.0 * (1.0 + i) * (1.0 + c2) / den)
}

/// Fisher information of the superposition measurement for fully indistinguishable photons.
///
/// `20 (1-eps)^2 (4 eps - 5) sin^2 2phi / (25 (1-eps)^2 cos^2 2phi - (5 - 4 eps)^2)`,
/// which equals `4 (1-eps)^2 / (1 - 4 eps / 5)` at `phi = pi/4`.
pub fn mprime_fi_formula(noise: f64, phi: f64) -> Result<f64> {
    let eps = noise_level(noise)?;
    let q2 = (1.0 - eps).powi(2);
    let (s2, c2) = (2.0 * phi).sin_cos();
    let den = 25.0 * q2 * c2 * c2 - (5.0 - 4.0 * eps).powi(2);
    if den.abs() <= P_FLOOR {
        return Err(Error::DenominatorUnderflow { phi });
    }
    Ok(20.0 * q2 * (4.0 * eps - 5.0) * s2 * s2 / den)
}

/// Quantum Cramér-Rao bound `1 / F` on the estimator variance.
pub fn qcrb(fisher: f64) -> Result<f64> {
    if fisher.is_nan() || fisher <= 0.0 {
        return Err(Error::domain("fisher information", fisher, "(0, inf)"));
    }
    Ok(1.0 / fisher)
}

/// Maximizes `f` over one period `[0, pi)`: a 2000-point scan, then golden-section refinement.
///
/// `f` may return `None` at phases where it is undefined; those points are skipped.
pub fn maximize_over_phase<F>(f: F) -> Option<(f64, f64)>
where
    F: Fn(f64) -> Option<f64>,
{
    let step = std::f64::consts::PI / MAX_GRID as f64;
    let (k, best) = (0..MAX_GRID)
        .filter_map(|k| f(k as f64 * step).map(|v| (k, v)))
        .max_by(|a, b| a.1.total_cmp(&b.1))?;
    let centre = k as f64 * step;
    let g = |x: f64| f(x).unwrap_or(f64::NEG_INFINITY);
    let (mut a, mut b) = (centre - step, centre + step);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (g(x1), g(x2));
    while b - a > GOLDEN_TOL {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = g(x1);
        }
    }
    let x = (a + b) / 2.0;
    let fx = g(x);
    if fx >= best {
        Some((x.rem_euclid(std::f64::consts::PI), fx))
    } else {
        Some((centre, best))
    }
}

/// `max_phi` of [`noisy_fi_formula`].
pub fn max_noisy_fi(indistinguishability: f64, noise: f64) -> Result<(f64, f64)> {
    unit_interval("indistinguishability", indistinguishability)?;
    noise_level(noise)?;
    maximize_over_phase(|phi| noisy_fi_formula(indistinguishability, noise, phi).ok()).ok_or_else(
        || Error::Numerical("noisy Fisher information undefined on the whole grid".into()),
    )
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn weight(n: u32, k: u32, i: f64) -> f64 {
    binomial(n, k) * i.powi((n - k) as i32) * (1.0 - i).powi(k as i32)
}

/// Closed-form `4 Var(J_mu)` and `4 Var(J_nu)` on the pure probe.
///
/// Component `k` of the probe is `|n, n-k>_mu |0, k>_nu`; the two generators
/// have zero mean on it and contribute `2n(n-k+1) - k` and `k` respectively.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceSplit {
    pub mu: f64,
    pub nu: f64,
}

pub fn variance_split(n: u32, indistinguishability: f64) -> Result<VarianceSplit> {
    check_pairs(n)?;
    let i = unit_interval("indistinguishability", indistinguishability)?;
    let nf = n as f64;
    let mut mu = 2.0 * nf * (nf + 1.0) * i.powi(n as i32) + nf * (1.0 - i).powi(n as i32);
    let mut nu = nf * (1.0 - i).powi(n as i32);
    for k in 1..n {
        let w = weight(n, k, i);
        let kf = k as f64;
        mu += w * (2.0 * nf * (nf - kf + 1.0) - kf);
        nu += w * kf;
    }
    Ok(VarianceSplit { mu, nu })
}

/// `sum_{k=1}^{n-1} C(n,k) I^(n-k) (1-I)^k` by direct summation.
pub fn binomial_interior_sum(n: u32, i: f64) -> f64 {
    (1..n).map(|k| weight(n, k, i)).sum()
}

/// `sum_{k=1}^{n-1} k C(n,k) I^(n-k) (1-I)^k` by direct summation.
pub fn binomial_interior_moment(n: u32, i: f64) -> f64 {
    (1..n).map(|k| k as f64 * weight(n, k, i)).sum()
}

/// Closed forms of the two interior sums: `1 - I^n - (1-I)^n` and `n (1-I)(1 - (1-I)^(n-1))`.
pub fn binomial_interior_closed_forms(n: u32, i: f64) -> (f64, f64) {
    let nf = n as f64;
    let dis = 1.0 - i;
    (
        1.0 - i.powi(n as i32) - dis.powi(n as i32),
        nf * dis * (1.0 - dis.powi(n as i32 - 1)),
    )
}
