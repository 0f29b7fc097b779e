//! Projective measurements on the two-photon sector and their outcome statistics.
//!
//! Three families are provided: the occupation-resolved measurement, the
//! coarse measurement that cannot tell the spatial modes apart, and the
//! superposition measurement that stays optimal under white noise for fully
//! indistinguishable photons.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::evolution::{PhaseEncoder, PhaseUnitary};
use crate::fock::{occupation_label, DensityOperator, FockBasis, Occupation, PureState, C64};

const ORTHO_TOL: f64 = 1e-12;
const COMPLETE_TOL: f64 = 1e-10;
const PROB_TOL: f64 = 1e-12;

/// Occupation-resolved outcomes in the order the experiment lists them.
pub const STANDARD_OUTCOMES: [Occupation; 10] = [
    [2, 0, 0, 0],
    [0, 2, 0, 0],
    [1, 1, 0, 0],
    [1, 0, 1, 0],
    [0, 1, 0, 1],
    [1, 0, 0, 1],
    [0, 1, 1, 0],
    [0, 0, 1, 1],
    [0, 0, 2, 0],
    [0, 0, 0, 2],
];

/// One rank-1 projector `|v><v|` with its label.
#[derive(Debug, Clone)]
pub struct ProjectorSpec {
    pub label: String,
    pub vector: PureState,
}

/// An outcome is the sum of one or more mutually orthogonal rank-1 projectors.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub label: String,
    pub projectors: Vec<ProjectorSpec>,
}

impl Outcome {
    pub fn rank(&self) -> usize {
        self.projectors.len()
    }

    fn single(p: ProjectorSpec) -> Self {
        Outcome {
            label: p.label.clone(),
            projectors: vec![p],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementKind {
    Standard,
    Coarse,
    NoisyOptimal,
    Custom,
}

impl MeasurementKind {
    pub fn name(self) -> &'static str {
        match self {
            MeasurementKind::Standard => "standard",
            MeasurementKind::Coarse => "coarse",
            MeasurementKind::NoisyOptimal => "noisy-optimal",
            MeasurementKind::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProjectiveMeasurement {
    kind: MeasurementKind,
    basis: Arc<FockBasis>,
    outcomes: Vec<Outcome>,
    complete: bool,
}

impl ProjectiveMeasurement {
    /// Validates pairwise orthogonality of all projectors and records completeness.
    pub fn new(
        kind: MeasurementKind,
        basis: Arc<FockBasis>,
        outcomes: Vec<Outcome>,
    ) -> Result<Self> {
        let vectors: Vec<&PureState> = outcomes
            .iter()
            .flat_map(|o| o.projectors.iter().map(|p| &p.vector))
            .collect();
        for (i, a) in vectors.iter().enumerate() {
            basis.ensure_same(a.basis())?;
            for b in &vectors[i + 1..] {
                let overlap = a.inner(b)?.norm();
                if overlap > ORTHO_TOL {
                    return Err(Error::InvalidMeasurement(format!(
                        "projectors overlap by {overlap:e}"
                    )));
                }
            }
        }
        let d = basis.dim();
        let sum = vectors
            .iter()
            .fold(DMatrix::<C64>::zeros(d, d), |acc, v| acc + v.projector());
        let complete = crate::fock::max_abs(&(sum - DMatrix::identity(d, d))) < COMPLETE_TOL;
        Ok(Self {
            kind,
            basis,
            outcomes,
            complete,
        })
    }

    pub fn kind(&self) -> MeasurementKind {
        self.kind
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn labels(&self) -> Vec<&str> {
        self.outcomes.iter().map(|o| o.label.as_str()).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }
}

fn ket(basis: &Arc<FockBasis>, occ: Occupation) -> Result<ProjectorSpec> {
    Ok(ProjectorSpec {
        label: occupation_label(&occ),
        vector: PureState::basis_state(basis, &occ)?,
    })
}

fn superposition(
    basis: &Arc<FockBasis>,
    first: Occupation,
    second: Occupation,
    sign: f64,
) -> Result<ProjectorSpec> {
    let mut v = DVector::zeros(basis.dim());
    let h = std::f64::consts::FRAC_1_SQRT_2;
    v[basis.require_index(&first)?] = C64::new(h, 0.0);
    v[basis.require_index(&second)?] = C64::new(sign * h, 0.0);
    let prefix = if sign > 0.0 { "plus" } else { "minus" };
    Ok(ProjectorSpec {
        label: format!(
            "{prefix}:{}/{}",
            occupation_label(&first),
            occupation_label(&second)
        ),
        vector: PureState::new(basis.clone(), v)?,
    })
}

/// The ten occupation-basis projectors.
pub fn standard_measurement(basis: &Arc<FockBasis>) -> Result<ProjectiveMeasurement> {
    basis.require_two_photons("standard_measurement")?;
    let outcomes = STANDARD_OUTCOMES
        .iter()
        .map(|&occ| ket(basis, occ).map(Outcome::single))
        .collect::<Result<_>>()?;
    ProjectiveMeasurement::new(MeasurementKind::Standard, basis.clone(), outcomes)
}

/// Double/coincidence events with spatial modes unresolved: `2h0`, `02v`, `1h1v`.
pub fn coarse_measurement(basis: &Arc<FockBasis>) -> Result<ProjectiveMeasurement> {
    basis.require_two_photons("coarse_measurement")?;
    let groups: [(&str, &[Occupation]); 3] = [
        ("2h0", &[[2, 0, 0, 0], [1, 0, 1, 0], [0, 0, 2, 0]]),
        ("02v", &[[0, 2, 0, 0], [0, 1, 0, 1], [0, 0, 0, 2]]),
        (
            "1h1v",
            &[[1, 1, 0, 0], [1, 0, 0, 1], [0, 1, 1, 0], [0, 0, 1, 1]],
        ),
    ];
    let outcomes = groups
        .iter()
        .map(|(label, occs)| {
            Ok(Outcome {
                label: (*label).to_string(),
                projectors: occs.iter().map(|&o| ket(basis, o)).collect::<Result<_>>()?,
            })
        })
        .collect::<Result<_>>()?;
    ProjectiveMeasurement::new(MeasurementKind::Coarse, basis.clone(), outcomes)
}

/// Symmetric/antisymmetric pairs of the bunched and split kets plus four occupation kets.
pub fn noisy_optimal_measurement(basis: &Arc<FockBasis>) -> Result<ProjectiveMeasurement> {
    basis.require_two_photons("noisy_optimal_measurement")?;
    let pairs = [
        ([2, 0, 0, 0], [0, 2, 0, 0]),
        ([1, 0, 1, 0], [0, 1, 0, 1]),
        ([1, 0, 0, 1], [0, 1, 1, 0]),
    ];
    let mut outcomes = Vec::with_capacity(10);
    for (a, b) in pairs {
        outcomes.push(Outcome::single(superposition(basis, a, b, 1.0)?));
        outcomes.push(Outcome::single(superposition(basis, a, b, -1.0)?));
    }
    for occ in [[1, 1, 0, 0], [0, 0, 1, 1], [0, 0, 2, 0], [0, 0, 0, 2]] {
        outcomes.push(Outcome::single(ket(basis, occ)?));
    }
    ProjectiveMeasurement::new(MeasurementKind::NoisyOptimal, basis.clone(), outcomes)
}

/// Probe entering the interferometer.
#[derive(Debug, Clone)]
pub enum Probe {
    Pure(PureState),
    Mixed(DensityOperator),
}

impl Probe {
    pub fn basis(&self) -> &Arc<FockBasis> {
        match self {
            Probe::Pure(s) => s.basis(),
            Probe::Mixed(r) => r.basis(),
        }
    }
}

impl From<PureState> for Probe {
    fn from(s: PureState) -> Self {
        Probe::Pure(s)
    }
}

impl From<DensityOperator> for Probe {
    fn from(r: DensityOperator) -> Self {
        Probe::Mixed(r)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeProbability {
    pub label: String,
    pub probability: f64,
    pub derivative: f64,
}

/// Outcome probabilities and their phase derivatives at one phase.
#[derive(Debug, Clone)]
pub struct ProbabilityTable {
    pub phi: f64,
    pub complete: bool,
    pub entries: Vec<OutcomeProbability>,
}

impl ProbabilityTable {
    pub fn probability(&self, label: &str) -> Option<f64> {
        self.entry(label).map(|e| e.probability)
    }

    pub fn derivative(&self, label: &str) -> Option<f64> {
        self.entry(label).map(|e| e.derivative)
    }

    fn entry(&self, label: &str) -> Option<&OutcomeProbability> {
        self.entries.iter().find(|e| e.label == label)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.probability).sum()
    }
}

/// Computes outcome statistics after phase encoding, reusing the encoder's cached spectrum.
pub fn probabilities_with(
    encoder: &PhaseEncoder,
    probe: &Probe,
    measurement: &ProjectiveMeasurement,
    phi: f64,
    noise: f64,
) -> Result<ProbabilityTable> {
    let unitary = encoder.unitary(phi);
    probabilities_at(&unitary, probe, measurement, noise)
}

/// Statistics for an already-built unitary.
///
/// A nonzero `noise` applies `p' = (1 - eps) p + eps * rank / d` to a pure probe;
/// mixed probes already carry their noise and reject a second dose.
pub fn probabilities_at(
    unitary: &PhaseUnitary,
    probe: &Probe,
    measurement: &ProjectiveMeasurement,
    noise: f64,
) -> Result<ProbabilityTable> {
    let eps = crate::probes::noise_level(noise)?;
    probe.basis().ensure_same(measurement.basis())?;
    let d = measurement.basis().dim() as f64;
    let mut entries = Vec::with_capacity(measurement.len());
    match probe {
        Probe::Pure(state) => {
            let out = unitary.apply(state)?;
            let dout = unitary.derivative_state(state)?;
            for outcome in measurement.outcomes() {
                let (mut p, mut dp) = (0.0, 0.0);
                for proj in &outcome.projectors {
                    let v = proj.vector.amplitudes();
                    let a = v.dotc(out.amplitudes());
                    let da = v.dotc(&dout);
                    p += a.norm_sqr();
                    dp += 2.0 * (a.conj() * da).re;
                }
                let rank = outcome.rank() as f64;
                entries.push(OutcomeProbability {
                    label: outcome.label.clone(),
                    probability: (1.0 - eps) * p + eps * rank / d,
                    derivative: (1.0 - eps) * dp,
                });
            }
        }
        Probe::Mixed(rho) => {
            if eps != 0.0 {
                return Err(Error::DoubleNoise);
            }
            let out = unitary.apply(rho)?;
            let dout = unitary.derivative_density(rho)?;
            for outcome in measurement.outcomes() {
                let (mut p, mut dp) = (0.0, 0.0);
                for proj in &outcome.projectors {
                    let v = proj.vector.amplitudes();
                    p += v.dotc(&(out.matrix() * v)).re;
                    dp += v.dotc(&(&dout * v)).re;
                }
                entries.push(OutcomeProbability {
                    label: outcome.label.clone(),
                    probability: p,
                    derivative: dp,
                });
            }
        }
    }
    for e in &mut entries {
        if !(-PROB_TOL..=1.0 + PROB_TOL).contains(&e.probability) {
            return Err(Error::Numerical(format!(
                "probability {} of outcome {} is out of range",
                e.probability, e.label
            )));
        }
        e.probability = e.probability.clamp(0.0, 1.0);
    }
    Ok(ProbabilityTable {
        phi: unitary.phi(),
        complete: measurement.is_complete(),
        entries,
    })
}

/// One-shot convenience: builds the encoder for the probe's sector and evaluates at `phi`.
pub fn probabilities(
    probe: &Probe,
    measurement: &ProjectiveMeasurement,
    phi: f64,
    noise: f64,
) -> Result<ProbabilityTable> {
    let encoder = PhaseEncoder::new(probe.basis())?;
    probabilities_with(&encoder, probe, measurement, phi, noise)
}

/// Closed-form noiseless occupation probabilities of the two-photon interferometer,
/// in [`STANDARD_OUTCOMES`] order.
pub fn standard_closed_form(indistinguishability: f64, phi: f64) -> [f64; 10] {
    let i = indistinguishability;
    let (s, c) = phi.sin_cos();
    let (sh, ch) = (phi / 2.0).sin_cos();
    [
        i * s * s / 2.0,
        i * s * s / 2.0,
        i * c * c,
        (1.0 - i) * s * s / 4.0,
        (1.0 - i) * s * s / 4.0,
        (1.0 - i) * ch.powi(4),
        (1.0 - i) * sh.powi(4),
        0.0,
        0.0,
        0.0,
    ]
}

/// Phase derivatives of [`standard_closed_form`].
pub fn standard_closed_form_derivative(indistinguishability: f64, phi: f64) -> [f64; 10] {
    let i = indistinguishability;
    let s2 = (2.0 * phi).sin();
    let (sh, ch) = (phi / 2.0).sin_cos();
    [
        i * s2 / 2.0,
        i * s2 / 2.0,
        -i * s2,
        (1.0 - i) * s2 / 4.0,
        (1.0 - i) * s2 / 4.0,
        -2.0 * (1.0 - i) * ch.powi(3) * sh,
        2.0 * (1.0 - i) * sh.powi(3) * ch,
        0.0,
        0.0,
        0.0,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::build_basis;
    use crate::probes::{mixed_probe, pure_probe};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

    fn two() -> Arc<FockBasis> {
        build_basis(1).unwrap()
    }

    #[test]
    fn families_are_orthonormal_and_complete() {
        let b = two();
        let m = standard_measurement(&b).unwrap();
        assert_eq!(m.len(), 10);
        assert!(m.is_complete());
        assert_eq!(m.outcomes()[2].label, "1h1v00");
        assert_eq!(
            m.outcomes()[2].projectors[0]
                .vector
                .amplitude(&[1, 1, 0, 0])
                .re,
            1.0
        );

        let c = coarse_measurement(&b).unwrap();
        assert_eq!(c.len(), 3);
        assert!(c.is_complete());

        let o = noisy_optimal_measurement(&b).unwrap();
        assert_eq!(o.len(), 10);
        assert!(o.is_complete());
        for out in o.outcomes() {
            assert_abs_diff_eq!(out.projectors[0].vector.norm_sqr(), 1.0, epsilon = 1e-15);
        }
        assert_eq!(o.labels()[0], "plus:2h000/02v00");
    }

    #[test]
    fn wrong_sector_rejected() {
        let b = build_basis(2).unwrap();
        assert!(standard_measurement(&b).is_err());
        assert!(coarse_measurement(&b).is_err());
        assert!(noisy_optimal_measurement(&b).is_err());
    }

    #[test]
    fn overlapping_projectors_rejected() {
        let b = two();
        let a = ket(&b, [1, 1, 0, 0]).unwrap();
        let dup = Outcome::single(a.clone());
        assert!(ProjectiveMeasurement::new(
            MeasurementKind::Custom,
            b.clone(),
            vec![Outcome::single(a), dup]
        )
        .is_err());
    }

    #[test]
    fn standard_examples() {
        let b = two();
        let m = standard_measurement(&b).unwrap();
        let t = probabilities(&pure_probe(&b, 1.0).unwrap().into(), &m, FRAC_PI_4, 0.0).unwrap();
        assert_abs_diff_eq!(t.probability("2h000").unwrap(), 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(t.probability("02v00").unwrap(), 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(t.probability("1h1v00").unwrap(), 0.5, epsilon = 1e-12);

        let t = probabilities(&pure_probe(&b, 0.5).unwrap().into(), &m, FRAC_PI_3, 0.0).unwrap();
        assert_abs_diff_eq!(t.probability("1h001v").unwrap(), 0.28125, epsilon = 1e-12);
        assert_abs_diff_eq!(t.total(), 1.0, epsilon = 1e-12);

        let t = probabilities(&pure_probe(&b, 1.0).unwrap().into(), &m, 0.0, 0.06).unwrap();
        assert_abs_diff_eq!(t.probability("1h1v00").unwrap(), 0.946, epsilon = 1e-12);

        let rho = mixed_probe(&b, 1.0, 0.06).unwrap();
        let t = probabilities(&rho.into(), &m, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(t.probability("1h1v00").unwrap(), 0.946, epsilon = 1e-12);
    }

    #[test]
    fn double_noise_rejected() {
        let b = two();
        let m = standard_measurement(&b).unwrap();
        let rho = mixed_probe(&b, 1.0, 0.06).unwrap();
        assert!(matches!(
            probabilities(&rho.into(), &m, 0.3, 0.06),
            Err(Error::DoubleNoise)
        ));
    }

    #[test]
    fn coarse_examples() {
        let b = two();
        let m = coarse_measurement(&b).unwrap();
        let t = probabilities(&pure_probe(&b, 1.0).unwrap().into(), &m, FRAC_PI_2, 0.0).unwrap();
        assert_abs_diff_eq!(t.probability("2h0").unwrap(), 0.5, epsilon = 1e-12);
        let t = probabilities(&pure_probe(&b, 0.3).unwrap().into(), &m, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(t.probability("1h1v").unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn closed_forms_match_matrix_route() {
        let b = two();
        let enc = PhaseEncoder::new(&b).unwrap();
        let m = standard_measurement(&b).unwrap();
        for &i in &[0.0, 0.25, 0.5, 0.75, 1.0] {
            let probe: Probe = pure_probe(&b, i).unwrap().into();
            for k in 0..100 {
                let phi = k as f64 * PI / 50.0;
                let t = probabilities_with(&enc, &probe, &m, phi, 0.0).unwrap();
                let p = standard_closed_form(i, phi);
                let dp = standard_closed_form_derivative(i, phi);
                for (j, e) in t.entries.iter().enumerate() {
                    assert_abs_diff_eq!(e.probability, p[j], epsilon = 1e-10);
                    assert_abs_diff_eq!(e.derivative, dp[j], epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn mixed_derivative_matches_finite_difference() {
        let b = two();
        let enc = PhaseEncoder::new(&b).unwrap();
        let probe: Probe = mixed_probe(&b, 0.6, 0.1).unwrap().into();
        for m in [
            standard_measurement(&b).unwrap(),
            noisy_optimal_measurement(&b).unwrap(),
            coarse_measurement(&b).unwrap(),
        ] {
            for &phi in &[0.3, 1.1, 2.5] {
                let h = 1e-5;
                let t = probabilities_with(&enc, &probe, &m, phi, 0.0).unwrap();
                let tp = probabilities_with(&enc, &probe, &m, phi + h, 0.0).unwrap();
                let tm = probabilities_with(&enc, &probe, &m, phi - h, 0.0).unwrap();
                for j in 0..t.entries.len() {
                    let fd = (tp.entries[j].probability - tm.entries[j].probability) / (2.0 * h);
                    assert_abs_diff_eq!(t.entries[j].derivative, fd, epsilon = 1e-7);
                }
            }
        }
    }
}
