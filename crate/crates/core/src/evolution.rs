//! Phase encoding `U(phi) = exp(-i phi H)` and the two-photon wave-plate interferometer.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    eigendecompose, hamiltonian, DensityOperator, FockBasis, HermitianMatrix, HermitianOperator,
    Occupation, PureState, Spectrum, C64,
};

const MINUS_I: C64 = C64::new(0.0, -1.0);

/// Generator and its cached spectrum for one sector; hands out unitaries at any phase.
#[derive(Debug, Clone)]
pub struct PhaseEncoder {
    basis: Arc<FockBasis>,
    hamiltonian: Arc<HermitianOperator>,
    spectrum: Arc<Spectrum>,
}

impl PhaseEncoder {
    pub fn new(basis: &Arc<FockBasis>) -> Result<Self> {
        let h = hamiltonian(basis);
        let spectrum = eigendecompose(&h)?;
        Ok(Self {
            basis: basis.clone(),
            hamiltonian: Arc::new(h),
            spectrum: Arc::new(spectrum),
        })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.hamiltonian
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn unitary(&self, phi: f64) -> PhaseUnitary {
        let matrix = self
            .spectrum
            .reconstruct_with(|l| (MINUS_I * phi * l).exp());
        PhaseUnitary {
            basis: self.basis.clone(),
            hamiltonian: self.hamiltonian.clone(),
            spectrum: self.spectrum.clone(),
            phi,
            matrix,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PhaseUnitary {
    basis: Arc<FockBasis>,
    hamiltonian: Arc<HermitianOperator>,
    spectrum: Arc<Spectrum>,
    phi: f64,
    matrix: DMatrix<C64>,
}

impl PhaseUnitary {
    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.hamiltonian
    }

    pub fn apply<S: Evolve>(&self, state: &S) -> Result<S> {
        state.evolve(self)
    }

    /// `d/dphi U|psi> = -i H U |psi>` (unnormalized).
    pub fn derivative_state(&self, state: &PureState) -> Result<DVector<C64>> {
        let out = self.apply(state)?;
        Ok(self.hamiltonian.apply(out.amplitudes()) * MINUS_I)
    }

    /// `d/dphi U rho U^dagger = -i [H, U rho U^dagger]`.
    pub fn derivative_density(&self, state: &DensityOperator) -> Result<DMatrix<C64>> {
        let out = self.apply(state)?;
        let h = self.hamiltonian.matrix();
        let rho = out.matrix();
        Ok((h * rho - rho * h) * MINUS_I)
    }
}

/// Builds `exp(-i phi H)` for the sector of `basis`.
pub fn phase_unitary(basis: &Arc<FockBasis>, phi: f64) -> Result<PhaseUnitary> {
    Ok(PhaseEncoder::new(basis)?.unitary(phi))
}

/// States that can be pushed through a [`PhaseUnitary`].
pub trait Evolve: Sized {
    fn evolve(&self, unitary: &PhaseUnitary) -> Result<Self>;
}

impl Evolve for PureState {
    fn evolve(&self, u: &PhaseUnitary) -> Result<Self> {
        self.basis().ensure_same(&u.basis)?;
        PureState::normalized(self.basis().clone(), &u.matrix * self.amplitudes())
    }
}

impl Evolve for DensityOperator {
    fn evolve(&self, u: &PhaseUnitary) -> Result<Self> {
        self.basis().ensure_same(&u.basis)?;
        let m = &u.matrix * self.matrix() * u.matrix.adjoint();
        Ok(DensityOperator::new_unchecked(self.basis().clone(), m))
    }
}

pub fn apply<S: Evolve>(unitary: &PhaseUnitary, state: &S) -> Result<S> {
    unitary.apply(state)
}

pub fn derivative_state(unitary: &PhaseUnitary, state: &PureState) -> Result<DVector<C64>> {
    unitary.derivative_state(state)
}

/// Physical angle `theta` of the phase-encoding half-wave plate; the phase is `4 theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HwpSetting {
    pub theta: f64,
}

impl HwpSetting {
    pub fn from_phase(phi: f64) -> Self {
        Self { theta: phi / 4.0 }
    }

    pub fn phase(&self) -> f64 {
        4.0 * self.theta
    }
}

/// Applies a single-particle mode transformation to every photon of a Fock state.
///
/// Column `k` of `single_particle` is the image of `a_k^dagger`:
/// `a_k^dagger -> sum_j T[j][k] a_j^dagger`.
pub fn linear_optics(state: &PureState, single_particle: &DMatrix<C64>) -> Result<PureState> {
    if single_particle.shape() != (4, 4) {
        return Err(Error::Config("single-particle map must be 4x4".into()));
    }
    let basis = state.basis();
    let mut out = DVector::<C64>::zeros(basis.dim());
    for (idx, occ) in basis.states().iter().enumerate() {
        let amp = state.amplitudes()[idx];
        if amp.norm() == 0.0 {
            continue;
        }
        // monomial coefficients of prod_k (a_k^dag)^{n_k} / sqrt(n_k!)
        let mut poly: HashMap<Occupation, C64> = HashMap::new();
        poly.insert([0; 4], amp / factorial_product(occ).sqrt());
        for (k, &count) in occ.iter().enumerate() {
            for _ in 0..count {
                let mut next = HashMap::with_capacity(poly.len() * 2);
                for (mono, coef) in &poly {
                    for j in 0..4 {
                        let t = single_particle[(j, k)];
                        if t.norm() == 0.0 {
                            continue;
                        }
                        let mut raised = *mono;
                        raised[j] += 1;
                        *next.entry(raised).or_insert(C64::new(0.0, 0.0)) += coef * t;
                    }
                }
                poly = next;
            }
        }
        for (mono, coef) in poly {
            let target = basis.require_index(&mono)?;
            out[target] += coef * factorial_product(&mono).sqrt();
        }
    }
    PureState::normalized(basis.clone(), out)
}

fn factorial_product(occ: &Occupation) -> f64 {
    occ.iter()
        .map(|&n| (1..=n).map(|k| k as f64).product::<f64>())
        .product()
}

/// Single-particle map of the phase wave plate:
/// `h -> cos2t h + sin2t v`, `v -> sin2t h - cos2t v` in both spatial modes.
pub fn hwp_mode_map(theta: f64) -> DMatrix<C64> {
    let (s, c) = (2.0 * theta).sin_cos();
    let mut t = DMatrix::zeros(4, 4);
    for base in [0, 2] {
        t[(base, base)] = C64::new(c, 0.0);
        t[(base + 1, base)] = C64::new(s, 0.0);
        t[(base, base + 1)] = C64::new(s, 0.0);
        t[(base + 1, base + 1)] = C64::new(-c, 0.0);
    }
    t
}

/// Output of the polarization interferometer for a two-photon input at wave-plate angle `theta`.
pub fn hwp_interferometer(state: &PureState, theta: f64) -> Result<PureState> {
    state.basis().require_two_photons("hwp_interferometer")?;
    linear_optics(state, &hwp_mode_map(theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{build_basis, max_abs};
    use crate::probes::pure_probe;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_8, PI};

    fn prob(s: &PureState, occ: Occupation) -> f64 {
        s.amplitude(&occ).norm_sqr()
    }

    #[test]
    fn identity_at_zero_and_group_law() {
        for n in 1..=3 {
            let b = build_basis(n).unwrap();
            let enc = PhaseEncoder::new(&b).unwrap();
            let d = b.dim();
            let id = DMatrix::<C64>::identity(d, d);
            assert!(max_abs(&(enc.unitary(0.0).matrix() - &id)) < 1e-12);
            let (u1, u2, u12) = (enc.unitary(0.37), enc.unitary(1.21), enc.unitary(1.58));
            assert!(max_abs(&(u1.matrix() * u2.matrix() - u12.matrix())) < 1e-10);
            let u = enc.unitary(2.3);
            assert!(max_abs(&(u.matrix() * u.matrix().adjoint() - &id)) < 1e-10);
        }
    }

    #[test]
    fn indistinguishable_pair_bunches_at_quarter_turn() {
        let b = build_basis(1).unwrap();
        let u = phase_unitary(&b, FRAC_PI_2).unwrap();
        let out = u.apply(&pure_probe(&b, 1.0).unwrap()).unwrap();
        assert!(prob(&out, [1, 1, 0, 0]) < 1e-24);
    }

    #[test]
    fn apply_preserves_norm_and_trace() {
        let b = build_basis(2).unwrap();
        let u = phase_unitary(&b, 0.9).unwrap();
        let s = pure_probe(&b, 0.3).unwrap();
        assert!(u.apply(&s).is_ok());
        let rho = crate::probes::mixed_probe(&b, 0.3, 0.2).unwrap();
        let out = u.apply(&rho).unwrap();
        assert_abs_diff_eq!(out.trace(), 1.0, epsilon = 1e-10);
        let zero = phase_unitary(&b, 0.0).unwrap();
        assert!((zero.apply(&s).unwrap().amplitudes() - s.amplitudes()).norm() < 1e-12);
    }

    #[test]
    fn derivative_matches_central_difference() {
        let b = build_basis(1).unwrap();
        let enc = PhaseEncoder::new(&b).unwrap();
        let s = pure_probe(&b, 0.6).unwrap();
        for &phi in &[0.1, 0.8, 2.0] {
            let h = 1e-5;
            let fd = (enc.unitary(phi + h).matrix() * s.amplitudes()
                - enc.unitary(phi - h).matrix() * s.amplitudes())
                / C64::new(2.0 * h, 0.0);
            let an = enc.unitary(phi).derivative_state(&s).unwrap();
            assert!((fd - an).norm() < 1e-8);
        }
    }

    #[test]
    fn bunching_probability_derivative() {
        let b = build_basis(1).unwrap();
        let enc = PhaseEncoder::new(&b).unwrap();
        let i = 0.7;
        let s = pure_probe(&b, i).unwrap();
        let k = b.index_of(&[1, 1, 0, 0]).unwrap();
        for &phi in &[0.0, 0.4, 1.3, 2.9] {
            let u = enc.unitary(phi);
            let out = u.apply(&s).unwrap();
            let d = u.derivative_state(&s).unwrap();
            let dp = 2.0 * (out.amplitudes()[k].conj() * d[k]).re;
            assert_abs_diff_eq!(dp, -i * (2.0 * phi).sin(), epsilon = 1e-12);
        }
    }

    #[test]
    fn hwp_examples() {
        let b = build_basis(1).unwrap();
        let out = hwp_interferometer(&pure_probe(&b, 1.0).unwrap(), FRAC_PI_8).unwrap();
        assert_abs_diff_eq!(prob(&out, [2, 0, 0, 0]), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(prob(&out, [0, 2, 0, 0]), 0.5, epsilon = 1e-15);
        assert!(prob(&out, [1, 1, 0, 0]) < 1e-30);

        let out = hwp_interferometer(&pure_probe(&b, 0.0).unwrap(), 0.0).unwrap();
        assert_abs_diff_eq!(prob(&out, [1, 0, 0, 1]), 1.0, epsilon = 1e-15);

        let out = hwp_interferometer(&pure_probe(&b, 0.0).unwrap(), PI / 4.0).unwrap();
        assert_abs_diff_eq!(prob(&out, [0, 1, 1, 0]), 1.0, epsilon = 1e-15);

        assert!(
            hwp_interferometer(&pure_probe(&build_basis(2).unwrap(), 0.5).unwrap(), 0.1).is_err()
        );
    }

    #[test]
    fn hwp_output_has_the_interference_amplitudes() {
        // amplitudes of the output state as functions of phi = 4 theta
        let b = build_basis(1).unwrap();
        for &i in &[0.0, 0.35, 1.0] {
            let probe = pure_probe(&b, i).unwrap();
            for k in 0..24 {
                let phi = k as f64 * 0.27;
                let out = hwp_interferometer(&probe, phi / 4.0).unwrap();
                let (si, sd) = (i.sqrt(), (1.0 - i).sqrt());
                let expected = [
                    ([2, 0, 0, 0], si * 2f64.sqrt() * phi.sin() / 2.0),
                    ([0, 2, 0, 0], -si * 2f64.sqrt() * phi.sin() / 2.0),
                    ([1, 1, 0, 0], -si * phi.cos()),
                    ([1, 0, 1, 0], sd * phi.sin() / 2.0),
                    ([0, 1, 0, 1], -sd * phi.sin() / 2.0),
                    ([1, 0, 0, 1], -sd * (phi / 2.0).cos().powi(2)),
                    ([0, 1, 1, 0], sd * (phi / 2.0).sin().powi(2)),
                ];
                for (occ, amp) in expected {
                    assert_abs_diff_eq!(out.amplitude(&occ).re, amp, epsilon = 1e-13);
                    assert_abs_diff_eq!(out.amplitude(&occ).im, 0.0, epsilon = 1e-15);
                }
            }
        }
    }

    #[test]
    fn generic_unitary_is_a_single_particle_rotation() {
        // exp(-i phi J) rotates each (alpha, beta) pair by phi/2; check on n = 2
        let b = build_basis(2).unwrap();
        let enc = PhaseEncoder::new(&b).unwrap();
        let phi: f64 = 0.77;
        let (s, c) = (phi / 2.0).sin_cos();
        let mut t = DMatrix::zeros(4, 4);
        for base in [0, 2] {
            t[(base, base)] = C64::new(c, 0.0);
            t[(base + 1, base)] = C64::new(s, 0.0);
            t[(base, base + 1)] = C64::new(-s, 0.0);
            t[(base + 1, base + 1)] = C64::new(c, 0.0);
        }
        let probe = pure_probe(&b, 0.45).unwrap();
        let via_optics = linear_optics(&probe, &t).unwrap();
        let via_unitary = enc.unitary(phi).apply(&probe).unwrap();
        assert!((via_optics.amplitudes() - via_unitary.amplitudes()).norm() < 1e-12);
    }

    #[test]
    fn hwp_matches_generic_unitary_up_to_global_phase() {
        let b = build_basis(1).unwrap();
        let enc = PhaseEncoder::new(&b).unwrap();
        for &i in &[0.0, 0.25, 0.5, 0.75, 1.0] {
            let probe = pure_probe(&b, i).unwrap();
            for k in 0..40 {
                let phi = k as f64 * PI / 20.0;
                let a = hwp_interferometer(&probe, HwpSetting::from_phase(phi).theta).unwrap();
                let g = enc.unitary(phi).apply(&probe).unwrap();
                assert!(a.equal_up_to_phase(&g, 1e-10), "I={i} phi={phi}");
            }
        }
    }
}
