//! Probe states: partially indistinguishable photon pairs, with and without white noise.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{DensityOperator, FockBasis, PureState, C64};

const CLAMP_TOL: f64 = 1e-12;

/// Physical scenario: `n` photon pairs, indistinguishability `I`, white-noise weight `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec {
    pub n: u32,
    pub indistinguishability: f64,
    pub noise: f64,
}

impl ProbeSpec {
    pub fn new(n: u32, indistinguishability: f64, noise: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPhotonNumber(n));
        }
        Ok(Self {
            n,
            indistinguishability: unit_interval("indistinguishability", indistinguishability)?,
            noise: noise_level(noise)?,
        })
    }

    pub fn pure(n: u32, indistinguishability: f64) -> Result<Self> {
        Self::new(n, indistinguishability, 0.0)
    }
}

/// Clamps values within rounding distance of `[0, 1]` and rejects the rest.
pub(crate) fn unit_interval(name: &'static str, value: f64) -> Result<f64> {
    if !(-CLAMP_TOL..=1.0 + CLAMP_TOL).contains(&value) {
        return Err(Error::domain(name, value, "[0, 1]"));
    }
    Ok(value.clamp(0.0, 1.0))
}

pub(crate) fn noise_level(eps: f64) -> Result<f64> {
    if !(-CLAMP_TOL..1.0).contains(&eps) {
        return Err(Error::domain("noise", eps, "[0, 1)"));
    }
    Ok(eps.max(0.0))
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `(alpha_mu^dag)^n (beta_I^dag)^n |0> / n!` with `beta_I = sqrt(I) beta_mu + sqrt(1-I) beta_nu`.
///
/// The weight on `|n, n-k, 0, k>` is `C(n,k) I^(n-k) (1-I)^k`.
pub fn pure_probe(basis: &Arc<FockBasis>, indistinguishability: f64) -> Result<PureState> {
    let n = basis.pairs().ok_or(Error::InvalidPhotonNumber(0))?;
    let i = unit_interval("indistinguishability", indistinguishability)?;
    let mut amplitudes = DVector::zeros(basis.dim());
    for k in 0..=n {
        let amp =
            binomial(n, k).sqrt() * i.powf((n - k) as f64 / 2.0) * (1.0 - i).powf(k as f64 / 2.0);
        let idx = basis.require_index(&[n, n - k, 0, k])?;
        amplitudes[idx] = C64::new(amp, 0.0);
    }
    PureState::normalized(basis.clone(), amplitudes)
}

/// `(1 - eps) |psi><psi| + eps * Identity / d`.
pub fn mixed_probe(
    basis: &Arc<FockBasis>,
    indistinguishability: f64,
    noise: f64,
) -> Result<DensityOperator> {
    let eps = noise_level(noise)?;
    let psi = pure_probe(basis, indistinguishability)?;
    Ok(white_noise(&psi, eps))
}

/// Mixes an arbitrary pure state with the maximally mixed state of its sector.
pub fn white_noise(state: &PureState, eps: f64) -> DensityOperator {
    let d = state.basis().dim();
    let matrix = state.projector() * C64::new(1.0 - eps, 0.0)
        + DMatrix::<C64>::identity(d, d) * C64::new(eps / d as f64, 0.0);
    DensityOperator::new_unchecked(state.basis().clone(), matrix)
}

/// Angle of the preparation wave plate together with the measured indistinguishability ceiling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreparationAngle {
    pub varphi: f64,
    pub i_max: f64,
}

impl PreparationAngle {
    pub fn new(varphi: f64, i_max: f64) -> Result<Self> {
        unit_interval("i_max", i_max)?;
        Ok(Self { varphi, i_max })
    }

    /// Angle that prepares `indistinguishability` under ceiling `i_max` (smallest nonnegative root).
    pub fn for_indistinguishability(indistinguishability: f64, i_max: f64) -> Result<Self> {
        let i_max = unit_interval("i_max", i_max)?;
        let i = unit_interval("indistinguishability", indistinguishability)?;
        if i > i_max + CLAMP_TOL {
            return Err(Error::domain("indistinguishability", i, "[0, i_max]"));
        }
        let ratio = if i_max == 0.0 {
            0.0
        } else {
            (i / i_max).min(1.0)
        };
        Ok(Self {
            varphi: ratio.sqrt().asin() / 2.0,
            i_max,
        })
    }

    pub fn indistinguishability(&self) -> f64 {
        indistinguishability_from_angle(self.varphi, self.i_max).unwrap_or(0.0)
    }
}

/// `i_max * sin^2(2 varphi)`, clamped to `[0, i_max]`.
pub fn indistinguishability_from_angle(varphi: f64, i_max: f64) -> Result<f64> {
    let i_max = unit_interval("i_max", i_max)?;
    let s = (2.0 * varphi).sin();
    Ok((i_max * s * s).clamp(0.0, i_max))
}

/// Two-photon probe `sqrt(I)|1_h 1_v 0 0> + sqrt(1-I)|1_h 0 0 1_v>` prepared at wave-plate angle `varphi`.
pub fn two_photon_probe(basis: &Arc<FockBasis>, varphi: f64, i_max: f64) -> Result<PureState> {
    basis.require_two_photons("two_photon_probe")?;
    pure_probe(basis, indistinguishability_from_angle(varphi, i_max)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{build_basis, creation_matrix, eigendecompose, Mode};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

    #[test]
    fn corner_probes_are_single_kets() {
        let basis = build_basis(1).unwrap();
        let ind = pure_probe(&basis, 1.0).unwrap();
        assert_eq!(ind.amplitude(&[1, 1, 0, 0]).re, 1.0);
        let dis = pure_probe(&basis, 0.0).unwrap();
        assert_eq!(dis.amplitude(&[1, 0, 0, 1]).re, 1.0);
        for n in 1..=5 {
            let b = build_basis(n).unwrap();
            let p = pure_probe(&b, 1.0).unwrap();
            assert_eq!(p.amplitude(&[n, n, 0, 0]).re, 1.0);
            assert_eq!(p.amplitudes().iter().filter(|z| z.norm() > 0.0).count(), 1);
            let p = pure_probe(&b, 0.0).unwrap();
            assert_eq!(p.amplitude(&[n, 0, 0, n]).re, 1.0);
        }
    }

    #[test]
    fn matches_creation_operator_expansion() {
        // apply (alpha_mu^dag)^n (sqrt(I) beta_mu^dag + sqrt(1-I) beta_nu^dag)^n / n! to vacuum
        for n in 1..=3u32 {
            for &i in &[0.0f64, 0.3, 0.5, 1.0] {
                let mut basis = FockBasis::with_photons(0);
                let mut v = DVector::from_element(1, C64::new(1.0, 0.0));
                for _ in 0..n {
                    let up = creation_matrix(&basis, Mode::AlphaMu);
                    v = &up.matrix * v;
                    basis = up.target;
                }
                for _ in 0..n {
                    let bm = creation_matrix(&basis, Mode::BetaMu);
                    let bn = creation_matrix(&basis, Mode::BetaNu);
                    let step = bm.matrix * C64::new(i.sqrt(), 0.0)
                        + bn.matrix * C64::new((1.0 - i).sqrt(), 0.0);
                    v = step * v;
                    basis = bm.target;
                }
                let fact: f64 = (1..=n).map(|k| k as f64).product();
                v /= C64::new(fact, 0.0);
                let probe = pure_probe(&build_basis(n).unwrap(), i).unwrap();
                assert!((&v - probe.amplitudes()).norm() < 1e-13, "n={n} I={i}");
            }
        }
    }

    #[test]
    fn normalized_on_dense_grid() {
        for n in 1..=5 {
            let b = build_basis(n).unwrap();
            for k in 0..=50 {
                let p = pure_probe(&b, k as f64 / 50.0).unwrap();
                assert_abs_diff_eq!(p.norm_sqr(), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn out_of_domain_rejected() {
        let b = build_basis(1).unwrap();
        assert!(pure_probe(&b, 1.1).is_err());
        assert!(pure_probe(&b, -0.1).is_err());
        assert!(pure_probe(&b, 1.0 + 1e-14).is_ok());
        assert!(mixed_probe(&b, 0.5, 1.0).is_err());
        assert!(mixed_probe(&b, 0.5, -0.2).is_err());
        assert!(ProbeSpec::new(0, 0.5, 0.0).is_err());
        assert!(indistinguishability_from_angle(0.3, 1.5).is_err());
    }

    #[test]
    fn mixed_probe_examples() {
        let b = build_basis(1).unwrap();
        let rho = mixed_probe(&b, 0.4, 0.0).unwrap();
        let psi = pure_probe(&b, 0.4).unwrap();
        assert!((rho.matrix() - psi.projector()).norm() < 1e-15);

        let near = mixed_probe(&b, 0.4, 1.0 - 1e-9).unwrap();
        let mm = DensityOperator::maximally_mixed(&b);
        assert!(crate::fock::max_abs(&(near.matrix() - mm.matrix())) < 1e-8);

        let rho = mixed_probe(&b, 1.0, 0.06).unwrap();
        assert_abs_diff_eq!(rho.population(&[1, 1, 0, 0]), 0.946, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-14);
        let spec = eigendecompose(&rho).unwrap();
        assert_abs_diff_eq!(spec.eigenvalues[9], 0.946, epsilon = 1e-12);
        for l in &spec.eigenvalues[..9] {
            assert_abs_diff_eq!(*l, 0.006, epsilon = 1e-12);
        }
        assert!(DensityOperator::new(b.clone(), rho.matrix().clone()).is_ok());
    }

    #[test]
    fn mixed_eigenvalues_general() {
        for n in 1..=3 {
            let b = build_basis(n).unwrap();
            let d = b.dim() as f64;
            let eps = 0.2;
            let spec = eigendecompose(&mixed_probe(&b, 0.7, eps).unwrap()).unwrap();
            let top = spec.eigenvalues.last().unwrap();
            assert_abs_diff_eq!(*top, 1.0 - eps + eps / d, epsilon = 1e-12);
            for l in &spec.eigenvalues[..spec.dim() - 1] {
                assert_abs_diff_eq!(*l, eps / d, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn angle_map() {
        assert_abs_diff_eq!(
            indistinguishability_from_angle(FRAC_PI_4, 0.93).unwrap(),
            0.93,
            epsilon = 1e-15
        );
        assert_eq!(indistinguishability_from_angle(0.0, 0.4).unwrap(), 0.0);
        assert_abs_diff_eq!(
            indistinguishability_from_angle(FRAC_PI_8, 1.0).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        let angle = PreparationAngle::for_indistinguishability(0.47, 0.93).unwrap();
        assert_abs_diff_eq!(angle.indistinguishability(), 0.47, epsilon = 1e-14);
    }

    #[test]
    fn two_photon_probe_examples() {
        let b = build_basis(1).unwrap();
        let s = two_photon_probe(&b, FRAC_PI_4, 1.0).unwrap();
        assert_abs_diff_eq!(s.amplitude(&[1, 1, 0, 0]).re, 1.0, epsilon = 1e-15);
        let s = two_photon_probe(&b, 0.0, 1.0).unwrap();
        assert_eq!(s.amplitude(&[1, 0, 0, 1]).re, 1.0);
        let s = two_photon_probe(&b, FRAC_PI_8, 0.93).unwrap();
        assert_abs_diff_eq!(
            s.amplitude(&[1, 1, 0, 0]).re,
            0.465f64.sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            s.amplitude(&[1, 0, 0, 1]).re,
            0.535f64.sqrt(),
            epsilon = 1e-15
        );
        assert!(s.equal_up_to_phase(&pure_probe(&b, 0.465).unwrap(), 1e-14));
        assert!(matches!(
            two_photon_probe(&build_basis(2).unwrap(), 0.1, 1.0),
            Err(Error::WrongSector { .. })
        ));
    }
}
