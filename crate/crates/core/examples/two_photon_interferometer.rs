//! The two-photon interferometer: preparation angle, wave-plate phase and outcome statistics.

use std::f64::consts::PI;

use indist_phase::evolution::{hwp_interferometer, phase_unitary, HwpSetting};
use indist_phase::fock::{build_basis, occupation_label};
use indist_phase::measurement::{standard_closed_form, STANDARD_OUTCOMES};
use indist_phase::probes::{two_photon_probe, PreparationAngle};

fn main() -> indist_phase::Result<()> {
    let basis = build_basis(1)?;
    let i_max = 0.93;
    let prep = PreparationAngle::for_indistinguishability(0.47, i_max)?;
    println!(
        "I = 0.47 with I_max = {i_max}: preparation angle {:.4} rad ({:.2} deg)",
        prep.varphi,
        prep.varphi.to_degrees()
    );
    let probe = two_photon_probe(&basis, prep.varphi, i_max)?;
    let i = prep.indistinguishability();

    for phi in [0.0, PI / 4.0, PI / 2.0, PI] {
        let hwp = HwpSetting::from_phase(phi);
        let out = hwp_interferometer(&probe, hwp.theta)?;
        let generic = phase_unitary(&basis, phi)?.apply(&probe)?;
        let closed = standard_closed_form(i, phi);
        println!(
            "phi = {phi:.4} (HWP at {:.2} deg), matches generic unitary up to phase: {}",
            hwp.theta.to_degrees(),
            out.equal_up_to_phase(&generic, 1e-12)
        );
        for (occ, p) in STANDARD_OUTCOMES.iter().zip(closed) {
            let numeric = out.amplitude(occ).norm_sqr();
            if numeric > 1e-12 || p > 1e-12 {
                println!(
                    "    {:<7} {numeric:.6}  (closed form {p:.6})",
                    occupation_label(occ)
                );
            }
        }
    }
    Ok(())
}
