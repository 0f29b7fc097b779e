//! Classical Fisher information of the three two-photon measurements against the QFI.

use std::f64::consts::PI;

use indist_phase::fisher::{
    fi_at, fi_curve, max_noisy_fi, maximize_over_phase, qfi_formula_mixed, Degeneracy,
};
use indist_phase::fock::build_basis;
use indist_phase::measurement::{
    coarse_measurement, noisy_optimal_measurement, probabilities, standard_measurement, Probe,
};
use indist_phase::probes::pure_probe;

fn main() -> indist_phase::Result<()> {
    let basis = build_basis(1)?;
    let grid: Vec<f64> = (0..64).map(|k| k as f64 * PI / 64.0).collect();
    let eps = 0.06;

    println!("noiseless: occupation-resolved measurement is optimal at every phase");
    for i in [0.0, 0.5, 1.0] {
        let probe = Probe::Pure(pure_probe(&basis, i)?);
        let standard = fi_curve(
            &probe,
            None,
            &standard_measurement(&basis)?,
            &grid,
            0.0,
            Degeneracy::Limit,
        )?;
        let coarse = fi_curve(
            &probe,
            None,
            &coarse_measurement(&basis)?,
            &grid,
            0.0,
            Degeneracy::LimitOrSkip,
        )?;
        println!(
            "  I = {i}: standard in [{:.9}, {:.9}], coarse max {:.6} min {:.6}",
            standard.min_value().unwrap_or(f64::NAN),
            standard.max().map_or(f64::NAN, |m| m.1),
            coarse.max().map_or(f64::NAN, |m| m.1),
            coarse.min_value().unwrap_or(f64::NAN)
        );
    }

    println!("white noise eps = {eps}: best phase against the mixed-probe QFI");
    let optimal = noisy_optimal_measurement(&basis)?;
    for i in [0.0, 0.1, 0.5, 1.0] {
        let qfi = qfi_formula_mixed(1, i, eps)?;
        let (phi, fi) = max_noisy_fi(i, eps)?;
        let probe = Probe::Pure(pure_probe(&basis, i)?);
        let eval = |x| probabilities(&probe, &optimal, x, eps);
        let (phi2, fi2) = maximize_over_phase(|x| fi_at(eval, x, Degeneracy::Limit).ok())
            .expect("defined somewhere");
        println!(
            "  I = {i:<4} QFI {qfi:.5}  standard {fi:.5} at {phi:.3} (gap {:5.2}%)  superposition {fi2:.5} at {phi2:.3} (gap {:5.2}%)",
            100.0 * (1.0 - fi / qfi),
            100.0 * (1.0 - fi2 / qfi)
        );
    }
    Ok(())
}
