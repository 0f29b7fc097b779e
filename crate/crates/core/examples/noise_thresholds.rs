//! White noise: the mixed-probe QFI and the thresholds for beating the shot-noise limit.

use indist_phase::fisher::{qfi_formula_mixed, qfi_mixed, thresholds};
use indist_phase::fock::{build_basis, hamiltonian};
use indist_phase::probes::mixed_probe;

fn main() -> indist_phase::Result<()> {
    for n in 1..=3 {
        let basis = build_basis(n)?;
        let h = hamiltonian(&basis);
        let t = thresholds(n, 0.0)?;
        println!("n = {n} (d = {}), eps_max = {:.6}", t.dimension, t.eps_max);
        for eps in [0.0, 0.06, 0.2, 0.4] {
            let t = thresholds(n, eps)?;
            let spectral = qfi_mixed(&mixed_probe(&basis, 1.0, eps)?, &h)?.value;
            println!(
                "  eps {eps:<4}  QFI(I=1) spectral {spectral:.9}  closed {:.9}  i_min {:.5}  shot noise {}",
                qfi_formula_mixed(n, 1.0, eps)?,
                t.i_min,
                2 * n
            );
        }
    }
    Ok(())
}
