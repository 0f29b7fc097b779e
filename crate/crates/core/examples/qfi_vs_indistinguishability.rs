//! Quantum Fisher information of the pure probe against indistinguishability.
//!
//! The numeric variance of the generator is compared with `2 n^2 I + 2 n` and
//! with the split into the two auxiliary-label generators.

use indist_phase::fisher::{qfi_formula_pure, qfi_pure, variance_split};
use indist_phase::fock::{build_basis, hamiltonian};
use indist_phase::probes::pure_probe;

fn main() -> indist_phase::Result<()> {
    println!(
        "{:>2} {:>5} {:>12} {:>12} {:>12} {:>12}",
        "n", "I", "4Var(H)", "formula", "mu part", "nu part"
    );
    for n in 1..=4 {
        let basis = build_basis(n)?;
        let h = hamiltonian(&basis);
        for k in 0..=4 {
            let i = k as f64 / 4.0;
            let numeric = qfi_pure(&pure_probe(&basis, i)?, &h)?.value;
            let split = variance_split(n, i)?;
            println!(
                "{n:>2} {i:>5.2} {numeric:>12.8} {:>12.8} {:>12.8} {:>12.8}",
                qfi_formula_pure(n, i)?,
                split.mu,
                split.nu
            );
        }
    }
    Ok(())
}
