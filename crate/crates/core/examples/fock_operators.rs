//! Builds the four-mode Fock sector, the rotation generators and their spectrum.
//!
//! Run with `cargo run --example fock_operators -- 2` for two photon pairs.

use indist_phase::fock::{
    build_basis, covariance, eigendecompose, hamiltonian, j_operator, occupation_label, Sector,
};
use indist_phase::probes::pure_probe;

fn main() -> indist_phase::Result<()> {
    let n: u32 = std::env::args()
        .nth(1)
        .map_or(Ok(1), |s| s.parse())
        .unwrap_or(1);
    let basis = build_basis(n)?;
    println!("{} photons, dimension {}", basis.photons(), basis.dim());
    for (k, occ) in basis.states().iter().enumerate().take(12) {
        println!("  {k:>3}  {occ:?}  {}", occupation_label(occ));
    }
    if basis.dim() > 12 {
        println!("  ...");
    }

    let j_mu = j_operator(&basis, Sector::Mu);
    let j_nu = j_operator(&basis, Sector::Nu);
    let h = hamiltonian(&basis);
    println!("||[J_mu, J_nu]|| = {:.3e}", j_mu.commutator_norm(&j_nu));

    let spectrum = eigendecompose(&h)?;
    let mut levels: Vec<f64> = spectrum
        .eigenvalues
        .iter()
        .map(|v| (v * 2.0).round() / 2.0 + 0.0)
        .collect();
    levels.dedup();
    println!("eigenvalues of H: {levels:?}");

    for i in [0.0, 0.5, 1.0] {
        let probe = pure_probe(&basis, i)?;
        println!(
            "I = {i}: Cov(J_mu, J_nu) = {:.2e}",
            covariance(&probe, &j_mu, &j_nu)?
        );
    }
    Ok(())
}
