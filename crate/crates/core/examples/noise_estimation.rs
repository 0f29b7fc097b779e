//! Recovering the white-noise weight from the maximum Fisher information at `I = 0`.

use indist_phase::experiment::{
    analyse_records, estimate_noise, simulate_counts, ExperimentConfig,
};
use indist_phase::fisher::max_noisy_fi;

fn main() -> indist_phase::Result<()> {
    for eps in [0.0, 0.03, 0.06, 0.12] {
        let target = max_noisy_fi(0.0, eps)?.1;
        let e = estimate_noise(target)?;
        println!(
            "exact target {target:.6} -> eps_hat {:.7} ({} bisections)",
            e.eps_hat, e.iterations
        );
    }

    // the same round trip through simulated data
    for seed in 1..=5 {
        let config = ExperimentConfig {
            i_values: vec![0.0],
            mean_total_counts: 1e6,
            seed,
            ..Default::default()
        };
        let fitted = analyse_records(&simulate_counts(&config)?)?[0].max_fi;
        let e = estimate_noise(fitted)?;
        println!(
            "seed {seed}: fitted max {fitted:.5} -> eps_hat {:.4}",
            e.eps_hat
        );
    }
    Ok(())
}
