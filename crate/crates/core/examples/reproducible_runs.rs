//! Runs a stochastic command, writes its outputs with a manifest, and replays it.

use indist_phase::cli::{execute, replay, write_run, Parameters, MANIFEST_FILE};
use indist_phase::experiment::ExperimentConfig;

fn main() -> indist_phase::Result<()> {
    let dir = std::env::temp_dir().join(format!("indist-phase-example-{}", std::process::id()));
    let params = Parameters::Experiment {
        config: ExperimentConfig {
            replicas: 20,
            seed: 42,
            ..Default::default()
        },
    };
    let output = execute(&params)?;
    let manifest = write_run(&dir, &params, &output)?;
    println!("wrote {:?} to {}", manifest.outputs, dir.display());
    print!("{}", replay(&dir.join(MANIFEST_FILE))?.report);
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
