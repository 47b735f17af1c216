//! Full run on the bundled toy: synthesis, Quest-like and RL schemes.
//!
//! `cargo run --release --example end_to_end [config]`

use qdeploy::pipeline::{format_table, run_experiment, ExperimentConfig};

fn main() -> qdeploy::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/toy4/toy4_qmlp.cfg").to_string());
    let cfg = ExperimentConfig::load(&path)?;
    let run = run_experiment(&cfg)?;
    println!(
        "{} partitions, space size {}, cache {}",
        run.experiment.partitions.len(),
        run.experiment.space_size,
        if run.experiment.cache_hit { "hit" } else { "miss" }
    );
    print!("{}", format_table(&run.reports()));
    println!("outputs in {}", cfg.output.display());
    Ok(())
}
