//! Runs each sweep on a reduced config and prints the CSV.
//!
//! `cargo run --release --example sweeps -- spacing`

use lis_core::experiments::{run, Experiment, ExperimentConfig, RunOptions};

fn main() -> lis_core::Result<()> {
    let which: Vec<Experiment> = match std::env::args().nth(1) {
        Some(name) => vec![name.parse()?],
        None => Experiment::ALL.to_vec(),
    };
    let mut cfg = ExperimentConfig::from_json(
        r#"{"spacings": ["0.5 λ", "0.3 λ", "0.2 λ"], "linear_elements": 12,
            "panel_width": 0.2, "panel_height": 0.2, "wall_time": false}"#,
    )?;
    cfg.element_kinds.truncate(1);
    for exp in which {
        let result = run(exp, &cfg, &RunOptions::default())?;
        print!("{}", result.to_csv_string()?);
    }
    Ok(())
}
