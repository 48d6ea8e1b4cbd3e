//! A seeded run written to disk twice, with byte-identical results.

use hypercell::experiment::{Command, ExperimentConfig, Runner};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::from_json(r#"{"n_samples": 2000, "seed": 42}"#)?;
    let dir = tempfile::tempdir()?;
    let mut archives = Vec::new();
    for (k, workers) in [1, 3].into_iter().enumerate() {
        let out = dir.path().join(format!("run{k}"));
        let runner = Runner::new(cfg.clone(), workers)?;
        print!("{}", runner.run(Command::SampleCells, &out)?);
        archives.push(std::fs::read(out.join("cells.jsonl"))?);
    }
    println!("archives identical across worker counts: {}", archives[0] == archives[1]);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("experiment runner example");
}
