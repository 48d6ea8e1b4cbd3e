//! Zero cells in d = 3, typical cells from a planar arrangement, and a
//! round trip through a JSONL archive.

use std::io::BufReader;

use hypercell::direction::{DirectionalDistribution, PhiSpec};
use hypercell::process::{
    planar_arrangement_cells, zero_cell, ArchiveHeader, ArchiveReader, ArchiveWriter, ArrangementOptions,
    ProcessConfig, Sampler, ARCHIVE_SCHEMA_VERSION,
};
use hypercell::rng::{substream, tag};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg3 = ProcessConfig::new(1.0, DirectionalDistribution::isotropic(3)?, 7)?;
    for i in 0..3 {
        let c = zero_cell(&cfg3, &mut substream(7, tag("zero"), i))?;
        println!("zero cell {i}: f = {}, Φ = {:.3}, volume = {:.3}", c.f, c.phi_content, c.volume());
    }

    let cfg2 = ProcessConfig::new(1.0, DirectionalDistribution::isotropic(2)?, 7)?;
    let mut cells = Vec::new();
    for i in 0..50 {
        cells.extend(planar_arrangement_cells(ArrangementOptions::default(), &cfg2, &mut substream(7, tag("arr"), i))?);
    }
    let mean_f = cells.iter().map(|c| c.f as f64).sum::<f64>() / cells.len() as f64;
    println!("{} arrangement cells, mean facet count {mean_f:.3} (expect 4)", cells.len());

    let path = std::env::temp_dir().join(format!("hypercell-example-{}.jsonl", std::process::id()));
    let header = ArchiveHeader {
        schema_version: ARCHIVE_SCHEMA_VERSION,
        d: 2,
        gamma: 1.0,
        phi: PhiSpec::Isotropic,
        seed: 7,
        sampler: Sampler::Arrangement,
    };
    let mut w = ArchiveWriter::new(std::fs::File::create(&path)?, &header)?;
    for c in &cells {
        w.write(c)?;
    }
    w.finish()?;
    let reader = ArchiveReader::new(BufReader::new(std::fs::File::open(&path)?))?;
    let back: Vec<_> = reader.collect::<Result<_, _>>()?;
    println!("archive round trip: {} records, first Φ {:.6}", back.len(), back[0].phi_content);
    std::fs::remove_file(path)?;
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("sample cells example");
}
