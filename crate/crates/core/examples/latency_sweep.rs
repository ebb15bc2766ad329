//! Efficiency against per-message latency, written as CSV to stdout.
//!
//! ```bash
//! cargo run --release -p gts-core --example latency_sweep -- [machine] > sweep.csv
//! ```

use gts_core::distsim::{decompose, sweep, write_sweep_csv, ArchetypeCatalog, Strategy, SweepParameter};

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "Cluster-256GPU".into());
    let catalog = ArchetypeCatalog::builtin();
    let arch = catalog.get(&name).unwrap_or_else(|| panic!("unknown machine {name}"));
    let tiles = 4 * arch.node_count as usize;
    // Small enough frame that the network matters: 1/30 s of reference work per node.
    let job = decompose(arch.node_count as f64 / 30.0, tiles, Strategy::Uniform)
        .unwrap()
        .with_result_bytes(1920.0 * 1080.0 * 3.0 / tiles as f64);
    let grid: Vec<f64> = (0..10).map(|i| if i == 0 { 0.0 } else { 1e-7 * 3f64.powi(i) }).collect();
    let rows = sweep(arch, &job, 4.8, SweepParameter::Latency, &grid).unwrap();
    write_sweep_csv(&rows, std::io::stdout().lock()).unwrap();
}
