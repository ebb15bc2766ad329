//! The built-in machine catalog, each machine simulated on the reference
//! workload split one tile per node.
//!
//! ```bash
//! cargo run --release -p gts-core --example archetypes
//! ```

use gts_core::distsim::{decompose, gts_verdict, simulate_frame, ArchetypeCatalog, Strategy};
use gts_core::scale::{extrapolate, CpuDescriptor, TargetInteractivity, WorkloadMeasurement};

fn main() {
    let catalog = ArchetypeCatalog::builtin();
    let reference = WorkloadMeasurement::parthenon();
    let required = extrapolate(&reference, &TargetInteractivity::default(), 0.5, &reference.reference).unwrap();
    let frame_bytes = 1920.0 * 1080.0 * 3.0;

    println!(
        "{:<15} {:>8} {:>10} {:>10} {:>10} {:>8}  verdict",
        "machine", "nodes", "peak TF", "frame s", "fps", "eff"
    );
    for a in &catalog.archetypes {
        let tiles = a.node_count as usize;
        let job = decompose(reference.seconds_per_frame, tiles, Strategy::Uniform)
            .unwrap()
            .with_result_bytes(frame_bytes / tiles as f64);
        let r = simulate_frame(a, &job, CpuDescriptor::pentium4().gflops).unwrap();
        let v = gts_verdict(a, &required, &r);
        println!(
            "{:<15} {:>8} {:>10.1} {:>10.4} {:>10.2} {:>8.4}  {}",
            a.name,
            a.node_count,
            a.effective_peak_tflops(),
            r.frame_time_s,
            r.achieved_fps,
            r.efficiency,
            if v.pass { "pass".to_string() } else { v.reasons.join("; ") }
        );
        if let Some(e) = a.catalog_efficiency() {
            println!("{:<15} catalog sustained/peak = {e:.4}", "");
        }
    }
}
