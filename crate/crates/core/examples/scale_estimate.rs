//! From one CPU's frame time to the size of an interactive machine.
//!
//! ```bash
//! cargo run --release -p gts-core --example scale_estimate -- [seconds_per_frame] [fps] [gflops] [efficiency]
//! ```

use gts_core::distsim::ArchetypeCatalog;
use gts_core::scale::{extrapolate, passes_threshold, CpuDescriptor, TargetInteractivity, WorkloadMeasurement};

fn main() {
    let args: Vec<f64> = std::env::args().skip(1).map(|s| s.parse().expect("number")).collect();
    let spf = args.first().copied().unwrap_or(7200.0);
    let fps = args.get(1).copied().unwrap_or(30.0);
    let gflops = args.get(2).copied().unwrap_or(4.8);
    let eff = args.get(3).copied().unwrap_or(0.5);

    let cpu = CpuDescriptor::new("reference CPU", gflops / 2.0, gflops).unwrap();
    let est = extrapolate(
        &WorkloadMeasurement::new(spf, cpu.clone()).unwrap(),
        &TargetInteractivity::new(fps).unwrap(),
        eff,
        &cpu,
    )
    .unwrap();
    println!("{spf} s/frame at {fps} fps on {gflops} GFlops CPUs:");
    println!("  processors       {}", est.n_processors);
    println!("  peak             {:.4} TFlops", est.peak_tflops);
    println!("  sustained (e={eff}) {:.4} TFlops", est.sustained_tflops);

    let catalog = ArchetypeCatalog::builtin();
    for name in ["BlueGeneL", "BlueGeneQ"] {
        let a = catalog.get(name).unwrap();
        let v = passes_threshold(&a.rating(eff), &est);
        println!(
            "  {name:<10} {} by {:+.1} TFlops sustained",
            if v.pass { "meets" } else { "misses" },
            v.margin_tflops
        );
    }
}
