//! Human-readable reports printed by the CLI.

use std::fmt::Write;

use gts_core::distsim::{gts_verdict, ArchetypeCatalog, RenderJob, SimResult, SystemArchetype, ThroughputRecord};
use gts_core::scale::{passes_threshold, ScaleEstimate};

/// Processor count quoted for a half-efficient system, compared against both
/// ways of deriving it in [`scale_report`].
pub const QUOTED_HALF_EFFICIENCY_PROCESSORS: u64 = 400_000;

/// Short decimal form: 1036.8 prints as `1036.8`, not `1036.8000000000002`.
fn num(v: f64) -> String {
    if v.is_finite() && v.abs() < 1e9 {
        format!("{}", (v * 1e9).round() / 1e9)
    } else {
        format!("{v}")
    }
}

/// Report for an extrapolated estimate, compared against the catalog
/// machines that publish a rating.
pub fn scale_report(estimate: &ScaleEstimate, catalog: &ArchetypeCatalog) -> String {
    let mut s = String::new();
    let (spf, fps) = match &estimate.basis {
        Some(b) => (b.measurement.seconds_per_frame, b.target.frames_per_second),
        None => (f64::NAN, f64::NAN),
    };
    let n = estimate.n_processors;
    let eff = estimate.efficiency;
    writeln!(s, "workload      {} s per frame on one {} GFlops CPU", num(spf), num(estimate.per_cpu_gflops)).unwrap();
    writeln!(s, "target        {} frames per second", num(fps)).unwrap();
    writeln!(s, "processors    {n}  (ceil({} s x {} fps))", num(spf), num(fps)).unwrap();
    writeln!(s, "peak          {} TFlops  ({n} x {} GFlops)", num(estimate.peak_tflops), num(estimate.per_cpu_gflops))
        .unwrap();
    writeln!(s, "sustained     {} TFlops  (efficiency {})", num(estimate.sustained_tflops), num(eff)).unwrap();
    writeln!(s).unwrap();

    let compensated = (n as f64 / eff).ceil() as u64;
    writeln!(
        s,
        "a {}-efficient system is sometimes quoted as needing {} processors; two readings:",
        num(eff),
        QUOTED_HALF_EFFICIENCY_PROCESSORS
    )
    .unwrap();
    writeln!(
        s,
        "  n / efficiency  {compensated} processors, so that sustained throughput equals the {} TFlops peak above",
        num(estimate.peak_tflops)
    )
    .unwrap();
    writeln!(
        s,
        "  headroom        {n} processors already meet the target; {} is {:.2}x that (redundancy or spare capacity)",
        QUOTED_HALF_EFFICIENCY_PROCESSORS,
        QUOTED_HALF_EFFICIENCY_PROCESSORS as f64 / n as f64
    )
    .unwrap();
    writeln!(s).unwrap();

    writeln!(s, "machines against {} TFlops sustained:", num(estimate.sustained_tflops)).unwrap();
    for a in &catalog.archetypes {
        let rating = a.rating(eff);
        let v = passes_threshold(&rating, estimate);
        let source = if a.catalog_sustained_tflops.is_some() { "published" } else { "at this efficiency" };
        writeln!(
            s,
            "  {:<15} {:>9.1} peak {:>9.1} sustained ({source})  {}  margin {:+.1} TFlops",
            a.name,
            rating.peak_tflops,
            rating.sustained_tflops,
            if v.pass { "meets" } else { "short" },
            v.margin_tflops
        )
        .unwrap();
        if let (false, Some(_)) = (v.pass, a.catalog_sustained_tflops) {
            writeln!(
                s,
                "  {:<15} note: {}'s published sustained rating falls {:.1} TFlops short of this requirement, \
so calling it sufficient does not follow from the arithmetic",
                "", a.name, -v.margin_tflops
            )
            .unwrap();
        }
    }
    s
}

/// Report for one simulated frame.
pub fn sim_report(
    arch: &SystemArchetype,
    job: &RenderJob,
    ref_gflops: f64,
    required: &ScaleEstimate,
    sim: &SimResult,
) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "machine       {}: {} nodes x {} GFlops, render speedup {}, {}",
        arch.name,
        arch.node_count,
        num(arch.gflops_per_node),
        num(arch.gpu_render_speedup),
        if arch.interactive { "interactive" } else { "batch / not interactive" }
    )
    .unwrap();
    writeln!(s, "network       {} s latency, {} B/s", num(arch.link_latency_s), num(arch.bandwidth_bytes_per_s))
        .unwrap();
    writeln!(
        s,
        "job           {} s on a {} GFlops CPU, {} tiles, {} B per tile result, {} B geometry per worker",
        num(job.total_work_s_ref),
        num(ref_gflops),
        job.tile_count,
        num(job.bytes_per_tile_result),
        num(job.geometry_bytes_per_worker)
    )
    .unwrap();
    writeln!(s, "workers       {}", sim.workers).unwrap();
    writeln!(s, "frame time    {:.6} s", sim.frame_time_s).unwrap();
    writeln!(s, "achieved      {:.4} fps", sim.achieved_fps).unwrap();
    writeln!(s, "peak          {:.4} TFlops", sim.peak_tflops).unwrap();
    writeln!(s, "sustained     {:.4} TFlops", sim.sustained_tflops).unwrap();
    writeln!(s, "efficiency    {:.6}", sim.efficiency).unwrap();
    if let Some(e) = arch.catalog_efficiency() {
        writeln!(s, "catalog eff.  {e:.4} (published sustained / peak)").unwrap();
    }
    let v = gts_verdict(arch, required, sim);
    writeln!(s, "verdict       {} at {} fps", if v.pass { "PASS" } else { "FAIL" }, num(v.target_fps)).unwrap();
    for r in &v.reasons {
        writeln!(s, "              - {r}").unwrap();
    }
    if !arch.assumed.is_empty() {
        writeln!(s, "assumed       {} (placeholders, not published figures)", arch.assumed.join(", ")).unwrap();
    }
    s
}

/// One-line JSON form of a record.
pub fn record_json(record: &ThroughputRecord) -> String {
    serde_json::to_string(record).expect("records serialize")
}
