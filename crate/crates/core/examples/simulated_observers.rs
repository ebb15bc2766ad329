//! How often sessions pass for observers of fixed accuracy.
//!
//! ```bash
//! cargo run --release -p gts-core --example simulated_observers -- [n] [seeds]
//! ```

use gts_core::protocol::{evaluate, plan_trials, simulate_subject, Kind, SimulatedObserver, Stimulus, Verdict};

fn main() {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse().expect("n")).unwrap_or(64);
    let seeds: u64 = args.next().map(|s| s.parse().expect("seeds")).unwrap_or(200);

    let pool = vec![
        Stimulus { id: "photo".into(), kind: Kind::Real, image_path: "photo.png".into(), provenance: String::new() },
        Stimulus {
            id: "render".into(),
            kind: Kind::Synthetic,
            image_path: "render.png".into(),
            provenance: String::new(),
        },
    ];
    println!("n = {n}, {seeds} sessions per row, alpha = 0.05");
    for q in [0.5, 0.6, 0.7, 0.8, 0.9] {
        let passed = (0..seeds)
            .filter(|&seed| {
                let plan = plan_trials(&pool, n, seed).unwrap();
                let observer = SimulatedObserver::with_accuracy(q, seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)).unwrap();
                let session = simulate_subject(&observer, &plan, &pool).unwrap();
                evaluate(&session, &pool, 0.05).unwrap().verdict == Verdict::Passed
            })
            .count();
        println!("  q = {q:.1}: PASSED in {passed}/{seeds} ({:.3})", passed as f64 / seeds as f64);
    }
}
