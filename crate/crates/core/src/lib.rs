//! Desk-scale tooling for measuring how much computation interactive
//! photorealism needs, and for testing whether observers can tell rendered
//! images from real ones.
//!
//! * [`render`] is a small deterministic Monte Carlo path tracer used both as
//!   a stimulus generator and as a measurable per-frame workload.
//! * [`scale`] turns a single-CPU frame time into the processor count and
//!   peak/sustained TFlops needed to hit an interactive frame rate.
//! * [`distsim`] simulates one frame rendered across a parallel machine and
//!   reports the achieved frame time and efficiency.
//! * [`protocol`] plans real-vs-synthetic trials, records judgments and runs
//!   the exact one-sided binomial test against chance.
//!
//! Runnable walkthroughs for each piece live in this crate's `examples/`
//! directory:
//!
//! ```bash
//! cargo run --release -p gts-core --example furnace
//! cargo run --release -p gts-core --example cornell_convergence
//! cargo run --release -p gts-core --example scale_estimate
//! cargo run --release -p gts-core --example archetypes
//! cargo run --release -p gts-core --example latency_sweep
//! cargo run --release -p gts-core --example binomial_table
//! cargo run --release -p gts-core --example simulated_observers
//! ```

pub mod distsim;
pub mod math;
pub mod protocol;
pub mod render;
pub mod scale;

pub use math::{Ray, Rgb, Vec3};
