//! The `gtt selftest` flow as a library call, with a chance-observer
//! calibration.
//!
//! ```bash
//! cargo run --release -p gts-harness --example selftest -- [out_dir]
//! ```

use gts_harness::selftest::{run, Calibration, SelftestOptions};

fn main() {
    let temp = tempfile::tempdir().unwrap();
    let dir = std::env::args().nth(1).map(Into::into).unwrap_or_else(|| temp.path().to_path_buf());
    let mut opts = SelftestOptions::new(dir);
    opts.calibration = Some(Calibration { accuracy: 0.5, seeds: 200, trials: 64 });
    let report = run(&opts).unwrap();
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
}
