//! Critical counts of the one-sided binomial test and the power of a 64-trial
//! session against observers of various accuracies.
//!
//! ```bash
//! cargo run --release -p gts-core --example binomial_table -- [alpha]
//! ```

use gts_core::protocol::{binomial_p_value, critical_k};

fn power(n: u64, k_crit: u64, q: f64) -> f64 {
    // P[X >= k_crit] for X ~ Binomial(n, q), summed in log space.
    let ln_choose = |k: u64| -> f64 { (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum() };
    (k_crit..=n).map(|k| (ln_choose(k) + k as f64 * q.ln() + (n - k) as f64 * (1.0 - q).ln()).exp()).sum()
}

fn main() {
    let alpha: f64 = std::env::args().nth(1).map(|s| s.parse().expect("alpha")).unwrap_or(0.05);
    println!("{:>6} {:>8} {:>14}", "n", "k_crit", "p(k_crit)");
    for n in [10u64, 20, 32, 64, 100, 200, 1000] {
        match critical_k(n, alpha).unwrap() {
            Some(k) => println!("{n:>6} {k:>8} {:>14.6e}", binomial_p_value(n, k).unwrap()),
            None => println!("{n:>6} {:>8}", "-"),
        }
    }
    let k64 = critical_k(64, alpha).unwrap().unwrap();
    println!("\npower of n = 64 (reject when k >= {k64}):");
    for q in [0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.9] {
        println!("  q = {q:.2}  power = {:.4}", power(64, k64, q));
    }
}
