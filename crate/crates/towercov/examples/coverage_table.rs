//! Runs the default coverage-distance sweep and prints the CSV table.
//!
//! ```text
//! cargo run --release --example coverage_table [master_seed]
//! ```
//!
//! This is the library-level equivalent of `towercov coverage-table` and a
//! handy smoke test that the full Monte-Carlo sweep runs end to end.

use std::time::Instant;

use towercov::coverage::{coverage_table, SweepConfig};

fn main() {
    let seed = std::env::args()
        .nth(1)
        .map(|s| s.parse::<u64>().expect("seed must be an unsigned integer"))
        .unwrap_or(1);
    let config = SweepConfig::default();
    let start = Instant::now();
    let table = coverage_table(&config, seed).expect("default sweep configuration is valid");
    eprintln!("sweep finished in {:.1} s", start.elapsed().as_secs_f64());
    print!("{}", table.to_csv());
}
