//! Regenerates the bundled critical value table.
//!
//! ```text
//! cargo run --release --example calibrate_table -- crates/core/data/critical_values.csv
//! ```
//!
//! Entries already present in the output file are kept; only missing ones are
//! simulated. The `n = 1000` levels come from one 10^7-replicate simulation,
//! enough for the Bonferroni level `0.1 / (1000 * 20)` used when screening 20
//! features.

use std::path::Path;

use modescreen::calibration::{CriticalValueTable, DEFAULT_SEED, TABLE_REPS};
use modescreen::screening::Correction;

const LARGE_N_LEVELS: [f64; 8] = [5e-6, 5e-5, 1e-4, 0.001, 0.01, 0.05, 0.1, 0.5];
const LEVELS: [f64; 5] = [0.001, 0.01, 0.05, 0.1, 0.5];
const SIZES: [usize; 7] = [50, 100, 200, 250, 400, 500, 800];
/// Sample sizes of the default support-recovery sweep (20 features).
const SCREEN_SIZES: [usize; 3] = [100, 200, 400];

fn main() -> modescreen::Result<()> {
    let out = std::env::args().nth(1);
    let table = CriticalValueTable::new(DEFAULT_SEED).with_reps(TABLE_REPS);
    if let Some(path) = out.as_deref().filter(|p| Path::new(p).exists()) {
        table.load_path(path)?;
    }
    for n in SIZES {
        table.prefill(n, &LEVELS)?;
        eprintln!("n = {n} done");
    }
    table.prefill(1000, &LARGE_N_LEVELS)?;
    for n in SCREEN_SIZES {
        table.prefill(n, &[Correction::Joint.level(0.1, n, 20)])?;
        eprintln!("n = {n}, d = 20 done");
    }
    match out {
        Some(path) => table.write_csv(std::fs::File::create(path)?)?,
        None => table.write_csv(std::io::stdout())?,
    }
    Ok(())
}
