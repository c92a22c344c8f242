//! How often screening recovers exactly the informative coordinates.
//!
//! ```text
//! cargo run --release --example support_recovery -- [reps]
//! ```

use modescreen::calibration::{CriticalValueTable, DEFAULT_SEED};
use modescreen::experiments::experiment_support_recovery;

fn main() -> modescreen::Result<()> {
    let reps = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let table = CriticalValueTable::bundled();
    let sweep = experiment_support_recovery(&[20], &[2], &[100, 200, 400, 1000], 0.1, reps, DEFAULT_SEED, &table)?;
    sweep.write_csv(std::io::stdout())?;
    for row in &sweep.rows {
        if row.subset < row.reps {
            eprintln!("n = {}: {} replicates selected a noise feature", row.n, row.reps - row.subset);
        }
    }
    Ok(())
}
