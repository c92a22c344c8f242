//! False-negative rate of the dip test on a two-component mixture.
//!
//! ```text
//! cargo run --release --example dip_power -- [reps]
//! ```

use modescreen::calibration::{CriticalValueTable, DEFAULT_SEED};
use modescreen::experiments::experiment_dip_power;

fn main() -> modescreen::Result<()> {
    let reps = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1000);
    let table = CriticalValueTable::bundled();
    let sweep = experiment_dip_power(&[50, 100, 200, 400], &[0.01, 0.05, 0.1, 0.5], reps, DEFAULT_SEED, &table)?;
    sweep.write_csv(std::io::stdout())
}
