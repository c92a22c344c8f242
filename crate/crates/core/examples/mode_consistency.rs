//! Distance between estimated and true modes as the sample grows.
//!
//! ```text
//! cargo run --release --example mode_consistency -- [reps]
//! ```

use modescreen::calibration::DEFAULT_SEED;
use modescreen::experiments::experiment_mode_consistency;

fn main() -> modescreen::Result<()> {
    let reps = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let sweep = experiment_mode_consistency(&[250, 1000, 4000], reps, DEFAULT_SEED)?;
    sweep.write_csv(std::io::stdout())
}
