//! Screening and mode clustering on the 20-dimensional three-component
//! mixture, scored against the population clustering.
//!
//! ```text
//! cargo run --release --example full_clustering -- [seeds]
//! ```

use modescreen::calibration::CriticalValueTable;
use modescreen::density::BandwidthRule;
use modescreen::experiments::experiment_full_clustering;
use modescreen::pipeline::PipelineConfig;

fn main() -> modescreen::Result<()> {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let table = CriticalValueTable::bundled();
    for bandwidth in [BandwidthRule::Wand, BandwidthRule::Fixed(0.06)] {
        let config = PipelineConfig {
            bandwidth,
            ..Default::default()
        };
        println!("bandwidth {bandwidth}");
        for seed in 0..seeds {
            let out = experiment_full_clustering(1000, &config, seed, &table)?;
            println!(
                "  seed {seed}: selected {:?}, h = {:.3}, modes = {}, loss = {:.4}, hausdorff = {:.3}",
                out.report.selection.selected,
                out.report.bandwidth_used.unwrap_or(f64::NAN),
                out.report.clustering.k(),
                out.loss.map_or(f64::NAN, |l| l.clustering_loss),
                out.hausdorff.unwrap_or(f64::NAN),
            );
        }
    }
    Ok(())
}
