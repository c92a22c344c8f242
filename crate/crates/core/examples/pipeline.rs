//! Screening plus clustering from a TOML configuration, with the outputs
//! written to a directory.
//!
//! ```text
//! cargo run --release --example pipeline -- [output-dir]
//! ```

use modescreen::calibration::CriticalValueTable;
use modescreen::pipeline::{run_pipeline, PipelineConfig};
use modescreen::synth::Builtin;

const CONFIG: &str = r#"
alpha = 0.1
correction = "paper"
bandwidth = "wand"
seed = 7
"#;

fn main() -> modescreen::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "pipeline-run".to_string());
    let data = Builtin::ThreeComp20.spec()?.sample(1000, 1985).to_dataset()?;
    let config = PipelineConfig::from_toml(CONFIG)?;
    let report = run_pipeline(&data, &config, &CriticalValueTable::bundled())?;

    println!("selected {:?} ({:?})", report.selection.selected, report.selected_names);
    println!("bandwidth {:.4}, {} modes", report.bandwidth_used.unwrap_or(f64::NAN), report.clustering.k());
    for w in &report.warnings {
        println!("warning: {w}");
    }
    for path in report.write_outputs(&out)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
