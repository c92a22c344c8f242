//! Marginal screening of a 20-dimensional sample where only two coordinates
//! carry cluster structure.

use modescreen::calibration::CriticalValueTable;
use modescreen::screening::{screen_features, signature_threshold, Correction, SlowRate};
use modescreen::synth::Builtin;

fn main() -> modescreen::Result<()> {
    let data = Builtin::ThreeComp20.spec()?.sample(1000, 1985).to_dataset()?;
    let table = CriticalValueTable::bundled();
    let selection = screen_features(&data, 0.1, Correction::Joint, &table)?;

    println!("alpha_tilde = {:e}", selection.alpha_tilde);
    for f in selection.per_feature.iter().take(5) {
        println!("feature {:2}: dip {:.4} vs {:.4} -> {}", f.feature, f.dip, f.critical, f.reject);
    }
    println!("...");
    println!("selected features: {:?}", selection.selected);
    println!(
        "detectability threshold for n = 1000, d = 20: {:.4}",
        signature_threshold(1000, 20, SlowRate::LogN)?
    );
    Ok(())
}
