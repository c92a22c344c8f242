//! Gaussian kernel density estimates and the bandwidth rules.

use modescreen::density::{BandwidthRule, DensityModel};
use modescreen::synth::Builtin;

fn main() -> modescreen::Result<()> {
    let sample = Builtin::ThreeComp20.spec()?.sample(1000, 3).to_dataset()?;
    let points = sample.project(&[0, 1])?;

    for rule in ["wand", "quantile:0.05", "fixed:0.06"] {
        let rule: BandwidthRule = rule.parse()?;
        let h = rule.select(points.view(), 3)?;
        let model = DensityModel::new(points.clone(), h)?;
        let (p, grad) = model.eval_with_gradient(&[3.0, 0.0]);
        println!("{rule:>14}: h = {h:.4}, p(3, 0) = {p:.4}, grad = [{:.4}, {:.4}]", grad[0], grad[1]);
    }
    Ok(())
}
