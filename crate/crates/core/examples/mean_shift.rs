//! Mean-shift mode clustering on a two-dimensional sample.

use modescreen::density::{bandwidth_wand, DensityModel};
use modescreen::modeclust::{find_modes_and_assign, mean_shift_path, ClusterParams};
use modescreen::synth::Builtin;

fn main() -> modescreen::Result<()> {
    let sample = Builtin::ThreeComp20.spec()?.sample(600, 11).to_dataset()?;
    let points = sample.project(&[0, 1])?;
    let h = bandwidth_wand(points.view())?;
    let model = DensityModel::new(points, h)?;
    let params = ClusterParams::for_bandwidth(h);

    let (ascent, trace) = mean_shift_path(&model, &[1.5, 2.5], params.tolerance, params.max_iter)?;
    println!(
        "from (1.5, 2.5): {} steps to ({:.3}, {:.3}), density {:.4} -> {:.4}",
        ascent.iterations,
        ascent.mode[0],
        ascent.mode[1],
        trace[0],
        trace[trace.len() - 1]
    );

    let clustering = find_modes_and_assign(&model, &params)?;
    println!("h = {h:.3}, {} modes", clustering.k());
    for (j, mode) in clustering.modes.rows().into_iter().enumerate() {
        let size = clustering.labels.iter().filter(|&&l| l == j).count();
        println!("  mode {j}: ({:.3}, {:.3}), {size} points", mode[0], mode[1]);
    }
    Ok(())
}
