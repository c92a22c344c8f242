//! Built-in mixtures and the population clustering of sample points.

use modescreen::synth::{true_mode_assignment, Builtin, FlowParams};

fn main() -> modescreen::Result<()> {
    let spec = Builtin::ThreeComp20.spec()?.marginal(&[0, 1])?;
    let modes = spec.modes(&FlowParams::default())?;
    println!("population modes of the first two coordinates:");
    for m in modes.rows() {
        println!("  ({:.4}, {:.4}), density {:.4}", m[0], m[1], spec.density(&[m[0], m[1]]));
    }

    let sample = spec.sample(10, 5);
    let truth = true_mode_assignment(&spec, sample.data.view(), 0.1, 1e-10)?;
    for (i, row) in sample.data.rows().into_iter().enumerate() {
        println!(
            "  ({:6.3}, {:6.3}) drawn from component {} flows to mode {:?}",
            row[0], row[1], sample.components[i], truth.labels[i]
        );
    }

    let bimodal = Builtin::Bimodal1d.spec()?;
    let peaks = bimodal.modes(&FlowParams::default())?;
    println!("bimodal1d modes: {:.4} and {:.4}", peaks[[0, 0]], peaks[[1, 0]]);
    Ok(())
}
