//! Comparing clusterings and mode sets.

use modescreen::metrics::{clustering_loss, hausdorff, support_recovery};
use ndarray::array;

fn main() -> modescreen::Result<()> {
    let truth = ["a", "a", "a", "b", "b", "c"];
    let estimate = [0, 0, 1, 1, 1, 2];
    let loss = clustering_loss(&truth, &estimate)?;
    println!(
        "clustering loss: {}/{} pairs = {:.3}",
        loss.disagreements, loss.pair_count, loss.clustering_loss
    );

    let true_modes = array![[0.0, 0.0], [3.0, 0.0], [0.0, 5.0]];
    let estimated = array![[0.1, 0.2], [2.9, 0.0]];
    println!("Hausdorff distance: {:.3}", hausdorff(estimated.view(), true_modes.view())?);

    let report = support_recovery(&[0], &[0, 1]);
    println!("support: exact = {}, subset = {}, missed = {:?}", report.exact, report.subset, report.missed);
    Ok(())
}
