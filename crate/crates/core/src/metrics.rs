//! Loss functions for comparing an estimated clustering with the truth.

use std::collections::{BTreeSet, HashMap};
use std::hash::Hash;

use ndarray::ArrayView2;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossReport {
    /// Fraction of point pairs on whose co-membership the two labelings
    /// disagree.
    pub clustering_loss: f64,
    pub pair_count: u64,
    pub disagreements: u64,
}

fn pairs(count: u64) -> u64 {
    count * count.saturating_sub(1) / 2
}

/// Pairwise co-membership disagreement between two labelings, counted through
/// the contingency table in `O(n + cells)`. Label values are arbitrary ids.
pub fn clustering_loss<A, B>(truth: &[A], predicted: &[B]) -> Result<LossReport>
where
    A: Eq + Hash,
    B: Eq + Hash,
{
    if truth.len() != predicted.len() {
        return Err(Error::input(format!(
            "labelings have different lengths: {} vs {}",
            truth.len(),
            predicted.len()
        )));
    }
    let n = truth.len() as u64;
    if n < 2 {
        return Err(Error::input("clustering loss needs at least two points"));
    }
    let mut true_sizes: HashMap<&A, u64> = HashMap::new();
    let mut pred_sizes: HashMap<&B, u64> = HashMap::new();
    let mut cells: HashMap<(&A, &B), u64> = HashMap::new();
    for (a, b) in truth.iter().zip(predicted) {
        *true_sizes.entry(a).or_default() += 1;
        *pred_sizes.entry(b).or_default() += 1;
        *cells.entry((a, b)).or_default() += 1;
    }
    let same_true: u64 = true_sizes.values().map(|&c| pairs(c)).sum();
    let same_pred: u64 = pred_sizes.values().map(|&c| pairs(c)).sum();
    let same_both: u64 = cells.values().map(|&c| pairs(c)).sum();
    let disagreements = same_true + same_pred - 2 * same_both;
    let pair_count = pairs(n);
    Ok(LossReport {
        clustering_loss: disagreements as f64 / pair_count as f64,
        pair_count,
        disagreements,
    })
}

/// Hausdorff distance between two finite point sets given as matrix rows.
pub fn hausdorff(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Result<f64> {
    if a.nrows() == 0 || b.nrows() == 0 {
        return Err(Error::input("Hausdorff distance is undefined for an empty set"));
    }
    if a.ncols() != b.ncols() {
        return Err(Error::input(format!(
            "point sets live in different dimensions: {} vs {}",
            a.ncols(),
            b.ncols()
        )));
    }
    let directed = |from: ArrayView2<'_, f64>, to: ArrayView2<'_, f64>| {
        from.rows()
            .into_iter()
            .map(|p| {
                to.rows()
                    .into_iter()
                    .map(|q| p.iter().zip(q).map(|(x, y)| (x - y) * (x - y)).sum::<f64>())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0f64, f64::max)
            .sqrt()
    };
    Ok(directed(a, b).max(directed(b, a)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SupportReport {
    /// `R = S`
    pub exact: bool,
    /// `R ⊆ S`
    pub subset: bool,
    /// `S \ R`
    pub missed: BTreeSet<usize>,
    /// `R \ S`
    pub spurious: BTreeSet<usize>,
}

pub fn support_recovery(selected: &[usize], support: &[usize]) -> SupportReport {
    let r: BTreeSet<usize> = selected.iter().copied().collect();
    let s: BTreeSet<usize> = support.iter().copied().collect();
    let missed: BTreeSet<usize> = s.difference(&r).copied().collect();
    let spurious: BTreeSet<usize> = r.difference(&s).copied().collect();
    SupportReport {
        exact: missed.is_empty() && spurious.is_empty(),
        subset: spurious.is_empty(),
        missed,
        spurious,
    }
}
