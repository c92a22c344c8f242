//! Mean-shift mode clustering.
//!
//! Every data point is moved uphill by the Gaussian mean-shift map
//! `y <- sum_i w_i Y_i / sum_i w_i`, `w_i = exp(-|y - Y_i|^2 / (2 h^2))`, until
//! the step falls below a tolerance. Trajectory end points within
//! `merge_radius` of each other are joined by single linkage; each group is
//! one estimated mode, represented by its highest-density end point, and the
//! points that ended there form its basin.

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::DensityModel;
use crate::error::{Error, Result};

pub const DEFAULT_TOLERANCE_FACTOR: f64 = 1e-7;
pub const DEFAULT_MAX_ITER: usize = 500;
pub const DEFAULT_MERGE_FACTOR: f64 = 0.5;
/// Step tolerance, relative to `h`, used to refine each reported mode.
const POLISH_FACTOR: f64 = 1e-12;
const POLISH_MAX_ITER: usize = 10_000;

/// Relative slack allowed when checking that the density never decreases
/// along a trajectory.
const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Ascent {
    pub mode: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Runs mean shift from `start` until a step shorter than `tolerance` or
/// `max_iter` steps.
pub fn mean_shift_ascend(
    model: &DensityModel,
    start: &[f64],
    tolerance: f64,
    max_iter: usize,
) -> Result<Ascent> {
    ascend(model, start, tolerance, max_iter, None)
}

/// Like [`mean_shift_ascend`], also returning the density at every iterate
/// (start point first).
pub fn mean_shift_path(
    model: &DensityModel,
    start: &[f64],
    tolerance: f64,
    max_iter: usize,
) -> Result<(Ascent, Vec<f64>)> {
    let mut trace = Vec::new();
    let ascent = ascend(model, start, tolerance, max_iter, Some(&mut trace))?;
    Ok((ascent, trace))
}

fn ascend(
    model: &DensityModel,
    start: &[f64],
    tolerance: f64,
    max_iter: usize,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<Ascent> {
    if !(tolerance > 0.0) || max_iter == 0 {
        return Err(Error::input(format!(
            "ascent needs tolerance > 0 and max_iter >= 1, got {tolerance}, {max_iter}"
        )));
    }
    if start.len() != model.dim() || start.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("ascent start must be a finite point of the model's dimension"));
    }
    let r = model.dim();
    let mut y = start.to_vec();
    let mut next = vec![0.0; r];
    let mut previous_mass = 0.0f64;

    for iteration in 1..=max_iter {
        next.iter_mut().for_each(|v| *v = 0.0);
        let mut mass = 0.0;
        for row in model.rows() {
            let w = model.weight(row, &y);
            mass += w;
            for (acc, v) in next.iter_mut().zip(row) {
                *acc += w * v;
            }
        }
        if mass == 0.0 || !mass.is_finite() {
            return Err(Error::NoMass { index: None });
        }
        // mass is proportional to the density at y
        debug_assert!(
            mass >= previous_mass * (1.0 - MONOTONE_SLACK),
            "mean shift decreased the density: {previous_mass} -> {mass}"
        );
        previous_mass = mass;
        if let Some(t) = trace.as_deref_mut() {
            t.push(mass * model.scale());
        }

        let mut step_sq = 0.0;
        for (yi, acc) in y.iter_mut().zip(&next) {
            let moved = acc / mass;
            step_sq += (moved - *yi) * (moved - *yi);
            *yi = moved;
        }
        if step_sq.sqrt() < tolerance {
            if let Some(t) = trace.as_deref_mut() {
                t.push(model.eval(&y));
            }
            return Ok(Ascent {
                mode: y,
                iterations: iteration,
                converged: true,
            });
        }
    }
    if let Some(t) = trace {
        t.push(model.eval(&y));
    }
    Ok(Ascent {
        mode: y,
        iterations: max_iter,
        converged: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    pub bandwidth: f64,
    /// Absolute step-length tolerance.
    pub tolerance: f64,
    pub max_iter: usize,
    pub merge_radius: f64,
}

impl ClusterParams {
    /// Tolerance `1e-7 h`, 500 iterations, merge radius `h / 2`.
    pub fn for_bandwidth(h: f64) -> Self {
        Self {
            bandwidth: h,
            tolerance: DEFAULT_TOLERANCE_FACTOR * h,
            max_iter: DEFAULT_MAX_ITER,
            merge_radius: DEFAULT_MERGE_FACTOR * h,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    /// `k x r`, one estimated mode per row.
    pub modes: Array2<f64>,
    /// Mode index of every data point.
    pub labels: Vec<usize>,
    pub mode_density: Vec<f64>,
    /// Whether each point's trajectory met the tolerance.
    pub converged: Vec<bool>,
    pub iterations: Vec<usize>,
    pub params: ClusterParams,
}

impl Clustering {
    /// One cluster holding all `m` points, in zero dimensions.
    pub fn trivial(m: usize, params: ClusterParams) -> Self {
        Self {
            modes: Array2::zeros((1, 0)),
            labels: vec![0; m],
            mode_density: vec![1.0],
            converged: vec![true; m],
            iterations: vec![0; m],
            params,
        }
    }

    pub fn k(&self) -> usize {
        self.modes.nrows()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn nonconverged(&self) -> usize {
        self.converged.iter().filter(|c| !**c).count()
    }

    /// The cluster function: whether points `i` and `j` share a mode.
    pub fn same_cluster(&self, i: usize, j: usize) -> Result<bool> {
        let len = self.labels.len();
        let label = |x: usize| {
            self.labels
                .get(x)
                .copied()
                .ok_or(Error::IndexOutOfRange { index: x, len })
        };
        Ok(label(i)? == label(j)?)
    }

    /// Writes `index,label,<mode coordinates>` using `coord_names` as the
    /// coordinate headers.
    pub fn write_labels_csv<W: std::io::Write>(&self, writer: W, coord_names: &[String]) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["index".to_string(), "label".to_string()];
        header.extend(coord_names.iter().cloned());
        wtr.write_record(&header)?;
        for (i, &label) in self.labels.iter().enumerate() {
            let mut record = vec![i.to_string(), label.to_string()];
            record.extend(self.modes.row(label).iter().map(|v| v.to_string()));
            wtr.write_record(&record)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Writes `mode,density,<coordinates>`.
    pub fn write_modes_csv<W: std::io::Write>(&self, writer: W, coord_names: &[String]) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["mode".to_string(), "density".to_string()];
        header.extend(coord_names.iter().cloned());
        wtr.write_record(&header)?;
        for (j, row) in self.modes.rows().into_iter().enumerate() {
            let mut record = vec![j.to_string(), self.mode_density[j].to_string()];
            record.extend(row.iter().map(|v| v.to_string()));
            wtr.write_record(&record)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // keep the smaller index as root
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Groups `ends` (rows of length `r`) by single linkage at `radius`. Returns
/// the group of each end point, groups numbered by their lowest member.
pub(crate) fn single_linkage(ends: &[Vec<f64>], radius: f64) -> Vec<usize> {
    let m = ends.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| ends[a][0].total_cmp(&ends[b][0]).then(a.cmp(&b)));
    let mut sets = DisjointSets::new(m);
    let radius_sq = radius * radius;
    for (pos, &a) in order.iter().enumerate() {
        for &b in &order[pos + 1..] {
            if ends[b][0] - ends[a][0] > radius {
                break;
            }
            let d2: f64 = ends[a].iter().zip(&ends[b]).map(|(x, y)| (x - y) * (x - y)).sum();
            if d2 <= radius_sq {
                sets.union(a, b);
            }
        }
    }
    let mut group_of_root = vec![usize::MAX; m];
    let mut next = 0;
    (0..m)
        .map(|i| {
            let root = sets.find(i);
            if group_of_root[root] == usize::MAX {
                group_of_root[root] = next;
                next += 1;
            }
            group_of_root[root]
        })
        .collect()
}

/// Ascends from every data point, merges end points and labels each point by
/// its mode. Modes are numbered by the lowest index of the points they
/// attract.
pub fn find_modes_and_assign(model: &DensityModel, params: &ClusterParams) -> Result<Clustering> {
    let points = model.points();
    let ascents: Vec<Ascent> = (0..model.len())
        .into_par_iter()
        .map(|i| {
            let start: Vec<f64> = points.row(i).to_vec();
            mean_shift_ascend(model, &start, params.tolerance, params.max_iter).map_err(|e| match e {
                Error::NoMass { .. } => Error::NoMass { index: Some(i) },
                other => other,
            })
        })
        .collect::<Result<_>>()?;

    let ends: Vec<Vec<f64>> = ascents.iter().map(|a| a.mode.clone()).collect();
    let groups = single_linkage(&ends, params.merge_radius);
    let k = groups.iter().max().map_or(0, |&l| l + 1);
    let end_density: Vec<f64> = ends.par_iter().map(|e| model.eval(e)).collect();

    // highest-density member of each group, ties to the lowest index
    let mut representative = vec![usize::MAX; k];
    for (i, &g) in groups.iter().enumerate() {
        let current = representative[g];
        if current == usize::MAX || end_density[i] > end_density[current] {
            representative[g] = i;
        }
    }

    // Trajectories stop at a step of `tolerance`, so their end points scatter
    // around the mode by about that much. Representatives are refined further
    // so the reported modes do not depend on which member won.
    let polish_tol = POLISH_FACTOR * model.bandwidth();
    let polished: Vec<Vec<f64>> = representative
        .par_iter()
        .map(|&rep| {
            mean_shift_ascend(model, &ends[rep], polish_tol.max(f64::MIN_POSITIVE), POLISH_MAX_ITER)
                .map(|a| a.mode)
                .map_err(|_| Error::NoMass { index: Some(rep) })
        })
        .collect::<Result<_>>()?;
    let polished_density: Vec<f64> = polished.iter().map(|m| model.eval(m)).collect();

    // refinement can bring two representatives together; merge those again
    let regroup = single_linkage(&polished, params.merge_radius);
    let mut merged_rep: Vec<usize> = vec![usize::MAX; k];
    for (g, &rg) in regroup.iter().enumerate() {
        let current = merged_rep[rg];
        if current == usize::MAX || polished_density[g] > polished_density[current] {
            merged_rep[rg] = g;
        }
    }
    merged_rep.retain(|&g| g != usize::MAX);

    // number modes by the first point they attract
    let mut number = vec![usize::MAX; merged_rep.len()];
    let mut next = 0;
    let labels: Vec<usize> = groups
        .iter()
        .map(|&g| {
            let rg = regroup[g];
            if number[rg] == usize::MAX {
                number[rg] = next;
                next += 1;
            }
            number[rg]
        })
        .collect();
    let mut order = vec![0; merged_rep.len()];
    for (rg, &n) in number.iter().enumerate() {
        order[n] = merged_rep[rg];
    }

    let r = model.dim();
    let mut modes = Array2::zeros((order.len(), r));
    for (j, &g) in order.iter().enumerate() {
        modes.row_mut(j).iter_mut().zip(&polished[g]).for_each(|(m, v)| *m = *v);
    }
    Ok(Clustering {
        modes,
        labels,
        mode_density: order.iter().map(|&g| polished_density[g]).collect(),
        converged: ascents.iter().map(|a| a.converged).collect(),
        iterations: ascents.iter().map(|a| a.iterations).collect(),
        params: *params,
    })
}
