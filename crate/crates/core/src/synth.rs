//! Gaussian mixtures: sampling, closed-form densities, and population modes.
//!
//! The population clustering assigns a point to the mode its gradient-ascent
//! flow reaches. Flows are integrated on `log p`, which has the same flow lines
//! as `p` (the two gradients differ by the positive factor `1 / p`) but is far
//! better scaled in the tails.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use ndarray::{Array2, ArrayView2};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand_distr::StandardNormal;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::modeclust::single_linkage;
use crate::rng::stream_rng;

const SIMPLEX_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
struct Component {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    chol: DMatrix<f64>,
    precision: DMatrix<f64>,
    log_norm: f64,
}

impl Component {
    fn new(mean: Vec<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if cov.nrows() != d || cov.ncols() != d {
            return Err(Error::Spec(format!(
                "covariance is {}x{} for a mean of length {d}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        if (&cov - cov.transpose()).amax() > SYMMETRY_TOL {
            return Err(Error::Spec("covariance is not symmetric".into()));
        }
        let chol = cov
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Spec("covariance is not positive definite".into()))?;
        let l = chol.l();
        let log_det: f64 = 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        Ok(Self {
            mean: DVector::from_vec(mean),
            precision: chol.inverse(),
            chol: l,
            cov,
            log_norm: -0.5 * (d as f64 * (2.0 * std::f64::consts::PI).ln() + log_det),
        })
    }

    /// `(log N(x; mu, Sigma), -Sigma^-1 (x - mu))`
    fn log_pdf_and_score(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        let diff = x - &self.mean;
        let pd = &self.precision * &diff;
        (self.log_norm - 0.5 * diff.dot(&pd), -pd)
    }
}

/// A finite Gaussian mixture with positive weights summing to one.
#[derive(Debug, Clone)]
pub struct MixtureSpec {
    weights: Vec<f64>,
    components: Vec<Component>,
}

impl MixtureSpec {
    pub fn new(weights: Vec<f64>, means: Vec<Vec<f64>>, covariances: Vec<DMatrix<f64>>) -> Result<Self> {
        if weights.is_empty() || weights.len() != means.len() || weights.len() != covariances.len() {
            return Err(Error::Spec(format!(
                "{} weights, {} means, {} covariances",
                weights.len(),
                means.len(),
                covariances.len()
            )));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::Spec("weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::Spec(format!("weights sum to {total}, not 1")));
        }
        let d = means[0].len();
        if d == 0 || means.iter().any(|m| m.len() != d) {
            return Err(Error::Spec("means must share one positive dimension".into()));
        }
        let components = means
            .into_iter()
            .zip(covariances)
            .map(|(m, c)| Component::new(m, c))
            .collect::<Result<_>>()?;
        Ok(Self { weights, components })
    }

    pub fn dim(&self) -> usize {
        self.components[0].mean.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> Vec<Vec<f64>> {
        self.components.iter().map(|c| c.mean.iter().copied().collect()).collect()
    }

    pub fn covariances(&self) -> Vec<DMatrix<f64>> {
        self.components.iter().map(|c| c.cov.clone()).collect()
    }

    /// The marginal law of coordinates `coords`, in that order.
    pub fn marginal(&self, coords: &[usize]) -> Result<Self> {
        if coords.is_empty() || coords.iter().any(|&c| c >= self.dim()) {
            return Err(Error::Spec(format!("bad marginal coordinates {coords:?}")));
        }
        let means = self
            .components
            .iter()
            .map(|c| coords.iter().map(|&i| c.mean[i]).collect())
            .collect();
        let covs = self
            .components
            .iter()
            .map(|c| DMatrix::from_fn(coords.len(), coords.len(), |a, b| c.cov[(coords[a], coords[b])]))
            .collect();
        Self::new(self.weights.clone(), means, covs)
    }

    /// Same mixture shifted by `offset`.
    pub fn translated(&self, offset: &[f64]) -> Result<Self> {
        if offset.len() != self.dim() {
            return Err(Error::Spec("offset dimension mismatch".into()));
        }
        let means = self
            .means()
            .into_iter()
            .map(|m| m.iter().zip(offset).map(|(a, b)| a + b).collect())
            .collect();
        Self::new(self.weights.clone(), means, self.covariances())
    }

    /// `(log p(x), grad log p(x))`, stable far from every component.
    pub fn log_density_and_score(&self, point: &[f64]) -> (f64, Vec<f64>) {
        let x = DVector::from_column_slice(point);
        let parts: Vec<(f64, DVector<f64>)> = self
            .components
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| {
                let (lp, score) = c.log_pdf_and_score(&x);
                (lp + w.ln(), score)
            })
            .collect();
        let max = parts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        let mut score = DVector::zeros(point.len());
        for (lp, s) in &parts {
            let r = (lp - max).exp();
            total += r;
            score += s * r;
        }
        score /= total;
        (max + total.ln(), score.iter().copied().collect())
    }

    /// Mixture density and its gradient at `point`.
    pub fn density_and_gradient(&self, point: &[f64]) -> (f64, Vec<f64>) {
        let (lp, score) = self.log_density_and_score(point);
        let p = lp.exp();
        (p, score.into_iter().map(|s| s * p).collect())
    }

    pub fn density(&self, point: &[f64]) -> f64 {
        self.log_density_and_score(point).0.exp()
    }

    /// `n` draws: a component chosen by weight, then `mu + L z`.
    pub fn sample(&self, n: usize, seed: u64) -> LabeledSample {
        let mut rng = stream_rng(seed, 0);
        let pick = WeightedIndex::new(&self.weights).expect("weights validated at construction");
        let d = self.dim();
        let mut data = Array2::zeros((n, d));
        let mut components = Vec::with_capacity(n);
        for mut row in data.rows_mut() {
            let k = pick.sample(&mut rng);
            let c = &self.components[k];
            let z = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
            let x = &c.mean + &c.chol * z;
            row.iter_mut().zip(x.iter()).for_each(|(r, v)| *r = *v);
            components.push(k);
        }
        LabeledSample {
            data,
            components,
            seed,
        }
    }

    /// Local maxima reached by flows started at the component means, sorted
    /// lexicographically.
    pub fn modes(&self, params: &FlowParams) -> Result<Array2<f64>> {
        let means = self.means();
        let starts = Array2::from_shape_fn((means.len(), self.dim()), |(i, j)| means[i][j]);
        Ok(true_mode_assignment_with(self, starts.view(), params)?.modes)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub data: Array2<f64>,
    /// Generating component of each row.
    pub components: Vec<usize>,
    pub seed: u64,
}

impl LabeledSample {
    pub fn to_dataset(&self) -> Result<Dataset> {
        Dataset::new(self.data.clone())?.with_components(self.components.clone())
    }
}

/// The mixtures used by the bundled experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    /// `0.5 N(0, 1) + 0.5 N(4, 1)`
    Bimodal1d,
    /// `0.5 N(0, I_d) + 0.5 N(4 mu, I_d)`, `mu` = `s` ones then `d - s` zeros.
    TwoComp { s: usize, d: usize },
    /// Three correlated components in the first two of 20 coordinates,
    /// independent standard normal noise elsewhere.
    ThreeComp20,
}

impl Builtin {
    pub fn spec(&self) -> Result<MixtureSpec> {
        match *self {
            Builtin::Bimodal1d => MixtureSpec::new(
                vec![0.5, 0.5],
                vec![vec![0.0], vec![4.0]],
                vec![DMatrix::identity(1, 1), DMatrix::identity(1, 1)],
            ),
            Builtin::TwoComp { s, d } => {
                if s < 1 || s > d {
                    return Err(Error::Spec(format!("twocomp needs 1 <= s <= d, got s = {s}, d = {d}")));
                }
                let shifted = (0..d).map(|j| if j < s { 4.0 } else { 0.0 }).collect();
                MixtureSpec::new(
                    vec![0.5, 0.5],
                    vec![vec![0.0; d], shifted],
                    vec![DMatrix::identity(d, d), DMatrix::identity(d, d)],
                )
            }
            Builtin::ThreeComp20 => {
                const D: usize = 20;
                let block = |a: f64, b: f64, c: f64| {
                    let mut m = DMatrix::identity(D, D);
                    m[(0, 0)] = a;
                    m[(0, 1)] = b;
                    m[(1, 0)] = b;
                    m[(1, 1)] = c;
                    m
                };
                let mean = |x: f64, y: f64| {
                    let mut m = vec![0.0; D];
                    m[0] = x;
                    m[1] = y;
                    m
                };
                MixtureSpec::new(
                    vec![2.0 / 8.0, 3.0 / 8.0, 3.0 / 8.0],
                    vec![mean(0.0, 0.0), mean(3.0, 0.0), mean(0.0, 5.0)],
                    vec![block(0.3, 0.3, 2.0), block(0.6, -0.4, 1.0), block(0.45, 0.45, 1.6)],
                )
            }
        }
    }

    /// Coordinates the population clustering depends on.
    pub fn support(&self) -> Vec<usize> {
        match *self {
            Builtin::Bimodal1d => vec![0],
            Builtin::TwoComp { s, .. } => (0..s).collect(),
            Builtin::ThreeComp20 => vec![0, 1],
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Bimodal1d => f.write_str("bimodal1d"),
            Builtin::TwoComp { s, d } => write!(f, "twocomp:{s}:{d}"),
            Builtin::ThreeComp20 => f.write_str("threecomp20"),
        }
    }
}

impl FromStr for Builtin {
    type Err = Error;

    /// `bimodal1d`, `threecomp20` or `twocomp:<s>:<d>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bimodal1d" => return Ok(Builtin::Bimodal1d),
            "threecomp20" => return Ok(Builtin::ThreeComp20),
            _ => {}
        }
        let parts: Vec<&str> = s.split(':').collect();
        if let ["twocomp", s_str, d_str] = parts.as_slice() {
            let parse = |v: &str| {
                v.parse::<usize>()
                    .map_err(|_| Error::Spec(format!("bad twocomp parameter {v:?}")))
            };
            let builtin = Builtin::TwoComp {
                s: parse(s_str)?,
                d: parse(d_str)?,
            };
            builtin.spec()?;
            return Ok(builtin);
        }
        Err(Error::Spec(format!(
            "unknown mixture {s:?} (expected bimodal1d, threecomp20 or twocomp:<s>:<d>)"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowParams {
    /// Initial step on `grad log p`; adapted during the flow.
    pub step: f64,
    /// Stop once an accepted move is shorter than this.
    pub tol: f64,
    pub max_steps: usize,
    /// End points closer than this belong to the same mode.
    pub merge_radius: f64,
    /// Offset used to probe whether an end point is a local maximum.
    pub probe: f64,
}

impl FlowParams {
    pub fn new(step: f64, tol: f64) -> Self {
        Self {
            step,
            tol,
            ..Self::default()
        }
    }
}

impl Default for FlowParams {
    fn default() -> Self {
        Self {
            step: 0.1,
            tol: 1e-10,
            max_steps: 100_000,
            merge_radius: 1e-3,
            probe: 1e-4,
        }
    }
}

struct FlowEnd {
    point: Vec<f64>,
    converged: bool,
}

/// Adaptive forward Euler on `grad log p`: a step is accepted only if the
/// density increases, otherwise it is halved.
fn flow(spec: &MixtureSpec, start: &[f64], params: &FlowParams) -> FlowEnd {
    let mut x = start.to_vec();
    let (mut lp, mut score) = spec.log_density_and_score(&x);
    let mut step = params.step;
    for _ in 0..params.max_steps {
        let norm = score.iter().map(|s| s * s).sum::<f64>().sqrt();
        if norm == 0.0 {
            return FlowEnd { point: x, converged: true };
        }
        loop {
            let candidate: Vec<f64> = x.iter().zip(&score).map(|(a, s)| a + step * s).collect();
            let (lpc, sc) = spec.log_density_and_score(&candidate);
            if lpc > lp {
                x = candidate;
                lp = lpc;
                score = sc;
                let moved = step * norm;
                step *= 1.5;
                if moved < params.tol {
                    return FlowEnd { point: x, converged: true };
                }
                break;
            }
            step *= 0.5;
            if step * norm < f64::EPSILON * (1.0 + x.iter().map(|v| v.abs()).fold(0.0, f64::max)) {
                // no representable uphill move is left
                return FlowEnd { point: x, converged: true };
            }
        }
    }
    FlowEnd { point: x, converged: false }
}

fn is_local_max(spec: &MixtureSpec, x: &[f64], probe: f64) -> bool {
    let p = spec.log_density_and_score(x).0;
    (0..x.len()).all(|k| {
        [-probe, probe].iter().all(|&delta| {
            let mut y = x.to_vec();
            y[k] += delta;
            spec.log_density_and_score(&y).0 < p
        })
    })
}

/// Population mode assignment: see [`true_mode_assignment_with`].
pub fn true_mode_assignment(
    spec: &MixtureSpec,
    points: ArrayView2<'_, f64>,
    step: f64,
    tol: f64,
) -> Result<TrueAssignment> {
    true_mode_assignment_with(spec, points, &FlowParams::new(step, tol))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrueAssignment {
    /// Mode index per point; `None` when the flow hit the step cap.
    pub labels: Vec<Option<usize>>,
    /// Modes reached, sorted lexicographically.
    pub modes: Array2<f64>,
    pub nonconverged: usize,
}

/// Labels each point by the mode its flow reaches. Flows that stop on a
/// saddle or minimum (a measure-zero basin boundary) are restarted from small
/// axis perturbations and take the lowest mode index found.
pub fn true_mode_assignment_with(
    spec: &MixtureSpec,
    points: ArrayView2<'_, f64>,
    params: &FlowParams,
) -> Result<TrueAssignment> {
    use rayon::prelude::*;

    if !(params.step > 0.0 && params.tol > 0.0) {
        return Err(Error::input("flow step and tolerance must be positive"));
    }
    if points.ncols() != spec.dim() {
        return Err(Error::input(format!(
            "points have {} coordinates, mixture has {}",
            points.ncols(),
            spec.dim()
        )));
    }
    let ends: Vec<FlowEnd> = (0..points.nrows())
        .into_par_iter()
        .map(|i| flow(spec, &points.row(i).to_vec(), params))
        .collect();

    let converged: Vec<usize> = (0..ends.len()).filter(|&i| ends[i].converged).collect();
    let terminal: Vec<Vec<f64>> = converged.iter().map(|&i| ends[i].point.clone()).collect();
    let groups = if terminal.is_empty() {
        Vec::new()
    } else {
        single_linkage(&terminal, params.merge_radius)
    };
    let group_count = groups.iter().max().map_or(0, |g| g + 1);

    // highest-density member represents each group
    let mut rep: Vec<Option<usize>> = vec![None; group_count];
    for (t, &g) in groups.iter().enumerate() {
        let better = match rep[g] {
            None => true,
            Some(cur) => spec.density(&terminal[t]) > spec.density(&terminal[cur]),
        };
        if better {
            rep[g] = Some(t);
        }
    }
    let reps: Vec<Vec<f64>> = rep.iter().map(|r| terminal[r.expect("non-empty group")].clone()).collect();
    let is_max: Vec<bool> = reps.iter().map(|x| is_local_max(spec, x, params.probe)).collect();

    let mut modes: Vec<Vec<f64>> = reps
        .iter()
        .zip(&is_max)
        .filter(|(_, m)| **m)
        .map(|(x, _)| x.clone())
        .collect();
    modes.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let nearest_mode = |x: &[f64]| {
        modes.iter().position(|m| {
            m.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() <= params.merge_radius
        })
    };

    let group_label: Vec<Option<usize>> = reps
        .iter()
        .zip(&is_max)
        .map(|(x, &max)| {
            if max {
                return nearest_mode(x);
            }
            let mut found: Option<usize> = None;
            for k in 0..x.len() {
                for delta in [-params.probe, params.probe] {
                    let mut start = x.clone();
                    start[k] += delta;
                    let end = flow(spec, &start, params);
                    if let Some(label) = end.converged.then(|| nearest_mode(&end.point)).flatten() {
                        found = Some(found.map_or(label, |f| f.min(label)));
                    }
                }
            }
            found
        })
        .collect();

    let mut labels = vec![None; ends.len()];
    for (t, &i) in converged.iter().enumerate() {
        labels[i] = group_label[groups[t]];
    }
    let d = spec.dim();
    Ok(TrueAssignment {
        nonconverged: ends.len() - converged.len(),
        labels,
        modes: Array2::from_shape_fn((modes.len(), d), |(i, j)| modes[i][j]),
    })
}
