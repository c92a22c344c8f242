//! Property checks shared by the property suites and the acceptance run. Each
//! returns `Err` with a description on violation.
#![allow(dead_code)]

use modescreen::density::DensityModel;
use modescreen::metrics::{clustering_loss, hausdorff};
use modescreen::modeclust::mean_shift_path;
use ndarray::Array2;

/// Independent evaluation of the Gaussian KDE straight from its formula.
pub fn kde_by_formula(points: &Array2<f64>, h: f64, y: &[f64]) -> f64 {
    let (m, r) = points.dim();
    let norm = (2.0 * std::f64::consts::PI).powf(-(r as f64) / 2.0) / h.powi(r as i32);
    points
        .rows()
        .into_iter()
        .map(|row| {
            let u2: f64 = row.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / (h * h);
            norm * (-0.5 * u2).exp()
        })
        .sum::<f64>()
        / m as f64
}

/// Analytic gradient against central differences with step `1e-5 h`.
///
/// The error is measured relative to the gradient norm, floored at
/// `1e-3 p / h` so that near-stationary queries compare against the scale of
/// the density rather than a vanishing denominator.
pub fn check_kde_gradient(points: Array2<f64>, h: f64, query: &[f64]) -> Result<(), String> {
    let model = DensityModel::new(points.clone(), h).map_err(|e| e.to_string())?;
    let (p, grad) = model.eval_with_gradient(query);
    let direct = kde_by_formula(&points, h, query);
    if (p - direct).abs() > 1e-12 * direct.max(1e-300) {
        return Err(format!("value {p} vs formula {direct}"));
    }
    let step = 1e-5 * h;
    let mut err2 = 0.0;
    for k in 0..query.len() {
        let mut up = query.to_vec();
        let mut down = query.to_vec();
        up[k] += step;
        down[k] -= step;
        let fd = (model.eval(&up) - model.eval(&down)) / (2.0 * step);
        err2 += (fd - grad[k]).powi(2);
    }
    let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    let rel = err2.sqrt() / norm.max(1e-3 * p / h);
    if rel > 1e-5 {
        return Err(format!("relative gradient error {rel:e} at {query:?}"));
    }
    Ok(())
}

/// Composite Simpson integral of a 1-d KDE over the sample range widened by
/// `10 h` on each side, with at least 200 intervals per bandwidth.
pub fn kde_integral_1d(sample: &[f64], h: f64) -> f64 {
    let points = Array2::from_shape_vec((sample.len(), 1), sample.to_vec()).unwrap();
    let model = DensityModel::new(points, h).unwrap();
    let lo = sample.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = sample.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (a, b) = (lo - 10.0 * h, hi + 10.0 * h);
    let intervals = (((b - a) / h * 200.0).ceil() as usize).max(2000) / 2 * 2;
    let dx = (b - a) / intervals as f64;
    let mut sum = model.eval(&[a]) + model.eval(&[b]);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * model.eval(&[a + i as f64 * dx]);
    }
    sum * dx / 3.0
}

pub fn check_kde_quadrature(sample: &[f64], h: f64) -> Result<(), String> {
    let total = kde_integral_1d(sample, h);
    if (total - 1.0).abs() > 1e-3 {
        return Err(format!("integral {total}"));
    }
    Ok(())
}

/// Density never decreases along a mean-shift trajectory (slack 1e-12
/// relative).
pub fn check_ascent_monotone(points: Array2<f64>, h: f64, start: &[f64]) -> Result<(), String> {
    let model = DensityModel::new(points, h).map_err(|e| e.to_string())?;
    let (_, trace) = mean_shift_path(&model, start, 1e-9 * h, 500).map_err(|e| e.to_string())?;
    for (t, pair) in trace.windows(2).enumerate() {
        if pair[1] < pair[0] - 1e-12 * pair[0] {
            return Err(format!("density fell from {} to {} at step {t}", pair[0], pair[1]));
        }
    }
    Ok(())
}

/// Pairwise co-membership disagreement by a double loop over all pairs.
pub fn loss_by_pairs(a: &[u8], b: &[u8]) -> f64 {
    let n = a.len();
    let mut bad = 0usize;
    for j in 0..n {
        for k in j + 1..n {
            if (a[j] == a[k]) != (b[j] == b[k]) {
                bad += 1;
            }
        }
    }
    bad as f64 / (n * (n - 1) / 2) as f64
}

pub fn check_loss(a: &[u8], b: &[u8]) -> Result<(), String> {
    let fast = clustering_loss(a, b).map_err(|e| e.to_string())?;
    let slow = loss_by_pairs(a, b);
    if fast.clustering_loss != slow {
        return Err(format!("counting {} vs pairs {slow}", fast.clustering_loss));
    }
    let swapped = clustering_loss(b, a).map_err(|e| e.to_string())?;
    if swapped != fast || !(0.0..=1.0).contains(&slow) {
        return Err("loss is not symmetric or leaves [0, 1]".into());
    }
    Ok(())
}

/// Symmetry, identity of indiscernibles and the triangle inequality.
pub fn check_hausdorff_axioms(a: &Array2<f64>, b: &Array2<f64>, c: &Array2<f64>) -> Result<(), String> {
    let d = |x: &Array2<f64>, y: &Array2<f64>| hausdorff(x.view(), y.view()).unwrap();
    let (ab, ba, bc, ac) = (d(a, b), d(b, a), d(b, c), d(a, c));
    if ab != ba {
        return Err(format!("asymmetric: {ab} vs {ba}"));
    }
    if d(a, a) != 0.0 {
        return Err("d(A, A) != 0".into());
    }
    let same_set = |x: &Array2<f64>, y: &Array2<f64>| {
        x.rows().into_iter().all(|p| y.rows().into_iter().any(|q| p == q))
            && y.rows().into_iter().all(|p| x.rows().into_iter().any(|q| p == q))
    };
    if (ab == 0.0) != same_set(a, b) {
        return Err(format!("d(A, B) = {ab} disagrees with set equality"));
    }
    if ac > ab + bc + 1e-12 {
        return Err(format!("triangle: {ac} > {ab} + {bc}"));
    }
    Ok(())
}
