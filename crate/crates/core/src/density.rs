//! Gaussian kernel density estimation on the selected coordinates.
//!
//! ```text
//! p_h(y) = (1/m) sum_i h^-r (2 pi)^(-r/2) exp(-|Y_i - y|^2 / (2 h^2))
//! ```
//!
//! Evaluation is exact, `O(m r)` per query.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Above this many points the pairwise-distance quantile is estimated from a
/// random subsample of pairs.
pub const EXACT_PAIRS_MAX_POINTS: usize = 2000;
pub const SUBSAMPLED_PAIRS: usize = 2_000_000;

#[derive(Debug, Clone)]
pub struct DensityModel {
    points: Array2<f64>,
    bandwidth: f64,
    /// `(2 pi)^(-r/2) h^-r / m`
    scale: f64,
}

impl DensityModel {
    pub fn new(points: Array2<f64>, bandwidth: f64) -> Result<Self> {
        let (m, r) = points.dim();
        if m == 0 || r == 0 {
            return Err(Error::input(format!("density needs m >= 1 and r >= 1, got {m} x {r}")));
        }
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::input(format!("bandwidth must be positive, got {bandwidth}")));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("density points must be finite"));
        }
        let points = points.as_standard_layout().into_owned();
        let scale = (2.0 * PI).powf(-(r as f64) / 2.0) * bandwidth.powi(-(r as i32)) / m as f64;
        Ok(Self {
            points,
            bandwidth,
            scale,
        })
    }

    pub fn points(&self) -> ArrayView2<'_, f64> {
        self.points.view()
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    /// Multiplier turning a sum of unnormalized kernel weights into a density.
    pub(crate) fn scale(&self) -> f64 {
        self.scale
    }

    /// Points as one row-major slice.
    pub(crate) fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.points
            .as_slice()
            .expect("points are stored in standard layout")
            .chunks_exact(self.dim())
    }

    /// Unnormalized Gaussian weight `exp(-|row - y|^2 / (2 h^2))`.
    #[inline]
    pub(crate) fn weight(&self, row: &[f64], y: &[f64]) -> f64 {
        let sq: f64 = row.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        (-sq / (2.0 * self.bandwidth * self.bandwidth)).exp()
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        debug_assert_eq!(y.len(), self.dim());
        let total: f64 = self.rows().map(|row| self.weight(row, y)).sum();
        self.scale * total
    }

    pub fn gradient(&self, y: &[f64]) -> Vec<f64> {
        self.eval_with_gradient(y).1
    }

    /// Density and its gradient
    /// `(1/m) sum_i K_h(Y_i - y) (Y_i - y) / h^2` in one pass.
    pub fn eval_with_gradient(&self, y: &[f64]) -> (f64, Vec<f64>) {
        let r = self.dim();
        let mut grad = vec![0.0; r];
        let mut total = 0.0;
        for row in self.rows() {
            let w = self.weight(row, y);
            total += w;
            for ((g, a), b) in grad.iter_mut().zip(row).zip(y) {
                *g += w * (a - b);
            }
        }
        let h2 = self.bandwidth * self.bandwidth;
        grad.iter_mut().for_each(|g| *g *= self.scale / h2);
        (self.scale * total, grad)
    }
}

pub(crate) fn sample_std(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let (count, sum) = values.clone().fold((0usize, 0.0), |(c, s), v| (c + 1, s + v));
    let mean = sum / count as f64;
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    (ss / (count as f64 - 1.0)).sqrt()
}

/// `S (4 / (r + 4))^(1/(6+r)) m^(-1/(6+r))`, with `S` the mean of the
/// per-coordinate sample standard deviations.
pub fn bandwidth_wand(points: ArrayView2<'_, f64>) -> Result<f64> {
    let (m, r) = points.dim();
    if m < 2 || r == 0 {
        return Err(Error::input(format!("bandwidth rule needs m >= 2, r >= 1, got {m} x {r}")));
    }
    let s = points
        .axis_iter(Axis(1))
        .map(|col| sample_std(col.into_iter().copied()))
        .sum::<f64>()
        / r as f64;
    if s <= 0.0 {
        return Err(Error::Degenerate("every coordinate is constant".into()));
    }
    let rf = r as f64;
    let exponent = 1.0 / (6.0 + rf);
    Ok(s * (4.0 / (rf + 4.0)).powf(exponent) * (m as f64).powf(-exponent))
}

/// Lower (inverse-CDF) `q`-quantile of the pairwise distances `|Y_i - Y_j|`,
/// `i < j`. Exact up to [`EXACT_PAIRS_MAX_POINTS`] points; above that,
/// estimated from [`SUBSAMPLED_PAIRS`] uniformly drawn pairs.
pub fn bandwidth_quantile(points: ArrayView2<'_, f64>, q: f64, seed: u64) -> Result<f64> {
    let m = points.nrows();
    if m < 2 {
        return Err(Error::input(format!("pairwise distances need m >= 2, got {m}")));
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::input(format!("quantile level must lie in (0, 1], got {q}")));
    }
    let dist = |i: usize, j: usize| {
        points
            .row(i)
            .iter()
            .zip(points.row(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };
    let mut distances = if m <= EXACT_PAIRS_MAX_POINTS {
        let mut all = Vec::with_capacity(m * (m - 1) / 2);
        for i in 0..m {
            for j in i + 1..m {
                all.push(dist(i, j));
            }
        }
        all
    } else {
        let mut rng = stream_rng(seed, 0);
        (0..SUBSAMPLED_PAIRS)
            .map(|_| {
                let i = rng.random_range(0..m);
                let mut j = rng.random_range(0..m - 1);
                if j >= i {
                    j += 1;
                }
                dist(i, j)
            })
            .collect()
    };
    let count = distances.len();
    let rank = ((q * count as f64 - 1e-9).ceil() as usize).clamp(1, count);
    let (_, value, _) = distances.select_nth_unstable_by(rank - 1, f64::total_cmp);
    if *value <= 0.0 {
        return Err(Error::Degenerate(format!(
            "the {q} quantile of pairwise distances is zero"
        )));
    }
    Ok(*value)
}

/// Bandwidth selection, written `wand`, `quantile:<q>` or `fixed:<h>`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum BandwidthRule {
    #[default]
    Wand,
    Quantile(f64),
    Fixed(f64),
}

impl BandwidthRule {
    pub fn select(&self, points: ArrayView2<'_, f64>, seed: u64) -> Result<f64> {
        match *self {
            BandwidthRule::Wand => bandwidth_wand(points),
            BandwidthRule::Quantile(q) => bandwidth_quantile(points, q, seed),
            BandwidthRule::Fixed(h) => Ok(h),
        }
    }
}

impl fmt::Display for BandwidthRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BandwidthRule::Wand => f.write_str("wand"),
            BandwidthRule::Quantile(q) => write!(f, "quantile:{q}"),
            BandwidthRule::Fixed(h) => write!(f, "fixed:{h}"),
        }
    }
}

impl FromStr for BandwidthRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let number = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| Error::input(format!("bad number in bandwidth rule {s:?}")))
        };
        match s.split_once(':') {
            None if s == "wand" => Ok(BandwidthRule::Wand),
            None if s == "quantile" => Ok(BandwidthRule::Quantile(0.05)),
            Some(("quantile", q)) => {
                let q = number(q)?;
                if q > 0.0 && q <= 1.0 {
                    Ok(BandwidthRule::Quantile(q))
                } else {
                    Err(Error::input(format!("quantile level must lie in (0, 1], got {q}")))
                }
            }
            Some(("fixed", h)) => {
                let h = number(h)?;
                if h > 0.0 && h.is_finite() {
                    Ok(BandwidthRule::Fixed(h))
                } else {
                    Err(Error::input(format!("fixed bandwidth must be positive, got {h}")))
                }
            }
            _ => Err(Error::input(format!(
                "unknown bandwidth rule {s:?} (expected wand, quantile:<q> or fixed:<h>)"
            ))),
        }
    }
}

impl TryFrom<String> for BandwidthRule {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<BandwidthRule> for String {
    fn from(rule: BandwidthRule) -> String {
        rule.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn single_point_peak_value() {
        for (r, h) in [(1usize, 0.3), (2, 1.7), (3, 0.05)] {
            let model = DensityModel::new(Array2::from_elem((1, r), 1.25), h).unwrap();
            let expected = (2.0 * PI).powf(-(r as f64) / 2.0) * h.powi(-(r as i32));
            let got = model.eval(&vec![1.25; r]);
            assert!((got - expected).abs() <= 1e-12 * expected);
            assert!(model.gradient(&vec![1.25; r]).iter().all(|g| *g == 0.0));
        }
    }

    #[test]
    fn radial_decay_and_symmetric_gradient() {
        let model = DensityModel::new(array![[-1.0], [1.0]], 10.0).unwrap();
        assert!(model.eval(&[0.0]) > model.eval(&[5.0]));
        assert!(model.eval(&[0.0]) > model.eval(&[-5.0]));
        assert_eq!(model.gradient(&[0.0]), vec![0.0]);
    }

    #[test]
    fn wand_reference_value() {
        // m = 100 points with sample sd exactly 1
        let raw: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let mean = 49.5;
        let sd = sample_std(raw.iter().copied());
        let pts = Array2::from_shape_fn((100, 1), |(i, _)| (raw[i] - mean) / sd);
        let h = bandwidth_wand(pts.view()).unwrap();
        assert!((h - 0.5017).abs() < 1e-3, "{h}");
        let doubled = bandwidth_wand((&pts * 2.0).view()).unwrap();
        assert_eq!(doubled, 2.0 * h);
    }

    #[test]
    fn wand_rejects_constant_data() {
        let pts = Array2::from_elem((10, 2), 3.0);
        assert!(matches!(bandwidth_wand(pts.view()), Err(Error::Degenerate(_))));
    }

    #[test]
    fn quantile_by_enumeration() {
        let pts = array![[0.0], [1.0], [2.0]];
        assert_eq!(bandwidth_quantile(pts.view(), 0.05, 0).unwrap(), 1.0);
        assert_eq!(bandwidth_quantile(pts.view(), 1.0, 0).unwrap(), 2.0);
        assert_eq!(bandwidth_quantile(pts.view(), 0.67, 0).unwrap(), 2.0);
    }

    #[test]
    fn quantile_of_duplicated_data_is_degenerate() {
        // 4 distinct points each twice: 4 zero distances among 28 pairs
        let pts = array![[0.0], [0.0], [1.0], [1.0], [3.0], [3.0], [7.0], [7.0]];
        assert!(matches!(
            bandwidth_quantile(pts.view(), 0.1, 0),
            Err(Error::Degenerate(_))
        ));
        assert!(bandwidth_quantile(pts.view(), 0.2, 0).unwrap() > 0.0);
    }

    #[test]
    fn subsampled_quantile_is_close_to_exact() {
        let m = 2500;
        let pts = Array2::from_shape_fn((m, 1), |(i, _)| i as f64 / m as f64);
        let h = bandwidth_quantile(pts.view(), 0.05, 11).unwrap();
        // exact 0.05 quantile of |U - V| on a uniform grid: 1 - sqrt(0.95)
        assert!((h - (1.0 - 0.95f64.sqrt())).abs() < 1e-3, "{h}");
        assert_eq!(h, bandwidth_quantile(pts.view(), 0.05, 11).unwrap());
    }

    #[test]
    fn rule_parsing() {
        assert_eq!("wand".parse::<BandwidthRule>().unwrap(), BandwidthRule::Wand);
        assert_eq!(
            "quantile:0.1".parse::<BandwidthRule>().unwrap(),
            BandwidthRule::Quantile(0.1)
        );
        assert_eq!("fixed:0.06".parse::<BandwidthRule>().unwrap(), BandwidthRule::Fixed(0.06));
        for bad in ["silverman", "fixed:-1", "quantile:0", "fixed:abc"] {
            assert!(bad.parse::<BandwidthRule>().is_err(), "{bad}");
        }
        assert_eq!(BandwidthRule::Fixed(0.06).to_string(), "fixed:0.06");
    }

    #[test]
    fn model_validation() {
        assert!(DensityModel::new(Array2::zeros((0, 1)), 1.0).is_err());
        assert!(DensityModel::new(Array2::zeros((3, 1)), 0.0).is_err());
        assert!(DensityModel::new(array![[f64::NAN]], 1.0).is_err());
    }
}
