use modescreen::dip::dip_statistic;
use modescreen::screening::{signature_threshold, SlowRate};
use modescreen::synth::{true_mode_assignment, Builtin, FlowParams, MixtureSpec};
use nalgebra::DMatrix;
use ndarray::{arr2, Array2};
use proptest::prelude::*;

fn bimodal() -> MixtureSpec {
    Builtin::Bimodal1d.spec().unwrap()
}

#[test]
fn sample_mean_and_component_fraction_are_consistent() {
    let n = 100_000;
    let s = bimodal().sample(n, 11);
    // mixture variance 1 + 4 = 5
    let mean = s.data.column(0).sum() / n as f64;
    assert!((mean - 2.0).abs() < 4.0 * (5.0 / n as f64).sqrt(), "{mean}");
    let first = s.components.iter().filter(|&&c| c == 0).count() as f64 / n as f64;
    assert!((first - 0.5).abs() < 4.0 * (0.25 / n as f64).sqrt(), "{first}");
    let within: Vec<f64> = s
        .data
        .column(0)
        .iter()
        .zip(&s.components)
        .filter(|(_, &c)| c == 1)
        .map(|(x, _)| *x)
        .collect();
    let m1 = within.iter().sum::<f64>() / within.len() as f64;
    assert!((m1 - 4.0).abs() < 4.0 / (within.len() as f64).sqrt());
}

#[test]
fn correlated_sample_covariance_matches() {
    let spec = Builtin::ThreeComp20.spec().unwrap();
    let s = spec.sample(60_000, 5);
    let pts: Vec<[f64; 2]> = s
        .data
        .rows()
        .into_iter()
        .zip(&s.components)
        .filter(|(_, &c)| c == 1)
        .map(|(r, _)| [r[0] - 3.0, r[1]])
        .collect();
    let m = pts.len() as f64;
    let cxy = pts.iter().map(|p| p[0] * p[1]).sum::<f64>() / m;
    let cxx = pts.iter().map(|p| p[0] * p[0]).sum::<f64>() / m;
    assert!((cxy + 0.4).abs() < 0.03, "{cxy}");
    assert!((cxx - 0.6).abs() < 0.03, "{cxx}");
}

#[test]
fn density_integrates_to_one() {
    let spec = bimodal();
    let (a, b, k) = (-12.0, 16.0, 28_000);
    let dx = (b - a) / k as f64;
    let mut sum = spec.density(&[a]) + spec.density(&[b]);
    for i in 1..k {
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * spec.density(&[a + i as f64 * dx]);
    }
    assert!((sum * dx / 3.0 - 1.0).abs() < 1e-6);
}

#[test]
fn bimodal_modes_match_grid_search() {
    let spec = bimodal();
    let modes = spec.modes(&FlowParams::default()).unwrap();
    assert_eq!(modes.nrows(), 2);
    let step = 1e-4;
    let grid: Vec<f64> = (0..=80_000).map(|i| -2.0 + i as f64 * step).collect();
    let p: Vec<f64> = grid.iter().map(|&x| spec.density(&[x])).collect();
    let maxima: Vec<f64> = (1..grid.len() - 1)
        .filter(|&i| p[i] > p[i - 1] && p[i] >= p[i + 1])
        .map(|i| grid[i])
        .collect();
    assert_eq!(maxima.len(), 2);
    for (m, g) in modes.column(0).iter().zip(&maxima) {
        assert!((m - g).abs() < 1e-3, "{m} vs {g}");
    }
    assert!(modes[[1, 0]] - modes[[0, 0]] > 3.5);
}

#[test]
fn points_on_either_side_get_different_labels() {
    let t = true_mode_assignment(&bimodal(), arr2(&[[-1.0], [5.0], [0.5]]).view(), 0.1, 1e-10).unwrap();
    assert_eq!(t.nonconverged, 0);
    assert_ne!(t.labels[0], t.labels[1]);
    assert_eq!(t.labels[0], t.labels[2]);
}

#[test]
fn bimodal_dip_clears_the_threshold_only_at_larger_n() {
    // the population dip is about 0.045; sqrt(2 log log n log(2n) / n) is
    // 0.066 at n = 1e4 and 0.024 at n = 1e5
    let dip_at = |n: usize| {
        let s = bimodal().sample(n, 3);
        dip_statistic(s.data.column(0).as_slice().unwrap()).unwrap().statistic
    };
    let small = dip_at(10_000);
    assert!((small - 0.045).abs() < 0.005, "{small}");
    assert!(small < signature_threshold(10_000, 1, SlowRate::LogLogN).unwrap());
    let large = dip_at(100_000);
    assert!(large > signature_threshold(100_000, 1, SlowRate::LogLogN).unwrap(), "{large}");
}

fn covariance(a: f64, b: f64, c: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[a, b, b, c])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gradient_matches_finite_differences(
        x in prop::collection::vec(-3.0f64..6.0, 2),
        w in 0.2f64..0.8,
        b in -0.5f64..0.5,
    ) {
        let spec = MixtureSpec::new(
            vec![w, 1.0 - w],
            vec![vec![0.0, 0.0], vec![3.0, 1.0]],
            vec![covariance(1.0, b, 1.0), covariance(0.5, 0.1, 2.0)],
        ).unwrap();
        let (p, g) = spec.density_and_gradient(&x);
        let step = 1e-5;
        let mut err2 = 0.0;
        for k in 0..2 {
            let (mut up, mut down) = (x.clone(), x.clone());
            up[k] += step;
            down[k] -= step;
            let fd = (spec.density(&up) - spec.density(&down)) / (2.0 * step);
            err2 += (fd - g[k]).powi(2);
        }
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(err2.sqrt() <= 1e-6 * norm.max(1e-3 * p), "{} vs {}", err2.sqrt(), norm);
    }

    #[test]
    fn modes_follow_translation(shift in prop::collection::vec(-20.0f64..20.0, 2)) {
        let spec = Builtin::ThreeComp20.spec().unwrap().marginal(&[0, 1]).unwrap();
        let moved = spec.translated(&shift).unwrap();
        let params = FlowParams::default();
        let a = spec.modes(&params).unwrap();
        let b = moved.modes(&params).unwrap();
        prop_assert_eq!(a.nrows(), b.nrows());
        let expected: Array2<f64> = &a + &ndarray::arr1(&shift);
        for (u, v) in expected.iter().zip(b.iter()) {
            prop_assert!((u - v).abs() < 1e-6, "{} vs {}", u, v);
        }
    }
}
