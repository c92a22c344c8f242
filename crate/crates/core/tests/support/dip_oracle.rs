//! Brute-force dip oracle.
//!
//! Minimizes the sup-distance between the empirical CDF and a piecewise-linear
//! unimodal CDF whose knots lie on a fine grid containing every data value. For
//! each candidate mode knot the fit is a linear program in the knot values
//! (convex slopes left of the mode, concave slopes right of it, an optional
//! atom at the mode); the oracle is the best fit over all mode knots.
//!
//! Shares no code with the GCM/LCM implementation.

use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem, Variable};

/// `sub` grid points per gap between consecutive distinct data values.
pub fn dip_oracle(sample: &[f64], sub: usize) -> f64 {
    let mut values = sample.to_vec();
    values.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    let (lo, hi) = (values[0], values[values.len() - 1]);
    if lo == hi {
        return 0.0;
    }
    let mut distinct = values.clone();
    distinct.dedup();

    let mut knots = vec![lo - 1.0];
    for w in distinct.windows(2) {
        for s in 0..sub {
            knots.push(w[0] + (w[1] - w[0]) * s as f64 / sub as f64);
        }
    }
    knots.push(hi);
    knots.push(hi + 1.0);

    let cdf = |t: f64| values.iter().filter(|&&v| v <= t).count() as f64 / n;
    let cdf_left = |t: f64| values.iter().filter(|&&v| v < t).count() as f64 / n;

    (0..knots.len())
        .map(|mode| fit_with_mode(&knots, mode, &cdf, &cdf_left))
        .fold(f64::INFINITY, f64::min)
}

fn fit_with_mode(
    knots: &[f64],
    mode: usize,
    cdf: &dyn Fn(f64) -> f64,
    cdf_left: &dyn Fn(f64) -> f64,
) -> f64 {
    let k = knots.len();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let eps = lp.add_var(1.0, (0.0, 1.0));
    let right: Vec<Variable> = (0..k).map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    let mode_left = lp.add_var(0.0, (0.0, 1.0));
    let left = |i: usize| if i == mode { mode_left } else { right[i] };

    let expr = |terms: &[(Variable, f64)]| {
        let mut merged = std::collections::BTreeMap::new();
        for &(v, c) in terms {
            merged.entry(v.idx()).or_insert((v, 0.0)).1 += c;
        }
        let mut e = LinearExpr::empty();
        for (_, (v, c)) in merged {
            e.add(v, c);
        }
        e
    };

    lp.add_constraint(expr(&[(mode_left, 1.0), (right[mode], -1.0)]), ComparisonOp::Le, 0.0);

    // slope of segment i (between knots i-1 and i) as linear terms
    let slope = |i: usize| -> Vec<(Variable, f64)> {
        let w = knots[i] - knots[i - 1];
        vec![(left(i), 1.0 / w), (right[i - 1], -1.0 / w)]
    };
    for i in 1..k {
        lp.add_constraint(expr(&slope(i)), ComparisonOp::Ge, 0.0);
    }
    for i in 2..k {
        let mut terms = slope(i);
        terms.extend(slope(i - 1).into_iter().map(|(v, c)| (v, -c)));
        if i <= mode {
            lp.add_constraint(expr(&terms), ComparisonOp::Ge, 0.0);
        } else if i >= mode + 2 {
            lp.add_constraint(expr(&terms), ComparisonOp::Le, 0.0);
        }
    }

    for i in 0..k {
        for (var, target) in [(right[i], cdf(knots[i])), (left(i), cdf_left(knots[i]))] {
            lp.add_constraint(expr(&[(var, 1.0), (eps, -1.0)]), ComparisonOp::Le, target);
            lp.add_constraint(expr(&[(var, 1.0), (eps, 1.0)]), ComparisonOp::Ge, target);
        }
    }

    lp.solve().expect("oracle LP is always feasible").objective()
}
