//! Hartigan's dip statistic.
//!
//! The dip of a distribution function `F` is the sup-norm distance from `F` to
//! the closest unimodal distribution function. For an empirical CDF it is
//! computed exactly by shrinking a candidate modal interval `[lo, hi]`: fit the
//! greatest convex minorant (GCM) of the CDF left of `hi` and the least concave
//! majorant (LCM) right of `lo`, find the largest GCM/LCM gap, and stop once the
//! gap inside the interval no longer exceeds the best gap recorded outside it.
//!
//! Internally all distances are kept in units of `1 / (2n)` (counts of sample
//! points), which avoids repeated division by `n`.

use crate::error::{Error, Result};

/// Outcome of [`dip_statistic`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipResult {
    /// The dip, in `[0, 1/4]`.
    pub statistic: f64,
    /// Modal interval as 0-based positions in the sorted sample, `lo <= hi`.
    pub modal_interval: (usize, usize),
    pub n: usize,
}

/// Scratch buffers for the dip computation, reusable across samples of any size.
#[derive(Debug, Default, Clone)]
pub struct DipWorkspace {
    mn: Vec<usize>,
    mj: Vec<usize>,
    gcm: Vec<usize>,
    lcm: Vec<usize>,
}

impl DipWorkspace {
    pub fn new() -> Self {
        Self::default()
    }

    fn reset(&mut self, n: usize) {
        for buf in [&mut self.mn, &mut self.mj, &mut self.gcm, &mut self.lcm] {
            buf.clear();
            buf.resize(n + 1, 0);
        }
    }
}

/// Exact dip of the empirical CDF of `sample`. The input may be in any order;
/// a sorted copy is used.
pub fn dip_statistic(sample: &[f64]) -> Result<DipResult> {
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("dip statistic requires finite values"));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(dip_sorted(&sorted, &mut DipWorkspace::new()))
}

/// Dip of an already sorted, finite sample.
///
/// Samples with fewer than two points or a single distinct value are point
/// masses and have dip 0. Any other sample has dip at least `1 / (2n)`.
pub fn dip_sorted(sorted: &[f64], ws: &mut DipWorkspace) -> DipResult {
    let n = sorted.len();
    debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]), "sample must be sorted");
    if n < 2 || sorted[0] == sorted[n - 1] {
        return DipResult {
            statistic: 0.0,
            modal_interval: (0, n.saturating_sub(1)),
            n,
        };
    }

    ws.reset(n);
    let DipWorkspace { mn, mj, gcm, lcm } = ws;
    // 1-based view of the sample
    let x = |i: usize| sorted[i - 1];

    // mn[j]: predecessor of j on the convex minorant of points 1..=j
    mn[1] = 1;
    for j in 2..=n {
        mn[j] = j - 1;
        loop {
            let mnj = mn[j];
            let mnmnj = mn[mnj];
            if mnj == 1
                || (x(j) - x(mnj)) * ((mnj - mnmnj) as f64) < (x(mnj) - x(mnmnj)) * ((j - mnj) as f64)
            {
                break;
            }
            mn[j] = mnmnj;
        }
    }

    // mj[k]: successor of k on the concave majorant of points k..=n
    mj[n] = n;
    for k in (1..n).rev() {
        mj[k] = k + 1;
        loop {
            let mjk = mj[k];
            let mjmjk = mj[mjk];
            if mjk == n
                || (x(k) - x(mjk)) * (mjk as f64 - mjmjk as f64)
                    < (x(mjk) - x(mjmjk)) * (k as f64 - mjk as f64)
            {
                break;
            }
            mj[k] = mjmjk;
        }
    }

    let mut low = 1usize;
    let mut high = n;
    // dip in units of 1/(2n); a non-degenerate sample is at least one unit away
    let mut dip = 1.0f64;

    while low < high {
        // GCM change points from high down to low
        gcm[1] = high;
        let mut i = 1;
        while gcm[i] > low {
            gcm[i + 1] = mn[gcm[i]];
            i += 1;
        }
        let l_gcm = i;
        let mut ig = l_gcm;
        let mut ix = ig - 1;

        // LCM change points from low up to high
        lcm[1] = low;
        let mut i = 1;
        while lcm[i] < high {
            lcm[i + 1] = mj[lcm[i]];
            i += 1;
        }
        let l_lcm = i;
        let mut ih = l_lcm;
        let mut iv = 2;

        // largest GCM/LCM distance on [low, high]
        // Ratios of differences are taken before scaling by counts, so an
        // exactly representable affine image of the data gives the same bits.
        let mut d = 0.0f64;
        if l_gcm != 2 || l_lcm != 2 {
            loop {
                let gcmix = gcm[ix];
                let lcmiv = lcm[iv];
                if gcmix > lcmiv {
                    let gcmi1 = gcm[ix + 1];
                    let dx = (lcmiv as f64 - gcmi1 as f64 + 1.0)
                        - (x(lcmiv) - x(gcmi1)) / (x(gcmix) - x(gcmi1)) * (gcmix - gcmi1) as f64;
                    iv += 1;
                    if dx >= d {
                        d = dx;
                        ig = ix + 1;
                        ih = iv - 1;
                    }
                } else {
                    let lcmiv1 = lcm[iv - 1];
                    let dx = (x(gcmix) - x(lcmiv1)) / (x(lcmiv) - x(lcmiv1)) * (lcmiv - lcmiv1) as f64
                        - (gcmix as f64 - lcmiv1 as f64 - 1.0);
                    ix -= 1;
                    if dx >= d {
                        d = dx;
                        ig = ix + 1;
                        ih = iv;
                    }
                }
                ix = ix.max(1);
                iv = iv.min(l_lcm);
                if gcm[ix] == lcm[iv] {
                    break;
                }
            }
        } else {
            d = 1.0;
        }

        if d < dip {
            break;
        }

        // dip of the GCM over [gcm[l_gcm], gcm[ig]]
        let mut dip_l = 0.0f64;
        for j in ig..l_gcm {
            let (jb, je) = (gcm[j + 1], gcm[j]);
            let mut max_t = 1.0f64;
            if je - jb > 1 && x(je) != x(jb) {
                let (span, count) = (x(je) - x(jb), (je - jb) as f64);
                for jj in jb..=je {
                    let t = (jj - jb + 1) as f64 - (x(jj) - x(jb)) / span * count;
                    max_t = max_t.max(t);
                }
            }
            dip_l = dip_l.max(max_t);
        }

        // dip of the LCM over [lcm[ih], lcm[l_lcm]]
        let mut dip_u = 0.0f64;
        for j in ih..l_lcm {
            let (jb, je) = (lcm[j], lcm[j + 1]);
            let mut max_t = 1.0f64;
            if je - jb > 1 && x(je) != x(jb) {
                let (span, count) = (x(je) - x(jb), (je - jb) as f64);
                for jj in jb..=je {
                    let t = (x(jj) - x(jb)) / span * count - (jj as f64 - jb as f64 - 1.0);
                    max_t = max_t.max(t);
                }
            }
            dip_u = dip_u.max(max_t);
        }

        dip = dip.max(dip_l.max(dip_u));

        // without this check the cycle can repeat forever
        if low == gcm[ig] && high == lcm[ih] {
            break;
        }
        low = gcm[ig];
        high = lcm[ih];
    }

    DipResult {
        statistic: dip / (2 * n) as f64,
        modal_interval: (low - 1, high - 1),
        n,
    }
}
