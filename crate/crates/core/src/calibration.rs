//! Monte Carlo critical values for the dip test.
//!
//! `c(n, alpha)` is the empirical `1 - alpha` quantile of the dip of `n`
//! Uniform(0,1) draws. The uniform law is the least favourable unimodal null
//! only asymptotically; it is the calibration used in practice.
//!
//! Sorted uniform samples are generated directly as partial sums of standard
//! exponentials. Those sums are proportional to uniform order statistics and
//! the dip is scale invariant, so no sort is needed per replicate.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::RwLock;

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dip::{dip_sorted, dip_statistic, DipResult, DipWorkspace};
use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Smallest replicate count accepted by [`critical_value`].
pub const MIN_REPS: usize = 1000;
/// Replicates must leave at least this many simulated dips above the quantile.
pub const TAIL_COUNT: f64 = 50.0;
/// Replicates used when generating a persisted table.
pub const TABLE_REPS: usize = 100_000;
/// Replicates used for on-demand lookups.
pub const ADHOC_REPS: usize = 10_000;
pub const DEFAULT_MAX_REPS: usize = 20_000_000;
pub const DEFAULT_SEED: u64 = 1985;
/// Smallest sample size for which the dip test is run.
pub const MIN_TEST_N: usize = 4;

const BUNDLED_TABLE: &str = include_str!("../data/critical_values.csv");

/// Replicates needed to serve level `alpha`: `ceil(50 / alpha)`.
pub fn required_reps(alpha: f64) -> usize {
    (TAIL_COUNT / alpha * (1.0 - 1e-12)).ceil() as usize
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::input(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

fn check_reps(alpha: f64, reps: usize) -> Result<()> {
    let required = required_reps(alpha).max(MIN_REPS);
    if reps < required {
        return Err(Error::InsufficientReps {
            alpha,
            reps,
            required,
        });
    }
    Ok(())
}

/// Dips of `reps` independent uniform samples of size `n`, in replicate order.
pub fn null_dips(n: usize, reps: usize, seed: u64) -> Vec<f64> {
    (0..reps)
        .into_par_iter()
        .map_init(
            || (DipWorkspace::new(), Vec::with_capacity(n)),
            |(ws, buf), i| {
                let mut rng = stream_rng(seed, i as u64);
                buf.clear();
                let mut acc = 0.0f64;
                for _ in 0..n {
                    acc += rng.sample::<f64, _>(Exp1);
                    buf.push(acc);
                }
                dip_sorted(buf, ws).statistic
            },
        )
        .collect()
}

/// Position (1-based) of the inverse-CDF `1 - alpha` quantile among `reps`
/// sorted values.
fn quantile_rank(alpha: f64, reps: usize) -> usize {
    let x = (1.0 - alpha) * reps as f64;
    ((x - 1e-9).ceil() as usize).clamp(1, reps)
}

/// Critical value `c(n, alpha)` from `reps` null replicates.
pub fn critical_value(n: usize, alpha: f64, reps: usize, seed: u64) -> Result<f64> {
    Ok(critical_values(n, &[alpha], reps, seed)?[0])
}

/// Several critical values sharing one simulation. Each value equals what
/// [`critical_value`] returns for the same `(n, alpha, reps, seed)`.
pub fn critical_values(n: usize, alphas: &[f64], reps: usize, seed: u64) -> Result<Vec<f64>> {
    if n < MIN_TEST_N {
        return Err(Error::input(format!(
            "critical values need n >= {MIN_TEST_N}, got {n}"
        )));
    }
    for &alpha in alphas {
        check_alpha(alpha)?;
        check_reps(alpha, reps)?;
    }
    let mut dips = null_dips(n, reps, seed);
    if let [alpha] = alphas {
        let k = quantile_rank(*alpha, reps) - 1;
        let (_, v, _) = dips.select_nth_unstable_by(k, f64::total_cmp);
        return Ok(vec![*v]);
    }
    dips.sort_unstable_by(f64::total_cmp);
    Ok(alphas
        .iter()
        .map(|&a| dips[quantile_rank(a, reps) - 1])
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalValueEntry {
    pub n: usize,
    pub alpha: f64,
    pub value: f64,
    pub reps: usize,
    pub seed: u64,
}

/// Cache of critical values keyed by `(n, alpha)`.
///
/// Missing entries are simulated on first use with
/// `max(base_reps, ceil(50 / alpha))` replicates. Levels that would need more
/// than `max_reps` replicates are refused with [`Error::InsufficientReps`].
/// Entries are never overwritten once present.
#[derive(Debug)]
pub struct CriticalValueTable {
    seed: u64,
    base_reps: usize,
    max_reps: usize,
    entries: RwLock<BTreeMap<(usize, u64), CriticalValueEntry>>,
}

impl Clone for CriticalValueTable {
    fn clone(&self) -> Self {
        Self {
            seed: self.seed,
            base_reps: self.base_reps,
            max_reps: self.max_reps,
            entries: RwLock::new(self.entries.read().expect("table lock").clone()),
        }
    }
}

impl Default for CriticalValueTable {
    fn default() -> Self {
        Self::new(DEFAULT_SEED)
    }
}

impl CriticalValueTable {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            base_reps: ADHOC_REPS,
            max_reps: DEFAULT_MAX_REPS,
            entries: RwLock::new(BTreeMap::new()),
        }
    }

    /// The table shipped with the crate (seed [`DEFAULT_SEED`]).
    pub fn bundled() -> Self {
        let table = Self::new(DEFAULT_SEED);
        table
            .load_csv(BUNDLED_TABLE.as_bytes())
            .expect("bundled critical value table is well formed");
        table
    }

    pub fn with_reps(mut self, base_reps: usize) -> Self {
        self.base_reps = base_reps;
        self
    }

    pub fn with_max_reps(mut self, max_reps: usize) -> Self {
        self.max_reps = max_reps;
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn max_reps(&self) -> usize {
        self.max_reps
    }

    /// Replicates a lookup at `alpha` would simulate, or an error if that
    /// exceeds the table's budget.
    pub fn reps_for(&self, alpha: f64) -> Result<usize> {
        check_alpha(alpha)?;
        let required = required_reps(alpha);
        let reps = self.base_reps.max(required).max(MIN_REPS);
        if reps > self.max_reps {
            return Err(Error::InsufficientReps {
                alpha,
                reps: self.max_reps,
                required,
            });
        }
        Ok(reps)
    }

    pub fn cached(&self, n: usize, alpha: f64) -> Option<CriticalValueEntry> {
        let entries = self.entries.read().expect("table lock");
        entries
            .get(&(n, alpha.to_bits()))
            .filter(|e| e.reps >= required_reps(alpha))
            .copied()
    }

    /// `c(n, alpha)`, simulated and cached if absent.
    pub fn get(&self, n: usize, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        if let Some(entry) = self.cached(n, alpha) {
            return Ok(entry.value);
        }
        let reps = self.reps_for(alpha)?;
        let value = critical_value(n, alpha, reps, self.seed)?;
        Ok(self.insert(CriticalValueEntry {
            n,
            alpha,
            value,
            reps,
            seed: self.seed,
        }))
    }

    /// Fills every missing `(n, alpha)` pair for one `n` from a single
    /// simulation sized for the smallest requested level.
    pub fn prefill(&self, n: usize, alphas: &[f64]) -> Result<()> {
        let missing: Vec<f64> = alphas
            .iter()
            .copied()
            .filter(|&a| self.cached(n, a).is_none())
            .collect();
        if missing.is_empty() {
            return Ok(());
        }
        let reps = missing
            .iter()
            .map(|&a| self.reps_for(a))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .max()
            .unwrap_or(self.base_reps);
        let values = critical_values(n, &missing, reps, self.seed)?;
        for (alpha, value) in missing.into_iter().zip(values) {
            self.insert(CriticalValueEntry {
                n,
                alpha,
                value,
                reps,
                seed: self.seed,
            });
        }
        Ok(())
    }

    /// Adds an entry unless one already exists; returns the stored value.
    pub fn insert(&self, entry: CriticalValueEntry) -> f64 {
        let mut entries = self.entries.write().expect("table lock");
        entries
            .entry((entry.n, entry.alpha.to_bits()))
            .or_insert(entry)
            .value
    }

    /// All entries ordered by `n`, then `alpha`.
    pub fn entries(&self) -> Vec<CriticalValueEntry> {
        let mut out: Vec<_> = self
            .entries
            .read()
            .expect("table lock")
            .values()
            .copied()
            .collect();
        out.sort_by(|a, b| a.n.cmp(&b.n).then(a.alpha.total_cmp(&b.alpha)));
        out
    }

    /// Reads `n,alpha,value,reps,seed` rows into the table.
    pub fn load_csv<R: Read>(&self, reader: R) -> Result<()> {
        let mut rdr = csv::Reader::from_reader(reader);
        for row in rdr.deserialize() {
            let entry: CriticalValueEntry = row?;
            check_alpha(entry.alpha)?;
            self.insert(entry);
        }
        Ok(())
    }

    pub fn load_path(&self, path: impl AsRef<Path>) -> Result<()> {
        self.load_csv(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        for entry in self.entries() {
            wtr.serialize(entry)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Outcome of [`dip_test`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipTest {
    pub reject: bool,
    pub dip: DipResult,
    /// `None` when the sample is too small to be tested.
    pub critical: Option<f64>,
    /// Fewer than [`MIN_TEST_N`] points: never rejects.
    pub degenerate: bool,
}

/// Rejects unimodality when the dip exceeds `c(n, alpha)`.
pub fn dip_test(sample: &[f64], alpha: f64, table: &CriticalValueTable) -> Result<DipTest> {
    check_alpha(alpha)?;
    let dip = dip_statistic(sample)?;
    if sample.len() < MIN_TEST_N {
        return Ok(DipTest {
            reject: false,
            dip,
            critical: None,
            degenerate: true,
        });
    }
    let critical = table.get(sample.len(), alpha)?;
    Ok(DipTest {
        reject: dip.statistic > critical,
        dip,
        critical: Some(critical),
        degenerate: false,
    })
}
