//! Monte Carlo harnesses for the run-length limit laws.
//!
//! All randomness flows through a counter-based generator (ChaCha8)
//! seeded per trial by a splitmix hash of the master seed and the trial
//! index, so every experiment is reproducible bit for bit across runs
//! and platforms regardless of how trials are scheduled.

use crate::error::{LabError, Result};
use crate::map::{apply_map, orbit, Alpha, Digit, Point};
use crate::runlength::{max_window_birkhoff, RunLengthState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

/// splitmix64 finalizer; the standard 64-bit mixer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for trial `t`: a splitmix hash of the master seed and the trial
/// index.
pub fn trial_seed(master_seed: u64, trial: u32) -> u64 {
    splitmix64(master_seed ^ splitmix64(trial as u64 + 1))
}

/// Per-trial generator; ChaCha8 keyed by `trial_seed`.
pub fn trial_rng(master_seed: u64, trial: u32) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trial_seed(master_seed, trial))
}

/// Draws an invariant-measure-typical starting point: a uniform draw
/// pushed forward `burn_in` steps. Invariance of the measure makes the
/// burned-in point asymptotically typical; with `burn_in = 0` this is
/// the raw uniform draw.
pub fn sample_mu_typical(alpha: Alpha, seed: u64, burn_in: u64) -> Point {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Point::new(rng.random::<f64>()).expect("uniform draw lies in [0,1)");
    for _ in 0..burn_in {
        x = apply_map(alpha, x);
    }
    x
}

/// Shared description of a trial ensemble.
#[derive(Clone, Debug, Serialize)]
pub struct TrialPlan {
    pub alpha: Alpha,
    pub n_grid: Vec<u64>,
    pub trials: u32,
    pub master_seed: u64,
    pub burn_in: u64,
    /// Diagnostic override: start every trial at this point instead of a
    /// seeded typical draw.
    pub x0_override: Option<Point>,
}

impl TrialPlan {
    pub fn new(
        alpha: Alpha,
        n_grid: Vec<u64>,
        trials: u32,
        master_seed: u64,
        burn_in: u64,
    ) -> Result<Self> {
        if n_grid.is_empty() {
            return Err(LabError::Config("plan.n: empty horizon grid".into()));
        }
        for w in n_grid.windows(2) {
            if w[1] <= w[0] {
                return Err(LabError::Config(format!(
                    "plan.n: grid must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if n_grid[0] == 0 {
            return Err(LabError::Config("plan.n: horizons must be >= 1".into()));
        }
        if trials == 0 {
            return Err(LabError::Config("plan.trials: must be >= 1".into()));
        }
        Ok(TrialPlan {
            alpha,
            n_grid,
            trials,
            master_seed,
            burn_in,
            x0_override: None,
        })
    }

    pub fn with_x0(mut self, x0: Point) -> Self {
        self.x0_override = Some(x0);
        self
    }

    fn start_point(&self, trial: u32) -> Point {
        self.x0_override
            .unwrap_or_else(|| sample_mu_typical(self.alpha, trial_seed(self.master_seed, trial), self.burn_in))
    }

    fn max_n(&self) -> u64 {
        *self.n_grid.last().unwrap()
    }
}

/// One record of an experiment: a named statistic at a horizon and trial.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub alpha: f64,
    pub n: u64,
    pub trial: u32,
    pub statistic: String,
    pub value: f64,
}

/// Long-form result table with reproducibility metadata. Rows are kept
/// sorted by `(statistic, n, trial)`, so identical plans produce
/// identical tables.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ExperimentTable {
    pub metadata: BTreeMap<String, String>,
    pub rows: Vec<Row>,
}

impl ExperimentTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, alpha: f64, n: u64, trial: u32, statistic: &str, value: f64) {
        self.rows.push(Row {
            alpha,
            n,
            trial,
            statistic: statistic.to_string(),
            value,
        });
    }

    pub fn insert_metadata(&mut self, key: &str, value: String) {
        self.metadata.insert(key.to_string(), value);
    }

    /// Sorts rows into the canonical order.
    pub fn finalize(&mut self) {
        self.rows.sort_by(|a, b| {
            (&a.statistic, a.n, a.trial).cmp(&(&b.statistic, b.n, b.trial))
        });
    }

    /// All values of one statistic at one horizon, across trials.
    pub fn values(&self, statistic: &str, n: u64) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.statistic == statistic && r.n == n)
            .map(|r| r.value)
            .collect()
    }

    /// Distinct horizons carrying the given statistic, in increasing order.
    pub fn horizons(&self, statistic: &str) -> Vec<u64> {
        let mut ns: Vec<u64> = self
            .rows
            .iter()
            .filter(|r| r.statistic == statistic)
            .map(|r| r.n)
            .collect();
        ns.sort_unstable();
        ns.dedup();
        ns
    }

    /// Distinct statistic names, sorted.
    pub fn statistics(&self) -> Vec<String> {
        let mut s: Vec<String> = self.rows.iter().map(|r| r.statistic.clone()).collect();
        s.sort();
        s.dedup();
        s
    }
}

/// Run-length scaling experiment: one orbit per trial, with the
/// streaming run accumulator sampled at every grid horizon.
///
/// Recorded statistics per `(n, trial)`:
/// `r_n`, `R_n`, `ratio_r = log r_n / (a log n)`, `ratio_R = R_n / log2 n`.
pub fn runlength_scaling_experiment(plan: &TrialPlan) -> ExperimentTable {
    let a = plan.alpha.value();
    let per_trial: Vec<Vec<(u64, u64, u64)>> = (0..plan.trials)
        .into_par_iter()
        .map(|trial| {
            let mut state = RunLengthState::new();
            let mut out = Vec::with_capacity(plan.n_grid.len());
            let mut grid = plan.n_grid.iter().peekable();
            for sample in orbit(plan.alpha, plan.start_point(trial), plan.max_n()) {
                state.feed(sample.digit);
                if let Some(&&n) = grid.peek() {
                    if state.steps() == n {
                        out.push((n, state.max_run(Digit::Zero), state.max_run(Digit::One)));
                        grid.next();
                    }
                }
            }
            out
        })
        .collect();

    let mut table = ExperimentTable::new();
    table.insert_metadata("experiment", "runlength_scaling".into());
    table.insert_metadata("seed", plan.master_seed.to_string());
    for (trial, records) in per_trial.iter().enumerate() {
        for &(n, r, big_r) in records {
            let t = trial as u32;
            table.push(a, n, t, "r_n", r as f64);
            table.push(a, n, t, "R_n", big_r as f64);
            table.push(a, n, t, "ratio_r", (r as f64).ln() / (a * (n as f64).ln()));
            table.push(a, n, t, "ratio_R", big_r as f64 / (n as f64).log2());
        }
    }
    table.finalize();
    table
}

/// Window mode for the maximal-window-average experiment.
#[derive(Clone, Copy, Debug, Serialize)]
pub enum WindowMode {
    /// Windows of polynomial length `floor(n^a1)` counting zeros;
    /// requires `a1` strictly below the map parameter.
    ZeroDigit { alpha1: f64 },
    /// Windows of logarithmic length `ceil(coeff * log2 n)` counting
    /// ones; `coeff <= 1` keeps the window below the one-run scale.
    OneDigit { coeff: f64 },
}

impl WindowMode {
    fn validate(&self, alpha: Alpha) -> Result<()> {
        match *self {
            WindowMode::ZeroDigit { alpha1 } => {
                if !(alpha1 > 0.0 && alpha1 < alpha.value()) {
                    return Err(LabError::Config(format!(
                        "windows.alpha1: need 0 < alpha1 < alpha, got alpha1 = {alpha1}, alpha = {}",
                        alpha.value()
                    )));
                }
            }
            WindowMode::OneDigit { coeff } => {
                if !(coeff > 0.0 && coeff <= 1.0) {
                    return Err(LabError::Config(format!(
                        "windows.coeff: need 0 < coeff <= 1, got {coeff}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn digit(&self) -> Digit {
        match self {
            WindowMode::ZeroDigit { .. } => Digit::Zero,
            WindowMode::OneDigit { .. } => Digit::One,
        }
    }

    /// Window length at horizon `n`, at least 1.
    pub fn window_len(&self, n: u64) -> usize {
        let k = match *self {
            WindowMode::ZeroDigit { alpha1 } => (n as f64).powf(alpha1).floor() as usize,
            WindowMode::OneDigit { coeff } => (coeff * (n as f64).log2()).ceil() as usize,
        };
        k.max(1)
    }
}

/// Maximal windowed digit averages per trial and horizon. Statistics:
/// `window_avg = max_sum / K(n)` and `window_len = K(n)`.
pub fn erdos_renyi_window_experiment(
    plan: &TrialPlan,
    mode: WindowMode,
) -> Result<ExperimentTable> {
    mode.validate(plan.alpha)?;
    let digit = mode.digit();
    let max_n = plan.max_n();
    let per_trial: Vec<Vec<(u64, u64, f64)>> = (0..plan.trials)
        .into_par_iter()
        .map(|trial| {
            let digits: Vec<Digit> = orbit(plan.alpha, plan.start_point(trial), max_n)
                .map(|s| s.digit)
                .collect();
            plan.n_grid
                .iter()
                .map(|&n| {
                    let k = mode.window_len(n).min(n as usize);
                    let stat = max_window_birkhoff(&digits[..n as usize], k, digit)
                        .expect("window length validated against horizon");
                    (n, k as u64, stat.max_average())
                })
                .collect()
        })
        .collect();

    let mut table = ExperimentTable::new();
    table.insert_metadata("experiment", "erdos_renyi_windows".into());
    table.insert_metadata("seed", plan.master_seed.to_string());
    table.insert_metadata(
        "mode",
        match mode {
            WindowMode::ZeroDigit { alpha1 } => format!("zero(alpha1={alpha1})"),
            WindowMode::OneDigit { coeff } => format!("one(coeff={coeff})"),
        },
    );
    let a = plan.alpha.value();
    for (trial, records) in per_trial.iter().enumerate() {
        for &(n, k, avg) in records {
            table.push(a, n, trial as u32, "window_avg", avg);
            table.push(a, n, trial as u32, "window_len", k as f64);
        }
    }
    table.finalize();
    Ok(table)
}

/// Which run-length function a block schedule thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BlockVariant {
    /// Zero runs against the polynomial threshold `ceil(n^{a - eps})`.
    ZeroRun,
    /// One runs against the logarithmic threshold `ceil((1 - eps) log2 n)`.
    OneRun,
}

/// Block decomposition schedule: the threshold `t_n`, block length, and
/// block count used by the short-run probability experiment.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BlockSchedule {
    pub variant: BlockVariant,
    pub alpha: Alpha,
    pub epsilon: f64,
}

impl BlockSchedule {
    pub fn new(variant: BlockVariant, alpha: Alpha, epsilon: f64) -> Result<Self> {
        let a = alpha.value();
        match variant {
            BlockVariant::ZeroRun => {
                if !(epsilon > 0.0 && epsilon < a) {
                    return Err(LabError::Config(format!(
                        "blocks.epsilon: zero-run variant needs 0 < eps < alpha, got {epsilon}"
                    )));
                }
            }
            BlockVariant::OneRun => {
                let margin = a / (1.0 - a) - epsilon - epsilon * epsilon / (1.0 - a);
                if !(epsilon > 0.0 && margin > 0.0) {
                    return Err(LabError::Config(format!(
                        "blocks.epsilon: one-run variant needs alpha/(1-alpha) - eps - eps^2/(1-alpha) > 0, got eps = {epsilon}"
                    )));
                }
            }
        }
        Ok(BlockSchedule {
            variant,
            alpha,
            epsilon,
        })
    }

    /// Run-length threshold at horizon `n`.
    pub fn threshold(&self, n: u64) -> u64 {
        let a = self.alpha.value();
        match self.variant {
            BlockVariant::ZeroRun => (n as f64).powf(a - self.epsilon).ceil() as u64,
            BlockVariant::OneRun => ((1.0 - self.epsilon) * (n as f64).log2()).ceil() as u64,
        }
    }

    /// Block length at horizon `n`: `t_n^{1+eps}` rounded down for zero
    /// runs, the exponential spacing for one runs.
    pub fn block_len(&self, n: u64) -> u64 {
        let a = self.alpha.value();
        let t = self.threshold(n) as f64;
        match self.variant {
            BlockVariant::ZeroRun => t.powf(1.0 + self.epsilon).floor() as u64,
            BlockVariant::OneRun => {
                2f64.powf(a * t * (1.0 + self.epsilon) / (1.0 - a)).floor() as u64
            }
        }
    }

    /// Number of full blocks inside the horizon.
    pub fn block_count(&self, n: u64) -> u64 {
        let l = self.block_len(n);
        if l == 0 {
            0
        } else {
            n / l
        }
    }

    fn valid_at(&self, n: u64) -> bool {
        self.threshold(n) >= 1 && self.block_count(n) >= 1
    }

    /// Smallest horizon at which the threshold and block count are both
    /// positive.
    pub fn min_valid_n(&self) -> u64 {
        (1..=1u64 << 40)
            .find(|&n| self.valid_at(n))
            .expect("schedule valid somewhere below 2^40")
    }
}

/// Fraction of trials whose run length at horizon `n` falls short of the
/// schedule threshold (`r_n < t_n` for zero runs, `R_n < t_n` for ones).
pub fn short_run_probability(
    alpha: Alpha,
    schedule: &BlockSchedule,
    n: u64,
    trials: u32,
    master_seed: u64,
    burn_in: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(LabError::Config("blocks.trials: must be >= 1".into()));
    }
    if n < schedule.min_valid_n() {
        return Err(LabError::Config(format!(
            "blocks.n: horizon {n} below the schedule's minimal valid n = {}",
            schedule.min_valid_n()
        )));
    }
    let digit = match schedule.variant {
        BlockVariant::ZeroRun => Digit::Zero,
        BlockVariant::OneRun => Digit::One,
    };
    let t = schedule.threshold(n);
    let short: u32 = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let x0 = sample_mu_typical(alpha, trial_seed(master_seed, trial), burn_in);
            let mut state = RunLengthState::new();
            for s in orbit(alpha, x0, n) {
                state.feed(s.digit);
            }
            (state.max_run(digit) < t) as u32
        })
        .sum();
    Ok(short as f64 / trials as f64)
}
