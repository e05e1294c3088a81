//! Correlation decay `mu(A ∩ T^{-n} B) - mu(A) mu(B)` for interval sets,
//! with two independent estimation routes.
//!
//! The Ulam route pushes the invariant mass restricted to `A` forward by
//! repeated sparse vector-matrix products; the Monte Carlo route counts
//! lagged co-occurrences along one long orbit started from an
//! invariant-measure-typical point. For the intermittent family the
//! centered values decay like `n^{1 - 1/a}`, which the log-log fit
//! recovers.

use crate::error::{LabError, Result};
use crate::experiments::sample_mu_typical;
use crate::map::{orbit, Alpha};
use crate::measure::{DensityEstimate, UlamMatrix};
use crate::stats::linear_fit;
use serde::Serialize;

/// A half-open interval `[lo, hi)` inside `[0, 1)` used as an observable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(LabError::Config(format!(
                "interval: need 0 <= lo < hi <= 1, got [{lo}, {hi})"
            )));
        }
        Ok(Interval { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x < self.hi
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CorrelationMethod {
    Ulam,
    MonteCarlo,
}

/// Lagged correlation values for a pair of interval observables.
#[derive(Clone, Debug, Serialize)]
pub struct CorrelationSeries {
    pub alpha: Alpha,
    pub set_a: Interval,
    pub set_b: Interval,
    pub lags: Vec<u64>,
    /// `mu(A ∩ T^{-n} B)` per lag.
    pub raw: Vec<f64>,
    /// `raw - mu(A) mu(B)` per lag.
    pub centered: Vec<f64>,
    pub mu_a: f64,
    pub mu_b: f64,
    pub method: CorrelationMethod,
    /// Values with `|centered|` at or below this level are treated as
    /// noise by the decay fit.
    pub noise_floor: f64,
}

fn validate_lags(lags: &[u64]) -> Result<()> {
    if lags.is_empty() {
        return Err(LabError::Config("correlation: empty lag list".into()));
    }
    for w in lags.windows(2) {
        if w[1] <= w[0] {
            return Err(LabError::Config(format!(
                "correlation: lags must be strictly increasing, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// Fraction of cell `i` covered by the interval.
fn cell_fraction(density: &DensityEstimate, i: usize, set: Interval) -> f64 {
    let (lo, hi) = density.partition().cell(i);
    let overlap = set.hi.min(hi) - set.lo.max(lo);
    (overlap / (hi - lo)).clamp(0.0, 1.0)
}

/// Ulam-route correlation: starting from the stationary mass restricted
/// to `A`, apply the transfer matrix lag by lag and integrate the
/// indicator of `B`. Set endpoints must coincide with partition
/// boundaries; the noise floor is `2 / N`.
pub fn ulam_correlation(
    alpha: Alpha,
    set_a: Interval,
    set_b: Interval,
    lags: &[u64],
    matrix: &UlamMatrix,
    density: &DensityEstimate,
) -> Result<CorrelationSeries> {
    validate_lags(lags)?;
    let partition = density.partition();
    for (name, x) in [
        ("A.lo", set_a.lo),
        ("A.hi", set_a.hi),
        ("B.lo", set_b.lo),
        ("B.hi", set_b.hi),
    ] {
        if !partition.resolves(x, 1e-9) {
            return Err(LabError::Config(format!(
                "correlation: set endpoint {name} = {x} does not lie on a partition boundary"
            )));
        }
    }
    let n = partition.len();
    let mu_a = density.mass_of_interval(set_a.lo, set_a.hi);
    let mu_b = density.mass_of_interval(set_b.lo, set_b.hi);

    // Mass of mu restricted to A, per cell.
    let mut v: Vec<f64> = (0..n)
        .map(|i| density.weights()[i] * cell_fraction(density, i, set_a))
        .collect();
    let b_frac: Vec<f64> = (0..n).map(|i| cell_fraction(density, i, set_b)).collect();

    let mut scratch = vec![0.0; n];
    let mut raw = Vec::with_capacity(lags.len());
    let mut current_lag = 0u64;
    for &lag in lags {
        while current_lag < lag {
            matrix.apply_left(&v, &mut scratch);
            std::mem::swap(&mut v, &mut scratch);
            current_lag += 1;
        }
        raw.push(v.iter().zip(&b_frac).map(|(m, f)| m * f).sum::<f64>());
    }
    let centered = raw.iter().map(|r| r - mu_a * mu_b).collect();
    Ok(CorrelationSeries {
        alpha,
        set_a,
        set_b,
        lags: lags.to_vec(),
        raw,
        centered,
        mu_a,
        mu_b,
        method: CorrelationMethod::Ulam,
        noise_floor: 2.0 / n as f64,
    })
}

/// Monte Carlo correlation from one long orbit: `raw(n)` is the fraction
/// of positions `k` with `x_k` in `A` and `x_{k+n}` in `B`. The orbit
/// starts from a burned-in uniform draw; the noise floor is
/// `3 / sqrt(samples)`.
pub fn monte_carlo_correlation(
    alpha: Alpha,
    set_a: Interval,
    set_b: Interval,
    lags: &[u64],
    samples: u64,
    burn_in: u64,
    seed: u64,
) -> Result<CorrelationSeries> {
    validate_lags(lags)?;
    let max_lag = *lags.last().unwrap();
    if samples < 10 * (max_lag + 1) {
        return Err(LabError::Config(format!(
            "correlation: {samples} samples is too short for max lag {max_lag}"
        )));
    }
    let x0 = sample_mu_typical(alpha, seed, burn_in);
    let total = samples + max_lag;
    let mut in_a = Vec::with_capacity(total as usize);
    let mut in_b = Vec::with_capacity(total as usize);
    for s in orbit(alpha, x0, total) {
        let x = s.point.value();
        in_a.push(set_a.contains(x));
        in_b.push(set_b.contains(x));
    }
    let mu_a = in_a[..samples as usize].iter().filter(|&&b| b).count() as f64 / samples as f64;
    let mu_b = in_b[..samples as usize].iter().filter(|&&b| b).count() as f64 / samples as f64;

    let mut raw = Vec::with_capacity(lags.len());
    for &lag in lags {
        let hits = (0..samples as usize)
            .filter(|&k| in_a[k] && in_b[k + lag as usize])
            .count();
        raw.push(hits as f64 / samples as f64);
    }
    let centered = raw.iter().map(|r| r - mu_a * mu_b).collect();
    Ok(CorrelationSeries {
        alpha,
        set_a,
        set_b,
        lags: lags.to_vec(),
        raw,
        centered,
        mu_a,
        mu_b,
        method: CorrelationMethod::MonteCarlo,
        noise_floor: 3.0 / (samples as f64).sqrt(),
    })
}

/// Fitted polynomial decay exponent of a correlation series.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DecayFit {
    /// Log-log slope of `|centered|` against the lag.
    pub exponent: f64,
    pub n_lo: u64,
    pub n_hi: u64,
    pub residual_rms: f64,
    /// Lags that entered the fit (above the noise floor, inside range).
    pub used: usize,
}

/// Least-squares slope of `log |centered|` versus `log n` over lags in
/// `[n_lo, n_hi]`, using only values above the series' noise floor.
pub fn decay_exponent_fit(series: &CorrelationSeries, n_lo: u64, n_hi: u64) -> Result<DecayFit> {
    if n_lo == 0 || n_hi < n_lo {
        return Err(LabError::Config(format!(
            "decay fit: need 1 <= n_lo <= n_hi, got [{n_lo}, {n_hi}]"
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut in_range = 0usize;
    for (&lag, &c) in series.lags.iter().zip(&series.centered) {
        if lag < n_lo || lag > n_hi {
            continue;
        }
        in_range += 1;
        if c.abs() > series.noise_floor {
            xs.push((lag as f64).ln());
            ys.push(c.abs().ln());
        }
    }
    if in_range > 0 && xs.is_empty() {
        return Err(LabError::Config(format!(
            "decay fit: all {in_range} centered values in [{n_lo}, {n_hi}] sit below the noise floor {}",
            series.noise_floor
        )));
    }
    if xs.len() < 5 {
        return Err(LabError::Config(format!(
            "decay fit: only {} usable lags in [{n_lo}, {n_hi}], need 5",
            xs.len()
        )));
    }
    let fit = linear_fit(&xs, &ys)?;
    Ok(DecayFit {
        exponent: fit.slope,
        n_lo,
        n_hi,
        residual_rms: fit.residual_rms,
        used: xs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{stationary_density, ulam_matrix, Grading, Partition};

    fn alpha(v: f64) -> Alpha {
        Alpha::new(v).unwrap()
    }

    fn small_ulam(a: f64, n: usize) -> (UlamMatrix, DensityEstimate) {
        let p = Partition::new(n, Grading::Uniform).unwrap();
        let m = ulam_matrix(alpha(a), &p).unwrap();
        let d = stationary_density(&m, &p).unwrap();
        (m, d)
    }

    #[test]
    fn lag_zero_is_intersection_mass() {
        let al = alpha(0.5);
        let (m, d) = small_ulam(0.5, 64);
        let a = Interval::new(0.5, 1.0).unwrap();
        let s = ulam_correlation(al, a, a, &[0], &m, &d).unwrap();
        // A = B at lag 0: raw is mu(A), centered is mu(A)(1 - mu(A)) > 0.
        assert!((s.raw[0] - s.mu_a).abs() <= 1e-12);
        assert!((s.centered[0] - s.mu_a * (1.0 - s.mu_a)).abs() <= 1e-12);
        assert!(s.centered[0] > 0.0);
    }

    #[test]
    fn full_space_b_has_zero_centered_values() {
        let al = alpha(0.5);
        let (m, d) = small_ulam(0.5, 64);
        let a = Interval::new(0.5, 1.0).unwrap();
        let b = Interval::new(0.0, 1.0).unwrap();
        let s = ulam_correlation(al, a, b, &[0, 1, 2, 4, 8], &m, &d).unwrap();
        for (&raw, &c) in s.raw.iter().zip(&s.centered) {
            assert!((raw - s.mu_a).abs() <= 1e-10);
            assert!(c.abs() <= 1e-10);
        }
    }

    #[test]
    fn unresolved_endpoints_are_rejected() {
        let al = alpha(0.5);
        let (m, d) = small_ulam(0.5, 64);
        let a = Interval::new(0.513, 1.0).unwrap();
        let b = Interval::new(0.5, 1.0).unwrap();
        assert!(ulam_correlation(al, a, b, &[0, 1], &m, &d).is_err());
    }

    #[test]
    fn lags_must_increase() {
        let al = alpha(0.5);
        let (m, d) = small_ulam(0.5, 64);
        let a = Interval::new(0.5, 1.0).unwrap();
        assert!(ulam_correlation(al, a, a, &[3, 3], &m, &d).is_err());
        assert!(ulam_correlation(al, a, a, &[], &m, &d).is_err());
    }

    fn synthetic_series(exponent: f64) -> CorrelationSeries {
        let lags: Vec<u64> = (1..=64).collect();
        let centered: Vec<f64> = lags.iter().map(|&n| (n as f64).powf(exponent)).collect();
        let raw = centered.clone();
        CorrelationSeries {
            alpha: alpha(0.5),
            set_a: Interval::new(0.5, 1.0).unwrap(),
            set_b: Interval::new(0.5, 1.0).unwrap(),
            lags,
            raw,
            centered,
            mu_a: 0.5,
            mu_b: 0.5,
            method: CorrelationMethod::Ulam,
            noise_floor: 0.0,
        }
    }

    #[test]
    fn decay_fit_recovers_synthetic_exponents() {
        for e in [-1.0, -3.0] {
            let s = synthetic_series(e);
            let fit = decay_exponent_fit(&s, 1, 64).unwrap();
            assert!((fit.exponent - e).abs() <= 1e-9, "exponent {}", fit.exponent);
        }
    }

    #[test]
    fn decay_fit_refuses_pure_noise() {
        let mut s = synthetic_series(-1.0);
        s.noise_floor = 10.0;
        let err = decay_exponent_fit(&s, 1, 64).unwrap_err();
        assert!(err.to_string().contains("noise floor"));
    }

    #[test]
    fn ulam_centered_values_eventually_decrease() {
        let al = alpha(0.5);
        let p = Partition::new(256, Grading::geometric_for(al)).unwrap();
        let m = ulam_matrix(al, &p).unwrap();
        let d = stationary_density(&m, &p).unwrap();
        let a = Interval::new(0.5, 1.0).unwrap();
        let lags: Vec<u64> = (2..=64).collect();
        let s = ulam_correlation(al, a, a, &lags, &m, &d).unwrap();
        // Magnitudes decay monotonically beyond a small initial lag.
        let mags: Vec<f64> = s.centered.iter().map(|c| c.abs()).collect();
        let start = 4; // lag 6
        for w in mags[start..].windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-9), "{:?}", &mags[start..]);
        }
    }
}
