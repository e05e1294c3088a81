//! Invariant-measure estimation.
//!
//! Two routes to the absolutely continuous invariant measure: a
//! deterministic Ulam discretization of the transfer operator (built from
//! exact branch preimages, then solved for its stationary row vector by
//! power iteration) and an empirical Birkhoff histogram of a long orbit.
//! On top of the density sit the scaling diagnostics: the log-log slope
//! of the cumulative measure near 0, the flatness of `x^a h(x)`, and the
//! measures of constant-word cylinders.

use crate::error::{LabError, Result};
use crate::map::{apply_map, inverse_left, orbit, preimage_sequence, Alpha, Digit, Point};
use crate::runlength::{cylinder_interval_one, cylinder_interval_zero, CylinderInterval};
use crate::stats::linear_fit;
use serde::{Deserialize, Serialize};

/// Cell layout of a partition of `[0, 1]`.
///
/// The invariant density blows up like `x^{-a}` at 0, so the geometric
/// grading concentrates half the cells below the crossover with
/// log-spaced boundaries. The requested ratio is honored as long as the
/// resulting depth stays above `floor`; otherwise the ratio is relaxed so
/// the geometric boundaries span exactly `[floor, crossover]` (a ratio-2
/// ladder of 2047 steps would bottom out far below the smallest positive
/// double).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Grading {
    Uniform,
    Geometric {
        ratio: f64,
        crossover: f64,
        floor: f64,
    },
}

impl Grading {
    /// Geometric grading with the default ratio-2 request, crossover 1/2,
    /// and a floor chosen so the innermost Ulam cell escapes at rate
    /// around 1e-4 per step. Deeper floors make the near-neutral cell so
    /// sticky that power iteration cannot reach its tolerance; shallower
    /// ones waste resolution. The escape rate of the cell `[0, f]` is
    /// about `2^a f^a`, hence `f = (1e-4 / 2^a)^{1/a}`, clamped to
    /// `[1e-12, 1e-4]`.
    pub fn geometric_for(alpha: Alpha) -> Grading {
        let a = alpha.value();
        let floor = (1e-4 / alpha.two_pow_alpha()).powf(1.0 / a).clamp(1e-12, 1e-4);
        Grading::Geometric {
            ratio: 2.0,
            crossover: 0.5,
            floor,
        }
    }
}

/// Strictly increasing cell boundaries `0 = b_0 < ... < b_N = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    boundaries: Vec<f64>,
    grading: Grading,
}

impl Partition {
    pub fn new(n: usize, grading: Grading) -> Result<Self> {
        if n < 2 {
            return Err(LabError::Config(format!(
                "partition: need at least 2 cells, got {n}"
            )));
        }
        let boundaries = match grading {
            Grading::Uniform => {
                let mut b: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
                b[n] = 1.0;
                b
            }
            Grading::Geometric {
                ratio,
                crossover,
                floor,
            } => {
                if !(ratio > 1.0) {
                    return Err(LabError::Config(format!(
                        "grading.ratio: must be > 1 for refinement toward 0, got {ratio}"
                    )));
                }
                if !(crossover > 0.0 && crossover < 1.0) {
                    return Err(LabError::Config(format!(
                        "grading.crossover: must lie in (0, 1), got {crossover}"
                    )));
                }
                if !(floor > 0.0 && floor < crossover) {
                    return Err(LabError::Config(format!(
                        "grading.floor: must lie in (0, crossover), got {floor}"
                    )));
                }
                let below = (n / 2).max(1);
                let above = n - below;
                if above == 0 {
                    return Err(LabError::Config(format!(
                        "partition: {n} cells leave no room above the crossover"
                    )));
                }
                let steps = below.saturating_sub(1) as f64;
                let effective_ratio = if crossover * ratio.powf(-steps) >= floor {
                    ratio
                } else {
                    (crossover / floor).powf(1.0 / steps)
                };
                let mut b = Vec::with_capacity(n + 1);
                b.push(0.0);
                for m in (1..below).rev() {
                    b.push(crossover * effective_ratio.powi(-(m as i32)));
                }
                b.push(crossover);
                for j in 1..above {
                    b.push(crossover + j as f64 * (1.0 - crossover) / above as f64);
                }
                b.push(1.0);
                b
            }
        };
        for w in boundaries.windows(2) {
            if !(w[1] > w[0]) {
                return Err(LabError::Config(format!(
                    "partition: boundaries not strictly increasing near {}",
                    w[0]
                )));
            }
        }
        Ok(Partition {
            boundaries,
            grading,
        })
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    /// Number of cells.
    pub fn len(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn cell(&self, i: usize) -> (f64, f64) {
        (self.boundaries[i], self.boundaries[i + 1])
    }

    pub fn width(&self, i: usize) -> f64 {
        self.boundaries[i + 1] - self.boundaries[i]
    }

    /// Index of the cell containing `x`; out-of-range inputs clamp to the
    /// boundary cells.
    pub fn locate(&self, x: f64) -> usize {
        if x < self.boundaries[1] {
            return 0;
        }
        let i = self.boundaries.partition_point(|&b| b <= x);
        i.saturating_sub(1).min(self.len() - 1)
    }

    /// True when `x` coincides with a cell boundary (or 0/1) within `tol`.
    pub fn resolves(&self, x: f64, tol: f64) -> bool {
        let i = self.boundaries.partition_point(|&b| b < x);
        let mut near = false;
        if i < self.boundaries.len() {
            near |= (self.boundaries[i] - x).abs() <= tol;
        }
        if i > 0 {
            near |= (self.boundaries[i - 1] - x).abs() <= tol;
        }
        near
    }
}

/// Sparse row-stochastic Ulam matrix `P_ij = |A_i ∩ T^{-1} A_j| / |A_i|`.
#[derive(Clone, Debug)]
pub struct UlamMatrix {
    n: usize,
    /// Row-major adjacency: `rows[i]` holds `(j, P_ij)` sorted by `j`.
    rows: Vec<Vec<(u32, f64)>>,
}

impl UlamMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .iter()
            .find(|&&(c, _)| c as usize == j)
            .map_or(0.0, |&(_, v)| v)
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.rows[i].iter().map(|&(_, v)| v).sum()
    }

    pub fn nonzeros(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Row-vector product `out = v P`, the discrete transfer-operator step.
    pub fn apply_left(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(v.len(), self.n);
        assert_eq!(out.len(), self.n);
        out.fill(0.0);
        for (i, row) in self.rows.iter().enumerate() {
            let vi = v[i];
            if vi == 0.0 {
                continue;
            }
            for &(j, p) in row {
                out[j as usize] += vi * p;
            }
        }
    }
}

/// Builds the Ulam matrix from exact interval preimages: for each cell
/// `A_j`, the left-branch preimage `[T_L^{-1} b_j, T_L^{-1} b_{j+1})` and
/// the right-branch preimage `[(b_j+1)/2, (b_{j+1}+1)/2)` are intersected
/// with the row cells. Each row is then validated to sum to 1 within
/// 1e-12 and renormalized exactly.
pub fn ulam_matrix(alpha: Alpha, partition: &Partition) -> Result<UlamMatrix> {
    let n = partition.len();
    let b = partition.boundaries();
    let mut left = Vec::with_capacity(n + 1);
    for &y in b {
        left.push(inverse_left(alpha, y)?);
    }
    let right: Vec<f64> = b.iter().map(|&y| 0.5 * (y + 1.0)).collect();

    let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for pre in [&left, &right] {
        for j in 0..n {
            let (lo, hi) = (pre[j], pre[j + 1]);
            if !(hi > lo) {
                continue;
            }
            let mut i = partition.locate(lo);
            while i < n && partition.cell(i).0 < hi {
                let (clo, chi) = partition.cell(i);
                let overlap = hi.min(chi) - lo.max(clo);
                if overlap > 0.0 {
                    rows[i].push((j as u32, overlap / partition.width(i)));
                }
                i += 1;
            }
        }
    }
    for (i, row) in rows.iter_mut().enumerate() {
        row.sort_by_key(|&(j, _)| j);
        row.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        let sum: f64 = row.iter().map(|&(_, v)| v).sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(LabError::Solver(format!(
                "ulam matrix row {i} sums to {sum}, expected 1 within 1e-12"
            )));
        }
        for e in row.iter_mut() {
            e.1 /= sum;
        }
    }
    Ok(UlamMatrix { n, rows })
}

/// Piecewise-constant probability density over a partition, stored as
/// per-cell masses.
#[derive(Clone, Debug)]
pub struct DensityEstimate {
    partition: Partition,
    weights: Vec<f64>,
    /// Prefix masses: `cumulative[i]` is the mass strictly below `b_i`.
    cumulative: Vec<f64>,
}

impl DensityEstimate {
    pub fn new(partition: Partition, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != partition.len() {
            return Err(LabError::Config(format!(
                "density: {} weights for {} cells",
                weights.len(),
                partition.len()
            )));
        }
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(LabError::Config("density: negative cell weight".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(LabError::Config(format!(
                "density: weights sum to {sum}, expected 1 within 1e-10"
            )));
        }
        let weights: Vec<f64> = weights.iter().map(|w| w / sum).collect();
        let mut cumulative = Vec::with_capacity(weights.len() + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for &w in &weights {
            acc += w;
            cumulative.push(acc);
        }
        Ok(DensityEstimate {
            partition,
            weights,
            cumulative,
        })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Density value on cell `i`: mass over width.
    pub fn density(&self, i: usize) -> f64 {
        self.weights[i] / self.partition.width(i)
    }

    /// `mu([0, x))` with linear interpolation inside the cell containing `x`.
    pub fn mass_below(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let i = self.partition.locate(x);
        let (lo, _) = self.partition.cell(i);
        self.cumulative[i] + self.weights[i] * (x - lo) / self.partition.width(i)
    }

    /// `mu([lo, hi))` by interpolated prefix masses.
    pub fn mass_of_interval(&self, lo: f64, hi: f64) -> f64 {
        (self.mass_below(hi) - self.mass_below(lo)).max(0.0)
    }

    /// Total-variation distance to another estimate on the same partition.
    pub fn total_variation(&self, other: &DensityEstimate) -> Result<f64> {
        if self.partition.len() != other.partition.len() {
            return Err(LabError::Config(
                "total_variation: partitions differ in size".into(),
            ));
        }
        Ok(0.5
            * self
                .weights
                .iter()
                .zip(&other.weights)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }
}

const STATIONARY_TOL: f64 = 1e-12;
const STATIONARY_MAX_SWEEPS: usize = 1_000_000;

/// Stationary row vector of the Ulam matrix by power iteration, returned
/// as a density over the partition. Converged when the L1 update norm
/// drops to 1e-12; reports the final residual otherwise.
pub fn stationary_density(matrix: &UlamMatrix, partition: &Partition) -> Result<DensityEstimate> {
    let n = matrix.len();
    if n != partition.len() {
        return Err(LabError::Config(
            "stationary_density: matrix and partition sizes differ".into(),
        ));
    }
    let mut w = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    for _ in 0..STATIONARY_MAX_SWEEPS {
        matrix.apply_left(&w, &mut next);
        let sum: f64 = next.iter().sum();
        for v in next.iter_mut() {
            *v /= sum;
        }
        let residual: f64 = w.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut w, &mut next);
        if residual <= STATIONARY_TOL {
            return DensityEstimate::new(partition.clone(), w);
        }
    }
    let mut residual = 0.0;
    matrix.apply_left(&w, &mut next);
    for (a, b) in w.iter().zip(&next) {
        residual += (a - b).abs();
    }
    Err(LabError::NonConvergence(format!(
        "power iteration: residual {residual} after {STATIONARY_MAX_SWEEPS} sweeps (tolerance {STATIONARY_TOL})"
    )))
}

/// Empirical measure of a finite orbit segment: histogram of
/// `T^k(x0)` for `k` in `[burn_in, burn_in + n)`.
pub fn birkhoff_measure(
    alpha: Alpha,
    x0: Point,
    n: u64,
    burn_in: u64,
    partition: &Partition,
) -> Result<DensityEstimate> {
    if n == 0 {
        return Err(LabError::Config("birkhoff_measure: n must be >= 1".into()));
    }
    let mut counts = vec![0u64; partition.len()];
    let mut x = x0;
    for _ in 0..burn_in {
        x = apply_map(alpha, x);
    }
    for sample in orbit(alpha, x, n) {
        counts[partition.locate(sample.point.value())] += 1;
    }
    let weights: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    DensityEstimate::new(partition.clone(), weights)
}

/// Power-law fit of a scaling quantity: `quantity ~ prefactor * x^exponent`
/// over `[x_lo, x_hi]`, by least squares in log-log coordinates.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub x_lo: f64,
    pub x_hi: f64,
    pub residual_rms: f64,
    pub samples: usize,
}

/// Log-log slope of `mu([0, x))` against `x`, sampled at the partition
/// boundaries inside `[x_lo, x_hi]`. For the invariant measure the slope
/// is `1 - a`.
pub fn cdf_scaling_fit(density: &DensityEstimate, x_lo: f64, x_hi: f64) -> Result<ScalingFit> {
    if !(0.0 < x_lo && x_lo < x_hi && x_hi < 0.5) {
        return Err(LabError::Config(format!(
            "cdf_scaling_fit: need 0 < x_lo < x_hi < 1/2, got [{x_lo}, {x_hi}]"
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, &b) in density.partition().boundaries().iter().enumerate() {
        if b >= x_lo && b <= x_hi && b > 0.0 {
            let mass = density.cumulative[i];
            if mass > 0.0 {
                xs.push(b.ln());
                ys.push(mass.ln());
            }
        }
    }
    if xs.len() < 4 {
        return Err(LabError::Config(format!(
            "cdf_scaling_fit: only {} usable boundaries in [{x_lo}, {x_hi}], need 4",
            xs.len()
        )));
    }
    let fit = linear_fit(&xs, &ys)?;
    Ok(ScalingFit {
        exponent: fit.slope,
        prefactor: fit.intercept.exp(),
        x_lo,
        x_hi,
        residual_rms: fit.residual_rms,
        samples: xs.len(),
    })
}

/// Flatness of `x^a h(x)` over the cells inside `[x_lo, x_hi]`: near the
/// neutral fixed point this quantity approaches a constant.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PrefactorEstimate {
    pub mean: f64,
    /// Coefficient of variation (standard deviation over mean) of the
    /// per-cell values.
    pub relative_variation: f64,
    /// Full spread `(max - min) / mean` of the per-cell values.
    pub spread: f64,
    pub x_lo: f64,
    pub x_hi: f64,
    pub cells: usize,
}

pub fn density_prefactor(
    density: &DensityEstimate,
    alpha: Alpha,
    x_lo: f64,
    x_hi: f64,
) -> Result<PrefactorEstimate> {
    if !(0.0 < x_lo && x_lo < x_hi && x_hi < 0.5) {
        return Err(LabError::Config(format!(
            "density_prefactor: need 0 < x_lo < x_hi < 1/2, got [{x_lo}, {x_hi}]"
        )));
    }
    let mut values = Vec::new();
    for i in 0..density.partition().len() {
        let (lo, hi) = density.partition().cell(i);
        if lo >= x_lo && hi <= x_hi {
            let mid = 0.5 * (lo + hi);
            values.push(mid.powf(alpha.value()) * density.density(i));
        }
    }
    if values.len() < 4 {
        return Err(LabError::Config(format!(
            "density_prefactor: only {} cells inside [{x_lo}, {x_hi}], need 4",
            values.len()
        )));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    let min = values.iter().cloned().fold(f64::MAX, f64::min);
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64;
    Ok(PrefactorEstimate {
        mean,
        relative_variation: variance.sqrt() / mean,
        spread: (max - min) / mean,
        x_lo,
        x_hi,
        cells: values.len(),
    })
}

/// Measure of a cylinder interval under a density estimate.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CylinderMass {
    pub value: f64,
    /// Set when the cylinder does not span a full partition cell, so the
    /// value rests on linear interpolation inside a single cell.
    pub subcell: bool,
}

/// Mass of a precomputed cylinder interval.
pub fn cylinder_mass(interval: &CylinderInterval, density: &DensityEstimate) -> CylinderMass {
    let value = density.mass_of_interval(interval.lo, interval.hi);
    let p = density.partition();
    let subcell = if interval.hi >= 1.0 {
        p.locate(interval.lo) == p.len() - 1 && interval.lo > p.cell(p.len() - 1).0
    } else {
        p.locate(interval.lo) == p.locate(interval.hi)
    };
    CylinderMass { value, subcell }
}

/// Measure of the length-`k` constant-`digit` cylinder, computing the
/// interval (and, for zeros, the preimage ladder) on demand.
pub fn cylinder_measure(
    alpha: Alpha,
    k: usize,
    digit: Digit,
    density: &DensityEstimate,
) -> Result<CylinderMass> {
    let interval = match digit {
        Digit::One => cylinder_interval_one(k)?,
        Digit::Zero => {
            let ladder = preimage_sequence(alpha, k.saturating_sub(1))?;
            cylinder_interval_zero(&ladder, k)?
        }
    };
    Ok(cylinder_mass(&interval, density))
}
