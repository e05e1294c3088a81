//! The intermittent interval map family and its exact branch inverses.
//!
//! The map acts on `[0, 1)` with two monotone branches,
//!
//! ```text
//! T(x) = x (1 + 2^a x^a)   for x in [0, 1/2)
//! T(x) = 2x - 1            for x in [1/2, 1)
//! ```
//!
//! for a parameter `a` in `(0, 1)`. The fixed point at 0 is neutral
//! (derivative 1), which is what makes the dynamics intermittent: orbits
//! spend long laminar stretches near 0 before being reinjected by the
//! linear branch. Everything downstream (run lengths, transfer-operator
//! discretization, correlation estimates) is built on the functions here.

use crate::error::{LabError, Result};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Map parameter, validated to lie strictly inside `(0, 1)`.
///
/// Caches `2^a` so the hot orbit loop pays one `powf` per step, not two.
#[derive(Clone, Copy, Debug)]
pub struct Alpha {
    value: f64,
    two_pow: f64,
}

impl Alpha {
    pub fn new(value: f64) -> Result<Self> {
        if !(value > 0.0 && value < 1.0) {
            return Err(LabError::Config(format!(
                "alpha: must satisfy 0 < alpha < 1, got {value}"
            )));
        }
        Ok(Alpha {
            value,
            two_pow: 2f64.powf(value),
        })
    }

    pub fn value(self) -> f64 {
        self.value
    }

    /// `2^a`, the coefficient of the nonlinear branch.
    pub fn two_pow_alpha(self) -> f64 {
        self.two_pow
    }
}

impl PartialEq for Alpha {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl Serialize for Alpha {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.value.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Alpha {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        Alpha::new(v).map_err(serde::de::Error::custom)
    }
}

/// A point of the phase space `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
pub struct Point(f64);

impl Point {
    pub const ZERO: Point = Point(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if !(value.is_finite() && (0.0..1.0).contains(&value)) {
            return Err(LabError::Config(format!(
                "point: must lie in [0, 1), got {value}"
            )));
        }
        Ok(Point(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Symbol of the two-cell itinerary partition: 0 on `[0, 1/2)`, 1 on `[1/2, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Digit {
    Zero,
    One,
}

impl Digit {
    pub fn index(self) -> usize {
        match self {
            Digit::Zero => 0,
            Digit::One => 1,
        }
    }

    pub fn as_u8(self) -> u8 {
        self.index() as u8
    }

    pub fn other(self) -> Digit {
        match self {
            Digit::Zero => Digit::One,
            Digit::One => Digit::Zero,
        }
    }
}

/// Itinerary symbol of `x`: the boundary 1/2 belongs to the right cell.
pub fn symbol(x: Point) -> Digit {
    if x.value() < 0.5 {
        Digit::Zero
    } else {
        Digit::One
    }
}

/// One application of the map. The left-branch product can round up to
/// exactly 1.0 for `x` just below 1/2; such results are clamped to the
/// largest double below 1 and the clamp is reported.
pub fn apply_map_checked(alpha: Alpha, x: Point) -> (Point, bool) {
    let v = x.value();
    let y = if v < 0.5 {
        v * (1.0 + alpha.two_pow_alpha() * v.powf(alpha.value()))
    } else {
        2.0 * v - 1.0
    };
    if y >= 1.0 {
        (Point(1f64.next_down()), true)
    } else {
        (Point(y), false)
    }
}

/// One application of the map, discarding the clamp flag.
pub fn apply_map(alpha: Alpha, x: Point) -> Point {
    apply_map_checked(alpha, x).0
}

/// `T'(x)`. By the half-open partition convention the right-branch value 2
/// is used at `x = 1/2`. Always `>= 1`.
pub fn derivative(alpha: Alpha, x: Point) -> f64 {
    let v = x.value();
    if v < 0.5 {
        1.0 + alpha.two_pow_alpha() * (1.0 + alpha.value()) * v.powf(alpha.value())
    } else {
        2.0
    }
}

/// One step of an orbit: the point `T^k(x0)` together with its step index
/// and itinerary digit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrbitSample {
    pub index: u64,
    pub point: Point,
    pub digit: Digit,
}

/// Streaming orbit iterator; constant memory regardless of length.
pub struct Orbit {
    alpha: Alpha,
    x: Point,
    k: u64,
    remaining: u64,
    clamp_count: u64,
}

impl Orbit {
    /// Number of left-branch results so far that rounded to 1.0 and were
    /// clamped back into the domain.
    pub fn clamp_count(&self) -> u64 {
        self.clamp_count
    }
}

impl Iterator for Orbit {
    type Item = OrbitSample;

    fn next(&mut self) -> Option<OrbitSample> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let sample = OrbitSample {
            index: self.k,
            point: self.x,
            digit: symbol(self.x),
        };
        let (next, clamped) = apply_map_checked(self.alpha, self.x);
        if clamped {
            self.clamp_count += 1;
        }
        self.x = next;
        self.k = self
            .k
            .checked_add(1)
            .expect("orbit step counter overflowed u64");
        Some(sample)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = usize::try_from(self.remaining).unwrap_or(usize::MAX);
        (n, Some(n))
    }
}

/// Orbit of length `n` started at `x0`: yields `T^k(x0)` for `k = 0..n`.
pub fn orbit(alpha: Alpha, x0: Point, n: u64) -> Orbit {
    Orbit {
        alpha,
        x: x0,
        k: 0,
        remaining: n,
        clamp_count: 0,
    }
}

/// First `n` itinerary digits of the orbit of `x0`.
pub fn orbit_digits(alpha: Alpha, x0: Point, n: usize) -> Vec<Digit> {
    orbit(alpha, x0, n as u64).map(|s| s.digit).collect()
}

const INVERSE_TOL: f64 = 1e-14;
const INVERSE_MAX_ITER: usize = 200;

/// Left-branch inverse: the unique `x` in `[0, 1/2]` with
/// `x (1 + 2^a x^a) = y`, for `y` in `[0, 1]` (the left branch extends
/// continuously to `T(1/2) = 1`).
///
/// Bisection narrows the bracket, then Newton polishes; the returned root
/// satisfies `|T(x) - y| <= 1e-14`.
pub fn inverse_left(alpha: Alpha, y: f64) -> Result<f64> {
    if !(y.is_finite() && (0.0..=1.0).contains(&y)) {
        return Err(LabError::Config(format!(
            "inverse_left: y must lie in [0, 1], got {y}"
        )));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    let a = alpha.value();
    let c = alpha.two_pow_alpha();
    let f = |x: f64| x * (1.0 + c * x.powf(a)) - y;
    let fp = |x: f64| 1.0 + c * (1.0 + a) * x.powf(a);

    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    let mut x = 0.5 * y; // the root lies below y since T expands
    let mut iterations = 0;
    // Bisection until the bracket is tight enough for Newton to be safe.
    while hi - lo > 1e-6 {
        iterations += 1;
        if iterations > INVERSE_MAX_ITER {
            return Err(LabError::Solver(format!(
                "inverse_left: bisection cap exhausted for y = {y}"
            )));
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    x = x.clamp(lo, hi);
    loop {
        let r = f(x);
        if r.abs() <= INVERSE_TOL {
            return Ok(x);
        }
        iterations += 1;
        if iterations > INVERSE_MAX_ITER {
            return Err(LabError::Solver(format!(
                "inverse_left: residual {} after {} iterations for y = {y}",
                r.abs(),
                INVERSE_MAX_ITER
            )));
        }
        let step = r / fp(x);
        let mut next = x - step;
        if !(lo..=hi).contains(&next) {
            next = 0.5 * (lo + hi);
        }
        if f(next) > 0.0 {
            hi = next;
        } else {
            lo = next;
        }
        x = next;
    }
}

/// Right-branch inverse `(y + 1) / 2`, mapping `[0, 1)` onto `[1/2, 1)`.
pub fn inverse_right(y: Point) -> Point {
    Point(0.5 * (y.value() + 1.0))
}

/// The preimage ladder of the partition boundary under the left branch:
/// `a_0 = 1/2`, `a_{n+1} = T^{-1}(a_n) ∩ [0, 1/2)`.
///
/// `a_n` decreases to 0 like `n^{-1/a}`; its entries bound the region
/// whose orbits stay left of 1/2 for `n` consecutive steps.
#[derive(Clone, Debug)]
pub struct PreimageLadder {
    alpha: Alpha,
    values: Vec<f64>,
}

impl PreimageLadder {
    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    /// `a_0, a_1, ..., a_n` in order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Computes the ladder `a_0 = 1/2, ..., a_n` by repeated left-branch
/// inversion. Solver failures carry the offending index.
pub fn preimage_sequence(alpha: Alpha, n: usize) -> Result<PreimageLadder> {
    let mut values = Vec::with_capacity(n + 1);
    values.push(0.5f64);
    for k in 0..n {
        let prev = values[k];
        let next = inverse_left(alpha, prev)
            .map_err(|e| LabError::Solver(format!("preimage ladder at index {}: {e}", k + 1)))?;
        if !(next > 0.0 && next < prev) {
            return Err(LabError::Solver(format!(
                "preimage ladder not strictly decreasing at index {}: a_{} = {prev}, a_{} = {next}",
                k + 1,
                k,
                k + 1
            )));
        }
        values.push(next);
    }
    Ok(PreimageLadder { alpha, values })
}
