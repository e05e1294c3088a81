//! Numerical laboratory for run-length statistics of the intermittent
//! interval map family `T_a(x) = x(1 + 2^a x^a)` on `[0, 1/2)`, `2x - 1`
//! on `[1/2, 1)`, with `a` in `(0, 1)`.
//!
//! The crate estimates the (absolutely continuous) invariant measure via
//! Ulam's method, tracks maximal run lengths of the binary itinerary,
//! measures correlation decay, and runs the Monte Carlo experiments that
//! probe the limit laws `log r_n / (a log n) -> 1` and
//! `R_n / log2 n -> 1`.

pub mod cli;
pub mod correlation;
pub mod error;
pub mod experiments;
pub mod map;
pub mod measure;
pub mod runlength;
pub mod stats;

pub use error::{LabError, Result};
pub use map::{apply_map, derivative, orbit, Alpha, Digit, Point};
