//! Run-length statistics of itinerary digit sequences.
//!
//! `r_n` (longest block of zeros among the first `n` digits) and `R_n`
//! (longest block of ones) are maintained by a constant-memory streaming
//! accumulator, with windowed variants and maximal windowed Birkhoff sums
//! computed from materialized digit slices. The exact cylinder intervals
//! of constant words, `[0, a_{k-1})` for zeros and `[1 - 2^{-k}, 1)` for
//! ones, live here too.
//!
//! Digit indexing convention: the mathematical digits are 1-based (the
//! first digit is the symbol of `x` itself); slices are 0-based, so
//! `digits[i]` is digit `i + 1`. Windowed APIs take 1-based `(m, n)`
//! bounds and convert internally, once.

use crate::error::{LabError, Result};
use crate::map::{preimage_sequence, Alpha, Digit, PreimageLadder};

/// Streaming accumulator for current and maximal runs of both digits.
///
/// Sequential-only: feeding a sequence digit by digit equals the brute
/// force over the whole sequence, but states for two halves of a split
/// sequence cannot be merged.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunLengthState {
    n: u64,
    current: [u64; 2],
    max: [u64; 2],
}

impl RunLengthState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Consume one digit in O(1).
    pub fn feed(&mut self, digit: Digit) {
        self.n += 1;
        let d = digit.index();
        self.current[d] += 1;
        self.current[1 - d] = 0;
        if self.current[d] > self.max[d] {
            self.max[d] = self.current[d];
        }
    }

    /// Digits consumed so far.
    pub fn steps(&self) -> u64 {
        self.n
    }

    /// Length of the trailing run of `digit`.
    pub fn current_run(&self, digit: Digit) -> u64 {
        self.current[digit.index()]
    }

    /// Longest run of `digit` seen so far (`r_n` for zeros, `R_n` for ones).
    pub fn max_run(&self, digit: Digit) -> u64 {
        self.max[digit.index()]
    }
}

/// Maximal constant-`digit` block length among digits `m..=n` (1-based,
/// inclusive): the largest `k >= 0` such that digits `i+1 ..= i+k` all
/// equal `digit` for some `m - 1 <= i <= n - k`.
pub fn run_length_window(digits: &[Digit], m: usize, n: usize, digit: Digit) -> Result<u64> {
    if !(1 <= m && m <= n && n <= digits.len()) {
        return Err(LabError::Config(format!(
            "run_length_window: need 1 <= m <= n <= len, got m = {m}, n = {n}, len = {}",
            digits.len()
        )));
    }
    let mut best = 0u64;
    let mut run = 0u64;
    for &d in &digits[m - 1..n] {
        if d == digit {
            run += 1;
            if run > best {
                best = run;
            }
        } else {
            run = 0;
        }
    }
    Ok(best)
}

/// Maximal windowed Birkhoff sum of a digit indicator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowStat {
    /// Window length `K`.
    pub window_len: u64,
    /// Largest count of matching digits over all windows of length `K`.
    pub max_sum: u64,
    /// Horizon: number of digits scanned.
    pub n: u64,
}

impl WindowStat {
    /// `max_sum / window_len`, the maximal window average.
    pub fn max_average(&self) -> f64 {
        self.max_sum as f64 / self.window_len as f64
    }
}

/// Maximum over all length-`k` windows of the number of digits equal to
/// `digit`; a single O(n) sliding pass.
pub fn max_window_birkhoff(digits: &[Digit], k: usize, digit: Digit) -> Result<WindowStat> {
    if k == 0 || k > digits.len() {
        return Err(LabError::Config(format!(
            "max_window_birkhoff: need 1 <= K <= n, got K = {k}, n = {}",
            digits.len()
        )));
    }
    let mut sum: u64 = digits[..k].iter().filter(|&&d| d == digit).count() as u64;
    let mut best = sum;
    for i in k..digits.len() {
        sum += (digits[i] == digit) as u64;
        sum -= (digits[i - k] == digit) as u64;
        if sum > best {
            best = sum;
        }
    }
    Ok(WindowStat {
        window_len: k as u64,
        max_sum: best,
        n: digits.len() as u64,
    })
}

/// The interval of points whose first `k` itinerary digits all equal a
/// given digit.
///
/// For ones this is the dyadic interval `[1 - 2^{-k}, 1)`; for zeros it
/// is `[0, a_{k-1})` where `a` is the left-branch preimage ladder with
/// `a_0 = 1/2` (one application of the map strips one leading zero, so
/// `k` leading zeros pin the point below the `(k-1)`-th rung).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CylinderInterval {
    pub digit: Digit,
    pub k: usize,
    pub lo: f64,
    pub hi: f64,
}

impl CylinderInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x < self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Constant-word cylinder of length `k >= 1`, computing the zero ladder
/// on demand.
pub fn cylinder_interval(alpha: Alpha, k: usize, digit: Digit) -> Result<CylinderInterval> {
    match digit {
        Digit::One => cylinder_interval_one(k),
        Digit::Zero => {
            let ladder = preimage_sequence(alpha, k.saturating_sub(1))?;
            cylinder_interval_zero(&ladder, k)
        }
    }
}

/// One-word cylinder `[1 - 2^{-k}, 1)`; exact in binary for `k <= 53`.
pub fn cylinder_interval_one(k: usize) -> Result<CylinderInterval> {
    if k == 0 {
        return Err(LabError::Config("cylinder_interval: k must be >= 1".into()));
    }
    Ok(CylinderInterval {
        digit: Digit::One,
        k,
        lo: 1.0 - 0.5f64.powi(k as i32),
        hi: 1.0,
    })
}

/// Zero-word cylinder `[0, a_{k-1})` read off a precomputed ladder.
pub fn cylinder_interval_zero(ladder: &PreimageLadder, k: usize) -> Result<CylinderInterval> {
    if k == 0 {
        return Err(LabError::Config("cylinder_interval: k must be >= 1".into()));
    }
    if ladder.len() < k {
        return Err(LabError::Config(format!(
            "cylinder_interval: ladder holds {} rungs, need a_{}",
            ladder.len() - 1,
            k - 1
        )));
    }
    Ok(CylinderInterval {
        digit: Digit::Zero,
        k,
        lo: 0.0,
        hi: ladder.value(k - 1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{orbit_digits, Alpha, Point};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn digits_of(bits: &[u8]) -> Vec<Digit> {
        bits.iter()
            .map(|&b| if b == 0 { Digit::Zero } else { Digit::One })
            .collect()
    }

    fn feed_all(digits: &[Digit]) -> RunLengthState {
        let mut state = RunLengthState::new();
        for &d in digits {
            state.feed(d);
        }
        state
    }

    /// Brute-force maximal run: scan forward from every start index.
    fn brute_force_max_run(digits: &[Digit], digit: Digit) -> u64 {
        let mut best = 0;
        for i in 0..digits.len() {
            let mut k = 0;
            while i + k < digits.len() && digits[i + k] == digit {
                k += 1;
            }
            best = best.max(k as u64);
        }
        best
    }

    fn brute_force_window_max(digits: &[Digit], k: usize, digit: Digit) -> u64 {
        (0..=digits.len() - k)
            .map(|i| digits[i..i + k].iter().filter(|&&d| d == digit).count() as u64)
            .max()
            .unwrap()
    }

    fn random_digits(seed: u64, len: usize) -> Vec<Digit> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len)
            .map(|_| {
                if rng.random::<bool>() {
                    Digit::One
                } else {
                    Digit::Zero
                }
            })
            .collect()
    }

    #[test]
    fn feed_hand_counts() {
        let state = feed_all(&digits_of(&[0, 0, 1, 1, 1, 0]));
        assert_eq!(state.max_run(Digit::Zero), 2);
        assert_eq!(state.max_run(Digit::One), 3);
        assert_eq!(state.steps(), 6);
    }

    #[test]
    fn feed_all_zeros() {
        let state = feed_all(&vec![Digit::Zero; 17]);
        assert_eq!(state.max_run(Digit::Zero), 17);
        assert_eq!(state.max_run(Digit::One), 0);
    }

    #[test]
    fn empty_state_has_zero_runs() {
        let state = RunLengthState::new();
        assert_eq!(state.max_run(Digit::Zero), 0);
        assert_eq!(state.max_run(Digit::One), 0);
    }

    #[test]
    fn feed_matches_brute_force_on_random_sequence() {
        let digits = random_digits(11, 10_000);
        let state = feed_all(&digits);
        for d in [Digit::Zero, Digit::One] {
            assert_eq!(state.max_run(d), brute_force_max_run(&digits, d));
        }
    }

    #[test]
    fn window_hand_examples() {
        let digits = digits_of(&[0, 0, 1, 0]);
        assert_eq!(run_length_window(&digits, 1, 4, Digit::Zero).unwrap(), 2);
        assert_eq!(run_length_window(&digits, 3, 4, Digit::Zero).unwrap(), 1);
        // full-prefix window equals the streaming maximum
        let state = feed_all(&digits);
        assert_eq!(
            run_length_window(&digits, 1, 4, Digit::Zero).unwrap(),
            state.max_run(Digit::Zero)
        );
    }

    #[test]
    fn window_rejects_bad_indices() {
        let digits = digits_of(&[0, 1]);
        assert!(run_length_window(&digits, 0, 2, Digit::Zero).is_err());
        assert!(run_length_window(&digits, 2, 1, Digit::Zero).is_err());
        assert!(run_length_window(&digits, 1, 3, Digit::Zero).is_err());
    }

    #[test]
    fn window_matches_brute_force_on_random_pairs() {
        let digits = random_digits(7, 1000);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let m = rng.random_range(1..=1000usize);
            let n = rng.random_range(m..=1000usize);
            for d in [Digit::Zero, Digit::One] {
                let got = run_length_window(&digits, m, n, d).unwrap();
                assert_eq!(got, brute_force_max_run(&digits[m - 1..n], d));
            }
        }
    }

    #[test]
    fn birkhoff_window_hand_examples() {
        let digits = digits_of(&[1, 1, 0, 1]);
        let stat = max_window_birkhoff(&digits, 2, Digit::One).unwrap();
        assert_eq!(stat.max_sum, 2);
        assert_eq!(stat.window_len, 2);

        let stat = max_window_birkhoff(&vec![Digit::One; 5], 5, Digit::One).unwrap();
        assert_eq!(stat.max_sum, 5);
        assert!((stat.max_average() - 1.0).abs() < 1e-15);

        assert!(max_window_birkhoff(&digits, 5, Digit::One).is_err());
        assert!(max_window_birkhoff(&digits, 0, Digit::One).is_err());
    }

    #[test]
    fn birkhoff_window_matches_brute_force() {
        let digits = random_digits(23, 10_000);
        for d in [Digit::Zero, Digit::One] {
            let got = max_window_birkhoff(&digits, 37, d).unwrap().max_sum;
            assert_eq!(got, brute_force_window_max(&digits, 37, d));
        }
    }

    #[test]
    fn best_window_of_max_run_length_is_full() {
        let digits = random_digits(31, 5000);
        for d in [Digit::Zero, Digit::One] {
            let k = feed_all(&digits).max_run(d) as usize;
            assert!(k >= 1);
            let stat = max_window_birkhoff(&digits, k, d).unwrap();
            assert_eq!(stat.max_sum, k as u64);
        }
    }

    #[test]
    fn one_cylinder_is_dyadic() {
        let alpha = Alpha::new(0.3).unwrap();
        let c = cylinder_interval(alpha, 3, Digit::One).unwrap();
        assert_eq!(c.lo, 0.875);
        assert_eq!(c.hi, 1.0);
        assert!(cylinder_interval(alpha, 0, Digit::One).is_err());
    }

    #[test]
    fn zero_cylinder_rungs() {
        let alpha = Alpha::new(0.5).unwrap();
        // One leading zero pins the point below 1/2; two pin it below a_1.
        let c1 = cylinder_interval(alpha, 1, Digit::Zero).unwrap();
        assert_eq!(c1.lo, 0.0);
        assert_eq!(c1.hi, 0.5);
        let c2 = cylinder_interval(alpha, 2, Digit::Zero).unwrap();
        assert!((c2.hi - 0.2849).abs() <= 5e-4, "a_1 = {}", c2.hi);
    }

    #[test]
    fn one_cylinder_membership_hand_iteration() {
        // 0.876 -> 0.752 -> 0.504 -> 0.008: three leading ones, then a zero.
        let alpha = Alpha::new(0.5).unwrap();
        let digits = orbit_digits(alpha, Point::new(0.876).unwrap(), 4);
        assert_eq!(
            digits,
            vec![Digit::One, Digit::One, Digit::One, Digit::Zero]
        );
        let c = cylinder_interval(alpha, 3, Digit::One).unwrap();
        assert!(c.contains(0.876));
    }

    #[test]
    fn cylinder_membership_equals_leading_digits() {
        for a in [0.4, 0.6] {
            let alpha = Alpha::new(a).unwrap();
            let ladder = preimage_sequence(alpha, 8).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            for k in 1..=8usize {
                let cz = cylinder_interval_zero(&ladder, k).unwrap();
                let co = cylinder_interval_one(k).unwrap();
                for _ in 0..1000 {
                    let x = rng.random::<f64>();
                    let digits = orbit_digits(alpha, Point::new(x).unwrap(), k);
                    let all_zero = digits.iter().all(|&d| d == Digit::Zero);
                    let all_one = digits.iter().all(|&d| d == Digit::One);
                    assert_eq!(cz.contains(x), all_zero, "alpha {a}, k {k}, x {x}");
                    assert_eq!(co.contains(x), all_one, "alpha {a}, k {k}, x {x}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn max_runs_monotone_and_bounded(bits in proptest::collection::vec(0u8..2, 1..300)) {
            let digits = digits_of(&bits);
            let mut state = RunLengthState::new();
            let mut prev = [0u64; 2];
            for (i, &d) in digits.iter().enumerate() {
                state.feed(d);
                let n = (i + 1) as u64;
                for dd in [Digit::Zero, Digit::One] {
                    let m = state.max_run(dd);
                    prop_assert!(m >= prev[dd.index()]);
                    prop_assert!(m <= n);
                    prop_assert!(state.current_run(dd) <= m);
                    prev[dd.index()] = m;
                }
                prop_assert!(state.max_run(Digit::Zero) + state.max_run(Digit::One) >= 1);
            }
        }

        #[test]
        fn streaming_equals_brute_force(bits in proptest::collection::vec(0u8..2, 1..200)) {
            let digits = digits_of(&bits);
            let state = feed_all(&digits);
            for d in [Digit::Zero, Digit::One] {
                prop_assert_eq!(state.max_run(d), brute_force_max_run(&digits, d));
            }
        }
    }
}
