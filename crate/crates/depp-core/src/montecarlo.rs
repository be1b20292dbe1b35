//! Reproducible shot-based sampling of coincidence outcomes, with
//! frequency estimates and 95% Wilson confidence intervals.
//!
//! The generator is xorshift64* with the multiplier 2685821657736338717,
//! so golden-count tests are portable across platforms. Uniform reals
//! are built as (output ≫ 11) / 2⁵³.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::optics::CoincidencePattern;
use crate::protocols::RunResult;

/// Seed value substituted for a zero seed before first use.
pub const ZERO_SEED_REMAP: u64 = 0x9E3779B97F4A7C15;

const MULTIPLIER: u64 = 2685821657736338717;

static RNG_CALLS: AtomicU64 = AtomicU64::new(0);

/// Number of [`RngState::next`] calls since process start. Used to verify
/// that analytic-only runs perform no PRNG work.
pub fn rng_call_count() -> u64 {
    RNG_CALLS.load(Ordering::Relaxed)
}

/// xorshift64* generator state; never zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngState {
    state: u64,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self { state: if seed == 0 { ZERO_SEED_REMAP } else { seed } }
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    /// Advances the state and returns the next 64-bit output.
    pub fn next(&mut self) -> u64 {
        RNG_CALLS.fetch_add(1, Ordering::Relaxed);
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(MULTIPLIER)
    }

    /// Uniform real in [0, 1) from the high 53 bits of the next output.
    pub fn next_f64(&mut self) -> f64 {
        (self.next() >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Deterministic sampling outcome: counts, frequencies and 95% Wilson
/// interval halfwidths per coincidence pattern, in the fixed order
/// (c,d), (c,f), (e,d), (e,f).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleReport {
    pub shots: u64,
    pub seed: u64,
    pub counts: [u64; 4],
    pub frequencies: [f64; 4],
    pub ci_halfwidth: [f64; 4],
}

impl SampleReport {
    pub fn count_for(&self, pat: CoincidencePattern) -> u64 {
        let idx = CoincidencePattern::ALL.iter().position(|&p| p == pat).unwrap();
        self.counts[idx]
    }
}

/// 95% Wilson score interval (lo, hi) for `count` successes in `shots`
/// trials. Valid near probability 0 and 1, unlike the Wald interval.
pub fn wilson_interval(count: u64, shots: u64) -> (f64, f64) {
    assert!(shots > 0 && count <= shots);
    let z = 1.959963984540054; // 97.5th percentile of the standard normal
    let n = shots as f64;
    let phat = count as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let hw = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - hw).max(0.0), (center + hw).min(1.0))
}

fn distribution(rr: &RunResult) -> Result<[f64; 4]> {
    let probs = rr.pattern_probabilities();
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParam(format!(
            "pattern probabilities must sum to 1 within 1e-9, got {sum}"
        )));
    }
    Ok(probs)
}

fn report_from_counts(counts: [u64; 4], shots: u64, seed: u64) -> SampleReport {
    let mut frequencies = [0.0; 4];
    let mut ci_halfwidth = [0.0; 4];
    for i in 0..4 {
        frequencies[i] = counts[i] as f64 / shots as f64;
        let (lo, hi) = wilson_interval(counts[i], shots);
        ci_halfwidth[i] = (hi - lo) / 2.0;
    }
    SampleReport { shots, seed, counts, frequencies, ci_halfwidth }
}

fn sample_counts(probs: &[f64; 4], shots: u64, rng: &mut RngState) -> [u64; 4] {
    let mut cumulative = [0.0; 4];
    let mut acc = 0.0;
    for i in 0..4 {
        acc += probs[i];
        cumulative[i] = acc;
    }
    cumulative[3] = f64::INFINITY; // guard against rounding at the top end
    let mut counts = [0u64; 4];
    for _ in 0..shots {
        let u = rng.next_f64();
        let idx = cumulative.iter().position(|&c| u < c).unwrap();
        counts[idx] += 1;
    }
    counts
}

/// Draws `shots` coincidence outcomes from the analytic distribution of a
/// run; counts are deterministic given the seed.
pub fn sample_patterns(rr: &RunResult, shots: u64, seed: u64) -> Result<SampleReport> {
    if shots == 0 {
        return Err(Error::InvalidParam("shots must be positive".into()));
    }
    let probs = distribution(rr)?;
    let mut rng = RngState::new(seed);
    let counts = sample_counts(&probs, shots, &mut rng);
    Ok(report_from_counts(counts, shots, seed))
}

/// Splits `shots` over `k` shards; shard i is seeded with the output of
/// the (i+1)-th generator step from the master seed's state, so the
/// merged counts are deterministic given (seed, k) and shards may run
/// concurrently.
pub fn sample_patterns_sharded(
    rr: &RunResult,
    shots: u64,
    seed: u64,
    shards: u64,
) -> Result<SampleReport> {
    if shots == 0 {
        return Err(Error::InvalidParam("shots must be positive".into()));
    }
    if shards == 0 {
        return Err(Error::InvalidParam("shard count must be positive".into()));
    }
    let probs = distribution(rr)?;
    let mut master = RngState::new(seed);
    let mut counts = [0u64; 4];
    let base = shots / shards;
    let extra = shots % shards;
    for i in 0..shards {
        let shard_seed = master.next();
        let shard_shots = base + if i < extra { 1 } else { 0 };
        if shard_shots == 0 {
            continue;
        }
        let mut rng = RngState::new(shard_seed);
        let shard_counts = sample_counts(&probs, shard_shots, &mut rng);
        for j in 0..4 {
            counts[j] += shard_counts[j];
        }
    }
    Ok(report_from_counts(counts, shots, seed))
}
