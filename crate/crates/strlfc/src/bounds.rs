//! Closed-form blocklength bounds for rateless transmission over the binary
//! erasure channel with stop feedback: the fountain-only baseline, the
//! systematic-plus-fountain bound, the converse, backoff-from-capacity
//! bounds, and the early-termination rate adjustment.

use crate::error::{Error, Result};
use crate::phase_type::{binomial_cdf, inverse_fresh_fraction, PhaseChain};
use serde::Serialize;

/// Limit of the correction sum in the fountain-only bound: the Erdos-Borwein
/// constant (OEIS A065442).
pub const ERDOS_BORWEIN: f64 = 1.606_695_152_415_291_7;

/// Which bound produced a [`BoundResult`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BoundKind {
    /// Achievability of the fountain-only scheme (every symbol a fountain column).
    FountainAchievability,
    /// Achievability of systematic transmission followed by fountain parity.
    SystematicFountainAchievability,
    /// Converse: minimum average blocklength any zero-error scheme needs.
    Converse,
}

/// An evaluated bound: expected blocklength in channel uses and the implied rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundResult {
    pub kind: BoundKind,
    /// log2 of the message count (the integer k for the achievability bounds).
    pub message_bits: f64,
    pub erasure_prob: f64,
    pub blocklength: f64,
    pub rate: f64,
}

impl BoundResult {
    fn new(kind: BoundKind, message_bits: f64, erasure_prob: f64, blocklength: f64) -> Self {
        Self {
            kind,
            message_bits,
            erasure_prob,
            blocklength,
            rate: message_bits / blocklength,
        }
    }
}

fn validate_k_p(k: usize, p: f64) -> Result<()> {
    if k == 0 {
        return Err(Error::ZeroDimension);
    }
    if !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidErasureProb(p));
    }
    Ok(())
}

/// Correction sum of the fountain-only bound: sum over i of
/// (2^i - 1) / (2^k - 2^i), i = 1..k-1. Bounded above by [`ERDOS_BORWEIN`].
fn fountain_correction_sum(k: usize) -> f64 {
    let kf = k as f64;
    (1..k)
        .map(|i| {
            let i = i as f64;
            ((i - kf).exp2() - (-kf).exp2()) / (1.0 - (i - kf).exp2())
        })
        .sum()
}

/// Expected blocklength the fountain-only scheme needs for a k-bit message:
/// (k + correction sum) / capacity. Exact for the uniform nonzero-column
/// fountain with a rank decoder.
pub fn fountain_achievability(k: usize, p: f64) -> Result<BoundResult> {
    validate_k_p(k, p)?;
    let blocklength = (k as f64 + fountain_correction_sum(k)) / (1.0 - p);
    Ok(BoundResult::new(
        BoundKind::FountainAchievability,
        k as f64,
        p,
        blocklength,
    ))
}

/// Expected blocklength of the systematic-plus-fountain scheme: the exact
/// expected stopping time of its rank decoder.
pub fn st_fountain_achievability(k: usize, p: f64) -> Result<BoundResult> {
    validate_k_p(k, p)?;
    let blocklength = PhaseChain::new(k, p)?.expected_stop_time()?;
    Ok(BoundResult::new(
        BoundKind::SystematicFountainAchievability,
        k as f64,
        p,
        blocklength,
    ))
}

/// Minimum average blocklength of any zero-error variable-length code with
/// message count M over an erasure channel with stop feedback.
pub fn converse(message_count: u128, p: f64) -> Result<BoundResult> {
    if message_count < 2 {
        return Err(Error::MessageCountTooSmall(message_count));
    }
    if !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidErasureProb(p));
    }
    let floor_bits = message_count.ilog2();
    let pow2_floor = 1u128 << floor_bits;
    // 2^(floor(log2 M) - log2 M) = 2^floor / M; exact when M is a power of 2.
    let frac = pow2_floor as f64 / message_count as f64;
    let blocklength = (floor_bits as f64 + 2.0 * (1.0 - frac)) / (1.0 - p);
    let message_bits = (message_count as f64).log2();
    Ok(BoundResult::new(
        BoundKind::Converse,
        message_bits,
        p,
        blocklength,
    ))
}

/// Capacity-scaled slack of the systematic-plus-fountain bound under the
/// fountain-only bound:
/// [k + correction sum] - [k(1-p) + sum_i (2^k-1)/(2^k-2^i) F(i; k, 1-p)].
/// Nonnegative for every k >= 1 and p in [0, 1]; zero when p = 1 or k = 1.
pub fn achievability_margin(k: usize, p: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::ZeroDimension);
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    let success = 1.0 - p;
    let fountain_side = k as f64 + fountain_correction_sum(k);
    let mut st_side = k as f64 * success;
    for i in 0..k {
        st_side += inverse_fresh_fraction(k, i) * binomial_cdf(i, k, success)?;
    }
    Ok(fountain_side - st_side)
}

/// Upper bounds on the backoff from capacity, 1 - R/C, for both schemes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Backoff {
    /// Fountain-only backoff; depends on k only.
    pub fountain: f64,
    /// Systematic-plus-fountain backoff; vanishes as p -> 0 and approaches
    /// the fountain-only value as p -> 1.
    pub st_fountain: f64,
}

pub fn backoff_bounds(k: usize, p: f64) -> Result<Backoff> {
    validate_k_p(k, p)?;
    let kf = k as f64;
    let fountain = 1.0 - kf / (kf + fountain_correction_sum(k));
    let success = 1.0 - p;
    let mut denom = kf * success;
    for i in 0..k {
        denom += inverse_fresh_fraction(k, i) * binomial_cdf(i, k, success)?;
    }
    let st_fountain = 1.0 - kf / denom;
    Ok(Backoff {
        fountain,
        st_fountain,
    })
}

/// Converts a zero-error expected blocklength into the bound for a code that
/// stops immediately with probability epsilon: scales by (1 - epsilon).
pub fn early_termination_adjust(blocklength: f64, epsilon: f64) -> Result<f64> {
    if epsilon <= 0.0 || epsilon >= 1.0 {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    Ok(blocklength * (1.0 - epsilon))
}
