//! Seedable binary erasure channel and the shared randomness that drives the
//! fountain-column selection on both sides of the link.

use crate::error::{Error, Result};
use crate::gf2::BitVector;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

/// Deterministic generator backing every random draw in the library.
///
/// Internal reproducibility only: the same seed always yields the same stream
/// within this implementation; no cross-implementation bit compatibility is
/// promised.
pub type RandomState = ChaCha12Rng;

/// Generator name recorded in report metadata.
pub const RNG_ALGORITHM: &str = "chacha12";

/// Erasure probability and master seed for a simulated link.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChannelParams {
    erasure_prob: f64,
    seed: u64,
}

impl ChannelParams {
    pub fn new(erasure_prob: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&erasure_prob) {
            return Err(Error::InvalidErasureProb(erasure_prob));
        }
        Ok(Self { erasure_prob, seed })
    }

    pub fn erasure_prob(&self) -> f64 {
        self.erasure_prob
    }

    pub fn capacity(&self) -> f64 {
        1.0 - self.erasure_prob
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Sends one bit: erased with probability p, otherwise delivered intact.
    /// Consumes exactly one draw from `rng`.
    pub fn transmit(&self, rng: &mut RandomState, input: bool) -> Symbol {
        if rng.gen::<f64>() < self.erasure_prob {
            Symbol::Erased
        } else {
            Symbol::from_bit(input)
        }
    }
}

/// Channel output alphabet {0, ?, 1}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Symbol {
    Zero,
    One,
    Erased,
}

impl Symbol {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Symbol::One
        } else {
            Symbol::Zero
        }
    }

    pub fn bit(&self) -> Option<bool> {
        match self {
            Symbol::Zero => Some(false),
            Symbol::One => Some(true),
            Symbol::Erased => None,
        }
    }

    pub fn is_erased(&self) -> bool {
        matches!(self, Symbol::Erased)
    }
}

/// Roles of the independent streams split from one master seed. Keeping the
/// erasure pattern and the codebook on separate streams lets matched-seed
/// comparisons vary one without perturbing the other.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StreamTag {
    Erasure = 0,
    CommonRandomness = 1,
    Message = 2,
}

/// Fixed splitting rule: each (master seed, trial index, tag) triple keys its
/// own generator.
pub fn derive_stream(master_seed: u64, trial: u64, tag: StreamTag) -> RandomState {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&trial.to_le_bytes());
    key[16] = tag as u8;
    ChaCha12Rng::from_seed(key)
}

/// The two per-trial streams a simulated transmission consumes: one for the
/// channel's erasures, one for the encoder/decoder-shared column selection.
pub struct TrialStreams {
    pub erasure: RandomState,
    pub common: RandomState,
}

impl TrialStreams {
    pub fn derive(master_seed: u64, trial: u64) -> Self {
        Self {
            erasure: derive_stream(master_seed, trial, StreamTag::Erasure),
            common: derive_stream(master_seed, trial, StreamTag::CommonRandomness),
        }
    }
}

/// Uniform draw from the 2^k - 1 nonzero vectors of {0,1}^k, by rejection on a
/// uniform k-bit word. Both sides of the link draw from the same stream so the
/// decoder reproduces the encoder's columns exactly.
pub fn draw_base_vector(rng: &mut RandomState, k: usize) -> BitVector {
    assert!(k >= 1, "base vectors need dimension >= 1");
    let n_words = k.div_ceil(64);
    let tail = k % 64;
    loop {
        let mut words = Vec::with_capacity(n_words);
        for _ in 0..n_words {
            words.push(rng.next_u64());
        }
        if tail != 0 {
            *words.last_mut().unwrap() &= (1u64 << tail) - 1;
        }
        if words.iter().any(|&w| w != 0) {
            return BitVector::from_words(k, words);
        }
    }
}
