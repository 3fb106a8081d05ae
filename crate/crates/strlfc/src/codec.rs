//! Encoders and the rank decoder: systematic transmission followed by fountain
//! parity columns (or fountain columns from the start), decoded by tracking the
//! generator-matrix rank, with either an unbounded stopping rule or a finite
//! schedule of decoding times.

use crate::channel::{draw_base_vector, ChannelParams, TrialStreams};
use crate::error::{Error, Result};
use crate::gf2::{BitVector, RankTracker};
use serde::Serialize;

/// Transmission scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Scheme {
    /// First k instants send the message bits on natural base vectors; every
    /// later instant sends a uniform nonzero fountain combination.
    SystematicFountain,
    /// Every instant sends a uniform nonzero fountain combination.
    FountainOnly,
}

/// Message length plus scheme choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EncoderSpec {
    k: usize,
    scheme: Scheme,
}

impl EncoderSpec {
    pub fn new(k: usize, scheme: Scheme) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self { k, scheme })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }
}

/// When the decoder is allowed to inspect the rank and stop.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum DecodingSchedule {
    /// Inspect at every time instant; stop at the first full-rank time.
    Unbounded,
    /// Inspect only at the given times; the last is the hard deadline.
    Finite(Vec<u64>),
}

impl DecodingSchedule {
    pub fn unbounded() -> Self {
        DecodingSchedule::Unbounded
    }

    /// Validates a finite schedule: non-empty, strictly increasing, times >= 1.
    pub fn finite(times: Vec<u64>) -> Result<Self> {
        if times.is_empty() || times[0] < 1 || times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSchedule);
        }
        Ok(DecodingSchedule::Finite(times))
    }

    fn is_valid(&self) -> bool {
        match self {
            DecodingSchedule::Unbounded => true,
            DecodingSchedule::Finite(times) => {
                !times.is_empty() && times[0] >= 1 && times.windows(2).all(|w| w[0] < w[1])
            }
        }
    }
}

/// One channel input together with the generator column behind it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedSymbol {
    pub input: bool,
    pub column: BitVector,
}

/// Produces the channel input for time instant `time` (1-based). Fountain
/// columns are drawn from the shared stream, so the decoder regenerates the
/// same column by consuming the same stream.
pub fn encode_symbol(
    spec: &EncoderSpec,
    message: &BitVector,
    time: u64,
    common: &mut crate::channel::RandomState,
) -> Result<EncodedSymbol> {
    if message.len() != spec.k {
        return Err(Error::MessageLengthMismatch {
            expected: spec.k,
            got: message.len(),
        });
    }
    debug_assert!(time >= 1);
    let systematic = matches!(spec.scheme, Scheme::SystematicFountain) && time <= spec.k as u64;
    let column = if systematic {
        BitVector::unit(spec.k, (time - 1) as usize)
    } else {
        draw_base_vector(common, spec.k)
    };
    Ok(EncodedSymbol {
        input: column.dot(message),
        column,
    })
}

/// Result of simulating one transmission.
#[derive(Clone, Debug)]
pub struct TrialOutcome {
    /// Time instant at which the decoder stopped.
    pub stop_time: u64,
    /// Recovered message, or `None` when the deadline passed with deficient
    /// rank. A rank-deficient decoder would emit an arbitrary guess; counting
    /// every such termination as an error keeps the measured rate an upper
    /// bound on the true one.
    pub decoded: Option<BitVector>,
    /// Rank observed at each requested probe time (frozen after stopping).
    pub rank_probes: Vec<(u64, usize)>,
}

impl TrialOutcome {
    pub fn success(&self) -> bool {
        self.decoded.is_some()
    }
}

/// Solves for the message if the tracker is at full rank.
pub fn decode_at(tracker: &RankTracker) -> Option<BitVector> {
    tracker.solve_message().ok()
}

/// Simulates one transmission: encodes symbol by symbol, passes each through
/// the erasure channel, feeds the decoder's tracker (erasures become the zero
/// column), and stops per the schedule. `probe_times` must be strictly
/// increasing; probes past the stopping time report the rank at stop.
pub fn run_trial(
    spec: &EncoderSpec,
    params: &ChannelParams,
    schedule: &DecodingSchedule,
    message: &BitVector,
    streams: &mut TrialStreams,
    probe_times: &[u64],
) -> Result<TrialOutcome> {
    if message.len() != spec.k {
        return Err(Error::MessageLengthMismatch {
            expected: spec.k,
            got: message.len(),
        });
    }
    if !schedule.is_valid() {
        return Err(Error::InvalidSchedule);
    }
    debug_assert!(probe_times.windows(2).all(|w| w[0] < w[1]));

    let mut tracker = RankTracker::new(spec.k)?;
    let zero_column = BitVector::zeros(spec.k);
    let mut rank_probes = Vec::with_capacity(probe_times.len());
    let mut next_probe = 0;
    let mut schedule_idx = 0;
    let mut stopped: Option<(u64, Option<BitVector>)> = None;

    let mut time = 0u64;
    loop {
        if stopped.is_some() && next_probe >= probe_times.len() {
            break;
        }
        time += 1;
        if stopped.is_none() {
            let symbol = encode_symbol(spec, message, time, &mut streams.common)?;
            let received = params.transmit(&mut streams.erasure, symbol.input);
            match received.bit() {
                Some(bit) => tracker.insert_column(&symbol.column, bit)?,
                None => tracker.insert_column(&zero_column, false)?,
            };
            match schedule {
                DecodingSchedule::Unbounded => {
                    if tracker.is_full_rank() {
                        stopped = Some((time, decode_at(&tracker)));
                    }
                }
                DecodingSchedule::Finite(times) => {
                    if schedule_idx < times.len() && times[schedule_idx] == time {
                        schedule_idx += 1;
                        if tracker.is_full_rank() {
                            stopped = Some((time, decode_at(&tracker)));
                        } else if schedule_idx == times.len() {
                            stopped = Some((time, None));
                        }
                    }
                }
            }
        }
        while next_probe < probe_times.len() && probe_times[next_probe] == time {
            rank_probes.push((time, tracker.rank()));
            next_probe += 1;
        }
    }

    let (stop_time, decoded) = stopped.expect("loop exits only once stopped");
    Ok(TrialOutcome {
        stop_time,
        decoded,
        rank_probes,
    })
}
