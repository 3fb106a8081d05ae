//! Rateless erasure coding for stop-feedback links.
//!
//! The transmitter sends the k message bits uncoded, then switches to fountain
//! parity symbols: uniform nonzero GF(2) combinations selected by randomness
//! shared with the receiver. The receiver tracks the rank of the generator
//! columns behind its unerased receptions and stops — by one ACK bit — as soon
//! as the rank reaches k, at which point the message is recovered exactly.
//!
//! The crate provides the codec itself ([`codec`], [`gf2`], [`channel`]), the
//! exact analytic description of the rank process as an absorbing Markov chain
//! ([`phase_type`]), closed-form blocklength and backoff bounds ([`bounds`]),
//! an optimizer for receivers restricted to finitely many decoding times
//! ([`schedule`]), and a deterministic Monte Carlo harness that cross-checks
//! every analytic quantity ([`montecarlo`]).

pub mod bounds;
pub mod channel;
pub mod codec;
pub mod error;
pub mod gf2;
pub mod montecarlo;
pub mod phase_type;
pub mod schedule;

pub use channel::{ChannelParams, RandomState, Symbol, TrialStreams};
pub use codec::{DecodingSchedule, EncoderSpec, Scheme, TrialOutcome};
pub use error::{Error, Result};
pub use gf2::{BitVector, RankTracker};
pub use montecarlo::{MessagePolicy, SimReport};
pub use phase_type::PhaseChain;
pub use schedule::{ScheduleSolution, SolverMethod};
