//! Native reference mechanisms: randomized response and exponentially
//! distributed noise, plus exact bias computation and δ accounting.

mod bias;
mod ledger;
mod noise;
mod params;
mod rr;

pub use bias::{
    bias_expansion, biased_coin_threshold, bit_bias, sample_biased_bit, BiasEntry, BiasRow, BiasTable, BiasTableExport,
    BiasedBit,
};
pub use ledger::{delta_ledger, prob_zero_noise, DeltaLedger, DeltaLedgerReport};
pub use noise::{exponential_noise, exponential_noise_detailed, NoiseDraw};
pub use params::{Epsilon, NoiseParams, TruthfulValue, ValueKind, MAX_NOISE_BITS, MAX_PRECISION};
pub use rr::{randomized_response, rr_debias};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MechanismError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("value {value} outside [{lower}, {upper}]")]
    ValueOutOfRange { value: i64, lower: i64, upper: i64 },
    #[error("could not resolve the truncated bias of bit {k}")]
    PrecisionExhausted { k: usize },
    #[error("needed {needed} random bits, got {got}")]
    NotEnoughBits { needed: usize, got: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("bias must lie strictly between 0 and 1")]
    InvalidBias,
    #[error("bit index {k} outside 0..{n_bits}")]
    BitIndexOutOfRange { k: usize, n_bits: usize },
    #[error("expected a {expected:?} value")]
    WrongValueKind { expected: ValueKind },
}
