//! Exact output distributions, DP checks, and goodness of fit.

mod distribution;
mod dp;
mod fit;
mod histogram;

pub use distribution::{exact_distribution, ExactDistribution, MAX_ENUMERATION_BITS};
pub use dp::{dp_check_with_factor, dp_ratio_check, exp_lower_bound, rr_exact_distribution, DpCheckReport};
pub use fit::{chi_square_fit, ChiSquareFit, DEFAULT_SIGNIFICANCE, MIN_EXPECTED, MIN_SAMPLES};
pub use histogram::{distribution_csv, histogram_csv, histogram_mode, tally};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StatsError {
    #[error("enumerating {n_bits} noise bits is too expensive")]
    EnumerationTooLarge { n_bits: usize },
    #[error("{samples} samples are not enough for a chi-square fit")]
    InsufficientSamples { samples: u64 },
    #[error("input {0} outside the mechanism domain")]
    ValueOutOfRange(i64),
    #[error("bias table does not match the parameters")]
    TableMismatch,
    #[error("distributions have different supports")]
    LengthMismatch,
    #[error("privacy factor must be non-negative")]
    InvalidFactor,
}
