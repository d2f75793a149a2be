use super::{MechanismError, TruthfulValue, ValueKind};
use crate::oracle::BitArray;

/// Randomized response: the first coin decides between answering truthfully
/// and answering with the second coin.
///
/// `out = (1 - r0)·v + r0·r1`.
pub fn randomized_response(v: TruthfulValue, r: &BitArray) -> Result<bool, MechanismError> {
    if v.kind() != ValueKind::Binary {
        return Err(MechanismError::WrongValueKind {
            expected: ValueKind::Binary,
        });
    }
    if r.len() < 2 {
        return Err(MechanismError::NotEnoughBits {
            needed: 2,
            got: r.len(),
        });
    }
    Ok(if r.get(0) { r.get(1) } else { v.value() == 1 })
}

/// Estimated fraction of true "Yes" answers from randomized responses:
/// `Pr[Yes] = π/2 + 1/4`, so `π = 2·yes/n − 1/2`, clamped to `[0, 1]`.
pub fn rr_debias(yes_count: u64, n: u64) -> f64 {
    assert!(n >= 1, "sample size must be positive");
    (2.0 * yes_count as f64 / n as f64 - 0.5).clamp(0.0, 1.0)
}
