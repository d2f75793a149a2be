use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{ExactDistribution, StatsError};

/// Bins with a smaller expected count are merged into a neighbour.
pub const MIN_EXPECTED: f64 = 5.0;
pub const MIN_SAMPLES: u64 = 30;
pub const DEFAULT_SIGNIFICANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareFit {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    pub samples: u64,
}

/// Pearson goodness of fit of `counts` (indexed by `j − l`) against `dist`.
///
/// Bins are scanned in value order and accumulated until the expected count
/// reaches [`MIN_EXPECTED`]; a short remainder joins the last retained bin.
pub fn chi_square_fit(counts: &[u64], dist: &ExactDistribution) -> Result<ChiSquareFit, StatsError> {
    if counts.len() != dist.len() {
        return Err(StatsError::LengthMismatch);
    }
    let n: u64 = counts.iter().sum();
    if n < MIN_SAMPLES {
        return Err(StatsError::InsufficientSamples { samples: n });
    }
    let probs = dist.probabilities_f64();
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (c, p) in counts.iter().zip(&probs) {
        obs += *c as f64;
        exp += p * n as f64;
        if exp >= MIN_EXPECTED {
            bins.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    if exp > 0.0 || obs > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += obs;
                last.1 += exp;
            }
            None => bins.push((obs, exp)),
        }
    }
    if bins.len() < 2 {
        return Err(StatsError::InsufficientSamples { samples: n });
    }
    let statistic: f64 = bins.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = bins.len() - 1;
    let chi = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    Ok(ChiSquareFit {
        statistic,
        degrees_of_freedom: dof,
        p_value: chi.sf(statistic),
        samples: n,
    })
}
