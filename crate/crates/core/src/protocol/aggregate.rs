use std::collections::HashSet;

use serde::Serialize;

use super::{ChallengePolicy, ProofRequest, Verdict};
use crate::circuits::Mechanism;
use crate::mechanisms::rr_debias;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateResult {
    pub total: usize,
    pub accepted: usize,
    /// Includes duplicate keys.
    pub rejected: usize,
    pub duplicates: usize,
    pub mean: Option<f64>,
    /// Debiased "Yes" proportion for randomized response.
    pub rr_estimate: Option<f64>,
    /// Smallest value of bin 0; bins are unit width.
    pub histogram_lower: i64,
    pub histogram: Vec<u64>,
    /// Set when the survey let each response pick its challenge.
    pub per_response_challenges: bool,
}

/// Tallies verdicts. Later answers from a key that already answered are
/// counted as rejected, so each key contributes at most once.
pub fn aggregate(request: &ProofRequest, verdicts: &[Verdict]) -> AggregateResult {
    let (lower, bins) = match &request.mechanism {
        Mechanism::Rr => (0, 2),
        Mechanism::Exponential { params } => (params.lower(), params.domain_size() as usize),
    };
    let mut histogram = vec![0u64; bins];
    let mut seen = HashSet::new();
    let (mut accepted, mut duplicates, mut sum) = (0usize, 0usize, 0i128);
    for v in verdicts {
        if let Verdict::Accept(a) = v {
            if !seen.insert(a.pk) {
                duplicates += 1;
                continue;
            }
            accepted += 1;
            sum += a.output as i128;
            let i = a.output - lower;
            if (0..bins as i64).contains(&i) {
                histogram[i as usize] += 1;
            }
        }
    }
    let mean = (accepted > 0).then(|| sum as f64 / accepted as f64);
    let rr_estimate = match request.mechanism {
        Mechanism::Rr if accepted > 0 => Some(rr_debias(histogram[1], accepted as u64)),
        _ => None,
    };
    AggregateResult {
        total: verdicts.len(),
        accepted,
        rejected: verdicts.len() - accepted,
        duplicates,
        mean,
        rr_estimate,
        histogram_lower: lower,
        histogram,
        per_response_challenges: request.challenge_policy == ChallengePolicy::PerResponse,
    }
}
