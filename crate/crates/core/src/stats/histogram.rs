use std::fmt::Write;

use super::ExactDistribution;
use crate::mechanisms::NoiseParams;

/// Counts per output value, indexed by `j − l`. Values outside `[l, u)` are
/// ignored.
pub fn tally(samples: &[i64], params: &NoiseParams) -> Vec<u64> {
    let mut counts = vec![0u64; params.domain_size() as usize];
    for s in samples {
        if (params.lower()..params.upper()).contains(s) {
            counts[(s - params.lower()) as usize] += 1;
        }
    }
    counts
}

/// `value,count` rows covering `[l, u)`.
pub fn histogram_csv(counts: &[u64], params: &NoiseParams) -> String {
    let mut out = String::from("value,count\n");
    for (i, c) in counts.iter().enumerate() {
        writeln!(out, "{},{}", params.lower() + i as i64, c).unwrap();
    }
    out
}

/// `value,probability` rows, probabilities as exact `numerator/denominator`.
pub fn distribution_csv(dist: &ExactDistribution) -> String {
    let mut out = String::from("value,probability\n");
    for j in dist.values() {
        writeln!(out, "{},{}", j, dist.probability(j)).unwrap();
    }
    out
}

/// Mode of a histogram; ties go to the smallest value.
pub fn histogram_mode(counts: &[u64], params: &NoiseParams) -> i64 {
    let (i, _) = counts
        .iter()
        .enumerate()
        .rev()
        .max_by_key(|(_, c)| **c)
        .expect("non-empty histogram");
    params.lower() + i as i64
}
