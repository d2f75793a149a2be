use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use super::StatsError;
use crate::mechanisms::{BiasTable, NoiseParams};

/// Enumeration bound for [`exact_distribution`].
pub const MAX_ENUMERATION_BITS: usize = 16;

/// Exact output distribution of the noise mechanism for one input.
///
/// Probabilities are integer numerators over the common denominator
/// `2^(nBits·(d+1) + 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactDistribution {
    v: i64,
    params: NoiseParams,
    /// `floor(p_k · 2^d)` for each magnitude bit.
    biases: Vec<BigUint>,
    numerators: Vec<BigUint>,
    denominator_log2: usize,
}

/// Builds the distribution straight from the bit process: every magnitude
/// pattern with weight `Π (q_k or 1 − q_k)`, a fair sign bit, the `-0`
/// pattern spread over every value of the uniform fallback bits, and the
/// wrap into `[l, u)`. Exhausted streams need no special case because the
/// truncated biases already give them to the zero outcome.
pub fn exact_distribution(v: i64, params: &NoiseParams, table: &BiasTable) -> Result<ExactDistribution, StatsError> {
    let n_bits = params.n_bits();
    if n_bits > MAX_ENUMERATION_BITS {
        return Err(StatsError::EnumerationTooLarge { n_bits });
    }
    if v < params.lower() || v > params.upper() {
        return Err(StatsError::ValueOutOfRange(v));
    }
    let d = params.precision();
    let biases: Vec<BigUint> = table.entries().iter().map(|e| e.numerator.clone()).collect();
    if biases.len() != n_bits || table.precision() != d {
        return Err(StatsError::TableMismatch);
    }
    let full = BigUint::one() << d;
    let complements: Vec<BigUint> = biases.iter().map(|q| &full - q).collect();

    let n = params.domain_size() as usize;
    let lower = params.lower();
    let offset = |x: i64| (x - lower).rem_euclid(n as i64) as usize;
    let mut numerators = vec![BigUint::zero(); n];
    // A signed outcome has weight w·2^nBits (sign ½ absorbed by the +1 in
    // the denominator exponent); each fallback value gets w_0.
    for m in 0u64..(1 << n_bits) {
        let w = (0..n_bits).fold(BigUint::one(), |acc, k| {
            acc * if (m >> k) & 1 == 1 { &biases[k] } else { &complements[k] }
        });
        let shifted = &w << n_bits;
        numerators[offset(v + m as i64)] += &shifted;
        if m != 0 {
            numerators[offset(v - m as i64)] += &shifted;
        } else {
            for u in 0u64..(1 << n_bits) {
                numerators[(u % n as u64) as usize] += &w;
            }
        }
    }
    Ok(ExactDistribution {
        v,
        params: params.clone(),
        biases,
        numerators,
        denominator_log2: n_bits * (d + 1) + 1,
    })
}

impl ExactDistribution {
    pub fn input(&self) -> i64 {
        self.v
    }

    pub fn params(&self) -> &NoiseParams {
        &self.params
    }

    /// Realised bias numerators `floor(p_k · 2^d)`.
    pub fn biases(&self) -> &[BigUint] {
        &self.biases
    }

    /// Numerators indexed by `j − l`.
    pub fn numerators(&self) -> &[BigUint] {
        &self.numerators
    }

    pub fn denominator(&self) -> BigUint {
        BigUint::one() << self.denominator_log2
    }

    pub fn denominator_log2(&self) -> usize {
        self.denominator_log2
    }

    pub fn len(&self) -> usize {
        self.numerators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.numerators.is_empty()
    }

    /// Output values `l, l+1, …, u−1`.
    pub fn values(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.len() as i64).map(move |i| self.params.lower() + i)
    }

    pub fn probability(&self, j: i64) -> BigRational {
        let i = (j - self.params.lower()) as usize;
        BigRational::new(self.numerators[i].clone().into(), self.denominator().into())
    }

    pub fn total(&self) -> BigRational {
        let sum: BigUint = self.numerators.iter().sum();
        BigRational::new(sum.into(), self.denominator().into())
    }

    pub fn probabilities_f64(&self) -> Vec<f64> {
        let den = BigRational::from_integer(self.denominator().into());
        self.numerators
            .iter()
            .map(|n| {
                (BigRational::from_integer(n.clone().into()) / &den)
                    .to_f64()
                    .unwrap_or(0.0)
            })
            .collect()
    }

    /// Most likely output; ties go to the smallest value.
    pub fn mode(&self) -> i64 {
        let (i, _) = self
            .numerators
            .iter()
            .enumerate()
            .rev()
            .max_by(|a, b| a.1.cmp(b.1))
            .expect("non-empty domain");
        self.params.lower() + i as i64
    }

    /// Draws from the distribution by inverting the floating-point CDF;
    /// intended for tests of the fit procedure.
    pub fn sampler(&self) -> impl Fn(&mut dyn rand::RngCore) -> i64 + '_ {
        let probs = self.probabilities_f64();
        let mut acc = 0.0;
        let cdf: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        move |rng: &mut dyn rand::RngCore| {
            let x: f64 = rng.gen::<f64>() * acc;
            let i = cdf.partition_point(|c| *c <= x).min(cdf.len() - 1);
            self.params.lower() + i as i64
        }
    }
}
