use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::{BiasTable, NoiseParams};
use crate::exact::{exp_neg_enclosure, pow2, Enclosure};

/// Itemized slack of the noise mechanism; `total` is the claimed δ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaLedger {
    /// `nBits · 2^-d`: exhausted streams read as zero.
    pub base: BigRational,
    /// `2 · exp(-ε · 2^d / Δ)`: the mass a d-bit expansion cannot express.
    pub tail: Enclosure,
    /// `½ · Pr[noise = 0] / N`: the uniform replacement of `-0`.
    pub mixing: BigRational,
    /// `Σ_k (p_k − q_k)`: truncating each bias to d bits.
    pub truncation: Enclosure,
    /// Sum of the upper ends of all components.
    pub total: BigRational,
}

/// `Pr[noise = 0] = Π_k (1 − q_k)` over the realised dyadic biases.
pub fn prob_zero_noise(table: &BiasTable) -> BigRational {
    (0..table.n_bits()).fold(BigRational::one(), |acc, k| {
        acc * (BigRational::one() - table.realized(k))
    })
}

pub fn delta_ledger(params: &NoiseParams, table: &BiasTable) -> DeltaLedger {
    let d = params.precision() as i64;
    let base = BigRational::from_integer(BigInt::from(params.n_bits())) * pow2(-d);
    let tail_exponent =
        params.epsilon().to_rational() * pow2(d) / BigRational::from_integer(BigInt::from(params.delta()));
    let tail = exp_neg_enclosure(&tail_exponent, 64).scale(&BigRational::from_integer(2.into()));
    let mixing = prob_zero_noise(table) / BigRational::from_integer(BigInt::from(2 * params.domain_size()));
    let truncation = table
        .entries()
        .iter()
        .enumerate()
        .fold(Enclosure::exact(BigRational::zero()), |acc, (k, e)| {
            acc.add(&e.enclosure.sub_exact(&table.realized(k)))
        });
    let total = &base + &tail.hi + &mixing + &truncation.hi;
    DeltaLedger {
        base,
        tail,
        mixing,
        truncation,
        total,
    }
}

impl DeltaLedger {
    pub fn report(&self) -> DeltaLedgerReport {
        let f = |q: &BigRational| q.to_f64().unwrap_or(f64::NAN);
        DeltaLedgerReport {
            base: f(&self.base),
            tail: f(&self.tail.hi),
            mixing: f(&self.mixing),
            truncation: f(&self.truncation.hi),
            total: f(&self.total),
        }
    }
}

/// Floating-point view of a [`DeltaLedger`] (upper ends) for reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaLedgerReport {
    pub base: f64,
    pub tail: f64,
    pub mixing: f64,
    pub truncation: f64,
    pub total: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::Epsilon;
    use num_traits::Signed;

    #[test]
    fn age_poll_components() {
        let p = NoiseParams::age_poll();
        let t = BiasTable::new(&p).unwrap();
        let l = delta_ledger(&p, &t);
        assert_eq!(l.base, BigRational::new(7.into(), (1u64 << 20).into()));
        assert!((l.report().base - 6.675_72e-6).abs() < 1e-10);
        // exp(-10 · 2^20 / 128) is far below anything representable.
        assert!(l.tail.hi <= pow2(-2949));
        assert!(!l.truncation.lo.is_negative());
        assert!(l.truncation.hi <= l.base);
        assert!(l.total >= &l.base + &l.mixing);
    }

    #[test]
    fn mixing_matches_product_oracle() {
        // Π (1 − floor(p_k·2^20)/2^20) from the frozen truncations.
        let p = NoiseParams::age_poll();
        let t = BiasTable::new(&p).unwrap();
        let nums = [503818u64, 483411, 443028, 365580, 233518, 79543, 7017];
        let mut prod = BigRational::one();
        for n in nums {
            prod *= BigRational::new(((1u64 << 20) - n).into(), (1u64 << 20).into());
        }
        assert_eq!(prob_zero_noise(&t), prod);
        let l = delta_ledger(&p, &t);
        assert_eq!(l.mixing, prod / BigRational::from_integer(256.into()));
        assert!((l.report().mixing - 2.935_737_422_535e-4).abs() < 1e-15);
    }

    #[test]
    fn high_precision_base_meets_machine_accuracy() {
        let p = NoiseParams::new(Epsilon::integer(10).unwrap(), 0, 128, 54).unwrap();
        let t = BiasTable::new(&p).unwrap();
        let l = delta_ledger(&p, &t);
        assert_eq!(l.base, BigRational::new(7.into(), BigInt::one() << 54usize));
        assert!(l.report().base < 1e-15);
    }

    #[test]
    fn small_precision_has_visible_tail() {
        let p = NoiseParams::new(Epsilon::integer(1).unwrap(), 0, 16, 3).unwrap();
        let t = BiasTable::new(&p).unwrap();
        let l = delta_ledger(&p, &t);
        // 2·exp(-8/16) = 1.2130613...
        assert!((l.report().tail - 1.213_061_319_425_267).abs() < 1e-12);
    }
}
