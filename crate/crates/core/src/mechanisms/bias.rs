//! Biased coins from unbiased bits.
//!
//! Noise bit `k` must be one with probability
//! `p_k = 1 / (1 + exp(ε · 2^k / Δ))`. The bias is truncated to `d` binary
//! digits and realised by scanning fair bits against the expansion: the
//! first position where they disagree decides the coin, and its value is
//! the expansion digit (equivalently the complement of the fair bit).

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::{MechanismError, NoiseParams};
use crate::exact::{exp_enclosure, floor_biguint, pow2, Enclosure};

const START_PRECISION: u32 = 64;
const MAX_PRECISION_BITS: u32 = 8192;

/// Enclosure of `p_k` narrow enough to pin `floor(p_k · 2^d)`.
///
/// Working precision doubles until the enclosure is narrower than
/// `2^-(d+8)` and both endpoints share the same `d`-bit truncation.
pub fn bit_bias(k: usize, params: &NoiseParams) -> Result<Enclosure, MechanismError> {
    if k >= params.n_bits() {
        return Err(MechanismError::BitIndexOutOfRange {
            k,
            n_bits: params.n_bits(),
        });
    }
    let d = params.precision();
    let exponent =
        params.epsilon().to_rational() * pow2(k as i64) / BigRational::from_integer(BigInt::from(params.delta()));
    let target_width = pow2(-(d as i64) - 8);
    let scale = pow2(d as i64);
    let mut precision = START_PRECISION.max(d as u32 + 16);
    loop {
        let p = exp_enclosure(&exponent, precision).logistic_complement();
        if p.width() < target_width && floor_biguint(&(&p.lo * &scale)) == floor_biguint(&(&p.hi * &scale)) {
            return Ok(p);
        }
        if precision >= MAX_PRECISION_BITS {
            return Err(MechanismError::PrecisionExhausted { k });
        }
        precision *= 2;
    }
}

/// Most-significant-first digits of `floor(p · 2^d)`.
pub fn bias_expansion(p: &Enclosure, d: usize) -> Result<Vec<bool>, MechanismError> {
    let scale = pow2(d as i64);
    let lo = floor_biguint(&(&p.lo * &scale));
    let hi = floor_biguint(&(&p.hi * &scale));
    if lo != hi {
        return Err(MechanismError::PrecisionExhausted { k: usize::MAX });
    }
    if p.lo < BigRational::zero() || p.hi >= BigRational::one() {
        return Err(MechanismError::InvalidBias);
    }
    Ok((0..d).rev().map(|i| lo.bit(i as u64)).collect())
}

/// Outcome of one biased-coin draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BiasedBit {
    pub bit: bool,
    /// Fair bits reserved for the draw; always `d`.
    pub consumed: usize,
    /// No fair bit disagreed with the expansion; `bit` is then 0.
    pub exhausted: bool,
}

pub fn sample_biased_bit(expansion: &[bool], stream: &[bool]) -> Result<BiasedBit, MechanismError> {
    if expansion.len() != stream.len() {
        return Err(MechanismError::LengthMismatch {
            expected: expansion.len(),
            got: stream.len(),
        });
    }
    let first_mismatch = expansion.iter().zip(stream).position(|(e, r)| e != r);
    Ok(match first_mismatch {
        Some(j) => BiasedBit {
            bit: expansion[j],
            consumed: expansion.len(),
            exhausted: false,
        },
        None => BiasedBit {
            bit: false,
            consumed: expansion.len(),
            exhausted: true,
        },
    })
}

/// Threshold coin: read `d` bits (first is most significant) as `x` and
/// return `x < floor(bias · 2^d)`.
pub fn biased_coin_threshold(r: &[bool], bias: &BigRational, d: usize) -> Result<bool, MechanismError> {
    if r.len() < d {
        return Err(MechanismError::NotEnoughBits {
            needed: d,
            got: r.len(),
        });
    }
    if *bias <= BigRational::zero() || *bias >= BigRational::one() {
        return Err(MechanismError::InvalidBias);
    }
    let threshold = floor_biguint(&(bias * pow2(d as i64)));
    let x = r[..d]
        .iter()
        .fold(BigUint::zero(), |acc, b| (acc << 1u32) + BigUint::from(*b as u8));
    Ok(x < threshold)
}

/// Per-bit bias enclosure and its truncated expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiasEntry {
    pub enclosure: Enclosure,
    pub expansion: Vec<bool>,
    /// `floor(p_k · 2^d)`; the realised bias is this over `2^d`.
    pub numerator: BigUint,
}

/// Truncated biases for every noise bit of a parameter set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiasTable {
    precision: usize,
    entries: Vec<BiasEntry>,
}

impl BiasTable {
    pub fn new(params: &NoiseParams) -> Result<Self, MechanismError> {
        let d = params.precision();
        let entries = (0..params.n_bits())
            .map(|k| {
                let enclosure = bit_bias(k, params)?;
                let expansion = bias_expansion(&enclosure, d).map_err(|_| MechanismError::PrecisionExhausted { k })?;
                let numerator = expansion
                    .iter()
                    .fold(BigUint::zero(), |acc, b| (acc << 1u32) + BigUint::from(*b as u8));
                Ok(BiasEntry {
                    enclosure,
                    expansion,
                    numerator,
                })
            })
            .collect::<Result<_, MechanismError>>()?;
        Ok(BiasTable { precision: d, entries })
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn n_bits(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[BiasEntry] {
        &self.entries
    }

    pub fn expansion(&self, k: usize) -> &[bool] {
        &self.entries[k].expansion
    }

    /// Realised (dyadic) bias `q_k = floor(p_k · 2^d) / 2^d`.
    pub fn realized(&self, k: usize) -> BigRational {
        BigRational::new(
            BigInt::from(self.entries[k].numerator.clone()),
            BigInt::one() << self.precision,
        )
    }

    /// Audit export: expansions as `0`/`1` strings, most significant first.
    pub fn export(&self) -> BiasTableExport {
        BiasTableExport {
            d: self.precision,
            bits: self
                .entries
                .iter()
                .enumerate()
                .map(|(k, e)| BiasRow {
                    k,
                    expansion: e.expansion.iter().map(|b| if *b { '1' } else { '0' }).collect(),
                    numerator: e.numerator.to_string(),
                    bias_approx: e.enclosure.midpoint_f64(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BiasTableExport {
    pub d: usize,
    pub bits: Vec<BiasRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BiasRow {
    pub k: usize,
    pub expansion: String,
    pub numerator: String,
    pub bias_approx: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::Epsilon;
    use num_traits::{Signed, ToPrimitive};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn decimal(s: &str) -> BigRational {
        let (i, f) = s.split_once('.').unwrap();
        BigRational::new(
            format!("{i}{f}").parse().unwrap(),
            BigInt::from(10u32).pow(f.len() as u32),
        )
    }

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    fn all_streams(d: usize) -> impl Iterator<Item = Vec<bool>> {
        (0..1u32 << d).map(move |x| (0..d).rev().map(|i| (x >> i) & 1 == 1).collect())
    }

    #[test]
    fn bias_values_match_high_precision_oracle() {
        // 1/(1+exp(10·2^k/128)) from a 50-digit mpmath evaluation.
        let params = NoiseParams::age_poll();
        let p0 = bit_bias(0, &params).unwrap();
        let oracle0 = decimal("0.48047867804790703907817515861359899");
        assert!((&p0.lo - &oracle0).abs() < pow2(-60) && (&p0.hi - &oracle0).abs() < pow2(-60));
        let p6 = bit_bias(6, &params).unwrap();
        let oracle6 = decimal("0.0066928509242848555593619803813251804");
        assert!((&p6.lo - &oracle6).abs() < pow2(-60) && (&p6.hi - &oracle6).abs() < pow2(-60));
        assert!(p6.hi < rat(67, 10_000) && p6.lo > rat(66, 10_000));
    }

    #[test]
    fn every_bias_is_below_one_half() {
        for (num, den) in [(1, 1000), (1, 1), (10, 1), (1000, 1)] {
            let params = NoiseParams::new(Epsilon::new(num, den).unwrap(), 0, 128, 24).unwrap();
            for k in 0..params.n_bits() {
                assert!(bit_bias(k, &params).unwrap().hi < rat(1, 2));
            }
        }
        let params = NoiseParams::age_poll();
        assert!(matches!(
            bit_bias(7, &params),
            Err(MechanismError::BitIndexOutOfRange { .. })
        ));
    }

    #[test]
    fn age_poll_truncations() {
        // floor(p_k · 2^20) from the same oracle.
        let table = BiasTable::new(&NoiseParams::age_poll()).unwrap();
        let expect = [503818u32, 483411, 443028, 365580, 233518, 79543, 7017];
        for (k, e) in expect.iter().enumerate() {
            assert_eq!(table.entries()[k].numerator, BigUint::from(*e), "k = {k}");
            assert_eq!(table.expansion(k).len(), 20);
        }
    }

    #[test]
    fn expansion_examples() {
        assert_eq!(bias_expansion(&Enclosure::exact(rat(5, 8)), 3).unwrap(), bits("101"));
        assert_eq!(bias_expansion(&Enclosure::exact(rat(1, 3)), 4).unwrap(), bits("0101"));
        assert_eq!(bias_expansion(&Enclosure::exact(rat(1, 2)), 1).unwrap(), bits("1"));
        let straddle = Enclosure::new(rat(1, 2) - pow2(-10), rat(1, 2) + pow2(-10));
        assert!(matches!(
            bias_expansion(&straddle, 4),
            Err(MechanismError::PrecisionExhausted { .. })
        ));
    }

    #[test]
    fn expansion_floor_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let den = rng.gen_range(2..10_000i64);
            let num = rng.gen_range(1..den);
            let d = rng.gen_range(1..30usize);
            let e = bias_expansion(&Enclosure::exact(rat(num, den)), d).unwrap();
            let floor = ((num as i128) << d) / den as i128;
            let got = e.iter().fold(0i128, |a, b| a * 2 + *b as i128);
            assert_eq!(got, floor);
        }
    }

    #[test]
    fn sample_examples() {
        let e = bits("101");
        assert!(sample_biased_bit(&e, &bits("011")).unwrap().bit);
        assert!(sample_biased_bit(&e, &bits("000")).unwrap().bit);
        assert!(!sample_biased_bit(&e, &bits("110")).unwrap().bit);
        assert!(!sample_biased_bit(&e, &bits("111")).unwrap().bit);
        let ex = sample_biased_bit(&e, &bits("101")).unwrap();
        assert!(!ex.bit && ex.exhausted && ex.consumed == 3);
        assert!(sample_biased_bit(&e, &bits("10")).is_err());
    }

    #[test]
    fn five_eighths_by_enumeration() {
        let e = bits("101");
        let outcomes: Vec<BiasedBit> = all_streams(3).map(|s| sample_biased_bit(&e, &s).unwrap()).collect();
        assert_eq!(outcomes.iter().filter(|o| o.bit).count(), 5);
        assert_eq!(outcomes.iter().filter(|o| o.exhausted).count(), 1);
    }

    #[test]
    fn threshold_coin() {
        assert!(biased_coin_threshold(&[false], &rat(1, 2), 1).unwrap());
        assert!(!biased_coin_threshold(&[true], &rat(1, 2), 1).unwrap());
        let ones = all_streams(3)
            .filter(|s| biased_coin_threshold(s, &rat(5, 8), 3).unwrap())
            .count();
        assert_eq!(ones, 5);
        // floor(0.1 · 4) = 0: never fires.
        assert!(all_streams(2).all(|s| !biased_coin_threshold(&s, &rat(1, 10), 2).unwrap()));
        assert!(biased_coin_threshold(&[true], &rat(1, 2), 2).is_err());
    }

    #[test]
    fn table_export_is_readable() {
        let table = BiasTable::new(&NoiseParams::age_poll()).unwrap();
        let ex = table.export();
        assert_eq!(ex.bits.len(), 7);
        assert_eq!(u64::from_str_radix(&ex.bits[6].expansion, 2).unwrap(), 7017);
        assert!((ex.bits[0].bias_approx - 0.480_478_678).abs() < 1e-8);
        assert_eq!(table.realized(6).to_f64().unwrap(), 7017.0 / 1048576.0);
    }
}
