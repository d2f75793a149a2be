use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::{exact_distribution, StatsError};
use crate::exact::exp_enclosure;
use crate::mechanisms::{BiasTable, NoiseParams};

/// Set-level privacy loss of a family of output distributions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DpCheckReport {
    /// `e^ε` as used; for irrational values a lower bound, which can only
    /// overstate the excess.
    #[serde(skip)]
    pub factor: BigRational,
    pub factor_approx: f64,
    /// `max_{v,v′} Σ_j max(0, P_v(j) − e^ε·P_{v′}(j))`.
    #[serde(skip)]
    pub delta_emp: BigRational,
    pub delta_emp_approx: f64,
    pub worst_pair: (i64, i64),
    /// `max_{j,v,v′} P_v(j) / P_{v′}(j)`; infinite if some output is
    /// reachable from one input and not another.
    pub worst_ratio: f64,
}

/// DP check over distributions sharing one denominator.
///
/// `dists` pairs each input with its output numerators; all vectors must
/// have the same length. The denominator cancels out of both the ratio and
/// the sign of each excess term, so it is only needed to scale the result.
pub fn dp_check_with_factor(
    dists: &[(i64, Vec<BigUint>)],
    denominator: &BigUint,
    factor: &BigRational,
) -> Result<DpCheckReport, StatsError> {
    if factor.is_negative() {
        return Err(StatsError::InvalidFactor);
    }
    let width = dists.first().map(|d| d.1.len()).unwrap_or(0);
    if dists.iter().any(|d| d.1.len() != width) {
        return Err(StatsError::LengthMismatch);
    }
    let a = factor.numer().to_biguint().expect("non-negative");
    let b = factor.denom().to_biguint().expect("positive");
    let scaled_b: Vec<Vec<BigInt>> = dists
        .par_iter()
        .map(|(_, ns)| ns.iter().map(|n| BigInt::from(n * &b)).collect())
        .collect();
    let scaled_a: Vec<Vec<BigInt>> = dists
        .par_iter()
        .map(|(_, ns)| ns.iter().map(|n| BigInt::from(n * &a)).collect())
        .collect();

    // Worst excess numerator (over b·D) for each v, then overall.
    let per_v: Vec<(BigInt, usize)> = (0..dists.len())
        .into_par_iter()
        .map(|i| {
            (0..dists.len())
                .map(|k| {
                    let s: BigInt = scaled_b[i]
                        .iter()
                        .zip(&scaled_a[k])
                        .map(|(x, y)| x - y)
                        .filter(|e| e.is_positive())
                        .sum();
                    (s, k)
                })
                .max_by(|x, y| x.0.cmp(&y.0).then(y.1.cmp(&x.1)))
                .unwrap_or((BigInt::zero(), i))
        })
        .collect();
    let (worst_i, (worst_num, worst_k)) = per_v
        .iter()
        .enumerate()
        .max_by(|x, y| (x.1).0.cmp(&(y.1).0).then(y.0.cmp(&x.0)))
        .map(|(i, p)| (i, p.clone()))
        .unwrap_or((0, (BigInt::zero(), 0)));
    let delta_emp = BigRational::new(worst_num, BigInt::from(&b * denominator));

    let mut worst_ratio = 0.0f64;
    for j in 0..width {
        let hi = dists.iter().map(|d| &d.1[j]).max();
        let lo = dists.iter().map(|d| &d.1[j]).min();
        if let (Some(hi), Some(lo)) = (hi, lo) {
            let r = if lo.is_zero() {
                if hi.is_zero() {
                    continue;
                }
                f64::INFINITY
            } else {
                BigRational::new(hi.clone().into(), lo.clone().into())
                    .to_f64()
                    .unwrap_or(f64::INFINITY)
            };
            worst_ratio = worst_ratio.max(r);
        }
    }

    let pair = |i: usize| dists.get(i).map(|d| d.0).unwrap_or_default();
    Ok(DpCheckReport {
        factor_approx: factor.to_f64().unwrap_or(f64::NAN),
        factor: factor.clone(),
        delta_emp_approx: delta_emp.to_f64().unwrap_or(f64::NAN),
        delta_emp,
        worst_pair: (pair(worst_i), pair(worst_k)),
        worst_ratio,
    })
}

/// Lower bound on `e^ε` accurate to about 128 bits.
pub fn exp_lower_bound(epsilon: &BigRational) -> BigRational {
    exp_enclosure(epsilon, 128).lo
}

/// DP check of the noise mechanism over every input in `[l, u)`.
pub fn dp_ratio_check(
    params: &NoiseParams,
    table: &BiasTable,
    claimed_epsilon: &BigRational,
) -> Result<DpCheckReport, StatsError> {
    if claimed_epsilon.is_negative() {
        return Err(StatsError::InvalidFactor);
    }
    let inputs: Vec<i64> = (params.lower()..params.upper()).collect();
    let dists = inputs
        .par_iter()
        .map(|v| exact_distribution(*v, params, table).map(|d| (*v, d)))
        .collect::<Result<Vec<_>, _>>()?;
    let denominator = dists[0].1.denominator();
    let numerators: Vec<(i64, Vec<BigUint>)> = dists.into_iter().map(|(v, d)| (v, d.numerators().to_vec())).collect();
    dp_check_with_factor(&numerators, &denominator, &exp_lower_bound(claimed_epsilon))
}

/// Output counts of randomized response over the four coin outcomes, for
/// inputs No (0) and Yes (1): `[(v, [#No, #Yes])]` out of 4.
pub fn rr_exact_distribution() -> Vec<(i64, Vec<BigUint>)> {
    [false, true]
        .into_iter()
        .map(|v| {
            let mut counts = vec![BigUint::zero(); 2];
            for r0 in [false, true] {
                for r1 in [false, true] {
                    // Independent of the mechanism code: the truthful branch
                    // when the first coin is tails, the second coin otherwise.
                    let out = if r0 { r1 } else { v };
                    counts[out as usize] += 1u32;
                }
            }
            (v as i64, counts)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::Epsilon;
    use num_traits::One;

    fn int(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn rr_is_ln3_pure() {
        let dists = rr_exact_distribution();
        assert_eq!(dists[1].1, vec![BigUint::from(1u32), BigUint::from(3u32)]);
        let r = dp_check_with_factor(&dists, &BigUint::from(4u32), &int(3)).unwrap();
        assert!(r.delta_emp.is_zero());
        assert_eq!(r.worst_ratio, 3.0);
        let below =
            dp_check_with_factor(&dists, &BigUint::from(4u32), &BigRational::new(29.into(), 10.into())).unwrap();
        assert!(below.delta_emp.is_positive());
    }

    #[test]
    fn zero_epsilon_detects_difference() {
        let p = NoiseParams::new(Epsilon::integer(1).unwrap(), 0, 8, 6).unwrap();
        let t = BiasTable::new(&p).unwrap();
        let r = dp_ratio_check(&p, &t, &BigRational::zero()).unwrap();
        assert!(r.delta_emp.is_positive());
        assert_ne!(r.worst_pair.0, r.worst_pair.1);
    }

    #[test]
    fn excess_is_monotone_in_epsilon() {
        let p = NoiseParams::new(Epsilon::integer(3).unwrap(), 0, 16, 8).unwrap();
        let t = BiasTable::new(&p).unwrap();
        let mut last: Option<BigRational> = None;
        for tenths in [0i64, 2, 5, 10, 20, 40] {
            let r = dp_ratio_check(&p, &t, &BigRational::new(tenths.into(), 10.into())).unwrap();
            if let Some(prev) = &last {
                assert!(&r.delta_emp <= prev, "ε = {tenths}/10");
            }
            last = Some(r.delta_emp);
        }
    }

    #[test]
    fn pair_order_does_not_change_the_excess() {
        let p = NoiseParams::new(Epsilon::integer(2).unwrap(), 0, 8, 6).unwrap();
        let t = BiasTable::new(&p).unwrap();
        let mut dists: Vec<(i64, Vec<BigUint>)> = (0..8)
            .map(|v| (v, exact_distribution(v, &p, &t).unwrap().numerators().to_vec()))
            .collect();
        let den = BigUint::one() << (3 * 7 + 1);
        let f = exp_lower_bound(&int(1));
        let a = dp_check_with_factor(&dists, &den, &f).unwrap();
        dists.reverse();
        let b = dp_check_with_factor(&dists, &den, &f).unwrap();
        assert_eq!(a.delta_emp, b.delta_emp);
        assert_eq!(a.worst_ratio, b.worst_ratio);
    }

    #[test]
    fn brute_force_set_oracle() {
        // Over all 2^N output sets, max_S P_v(S) − f·P_v′(S) equals the
        // positive-part sum.
        let p = NoiseParams::new(Epsilon::new(1, 2).unwrap(), 0, 6, 4).unwrap();
        let t = BiasTable::new(&p).unwrap();
        let dists: Vec<_> = (0..6).map(|v| exact_distribution(v, &p, &t).unwrap()).collect();
        let f = BigRational::new(3.into(), 2.into());
        let mut best = BigRational::zero();
        for x in &dists {
            for y in &dists {
                for s in 0u32..(1 << 6) {
                    let mut e = BigRational::zero();
                    for j in 0..6 {
                        if (s >> j) & 1 == 1 {
                            e += x.probability(j) - &f * y.probability(j);
                        }
                    }
                    if e > best {
                        best = e;
                    }
                }
            }
        }
        let numerators: Vec<_> = dists.iter().map(|d| (d.input(), d.numerators().to_vec())).collect();
        let r = dp_check_with_factor(&numerators, &dists[0].denominator(), &f).unwrap();
        assert_eq!(r.delta_emp, best);
    }
}
