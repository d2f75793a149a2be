//! Rigorous rational enclosures of real numbers.
//!
//! Bias computation needs `exp` of rational arguments, which is never
//! rational. An [`Enclosure`] is a closed interval `[lo, hi]` with rational
//! (in practice dyadic) endpoints guaranteed to contain the true value;
//! every rounding step goes outward.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enclosure {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Enclosure {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        assert!(lo <= hi, "empty enclosure");
        Enclosure { lo, hi }
    }

    pub fn exact(v: BigRational) -> Self {
        Enclosure { lo: v.clone(), hi: v }
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, v: &BigRational) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    pub fn add(&self, other: &Enclosure) -> Enclosure {
        Enclosure {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    /// Interval minus an exact value.
    pub fn sub_exact(&self, v: &BigRational) -> Enclosure {
        Enclosure {
            lo: &self.lo - v,
            hi: &self.hi - v,
        }
    }

    pub fn scale(&self, k: &BigRational) -> Enclosure {
        assert!(!k.is_negative());
        Enclosure {
            lo: &self.lo * k,
            hi: &self.hi * k,
        }
    }

    /// `1 / (1 + x)` for `x >= 0`; monotone decreasing, so endpoints swap.
    pub fn logistic_complement(&self) -> Enclosure {
        let one = BigRational::one();
        Enclosure {
            lo: &one / (&one + &self.hi),
            hi: &one / (&one + &self.lo),
        }
    }

    pub fn midpoint_f64(&self) -> f64 {
        ((&self.lo + &self.hi) / BigRational::from_integer(2.into()))
            .to_f64()
            .unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{:e}, {:e}]",
            self.lo.to_f64().unwrap_or(f64::NAN),
            self.hi.to_f64().unwrap_or(f64::NAN)
        )
    }
}

pub fn pow2(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << e as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

fn ilog2_approx(q: &BigRational) -> i64 {
    q.numer().bits() as i64 - q.denom().bits() as i64
}

/// Largest dyadic with about `bits` significant bits that is `<= q` (q > 0).
pub fn round_down(q: &BigRational, bits: u32) -> BigRational {
    round(q, bits, false)
}

/// Smallest dyadic with about `bits` significant bits that is `>= q` (q > 0).
pub fn round_up(q: &BigRational, bits: u32) -> BigRational {
    round(q, bits, true)
}

fn round(q: &BigRational, bits: u32, up: bool) -> BigRational {
    debug_assert!(q.is_positive());
    let shift = bits as i64 - ilog2_approx(q);
    let scaled = q * pow2(shift);
    let n = if up { scaled.ceil() } else { scaled.floor() };
    n * pow2(-shift)
}

/// Exact floor of a non-negative rational as an unsigned integer.
pub fn floor_biguint(q: &BigRational) -> BigUint {
    assert!(!q.is_negative());
    q.numer().div_floor(q.denom()).to_biguint().unwrap()
}

/// Arguments with `|x|` above this are not expanded; `exp(-x)` is bounded by
/// [`TINY_EXP_BOUND_LOG2`] instead.
pub const EXP_ARGUMENT_LIMIT: i64 = 2048;
/// `exp(-2048) < 2^-2954`, so `2^-2950` bounds every suppressed value.
pub const TINY_EXP_BOUND_LOG2: i64 = -2950;

/// Enclosure of `exp(x)` whose relative width is about `2^-precision`.
///
/// Argument reduction `x = t · 2^s` with `t <= 1/2`, a Taylor sum for
/// `exp(t)` with a geometric remainder bound, then `s` outward-rounded
/// squarings.
pub fn exp_enclosure(x: &BigRational, precision: u32) -> Enclosure {
    if x.is_zero() {
        return Enclosure::exact(BigRational::one());
    }
    if x.is_negative() {
        let e = exp_enclosure(&-x, precision);
        let one = BigRational::one();
        return Enclosure {
            lo: &one / &e.hi,
            hi: &one / &e.lo,
        };
    }
    let half = BigRational::new(1.into(), 2.into());
    let mut s = 0u32;
    let mut t = x.clone();
    while t > half {
        t /= BigRational::from_integer(2.into());
        s += 1;
    }
    let work = precision + s + 16;
    let eps = pow2(-(work as i64) - 4);

    // All terms are positive, so summing downward-rounded terms bounds the
    // partial sum from below and upward-rounded terms from above. With
    // t <= 1/2 each later term is at most a quarter of its predecessor, so
    // the omitted tail is bounded by the last included term.
    let mut sum_lo = BigRational::one();
    let mut sum_hi = BigRational::one();
    let mut term_lo = BigRational::one();
    let mut term_hi = BigRational::one();
    let mut n = 1u32;
    loop {
        let k = BigRational::from_integer(n.into());
        term_lo = round_down(&(&term_lo * &t / &k), work + 8);
        term_hi = round_up(&(&term_hi * &t / &k), work + 8);
        sum_lo += &term_lo;
        sum_hi += &term_hi;
        if term_hi < eps {
            break;
        }
        n += 1;
    }
    let mut lo = round_down(&sum_lo, work);
    let mut hi = round_up(&(&sum_hi + &term_hi), work);
    for _ in 0..s {
        lo = round_down(&(&lo * &lo), work);
        hi = round_up(&(&hi * &hi), work);
    }
    Enclosure { lo, hi }
}

/// Enclosure of `exp(-x)` for `x >= 0` that stays cheap for huge `x`.
pub fn exp_neg_enclosure(x: &BigRational, precision: u32) -> Enclosure {
    assert!(!x.is_negative());
    if *x > BigRational::from_integer(EXP_ARGUMENT_LIMIT.into()) {
        return Enclosure::new(BigRational::zero(), pow2(TINY_EXP_BOUND_LOG2));
    }
    exp_enclosure(&-x, precision)
}
