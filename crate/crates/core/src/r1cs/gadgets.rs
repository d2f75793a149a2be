//! Standard gadgets: bit decomposition, recomposition, zero/equality tests,
//! and small-integer modular reduction.
//!
//! Each gadget allocates its outputs with hints and emits a fixed number of
//! constraints that depends only on its static parameters.

use super::{ConstraintSystem, Hint, LinearCombination, SignalId};
use crate::field::{FieldElement, MODULUS_BITS};

/// Range width used by [`modulo`] in the polling circuits.
pub const DEFAULT_MODULO_WIDTH: usize = 16;

fn pow2(i: usize) -> FieldElement {
    FieldElement::from_u64(2).pow(i as u64)
}

/// `b * (b - 1) = 0`
pub fn assert_boolean(cs: &mut ConstraintSystem, b: SignalId) {
    cs.constrain(b, b - LinearCombination::one(), LinearCombination::zero());
}

/// Little-endian decomposition of `input` into `n` boolean signals.
///
/// With `n < 254` the recomposition cannot wrap, so the system is satisfiable
/// exactly when `input < 2^n`.
pub fn num2bits(cs: &mut ConstraintSystem, input: impl Into<LinearCombination>, n: usize) -> Vec<SignalId> {
    assert!(n <= MODULUS_BITS, "num2bits width {n} exceeds field width");
    let input = input.into();
    let bits: Vec<SignalId> = (0..n)
        .map(|index| {
            cs.alloc(Hint::Bit {
                of: input.clone(),
                index,
            })
        })
        .collect();
    for &b in &bits {
        assert_boolean(cs, b);
    }
    let sum = LinearCombination::from_terms(bits.iter().enumerate().map(|(i, b)| (*b, pow2(i))));
    cs.constrain(sum, LinearCombination::one(), input);
    bits
}

/// Full-width decomposition that also rules out the aliased encoding
/// `input + P` (which fits in 254 bits).
pub fn num2bits_strict(cs: &mut ConstraintSystem, input: impl Into<LinearCombination>) -> Vec<SignalId> {
    let bits = num2bits(cs, input, MODULUS_BITS);
    assert_at_most_modulus_minus_one(cs, &bits);
    bits
}

/// Constrains the little-endian boolean signals `bits` (254 of them) to
/// encode an integer `<= P - 1`.
///
/// Scans from the most significant bit keeping `eq`, "prefix equals the
/// prefix of P - 1", and accumulates `lt`, "already strictly below".
fn assert_at_most_modulus_minus_one(cs: &mut ConstraintSystem, bits: &[SignalId]) {
    let bound = -FieldElement::ONE;
    let mut eq = LinearCombination::one();
    let mut lt = LinearCombination::zero();
    for i in (0..bits.len()).rev() {
        let b = bits[i];
        if bound.bit(i) {
            let next = cs.alloc(Hint::Product(eq.clone(), b.into()));
            cs.constrain(eq.clone(), b, next);
            lt = lt + eq - next;
            eq = next.into();
        } else {
            let not_b = LinearCombination::one() - b;
            let next = cs.alloc(Hint::Product(eq.clone(), not_b.clone()));
            cs.constrain(eq.clone(), not_b, next);
            eq = next.into();
        }
    }
    cs.constrain(lt + eq, LinearCombination::one(), LinearCombination::one());
}

/// `Σ bits[i] · 2^i`. The bits must already be boolean-constrained.
pub fn bits2num(cs: &mut ConstraintSystem, bits: &[SignalId]) -> SignalId {
    let sum = LinearCombination::from_terms(bits.iter().enumerate().map(|(i, b)| (*b, pow2(i))));
    let out = cs.alloc(Hint::Linear(sum.clone()));
    cs.constrain(sum, LinearCombination::one(), out);
    out
}

/// 1 if `x = 0`, else 0.
///
/// Besides the usual `x·inv = 1 - out` and `x·out = 0`, also enforces
/// `inv·out = 0` so the inverse witness is unique when `x = 0`.
pub fn is_zero(cs: &mut ConstraintSystem, x: impl Into<LinearCombination>) -> SignalId {
    let x = x.into();
    let inv = cs.alloc(Hint::InverseOrZero(x.clone()));
    let out = cs.alloc(Hint::IsZero(x.clone()));
    cs.constrain(x.clone(), inv, LinearCombination::one() - out);
    cs.constrain(x, out, LinearCombination::zero());
    cs.constrain(inv, out, LinearCombination::zero());
    out
}

/// 1 if `a = b`, else 0.
pub fn is_equal(
    cs: &mut ConstraintSystem,
    a: impl Into<LinearCombination>,
    b: impl Into<LinearCombination>,
) -> SignalId {
    is_zero(cs, a.into() - b.into())
}

/// Allocates `out = a · b` and constrains it.
pub fn product(
    cs: &mut ConstraintSystem,
    a: impl Into<LinearCombination>,
    b: impl Into<LinearCombination>,
) -> SignalId {
    let (a, b) = (a.into(), b.into());
    let out = cs.alloc(Hint::Product(a.clone(), b.clone()));
    cs.constrain(a, b, out);
    out
}

/// Allocates a signal equal to `lc`, so later hints refer to one wire
/// instead of re-expanding the combination.
pub fn materialize(cs: &mut ConstraintSystem, lc: impl Into<LinearCombination>) -> SignalId {
    let lc = lc.into();
    let out = cs.alloc(Hint::Linear(lc.clone()));
    cs.constrain(lc, LinearCombination::one(), out);
    out
}

/// `input mod modulus` for an input known to fit in `bit_width` bits.
///
/// Allocates quotient `q` and remainder `r` with `input = q·modulus + r`,
/// `q < 2^bit_width`, and `r < modulus` (via `modulus - 1 - r < 2^bit_width`).
/// Returns `r`.
pub fn modulo(
    cs: &mut ConstraintSystem,
    input: impl Into<LinearCombination>,
    modulus: u64,
    bit_width: usize,
) -> SignalId {
    assert!(modulus > 0, "modulus must be positive");
    assert!(
        bit_width < 64 && modulus < (1u64 << bit_width),
        "modulus must fit in bit_width"
    );
    let input = input.into();
    let m = FieldElement::from_u64(modulus);
    let q = cs.alloc(Hint::Quotient {
        of: input.clone(),
        modulus,
    });
    let r = cs.alloc(Hint::Remainder {
        of: input.clone(),
        modulus,
    });
    cs.constrain(q * m + r, LinearCombination::one(), input);
    num2bits(cs, q, bit_width);
    num2bits(cs, r, bit_width);
    num2bits(cs, LinearCombination::from_u64(modulus - 1) - r, bit_width);
    r
}
