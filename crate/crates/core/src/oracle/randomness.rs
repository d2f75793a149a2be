use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::sponge::{domain_tag, hash, hash_gadget};
use crate::field::FieldElement;
use crate::r1cs::gadgets::num2bits_strict;
use crate::r1cs::{ConstraintSystem, LinearCombination, SignalId};

pub const BINDING_TAG: &str = "binding";
pub const SIGN_TAG: &str = "sign";

/// Bits taken from each squeeze, counted from the least significant end.
///
/// A uniform element of `[0, P)` has bit `i` biased by at most `2^i / P`;
/// keeping `i < 192` holds every emitted bit within `2^-62` of fair. The
/// upper bits are far from fair (bit 252 is one with probability ~0.34).
pub const BITS_PER_SQUEEZE: usize = 192;

/// Squeezes needed to cover `count` bits.
pub fn squeezes_for(count: usize) -> usize {
    count.div_ceil(BITS_PER_SQUEEZE)
}

/// Participant key pair: `pk = hash(sk, "binding")`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BindingKeyPair {
    pub sk: FieldElement,
    pub pk: FieldElement,
}

impl BindingKeyPair {
    pub fn from_secret(sk: FieldElement) -> Self {
        BindingKeyPair {
            sk,
            pk: hash(&[sk, domain_tag(BINDING_TAG)]),
        }
    }

    pub fn generate<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut bytes = [0u8; 48];
        rng.fill(&mut bytes[..]);
        Self::from_secret(FieldElement::from_be_bytes_mod_order(&bytes))
    }
}

/// Surveyor's contribution to the randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Challenge(pub FieldElement);

impl Challenge {
    pub fn value(&self) -> FieldElement {
        self.0
    }
}

/// Where a [`BitArray`] came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub pk: FieldElement,
    pub challenge: Challenge,
    pub squeezes: Range<u64>,
}

/// An immutable stream of unbiased bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitArray {
    bits: Vec<bool>,
    provenance: Option<Provenance>,
}

impl BitArray {
    /// Bits from an arbitrary source (simulation, tests).
    pub fn from_bits(bits: Vec<bool>) -> Self {
        BitArray { bits, provenance: None }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Self {
        Self::from_bits((0..len).map(|_| rng.gen()).collect())
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn slice(&self, range: Range<usize>) -> &[bool] {
        &self.bits[range]
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }
}

/// Hash-based stand-in for signing the challenge: `s = hash(sk, b, "sign")`.
pub fn bind_sign(sk: FieldElement, challenge: Challenge) -> FieldElement {
    hash(&[sk, challenge.0, domain_tag(SIGN_TAG)])
}

fn squeeze(s: FieldElement, counter: u64) -> impl Iterator<Item = bool> {
    let h = hash(&[s, FieldElement::from_u64(counter)]);
    (0..BITS_PER_SQUEEZE).map(move |i| h.bit(i))
}

/// Bits of `hash(s, 0) ‖ hash(s, 1) ‖ …` where `s = bind_sign(sk, challenge)`,
/// [`BITS_PER_SQUEEZE`] per squeeze, enough squeezes to cover `count`.
pub fn verifiable_unif_rand(sk: FieldElement, challenge: Challenge, count: usize) -> BitArray {
    assert!(count >= 1, "at least one bit must be requested");
    let s = bind_sign(sk, challenge);
    let squeezes = squeezes_for(count) as u64;
    let bits = (0..squeezes).flat_map(|i| squeeze(s, i)).collect();
    BitArray {
        bits,
        provenance: Some(Provenance {
            pk: BindingKeyPair::from_secret(sk).pk,
            challenge,
            squeezes: 0..squeezes,
        }),
    }
}

/// Enforces `pk = hash(sk, "binding")` and `s = hash(sk, challenge, "sign")`.
/// Returns the computed `(pk, s)` signals.
pub fn binding_gadget(cs: &mut ConstraintSystem, sk: SignalId, challenge: SignalId) -> (SignalId, SignalId) {
    let pk = hash_gadget(cs, &[sk.into(), LinearCombination::constant(domain_tag(BINDING_TAG))]);
    let s = hash_gadget(
        cs,
        &[
            sk.into(),
            challenge.into(),
            LinearCombination::constant(domain_tag(SIGN_TAG)),
        ],
    );
    (pk, s)
}

/// In-circuit [`verifiable_unif_rand`] from an already-computed `s`. Each
/// squeeze is fully decomposed with the alias check; only the low
/// [`BITS_PER_SQUEEZE`] bits are returned.
pub fn squeeze_bits_gadget(cs: &mut ConstraintSystem, s: SignalId, squeezes: usize) -> Vec<SignalId> {
    let mut out = Vec::with_capacity(squeezes * BITS_PER_SQUEEZE);
    for i in 0..squeezes {
        let h = hash_gadget(cs, &[s.into(), LinearCombination::from_u64(i as u64)]);
        let bits = num2bits_strict(cs, h);
        out.extend_from_slice(&bits[..BITS_PER_SQUEEZE]);
    }
    out
}
