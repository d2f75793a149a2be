//! Substitution-permutation sponge over three field elements.
//!
//! Rate 2, capacity 1, `x^5` S-box on every word in every round, and the
//! circulant mixing matrix `circ(2, 1, 1)`. Round constants are expanded
//! from a fixed seed string with SHA-256 in counter mode.
//!
//! This is a test-grade random oracle: the structure is standard but the
//! instance has not been cryptanalysed. Swapping in a vetted permutation
//! only requires new [`SpongeParams`].

use std::sync::OnceLock;

use sha2::{Digest, Sha256};

use crate::field::FieldElement;
use crate::r1cs::gadgets::{materialize, product};
use crate::r1cs::{ConstraintSystem, LinearCombination, SignalId};

pub const WIDTH: usize = 3;
pub const RATE: usize = 2;
pub const ROUNDS: usize = 64;
pub const CONSTANT_SEED: &str = "vldp sponge v1: round constants for a width-3 x^5 permutation";

pub type State = [FieldElement; WIDTH];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpongeParams {
    pub round_constants: Vec<State>,
    /// Row-major mixing matrix.
    pub mds: [[u64; WIDTH]; WIDTH],
    /// `mds` as field elements, so mixing does not convert per call.
    pub mds_field: [[FieldElement; WIDTH]; WIDTH],
}

impl SpongeParams {
    pub fn generate(seed: &str, rounds: usize) -> Self {
        let mut counter = 0u64;
        let mut next = || {
            // 512 bits reduced mod P keeps the constant distribution close to uniform.
            let mut wide = Vec::with_capacity(64);
            for half in 0..2u8 {
                let mut h = Sha256::new();
                h.update(seed.as_bytes());
                h.update(counter.to_be_bytes());
                h.update([half]);
                wide.extend_from_slice(&h.finalize());
            }
            counter += 1;
            FieldElement::from_be_bytes_mod_order(&wide)
        };
        let round_constants = (0..rounds).map(|_| [next(), next(), next()]).collect();
        let mds = [[2, 1, 1], [1, 2, 1], [1, 1, 2]];
        SpongeParams {
            round_constants,
            mds,
            mds_field: mds.map(|row| row.map(FieldElement::from_u64)),
        }
    }

    pub fn rounds(&self) -> usize {
        self.round_constants.len()
    }
}

/// The process-wide parameter set used by every hash in the crate.
pub fn params() -> &'static SpongeParams {
    static PARAMS: OnceLock<SpongeParams> = OnceLock::new();
    PARAMS.get_or_init(|| SpongeParams::generate(CONSTANT_SEED, ROUNDS))
}

fn sbox(x: FieldElement) -> FieldElement {
    let x2 = x.square();
    x2.square() * x
}

fn mix(params: &SpongeParams, s: &State) -> State {
    let mut out = [FieldElement::ZERO; WIDTH];
    for (i, row) in params.mds_field.iter().enumerate() {
        out[i] = row.iter().zip(s).map(|(m, x)| *m * *x).sum();
    }
    out
}

pub fn permute_with(params: &SpongeParams, state: &mut State) {
    for rc in &params.round_constants {
        for i in 0..WIDTH {
            state[i] = sbox(state[i] + rc[i]);
        }
        *state = mix(params, state);
    }
}

pub fn permute(state: &mut State) {
    permute_with(params(), state)
}

/// Sponge hash of a variable-length input. The input length seeds the
/// capacity word, so inputs differing only by trailing zeros do not collide.
pub fn hash(inputs: &[FieldElement]) -> FieldElement {
    let mut state = [
        FieldElement::ZERO,
        FieldElement::ZERO,
        FieldElement::from_u64(inputs.len() as u64),
    ];
    if inputs.is_empty() {
        permute(&mut state);
    }
    for chunk in inputs.chunks(RATE) {
        for (s, x) in state.iter_mut().zip(chunk) {
            *s += *x;
        }
        permute(&mut state);
    }
    state[0]
}

/// Field encoding of a short ASCII domain-separation tag.
pub fn domain_tag(tag: &str) -> FieldElement {
    FieldElement::from_be_bytes_mod_order(tag.as_bytes())
}

/// In-circuit counterpart of [`hash`]; `3 · 3 · ROUNDS` constraints per
/// permutation plus one to pin the output.
pub fn hash_gadget(cs: &mut ConstraintSystem, inputs: &[LinearCombination]) -> SignalId {
    let p = params();
    let mut state: [LinearCombination; WIDTH] = [
        LinearCombination::zero(),
        LinearCombination::zero(),
        LinearCombination::from_u64(inputs.len() as u64),
    ];
    let absorb = |cs: &mut ConstraintSystem, state: &mut [LinearCombination; WIDTH]| {
        for rc in &p.round_constants {
            let mut out: Vec<SignalId> = Vec::with_capacity(WIDTH);
            for i in 0..WIDTH {
                let x = state[i].clone() + rc[i];
                let x2 = product(cs, x.clone(), x.clone());
                let x4 = product(cs, x2, x2);
                out.push(product(cs, x4, x));
            }
            for (i, row) in p.mds.iter().enumerate() {
                state[i] =
                    LinearCombination::from_terms(row.iter().zip(&out).map(|(m, s)| (*s, FieldElement::from_u64(*m))));
            }
        }
    };
    if inputs.is_empty() {
        absorb(cs, &mut state);
    }
    for chunk in inputs.chunks(RATE) {
        for (s, x) in state.iter_mut().zip(chunk) {
            *s = s.clone() + x;
        }
        absorb(cs, &mut state);
    }
    materialize(cs, state[0].clone())
}
