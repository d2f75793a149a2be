//! Jointly generated, verifiable uniform randomness.
//!
//! The participant contributes a secret key, the surveyor a challenge. The
//! participant "signs" the challenge by hashing it with the key, and bits
//! are squeezed from the signature in counter mode. Once the public key
//! and the challenge are fixed, neither side alone can steer the bits.

mod randomness;
pub mod sponge;

pub use randomness::{
    bind_sign, binding_gadget, squeeze_bits_gadget, squeezes_for, verifiable_unif_rand, BindingKeyPair, BitArray,
    Challenge, Provenance, BINDING_TAG, BITS_PER_SQUEEZE, SIGN_TAG,
};
pub use sponge::{domain_tag, hash, hash_gadget};
