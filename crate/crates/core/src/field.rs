//! Arithmetic modulo the 254-bit BN254 scalar prime.
//!
//! Every circuit signal and every sponge state word is a [`FieldElement`].
//! The canonical wire form is a 64-character, big-endian, lowercase hex
//! string of the reduced value.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use ark_bn254::Fr;
use ark_ff::{BigInteger, Field, PrimeField, Zero};
use num_bigint::BigUint;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Decimal form of the modulus.
pub const MODULUS_DECIMAL: &str = "21888242871839275222246405745257275088548364400416034343698204186575808495617";

/// Number of bits needed to write any canonical element.
pub const MODULUS_BITS: usize = 254;

const HEX_LEN: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("value does not fit in {bits} bits")]
    RangeExceeded { bits: usize },
    #[error("bit count {0} exceeds the field width")]
    TooManyBits(usize),
    #[error("malformed field element encoding: {0}")]
    Malformed(String),
}

/// Integer modulo P, always held in canonical form.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct FieldElement(Fr);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(ark_ff::MontFp!("0"));
    pub const ONE: FieldElement = FieldElement(ark_ff::MontFp!("1"));

    pub fn zero() -> Self {
        Self::ZERO
    }

    pub fn one() -> Self {
        Self::ONE
    }

    pub fn from_u64(v: u64) -> Self {
        FieldElement(Fr::from(v))
    }

    /// Signed embedding: negative values map to `P - |v|`.
    pub fn from_i64(v: i64) -> Self {
        let abs = Self::from_u64(v.unsigned_abs());
        if v < 0 {
            -abs
        } else {
            abs
        }
    }

    pub fn from_u128(v: u128) -> Self {
        FieldElement(Fr::from(v))
    }

    /// Reduces an arbitrary non-negative integer modulo P.
    pub fn from_biguint(v: &BigUint) -> Self {
        FieldElement(Fr::from_le_bytes_mod_order(&v.to_bytes_le()))
    }

    /// Reduces big-endian bytes of any length modulo P.
    pub fn from_be_bytes_mod_order(bytes: &[u8]) -> Self {
        FieldElement(Fr::from_be_bytes_mod_order(bytes))
    }

    pub fn modulus() -> BigUint {
        BigUint::from_bytes_le(&Fr::MODULUS.to_bytes_le())
    }

    pub fn to_biguint(&self) -> BigUint {
        BigUint::from_bytes_le(&self.0.into_bigint().to_bytes_le())
    }

    /// The value as `u64` if it is small enough.
    pub fn to_u64(&self) -> Option<u64> {
        let limbs = self.0.into_bigint().0;
        if limbs[1..].iter().all(|&l| l == 0) {
            Some(limbs[0])
        } else {
            None
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn square(&self) -> Self {
        FieldElement(self.0.square())
    }

    pub fn pow(&self, exp: u64) -> Self {
        FieldElement(self.0.pow([exp]))
    }

    pub fn inverse(&self) -> Result<Self, FieldError> {
        self.0.inverse().map(FieldElement).ok_or(FieldError::ZeroInverse)
    }

    /// Bit `i` of the canonical integer value.
    pub fn bit(&self, i: usize) -> bool {
        let limbs = self.0.into_bigint().0;
        i < 256 && (limbs[i / 64] >> (i % 64)) & 1 == 1
    }

    /// Little-endian decomposition into exactly `n` bits.
    pub fn to_bits(&self, n: usize) -> Result<Vec<bool>, FieldError> {
        if n > MODULUS_BITS {
            return Err(FieldError::TooManyBits(n));
        }
        let all = self.0.into_bigint().to_bits_le();
        if all.iter().skip(n).any(|&b| b) {
            return Err(FieldError::RangeExceeded { bits: n });
        }
        Ok(all.into_iter().take(n).collect())
    }

    /// Recomposes a little-endian bit sequence, reducing modulo P.
    pub fn from_bits(bits: &[bool]) -> Self {
        let mut acc = Self::ZERO;
        for &b in bits.iter().rev() {
            acc = acc + acc;
            if b {
                acc += Self::ONE;
            }
        }
        acc
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0.into_bigint().to_bytes_be())
    }

    /// Parses the canonical 64-character hex form. Non-canonical values
    /// (`>= P`) are rejected rather than reduced.
    pub fn from_hex(s: &str) -> Result<Self, FieldError> {
        let s = s.strip_prefix("0x").unwrap_or(s);
        if s.len() != HEX_LEN {
            return Err(FieldError::Malformed(format!(
                "expected {HEX_LEN} hex digits, got {}",
                s.len()
            )));
        }
        let bytes = hex::decode(s).map_err(|e| FieldError::Malformed(e.to_string()))?;
        let v = BigUint::from_bytes_be(&bytes);
        if v >= Self::modulus() {
            return Err(FieldError::Malformed("value not reduced modulo P".into()));
        }
        Ok(Self::from_biguint(&v))
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_u64() {
            Some(v) => write!(f, "Fe({v})"),
            None => write!(f, "Fe(0x{})", self.to_hex()),
        }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl FromStr for FieldElement {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_hex(s)
    }
}

impl From<u64> for FieldElement {
    fn from(v: u64) -> Self {
        Self::from_u64(v)
    }
}

impl From<bool> for FieldElement {
    fn from(b: bool) -> Self {
        if b {
            Self::ONE
        } else {
            Self::ZERO
        }
    }
}

impl Add for FieldElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        FieldElement(self.0 + rhs.0)
    }
}

impl AddAssign for FieldElement {
    fn add_assign(&mut self, rhs: Self) {
        self.0 += rhs.0;
    }
}

impl Sub for FieldElement {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        FieldElement(self.0 - rhs.0)
    }
}

impl SubAssign for FieldElement {
    fn sub_assign(&mut self, rhs: Self) {
        self.0 -= rhs.0;
    }
}

impl Mul for FieldElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        FieldElement(self.0 * rhs.0)
    }
}

impl MulAssign for FieldElement {
    fn mul_assign(&mut self, rhs: Self) {
        self.0 *= rhs.0;
    }
}

impl Neg for FieldElement {
    type Output = Self;
    fn neg(self) -> Self {
        FieldElement(-self.0)
    }
}

impl std::iter::Sum for FieldElement {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}

impl Serialize for FieldElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for FieldElement {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Self::from_hex(&s).map_err(serde::de::Error::custom)
    }
}
