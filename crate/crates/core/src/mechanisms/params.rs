use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::MechanismError;

/// Privacy parameter as an exact positive rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Epsilon {
    pub num: u64,
    pub den: u64,
}

impl Epsilon {
    pub fn new(num: u64, den: u64) -> Result<Self, MechanismError> {
        if num == 0 || den == 0 {
            return Err(MechanismError::InvalidParams(
                "epsilon must be a positive rational".into(),
            ));
        }
        Ok(Epsilon { num, den })
    }

    pub fn integer(v: u64) -> Result<Self, MechanismError> {
        Self::new(v, 1)
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::from(self.den))
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Bounds on the sensitivity accepted by [`NoiseParams`].
pub const MAX_NOISE_BITS: u32 = 16;
pub const MAX_PRECISION: u32 = 512;

/// Configuration of the exponential-noise mechanism.
///
/// Serialized as `{"epsilon": {"num", "den"}, "l", "u", "d"}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawNoiseParams", into = "RawNoiseParams")]
pub struct NoiseParams {
    epsilon: Epsilon,
    lower: i64,
    upper: i64,
    precision: u32,
}

#[derive(Serialize, Deserialize)]
struct RawNoiseParams {
    epsilon: Epsilon,
    l: i64,
    u: i64,
    d: u32,
}

impl TryFrom<RawNoiseParams> for NoiseParams {
    type Error = MechanismError;
    fn try_from(r: RawNoiseParams) -> Result<Self, Self::Error> {
        NoiseParams::new(r.epsilon, r.l, r.u, r.d)
    }
}

impl From<NoiseParams> for RawNoiseParams {
    fn from(p: NoiseParams) -> Self {
        RawNoiseParams {
            epsilon: p.epsilon,
            l: p.lower,
            u: p.upper,
            d: p.precision,
        }
    }
}

impl NoiseParams {
    pub fn new(epsilon: Epsilon, lower: i64, upper: i64, precision: u32) -> Result<Self, MechanismError> {
        let epsilon = Epsilon::new(epsilon.num, epsilon.den)?;
        if upper <= lower {
            return Err(MechanismError::InvalidParams(format!(
                "upper bound {upper} must exceed lower bound {lower}"
            )));
        }
        let delta = (upper as i128) - (lower as i128);
        if !(2..=(1i128 << MAX_NOISE_BITS)).contains(&delta) {
            return Err(MechanismError::InvalidParams(format!(
                "sensitivity {delta} outside [2, 2^{MAX_NOISE_BITS}]"
            )));
        }
        if precision == 0 || precision > MAX_PRECISION {
            return Err(MechanismError::InvalidParams(format!(
                "precision {precision} outside [1, {MAX_PRECISION}]"
            )));
        }
        Ok(NoiseParams {
            epsilon,
            lower,
            upper,
            precision,
        })
    }

    /// The age-poll setting: l = 0, u = 128, ε = 10, d = 20.
    pub fn age_poll() -> Self {
        NoiseParams::new(Epsilon { num: 10, den: 1 }, 0, 128, 20).unwrap()
    }

    pub fn epsilon(&self) -> Epsilon {
        self.epsilon
    }

    pub fn lower(&self) -> i64 {
        self.lower
    }

    pub fn upper(&self) -> i64 {
        self.upper
    }

    /// Precision `d` of each bias expansion.
    pub fn precision(&self) -> usize {
        self.precision as usize
    }

    /// Sensitivity `Δ = u - l`.
    pub fn delta(&self) -> u64 {
        (self.upper - self.lower) as u64
    }

    /// Number of output values `N = u - l`; outputs lie in `[l, u)`.
    pub fn domain_size(&self) -> u64 {
        self.delta()
    }

    /// `nBits = ⌈log2 Δ⌉`.
    pub fn n_bits(&self) -> usize {
        let d = self.delta();
        (64 - (d - 1).leading_zeros()) as usize
    }

    /// `nBits · (d + 3) + 1`.
    pub fn required_bits(&self) -> usize {
        self.n_bits() * (self.precision() + 3) + 1
    }

    /// Index of bit `j` of the stream feeding noise bit `k`.
    pub fn stream_index(&self, k: usize, j: usize) -> usize {
        k * self.precision() + j
    }

    /// Index of bit `i` of the uniform fallback value.
    pub fn uniform_index(&self, i: usize) -> usize {
        (self.precision() + 2) * self.n_bits() + i
    }

    pub fn sign_index(&self) -> usize {
        self.n_bits() * (self.precision() + 3)
    }

    /// `x mod (l, u) = l + ((x - l) mod N)`.
    pub fn remap(&self, x: i64) -> i64 {
        self.lower + (x - self.lower).rem_euclid(self.domain_size() as i64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Binary,
    Numeric,
}

/// The single-record value `v = f(x)` a mechanism randomizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TruthfulValue {
    value: i64,
    kind: ValueKind,
}

impl TruthfulValue {
    /// Yes = 1, No = 0.
    pub fn binary(yes: bool) -> Self {
        TruthfulValue {
            value: yes as i64,
            kind: ValueKind::Binary,
        }
    }

    pub fn numeric(value: i64, params: &NoiseParams) -> Result<Self, MechanismError> {
        if value < params.lower() || value > params.upper() {
            return Err(MechanismError::ValueOutOfRange {
                value,
                lower: params.lower(),
                upper: params.upper(),
            });
        }
        Ok(TruthfulValue {
            value,
            kind: ValueKind::Numeric,
        })
    }

    pub fn value(&self) -> i64 {
        self.value
    }

    pub fn kind(&self) -> ValueKind {
        self.kind
    }
}
