use super::{sample_biased_bit, BiasTable, MechanismError, NoiseParams, TruthfulValue, ValueKind};
use crate::oracle::BitArray;

/// Everything one noise draw decided, for auditing and circuit comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoiseDraw {
    pub output: i64,
    /// Noise magnitude bits, least significant first.
    pub magnitude_bits: Vec<bool>,
    pub magnitude: u64,
    /// `true` adds the magnitude, `false` subtracts it.
    pub sign: bool,
    /// Magnitude zero with sign zero: output replaced by a uniform value.
    pub negative_zero: bool,
    /// Bits whose stream matched the expansion at every position.
    pub exhausted: Vec<usize>,
}

/// Exponentially distributed noise added to `v`, wrapped into `[l, u)`.
pub fn exponential_noise(
    v: TruthfulValue,
    params: &NoiseParams,
    table: &BiasTable,
    r: &BitArray,
) -> Result<i64, MechanismError> {
    exponential_noise_detailed(v, params, table, r).map(|d| d.output)
}

pub fn exponential_noise_detailed(
    v: TruthfulValue,
    params: &NoiseParams,
    table: &BiasTable,
    r: &BitArray,
) -> Result<NoiseDraw, MechanismError> {
    if v.kind() != ValueKind::Numeric {
        return Err(MechanismError::WrongValueKind {
            expected: ValueKind::Numeric,
        });
    }
    let n_bits = params.n_bits();
    let d = params.precision();
    if table.n_bits() != n_bits || table.precision() != d {
        return Err(MechanismError::InvalidParams(
            "bias table was built for different parameters".into(),
        ));
    }
    if r.len() < params.required_bits() {
        return Err(MechanismError::NotEnoughBits {
            needed: params.required_bits(),
            got: r.len(),
        });
    }

    let mut magnitude_bits = Vec::with_capacity(n_bits);
    let mut exhausted = Vec::new();
    for k in 0..n_bits {
        let stream = r.slice(params.stream_index(k, 0)..params.stream_index(k, d));
        let b = sample_biased_bit(table.expansion(k), stream)?;
        if b.exhausted {
            exhausted.push(k);
        }
        magnitude_bits.push(b.bit);
    }
    let magnitude = weigh(magnitude_bits.iter().copied());
    let sign = r.get(params.sign_index());
    let negative_zero = magnitude == 0 && !sign;

    let output = if negative_zero {
        let uniform = weigh((0..n_bits).map(|i| r.get(params.uniform_index(i))));
        params.lower() + (uniform % params.domain_size()) as i64
    } else {
        let m = magnitude as i64;
        params.remap(if sign { v.value() + m } else { v.value() - m })
    };
    Ok(NoiseDraw {
        output,
        magnitude_bits,
        magnitude,
        sign,
        negative_zero,
        exhausted,
    })
}

fn weigh(bits: impl Iterator<Item = bool>) -> u64 {
    bits.enumerate().map(|(i, b)| (b as u64) << i).sum()
}
