use crate::field::FieldElement;
use crate::mechanisms::{BiasTable, NoiseParams};
use crate::r1cs::gadgets::{
    assert_boolean, bits2num, is_equal, is_zero, materialize, modulo, num2bits, product, DEFAULT_MODULO_WIDTH,
};
use crate::r1cs::{ConstraintSystem, LinearCombination, SignalId};

/// `out = (1 − r0)·v + r0·r1` with `v` boolean.
pub fn rr_gadget(cs: &mut ConstraintSystem, value: SignalId, rand: &[SignalId]) -> LinearCombination {
    assert!(rand.len() >= 2, "randomized response needs two bits");
    assert_boolean(cs, value);
    let forced = product(cs, rand[0], rand[1]);
    let truthful = product(cs, LinearCombination::one() - rand[0], value);
    truthful + forced
}

/// The bit-by-bit biased coin: `hit` stays one while the stream agrees with
/// the expansion, and `eval` picks up the expansion digit at the first
/// disagreement. Returns the materialized noise bit.
pub fn biased_bit_gadget(cs: &mut ConstraintSystem, expansion: &[bool], stream: &[SignalId]) -> SignalId {
    assert_eq!(expansion.len(), stream.len());
    let mut hit = LinearCombination::one();
    let mut eval = LinearCombination::zero();
    for (prob, r) in expansion.iter().zip(stream) {
        let prob = LinearCombination::from_u64(*prob as u64);
        let eq = is_equal(cs, prob.clone(), *r);
        let next_hit = product(cs, hit.clone(), eq);
        // eval1 = hit·(1 − eq) = hit − next_hit, linear.
        let eval1 = hit - next_hit;
        if prob == LinearCombination::one() {
            eval = eval + eval1;
        }
        hit = next_hit.into();
    }
    materialize(cs, eval)
}

/// Width for the remap reductions: the widest reduced value is below
/// `5N`, and the modulus itself must fit.
pub(crate) fn remap_width(params: &NoiseParams) -> usize {
    let bound = 5 * params.domain_size() + 1;
    DEFAULT_MODULO_WIDTH.max(64 - bound.leading_zeros() as usize)
}

/// Exponential noise with `-0` fallback and wrap into `[l, u)`, laid out
/// exactly as the native mechanism reads its randomness.
pub fn noise_gadget(
    cs: &mut ConstraintSystem,
    params: &NoiseParams,
    table: &BiasTable,
    value: SignalId,
    rand: &[SignalId],
) -> LinearCombination {
    assert!(rand.len() >= params.required_bits());
    let n_bits = params.n_bits();
    let d = params.precision();
    let n = params.domain_size();
    let l = FieldElement::from_i64(params.lower());
    let u = FieldElement::from_i64(params.upper());

    // l ≤ v ≤ u
    let range = 64 - params.delta().leading_zeros() as usize + 1;
    num2bits(cs, value - l, range);
    num2bits(cs, LinearCombination::constant(u) - value, range);

    let noise_bits: Vec<SignalId> = (0..n_bits)
        .map(|k| {
            let stream = &rand[params.stream_index(k, 0)..params.stream_index(k, d)];
            biased_bit_gadget(cs, table.expansion(k), stream)
        })
        .collect();
    let noise = bits2num(cs, &noise_bits);
    let sign = rand[params.sign_index()];

    // v + (2·sign − 1)·noise = v − noise + 2·sign·noise
    let signed_noise = product(cs, sign, noise);
    let shifted = value - noise + signed_noise * FieldElement::from_u64(2);
    let width = remap_width(params);
    let offset = FieldElement::from_u64(2 * n) - l;
    let wrapped = modulo(cs, shifted + offset, n, width);

    let uniform_bits: Vec<SignalId> = (0..n_bits).map(|i| rand[params.uniform_index(i)]).collect();
    let uniform = bits2num(cs, &uniform_bits);
    let uniform = modulo(cs, uniform, n, width);

    let zero = is_zero(cs, noise);
    let negative_zero = product(cs, zero, LinearCombination::one() - sign);
    let choose = product(cs, negative_zero, uniform - wrapped);
    wrapped + choose + l
}
