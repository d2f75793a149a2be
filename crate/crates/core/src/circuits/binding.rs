use crate::oracle::{binding_gadget, hash_gadget};
use crate::r1cs::gadgets::{assert_boolean, product};
use crate::r1cs::{ConstraintSystem, CsError, LinearCombination, SignalId, Visibility};

use crate::credential::{attribute_code, BINDING_ATTRIBUTE};

/// Signals of the credential fragment that the mechanism needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CredentialSignals {
    pub sk: SignalId,
    /// `hash(sk, challenge, "sign")`, the randomness seed.
    pub seed: SignalId,
}

pub(crate) fn sibling_input(i: usize) -> String {
    format!("sibling_{i}")
}

pub(crate) fn direction_input(i: usize) -> String {
    format!("direction_{i}")
}

pub(crate) fn binding_sibling_input(i: usize) -> String {
    format!("binding_sibling_{i}")
}

/// One Merkle level with a private direction bit: the running node goes
/// left when `dir = 0` and right when `dir = 1`.
fn merkle_level(cs: &mut ConstraintSystem, cur: SignalId, sibling: SignalId, dir: SignalId) -> SignalId {
    let swap = product(cs, dir, sibling - cur);
    let left = cur + swap;
    let right = sibling - swap;
    hash_gadget(cs, &[left, right])
}

/// Holder binding and attribute inclusion.
///
/// Enforces `pk = hash(sk, "binding")`, that `hash(code("binding_pk"), pk,
/// binding_salt)` sits at slot 0 under `root`, and that
/// `hash(code(attribute), value, salt)` sits at a private slot under the
/// same root. `value` is the mechanism's input signal, shared rather than
/// copied.
pub fn build_credential_binding(
    cs: &mut ConstraintSystem,
    attribute: &str,
    depth: usize,
    value: SignalId,
    challenge: SignalId,
    pk: SignalId,
    root: SignalId,
) -> Result<CredentialSignals, CsError> {
    assert!(depth >= 1, "tree depth must be positive");
    let sk = cs.alloc_input("sk", Visibility::Private)?;
    let (computed_pk, seed) = binding_gadget(cs, sk, challenge);
    cs.enforce(computed_pk, LinearCombination::one(), pk)?;

    let binding_salt = cs.alloc_input("binding_salt", Visibility::Private)?;
    let mut node = hash_gadget(
        cs,
        &[
            LinearCombination::constant(attribute_code(BINDING_ATTRIBUTE)),
            pk.into(),
            binding_salt.into(),
        ],
    );
    for i in 0..depth {
        let sib = cs.alloc_input(&binding_sibling_input(i), Visibility::Private)?;
        node = hash_gadget(cs, &[node.into(), sib.into()]);
    }
    cs.enforce(node, LinearCombination::one(), root)?;

    let salt = cs.alloc_input("salt", Visibility::Private)?;
    let mut node = hash_gadget(
        cs,
        &[
            LinearCombination::constant(attribute_code(attribute)),
            value.into(),
            salt.into(),
        ],
    );
    for i in 0..depth {
        let sib = cs.alloc_input(&sibling_input(i), Visibility::Private)?;
        let dir = cs.alloc_input(&direction_input(i), Visibility::Private)?;
        assert_boolean(cs, dir);
        node = merkle_level(cs, node, sib, dir);
    }
    cs.enforce(node, LinearCombination::one(), root)?;
    Ok(CredentialSignals { sk, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::credential::{issue, IssuerKey};
    use crate::field::FieldElement;
    use crate::oracle::{bind_sign, BindingKeyPair, Challenge};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    struct Fragment {
        cs: ConstraintSystem,
        value: SignalId,
        seed: SignalId,
    }

    fn fragment(depth: usize) -> Fragment {
        let mut cs = ConstraintSystem::new();
        let challenge = cs.alloc_input("challenge", Visibility::Public).unwrap();
        let pk = cs.alloc_input("pk", Visibility::Public).unwrap();
        let root = cs.alloc_input("root", Visibility::Public).unwrap();
        let value = cs.alloc_input("value", Visibility::Private).unwrap();
        let sig = build_credential_binding(&mut cs, "age", depth, value, challenge, pk, root).unwrap();
        Fragment {
            cs,
            value,
            seed: sig.seed,
        }
    }

    fn honest_inputs(depth: usize, seed: u64) -> (HashMap<String, FieldElement>, BindingKeyPair, Challenge) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let keys = BindingKeyPair::generate(&mut rng);
        let issuer = IssuerKey::generate("i", &mut rng);
        let attrs = vec![("name".to_string(), 5), ("age".to_string(), 42)];
        let att = issue(&attrs, keys.pk, &issuer, depth, &mut rng).unwrap();
        let path = att.prove_leaf("age").unwrap();
        let bpath = att.prove_binding();
        let ch = Challenge(FieldElement::from_u64(seed * 7 + 1));
        let mut m: HashMap<String, FieldElement> = [
            ("challenge".to_string(), ch.0),
            ("pk".to_string(), keys.pk),
            ("root".to_string(), att.root),
            ("value".to_string(), FieldElement::from_u64(42)),
            ("sk".to_string(), keys.sk),
            ("salt".to_string(), att.attribute("age").unwrap().salt),
            ("binding_salt".to_string(), att.binding_salt),
        ]
        .into();
        for i in 0..depth {
            m.insert(sibling_input(i), path.siblings[i]);
            m.insert(direction_input(i), path.directions[i].into());
            m.insert(binding_sibling_input(i), bpath.siblings[i]);
        }
        (m, keys, ch)
    }

    fn ok(f: &Fragment, m: &HashMap<String, FieldElement>) -> bool {
        let w = f.cs.generate_witness(m).unwrap();
        f.cs.is_satisfied(&w).unwrap().is_satisfied()
    }

    #[test]
    fn honest_path_satisfies() {
        let f = fragment(3);
        for seed in 0..5 {
            let (m, keys, ch) = honest_inputs(3, seed);
            let w = f.cs.generate_witness(&m).unwrap();
            assert!(f.cs.is_satisfied(&w).unwrap().is_satisfied());
            assert_eq!(w.get(f.seed), bind_sign(keys.sk, ch));
            assert_eq!(w.get(f.value), FieldElement::from_u64(42));
        }
    }

    #[test]
    fn tampered_path_fails() {
        let f = fragment(3);
        let (m, _, _) = honest_inputs(3, 9);
        for key in [
            "sibling_1",
            "binding_sibling_2",
            "salt",
            "binding_salt",
            "value",
            "sk",
            "root",
            "pk",
        ] {
            let mut bad = m.clone();
            *bad.get_mut(key).unwrap() += FieldElement::ONE;
            assert!(!ok(&f, &bad), "{key}");
        }
        let mut flipped = m.clone();
        let d = flipped["direction_0"];
        flipped.insert("direction_0".into(), FieldElement::ONE - d);
        assert!(!ok(&f, &flipped));
        let mut two = m;
        two.insert("direction_0".into(), FieldElement::from_u64(2));
        assert!(!ok(&f, &two));
    }

    #[test]
    fn fragment_agrees_with_native_verification() {
        use crate::credential::{verify_leaf, LeafPreimage};
        let f = fragment(4);
        let (m, _, _) = honest_inputs(4, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        use rand::Rng;
        for trial in 0..40 {
            let mut t = m.clone();
            if trial % 2 == 1 {
                let key = sibling_input(rng.gen_range(0..4));
                *t.get_mut(&key).unwrap() += FieldElement::ONE;
            }
            let path = crate::credential::InclusionPath {
                index: 0,
                siblings: (0..4).map(|i| t[&sibling_input(i)]).collect(),
                directions: (0..4).map(|i| t[&direction_input(i)] == FieldElement::ONE).collect(),
            };
            let leaf = LeafPreimage {
                code: attribute_code("age"),
                value: t["value"],
                salt: t["salt"],
            };
            assert_eq!(verify_leaf(t["root"], &leaf, &path), ok(&f, &t));
        }
    }
}
