//! Constraint systems for the two mechanisms, tied to a credential.
//!
//! Public inputs, in allocation order: `[challenge, pk, root,
//! params_commitment, out]`.

mod binding;
mod mechanisms;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::credential::{InclusionPath, DEFAULT_DEPTH};
use crate::field::FieldElement;
use crate::mechanisms::{BiasTable, MechanismError, NoiseParams};
use crate::oracle::{domain_tag, hash, squeeze_bits_gadget, squeezes_for, Challenge};
use crate::r1cs::{ConstraintSystem, CsError, Hint, LinearCombination, Satisfaction, SignalId, Visibility, Witness};

pub use binding::{build_credential_binding, CredentialSignals};
pub use mechanisms::{biased_bit_gadget, noise_gadget, rr_gadget};

const PARAMS_TAG: &str = "survey params";
/// Squeezes a circuit may spend on randomness.
pub const MAX_SQUEEZES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CircuitError {
    #[error("mechanism needs {needed} random bits; at most {max} squeezes are configured")]
    ParamsTooLarge { needed: usize, max: usize },
    #[error("inputs do not satisfy constraint {constraint}")]
    InconsistentInputs { constraint: usize },
    #[error("malformed inputs: {0}")]
    MalformedInputs(String),
    #[error(transparent)]
    ConstraintSystem(#[from] CsError),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mechanism {
    Rr,
    Exponential { params: NoiseParams },
}

impl Mechanism {
    pub fn required_bits(&self) -> usize {
        match self {
            Mechanism::Rr => 2,
            Mechanism::Exponential { params } => params.required_bits(),
        }
    }
}

/// What a circuit is built from; both sides derive it from the request.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CircuitConfig {
    pub mechanism: Mechanism,
    pub attribute: String,
    pub depth: usize,
}

impl CircuitConfig {
    pub fn rr(attribute: &str) -> Self {
        CircuitConfig {
            mechanism: Mechanism::Rr,
            attribute: attribute.to_string(),
            depth: DEFAULT_DEPTH,
        }
    }

    pub fn exponential(attribute: &str, params: NoiseParams) -> Self {
        CircuitConfig {
            mechanism: Mechanism::Exponential { params },
            attribute: attribute.to_string(),
            depth: DEFAULT_DEPTH,
        }
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = depth;
        self
    }

    /// Hash of everything that shapes the circuit, exposed as a public input.
    pub fn commitment(&self) -> FieldElement {
        let mut input = vec![
            domain_tag(PARAMS_TAG),
            crate::credential::attribute_code(&self.attribute),
            FieldElement::from_u64(self.depth as u64),
        ];
        match &self.mechanism {
            Mechanism::Rr => input.push(FieldElement::ZERO),
            Mechanism::Exponential { params } => input.extend([
                FieldElement::ONE,
                FieldElement::from_u64(params.epsilon().num),
                FieldElement::from_u64(params.epsilon().den),
                FieldElement::from_i64(params.lower()),
                FieldElement::from_i64(params.upper()),
                FieldElement::from_u64(params.precision() as u64),
            ]),
        }
        hash(&input)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PublicSignals {
    pub challenge: SignalId,
    pub pk: SignalId,
    pub root: SignalId,
    pub params_commitment: SignalId,
    pub out: SignalId,
}

/// Public values in wire order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicInputs {
    pub challenge: Challenge,
    pub pk: FieldElement,
    pub root: FieldElement,
    pub params_commitment: FieldElement,
}

/// Holder-side inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretInputs {
    pub sk: FieldElement,
    pub value: i64,
    pub salt: FieldElement,
    pub path: InclusionPath,
    pub binding_salt: FieldElement,
    pub binding_path: InclusionPath,
}

/// A built circuit with the handles needed to fill and read it.
#[derive(Debug, Clone)]
pub struct CircuitBundle {
    config: CircuitConfig,
    system: ConstraintSystem,
    public: PublicSignals,
    value: SignalId,
    randomness: Vec<SignalId>,
    table: Option<BiasTable>,
    commitment: FieldElement,
}

impl CircuitBundle {
    pub fn build(config: &CircuitConfig) -> Result<Self, CircuitError> {
        let table = match &config.mechanism {
            Mechanism::Rr => None,
            Mechanism::Exponential { params } => Some(BiasTable::new(params)?),
        };
        Self::build_with_table(config, table)
    }

    pub fn build_rr(attribute: &str, depth: usize) -> Result<Self, CircuitError> {
        Self::build(&CircuitConfig::rr(attribute).with_depth(depth))
    }

    pub fn build_noise(
        params: &NoiseParams,
        table: &BiasTable,
        attribute: &str,
        depth: usize,
    ) -> Result<Self, CircuitError> {
        let config = CircuitConfig::exponential(attribute, params.clone()).with_depth(depth);
        Self::build_with_table(&config, Some(table.clone()))
    }

    fn build_with_table(config: &CircuitConfig, table: Option<BiasTable>) -> Result<Self, CircuitError> {
        if config.depth == 0 || config.depth > crate::credential::MAX_DEPTH {
            return Err(CircuitError::MalformedInputs(format!("tree depth {}", config.depth)));
        }
        let needed = config.mechanism.required_bits();
        let squeezes = squeezes_for(needed);
        if squeezes > MAX_SQUEEZES {
            return Err(CircuitError::ParamsTooLarge {
                needed,
                max: MAX_SQUEEZES,
            });
        }
        let commitment = config.commitment();
        let mut cs = ConstraintSystem::new();
        let challenge = cs.alloc_input("challenge", Visibility::Public)?;
        let pk = cs.alloc_input("pk", Visibility::Public)?;
        let root = cs.alloc_input("root", Visibility::Public)?;
        let params_commitment = cs.alloc_input("params_commitment", Visibility::Public)?;
        cs.enforce(
            params_commitment,
            LinearCombination::one(),
            LinearCombination::constant(commitment),
        )?;
        let value = cs.alloc_input("value", Visibility::Private)?;

        let cred = build_credential_binding(&mut cs, &config.attribute, config.depth, value, challenge, pk, root)?;
        let randomness = squeeze_bits_gadget(&mut cs, cred.seed, squeezes);

        let out_lc = match (&config.mechanism, &table) {
            (Mechanism::Rr, _) => rr_gadget(&mut cs, value, &randomness),
            (Mechanism::Exponential { params }, Some(table)) => {
                if table.n_bits() != params.n_bits() || table.precision() != params.precision() {
                    return Err(MechanismError::InvalidParams("bias table does not match".into()).into());
                }
                noise_gadget(&mut cs, params, table, value, &randomness)
            }
            (Mechanism::Exponential { .. }, None) => unreachable!("table built above"),
        };
        let out = cs.alloc_signal(Visibility::Public, Hint::Linear(out_lc.clone()))?;
        cs.enforce(out_lc, LinearCombination::one(), out)?;
        for (name, s) in [
            ("challenge", challenge),
            ("pk", pk),
            ("root", root),
            ("params_commitment", params_commitment),
            ("out", out),
        ] {
            cs.name_signal(name, s);
        }
        Ok(CircuitBundle {
            config: config.clone(),
            system: cs,
            public: PublicSignals {
                challenge,
                pk,
                root,
                params_commitment,
                out,
            },
            value,
            randomness,
            table,
            commitment,
        })
    }

    pub fn config(&self) -> &CircuitConfig {
        &self.config
    }

    pub fn system(&self) -> &ConstraintSystem {
        &self.system
    }

    pub fn public_signals(&self) -> PublicSignals {
        self.public
    }

    pub fn value_signal(&self) -> SignalId {
        self.value
    }

    pub fn randomness_signals(&self) -> &[SignalId] {
        &self.randomness
    }

    pub fn bias_table(&self) -> Option<&BiasTable> {
        self.table.as_ref()
    }

    pub fn commitment(&self) -> FieldElement {
        self.commitment
    }

    pub fn num_constraints(&self) -> usize {
        self.system.num_constraints()
    }

    /// Named witness inputs for the given public and secret values.
    pub fn assignment(
        &self,
        public: &PublicInputs,
        secret: &SecretInputs,
    ) -> Result<HashMap<String, FieldElement>, CircuitError> {
        let depth = self.config.depth;
        for (what, p) in [("attribute", &secret.path), ("binding", &secret.binding_path)] {
            if p.siblings.len() != depth || p.directions.len() != depth {
                return Err(CircuitError::MalformedInputs(format!(
                    "{what} path has depth {}, circuit expects {depth}",
                    p.siblings.len()
                )));
            }
        }
        if secret.binding_path.directions.iter().any(|d| *d) {
            return Err(CircuitError::MalformedInputs("binding leaf must sit at slot 0".into()));
        }
        let mut m: HashMap<String, FieldElement> = [
            ("challenge", public.challenge.value()),
            ("pk", public.pk),
            ("root", public.root),
            ("params_commitment", public.params_commitment),
            ("value", FieldElement::from_i64(secret.value)),
            ("sk", secret.sk),
            ("salt", secret.salt),
            ("binding_salt", secret.binding_salt),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        for i in 0..depth {
            m.insert(binding::sibling_input(i), secret.path.siblings[i]);
            m.insert(binding::direction_input(i), secret.path.directions[i].into());
            m.insert(binding::binding_sibling_input(i), secret.binding_path.siblings[i]);
        }
        Ok(m)
    }

    /// Runs the hints and checks the result; inputs that cannot satisfy the
    /// system (a forged path, a key that does not match `pk`) are rejected.
    pub fn generate_witness(&self, public: &PublicInputs, secret: &SecretInputs) -> Result<Witness, CircuitError> {
        let w = self.system.generate_witness(&self.assignment(public, secret)?)?;
        match self.system.is_satisfied(&w)? {
            Satisfaction::Satisfied => Ok(w),
            Satisfaction::Unsatisfied { constraint } => Err(CircuitError::InconsistentInputs { constraint }),
            Satisfaction::BadOneWire => Err(CircuitError::InconsistentInputs { constraint: 0 }),
        }
    }

    pub fn output(&self, w: &Witness) -> FieldElement {
        w.get(self.public.out)
    }

    /// Public values in wire order, `out` last.
    pub fn public_values(&self, w: &Witness) -> [FieldElement; 5] {
        let p = self.public;
        [p.challenge, p.pk, p.root, p.params_commitment, p.out].map(|s| w.get(s))
    }
}

/// Reads a field element as a small signed integer.
pub fn field_to_i64(x: FieldElement) -> Option<i64> {
    if let Some(v) = x.to_u64() {
        return i64::try_from(v).ok();
    }
    (-x).to_u64().and_then(|v| i64::try_from(v).ok()).map(|v| -v)
}
