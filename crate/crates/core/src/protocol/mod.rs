//! Surveyor and participant messages: proof requests, responses, their
//! verification, and aggregation of accepted answers.

mod aggregate;
mod respond;
mod verify;

use serde::{Deserialize, Serialize};

use crate::circuits::{CircuitConfig, CircuitError, Mechanism, PublicInputs};
use crate::credential::DEFAULT_DEPTH;
use crate::field::FieldElement;
use crate::mechanisms::{NoiseParams, ValueKind};
use crate::oracle::Challenge;

pub use aggregate::{aggregate, AggregateResult};
pub use respond::{respond, respond_with_challenge, Prover};
pub use verify::{verify_response, Accepted, RejectReason, Verdict, Verifier};

/// Version written into every wire message.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ProtocolError {
    #[error("invalid survey parameters: {0}")]
    InvalidParams(String),
    #[error("credential has no attribute `{0}`")]
    AttributeMissing(String),
    #[error("issuer `{0}` is not trusted by this survey")]
    UntrustedIssuer(String),
    #[error("could not build a satisfying witness: {0}")]
    WitnessFailure(String),
    #[error("this survey uses a fixed challenge")]
    FixedChallenge,
    #[error("unsupported schema version {0}")]
    SchemaVersion(u32),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Whether every participant answers the same challenge.
///
/// `Fixed` is the default: repeated queries then reproduce the same noisy
/// answer, so colluding surveyors cannot average the noise away.
/// `PerResponse` lets each response carry its own challenge and is meant
/// only for statistical testing of the randomness.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChallengePolicy {
    #[default]
    Fixed,
    PerResponse,
}

/// Surveyor-side configuration, read from `--config`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyConfig {
    pub survey_id: String,
    pub attribute: String,
    pub attribute_kind: ValueKind,
    pub mechanism: MechanismConfig,
    pub challenge: Challenge,
    pub trusted_issuers: Vec<String>,
    #[serde(default)]
    pub challenge_policy: ChallengePolicy,
    #[serde(default = "default_depth")]
    pub depth: usize,
}

fn default_depth() -> usize {
    DEFAULT_DEPTH
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MechanismConfig {
    Rr,
    Exponential {
        #[serde(flatten)]
        params: NoiseParams,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofRequest {
    pub schema_version: u32,
    pub survey_id: String,
    pub attribute: String,
    pub attribute_kind: ValueKind,
    pub mechanism: Mechanism,
    pub challenge: Challenge,
    pub trusted_issuers: Vec<String>,
    pub challenge_policy: ChallengePolicy,
    pub depth: usize,
}

pub fn create_request(config: &SurveyConfig) -> Result<ProofRequest, ProtocolError> {
    if config.survey_id.is_empty() {
        return Err(ProtocolError::InvalidParams("empty survey id".into()));
    }
    if config.attribute.is_empty() {
        return Err(ProtocolError::InvalidParams("empty attribute name".into()));
    }
    if config.trusted_issuers.is_empty() {
        return Err(ProtocolError::InvalidParams("no trusted issuers".into()));
    }
    if config.depth == 0 || config.depth > crate::credential::MAX_DEPTH {
        return Err(ProtocolError::InvalidParams(format!("tree depth {}", config.depth)));
    }
    let mechanism = match &config.mechanism {
        MechanismConfig::Rr => {
            if config.attribute_kind != ValueKind::Binary {
                return Err(ProtocolError::InvalidParams(
                    "randomized response needs a binary attribute".into(),
                ));
            }
            Mechanism::Rr
        }
        MechanismConfig::Exponential { params } => {
            if config.attribute_kind != ValueKind::Numeric {
                return Err(ProtocolError::InvalidParams(
                    "exponential noise needs a numeric attribute".into(),
                ));
            }
            Mechanism::Exponential { params: params.clone() }
        }
    };
    Ok(ProofRequest {
        schema_version: SCHEMA_VERSION,
        survey_id: config.survey_id.clone(),
        attribute: config.attribute.clone(),
        attribute_kind: config.attribute_kind,
        mechanism,
        challenge: config.challenge,
        trusted_issuers: config.trusted_issuers.clone(),
        challenge_policy: config.challenge_policy,
        depth: config.depth,
    })
}

impl ProofRequest {
    pub fn circuit_config(&self) -> CircuitConfig {
        CircuitConfig {
            mechanism: self.mechanism.clone(),
            attribute: self.attribute.clone(),
            depth: self.depth,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("request serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, ProtocolError> {
        let r: ProofRequest = serde_json::from_str(s)?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(ProtocolError::SchemaVersion(r.schema_version));
        }
        Ok(r)
    }
}

/// How a response backs its claimed output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Evidence {
    /// The full witness. Verifiable but not private; for testing the
    /// verification logic end to end.
    Transparent { witness: Vec<FieldElement> },
    /// Opaque proof from a [`ProvingBackend`], hex encoded.
    Backend { backend: String, proof: String },
}

/// Integration point for a succinct proof system.
pub trait ProvingBackend: Send + Sync {
    fn name(&self) -> &str;
    fn prove(&self, bundle: &crate::circuits::CircuitBundle, witness: &crate::r1cs::Witness) -> Vec<u8>;
    fn verify(&self, bundle: &crate::circuits::CircuitBundle, public: &[FieldElement], proof: &[u8]) -> bool;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyResponse {
    pub schema_version: u32,
    pub survey_id: String,
    pub issuer_id: String,
    pub issuer_tag: FieldElement,
    pub public_inputs: PublicInputs,
    pub output: i64,
    pub evidence: Evidence,
}

impl SurveyResponse {
    /// One JSON-lines record (no trailing newline).
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("response serializes")
    }

    pub fn from_json_line(line: &str) -> Result<Self, ProtocolError> {
        Ok(serde_json::from_str(line)?)
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::credential::{issue, Attestation, IssuerKey, IssuerRegistry};
    use crate::oracle::BindingKeyPair;
    use rand::Rng;

    pub struct World {
        pub issuer: IssuerKey,
        pub registry: IssuerRegistry,
    }

    impl World {
        pub fn new(rng: &mut impl Rng) -> Self {
            let issuer = IssuerKey::generate("gov", rng);
            let mut registry = IssuerRegistry::new();
            registry.trust(&issuer);
            World { issuer, registry }
        }

        pub fn holder(&self, rng: &mut impl Rng, smoker: bool, age: i64) -> (BindingKeyPair, Attestation) {
            let keys = BindingKeyPair::generate(rng);
            let attrs = vec![("smoker".to_string(), smoker as i64), ("age".to_string(), age)];
            let att = issue(&attrs, keys.pk, &self.issuer, DEFAULT_DEPTH, rng).unwrap();
            (keys, att)
        }
    }

    pub fn rr_config() -> SurveyConfig {
        SurveyConfig {
            survey_id: "smoking-2024".into(),
            attribute: "smoker".into(),
            attribute_kind: ValueKind::Binary,
            mechanism: MechanismConfig::Rr,
            challenge: Challenge(FieldElement::from_u64(0xC0FFEE)),
            trusted_issuers: vec!["gov".into()],
            challenge_policy: ChallengePolicy::Fixed,
            depth: DEFAULT_DEPTH,
        }
    }

    pub fn age_config() -> SurveyConfig {
        SurveyConfig {
            survey_id: "age-poll".into(),
            attribute: "age".into(),
            attribute_kind: ValueKind::Numeric,
            mechanism: MechanismConfig::Exponential {
                params: NoiseParams::age_poll(),
            },
            ..rr_config()
        }
    }
}
