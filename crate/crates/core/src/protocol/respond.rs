use super::{ChallengePolicy, Evidence, ProofRequest, ProtocolError, ProvingBackend, SurveyResponse, SCHEMA_VERSION};
use crate::circuits::{field_to_i64, CircuitBundle, CircuitError, PublicInputs, SecretInputs};
use crate::credential::{Attestation, CredentialError};
use crate::field::FieldElement;
use crate::oracle::{BindingKeyPair, Challenge};

/// Wallet side of one survey; builds the circuit once and answers many
/// times.
pub struct Prover<'a> {
    request: ProofRequest,
    bundle: CircuitBundle,
    backend: Option<&'a dyn ProvingBackend>,
}

impl<'a> Prover<'a> {
    pub fn new(request: &ProofRequest) -> Result<Self, ProtocolError> {
        Ok(Prover {
            request: request.clone(),
            bundle: CircuitBundle::build(&request.circuit_config())?,
            backend: None,
        })
    }

    /// Package evidence with `backend` instead of shipping the witness.
    pub fn with_backend(mut self, backend: &'a dyn ProvingBackend) -> Self {
        self.backend = Some(backend);
        self
    }

    pub fn bundle(&self) -> &CircuitBundle {
        &self.bundle
    }

    pub fn respond(&self, attestation: &Attestation, sk: FieldElement) -> Result<SurveyResponse, ProtocolError> {
        self.respond_to(attestation, sk, self.request.challenge)
    }

    /// Answers a challenge of the participant's choosing; only allowed when
    /// the survey runs per-response challenges.
    pub fn respond_with_challenge(
        &self,
        attestation: &Attestation,
        sk: FieldElement,
        challenge: Challenge,
    ) -> Result<SurveyResponse, ProtocolError> {
        if self.request.challenge_policy != ChallengePolicy::PerResponse {
            return Err(ProtocolError::FixedChallenge);
        }
        self.respond_to(attestation, sk, challenge)
    }

    fn respond_to(
        &self,
        att: &Attestation,
        sk: FieldElement,
        challenge: Challenge,
    ) -> Result<SurveyResponse, ProtocolError> {
        let req = &self.request;
        if !req.trusted_issuers.contains(&att.issuer_id) {
            return Err(ProtocolError::UntrustedIssuer(att.issuer_id.clone()));
        }
        let attribute = att.attribute(&req.attribute).map_err(|e| match e {
            CredentialError::UnknownAttribute(n) => ProtocolError::AttributeMissing(n),
            other => ProtocolError::WitnessFailure(other.to_string()),
        })?;
        if att.depth != req.depth {
            return Err(ProtocolError::WitnessFailure(format!(
                "credential depth {} does not match survey depth {}",
                att.depth, req.depth
            )));
        }
        let pk = BindingKeyPair::from_secret(sk).pk;
        let public = PublicInputs {
            challenge,
            pk,
            root: att.root,
            params_commitment: self.bundle.commitment(),
        };
        let secret = SecretInputs {
            sk,
            value: attribute.value,
            salt: attribute.salt,
            path: att
                .prove_leaf(&req.attribute)
                .map_err(|e| ProtocolError::WitnessFailure(e.to_string()))?,
            binding_salt: att.binding_salt,
            binding_path: att.prove_binding(),
        };
        let witness = self.bundle.generate_witness(&public, &secret).map_err(|e| match e {
            CircuitError::InconsistentInputs { .. } | CircuitError::MalformedInputs(_) => {
                ProtocolError::WitnessFailure(e.to_string())
            }
            other => ProtocolError::Circuit(other),
        })?;
        let output = field_to_i64(self.bundle.output(&witness))
            .ok_or_else(|| ProtocolError::WitnessFailure("output is not a small integer".into()))?;
        let evidence = match self.backend {
            None => Evidence::Transparent { witness: witness.0 },
            Some(b) => Evidence::Backend {
                backend: b.name().to_string(),
                proof: hex::encode(b.prove(&self.bundle, &witness)),
            },
        };
        Ok(SurveyResponse {
            schema_version: SCHEMA_VERSION,
            survey_id: req.survey_id.clone(),
            issuer_id: att.issuer_id.clone(),
            issuer_tag: att.issuer_tag,
            public_inputs: public,
            output,
            evidence,
        })
    }
}

/// One-shot [`Prover::respond`].
pub fn respond(
    attestation: &Attestation,
    sk: FieldElement,
    request: &ProofRequest,
) -> Result<SurveyResponse, ProtocolError> {
    Prover::new(request)?.respond(attestation, sk)
}

/// One-shot [`Prover::respond_with_challenge`].
pub fn respond_with_challenge(
    attestation: &Attestation,
    sk: FieldElement,
    request: &ProofRequest,
    challenge: Challenge,
) -> Result<SurveyResponse, ProtocolError> {
    Prover::new(request)?.respond_with_challenge(attestation, sk, challenge)
}
