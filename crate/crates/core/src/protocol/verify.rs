use std::collections::HashMap;

use serde::Serialize;

use super::{ChallengePolicy, Evidence, ProofRequest, ProtocolError, ProvingBackend, SurveyResponse, SCHEMA_VERSION};
use crate::circuits::CircuitBundle;
use crate::credential::IssuerRegistry;
use crate::field::FieldElement;
use crate::r1cs::{Satisfaction, Witness};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum RejectReason {
    /// Wrong schema version, survey id, or evidence shape.
    Malformed {
        detail: String,
    },
    /// Issuer not trusted, or its tag on the root does not check.
    BadIssuer,
    PublicInputMismatch,
    UnsatisfiedConstraint {
        index: usize,
    },
    OutputMismatch,
}

/// What the surveyor keeps from an accepted response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Accepted {
    pub pk: FieldElement,
    pub output: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Accept(Accepted),
    Reject(RejectReason),
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept(_))
    }
}

/// Surveyor side of one survey; the circuit is rebuilt from the request
/// once and reused for every response.
pub struct Verifier<'a> {
    request: ProofRequest,
    registry: IssuerRegistry,
    bundle: CircuitBundle,
    backends: HashMap<String, &'a dyn ProvingBackend>,
}

impl<'a> Verifier<'a> {
    pub fn new(request: &ProofRequest, registry: &IssuerRegistry) -> Result<Self, ProtocolError> {
        Ok(Verifier {
            request: request.clone(),
            registry: registry.clone(),
            bundle: CircuitBundle::build(&request.circuit_config())?,
            backends: HashMap::new(),
        })
    }

    pub fn with_backend(mut self, backend: &'a dyn ProvingBackend) -> Self {
        self.backends.insert(backend.name().to_string(), backend);
        self
    }

    pub fn bundle(&self) -> &CircuitBundle {
        &self.bundle
    }

    pub fn verify(&self, r: &SurveyResponse) -> Verdict {
        match self.check(r) {
            Ok(()) => Verdict::Accept(Accepted {
                pk: r.public_inputs.pk,
                output: r.output,
            }),
            Err(reason) => Verdict::Reject(reason),
        }
    }

    fn check(&self, r: &SurveyResponse) -> Result<(), RejectReason> {
        let req = &self.request;
        if r.schema_version != SCHEMA_VERSION {
            return Err(RejectReason::Malformed {
                detail: format!("schema version {}", r.schema_version),
            });
        }
        if r.survey_id != req.survey_id {
            return Err(RejectReason::PublicInputMismatch);
        }
        let p = &r.public_inputs;
        if !req.trusted_issuers.contains(&r.issuer_id) || !self.registry.check(&r.issuer_id, p.root, r.issuer_tag) {
            return Err(RejectReason::BadIssuer);
        }
        if req.challenge_policy == ChallengePolicy::Fixed && p.challenge != req.challenge {
            return Err(RejectReason::PublicInputMismatch);
        }
        if p.params_commitment != self.bundle.commitment() {
            return Err(RejectReason::PublicInputMismatch);
        }
        let claimed_out = FieldElement::from_i64(r.output);
        let expected = [p.challenge.value(), p.pk, p.root, p.params_commitment];
        match &r.evidence {
            Evidence::Transparent { witness } => {
                let sys = self.bundle.system();
                if witness.len() != sys.num_signals() {
                    return Err(RejectReason::Malformed {
                        detail: format!("witness has {} values, expected {}", witness.len(), sys.num_signals()),
                    });
                }
                let w = Witness(witness.clone());
                let values = self.bundle.public_values(&w);
                if values[..4] != expected {
                    return Err(RejectReason::PublicInputMismatch);
                }
                if values[4] != claimed_out {
                    return Err(RejectReason::OutputMismatch);
                }
                match sys.is_satisfied(&w) {
                    Ok(Satisfaction::Satisfied) => Ok(()),
                    Ok(Satisfaction::Unsatisfied { constraint }) => {
                        Err(RejectReason::UnsatisfiedConstraint { index: constraint })
                    }
                    Ok(Satisfaction::BadOneWire) => Err(RejectReason::Malformed {
                        detail: "constant wire is not one".into(),
                    }),
                    Err(e) => Err(RejectReason::Malformed { detail: e.to_string() }),
                }
            }
            Evidence::Backend { backend, proof } => {
                let b = self.backends.get(backend).ok_or_else(|| RejectReason::Malformed {
                    detail: format!("no backend `{backend}`"),
                })?;
                let proof = hex::decode(proof).map_err(|e| RejectReason::Malformed { detail: e.to_string() })?;
                let mut public = expected.to_vec();
                public.push(claimed_out);
                if b.verify(&self.bundle, &public, &proof) {
                    Ok(())
                } else {
                    Err(RejectReason::OutputMismatch)
                }
            }
        }
    }
}

/// One-shot [`Verifier::verify`].
pub fn verify_response(
    request: &ProofRequest,
    registry: &IssuerRegistry,
    response: &SurveyResponse,
) -> Result<Verdict, ProtocolError> {
    Ok(Verifier::new(request, registry)?.verify(response))
}
