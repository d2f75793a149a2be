//! Verifiable local differential privacy for credential-backed polls.
//!
//! A participant holds an issuer-signed credential and answers a survey
//! with a noisy value. The noise is driven by randomness derived from the
//! survey challenge and the participant's bound key, and a constraint
//! system ties the answer to the credential, the randomness, and the
//! published mechanism parameters.

pub mod circuits;
pub mod credential;
pub mod exact;
pub mod field;
pub mod mechanisms;
pub mod oracle;
pub mod protocol;
pub mod r1cs;
pub mod stats;

pub use circuits::{CircuitBundle, CircuitConfig, CircuitError, Mechanism, PublicInputs, SecretInputs};
pub use credential::{issue, Attestation, CredentialError, IssuerKey, IssuerRegistry};
pub use exact::Enclosure;
pub use field::{FieldElement, FieldError};
pub use mechanisms::{
    delta_ledger, exponential_noise, randomized_response, BiasTable, DeltaLedger, Epsilon, MechanismError, NoiseParams,
    TruthfulValue, ValueKind,
};
pub use oracle::{verifiable_unif_rand, BindingKeyPair, BitArray, Challenge};
pub use protocol::{
    aggregate, create_request, respond, verify_response, AggregateResult, ChallengePolicy, ProofRequest, ProtocolError,
    SurveyConfig, SurveyResponse, Verdict, Verifier,
};
pub use stats::{chi_square_fit, dp_ratio_check, exact_distribution, ExactDistribution, StatsError};
