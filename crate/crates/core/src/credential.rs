//! Issuer-signed Merkle attestations over salted attribute leaves.
//!
//! Slot 0 of every tree holds the holder's binding key; attributes fill
//! slots `1..2^depth` in order. The issuer "signs" the root with a keyed
//! hash that a surveyor checks against a registry of trusted issuers.

use std::collections::{HashMap, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::field::FieldElement;
use crate::oracle::{domain_tag, hash};

pub const DEFAULT_DEPTH: usize = 4;
pub const MAX_DEPTH: usize = 20;
/// Attribute name reserved for the binding-key leaf.
pub const BINDING_ATTRIBUTE: &str = "binding_pk";
const ATTRIBUTE_TAG: &str = "attribute";
const ISSUER_TAG: &str = "issuer";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CredentialError {
    #[error("{count} attributes do not fit in a depth-{depth} tree")]
    CapacityExceeded { count: usize, depth: usize },
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("attribute `{0}` appears twice")]
    DuplicateAttribute(String),
    #[error("attribute name `{0}` is reserved")]
    ReservedName(String),
    #[error("salts must be distinct")]
    DuplicateSalt,
    #[error("tree depth must be in 1..={MAX_DEPTH}")]
    InvalidDepth,
    #[error("expected {expected} salts, got {got}")]
    SaltCount { expected: usize, got: usize },
}

/// Field encoding of an attribute name: `hash("attribute", bytes…)` with
/// the name split into 31-byte chunks.
pub fn attribute_code(name: &str) -> FieldElement {
    let mut input = vec![domain_tag(ATTRIBUTE_TAG)];
    input.extend(name.as_bytes().chunks(31).map(FieldElement::from_be_bytes_mod_order));
    hash(&input)
}

/// What a leaf commits to: `hash(code, value, salt)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafPreimage {
    pub code: FieldElement,
    pub value: FieldElement,
    pub salt: FieldElement,
}

impl LeafPreimage {
    pub fn leaf(&self) -> FieldElement {
        hash(&[self.code, self.value, self.salt])
    }
}

/// Interior node hash.
pub fn node_hash(left: FieldElement, right: FieldElement) -> FieldElement {
    hash(&[left, right])
}

/// Siblings bottom-up; `directions[i]` is set when the running node is the
/// right child at level `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InclusionPath {
    pub index: usize,
    pub siblings: Vec<FieldElement>,
    pub directions: Vec<bool>,
}

impl InclusionPath {
    pub fn depth(&self) -> usize {
        self.siblings.len()
    }

    pub fn root_from(&self, leaf: FieldElement) -> FieldElement {
        self.siblings
            .iter()
            .zip(&self.directions)
            .fold(leaf, |cur, (sib, right)| {
                if *right {
                    node_hash(*sib, cur)
                } else {
                    node_hash(cur, *sib)
                }
            })
    }
}

pub fn verify_leaf(root: FieldElement, leaf: &LeafPreimage, path: &InclusionPath) -> bool {
    path.siblings.len() == path.directions.len() && path.root_from(leaf.leaf()) == root
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub value: i64,
    pub salt: FieldElement,
}

impl Attribute {
    pub fn preimage(&self) -> LeafPreimage {
        LeafPreimage {
            code: attribute_code(&self.name),
            value: FieldElement::from_i64(self.value),
            salt: self.salt,
        }
    }
}

/// Issuer signing key. The tag is a keyed hash, so verifying it needs the
/// key too; the registry that holds it must be trusted accordingly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssuerKey {
    pub id: String,
    pub secret: FieldElement,
}

impl IssuerKey {
    pub fn generate<R: Rng + ?Sized>(id: &str, rng: &mut R) -> Self {
        let mut bytes = [0u8; 48];
        rng.fill(&mut bytes[..]);
        IssuerKey {
            id: id.to_string(),
            secret: FieldElement::from_be_bytes_mod_order(&bytes),
        }
    }

    pub fn tag(&self, root: FieldElement) -> FieldElement {
        hash(&[domain_tag(ISSUER_TAG), self.secret, root])
    }
}

/// Issuers a surveyor accepts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssuerRegistry {
    issuers: HashMap<String, FieldElement>,
}

impl IssuerRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn trust(&mut self, key: &IssuerKey) {
        self.issuers.insert(key.id.clone(), key.secret);
    }

    pub fn contains(&self, id: &str) -> bool {
        self.issuers.contains_key(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.issuers.keys().map(String::as_str)
    }

    pub fn check(&self, id: &str, root: FieldElement, tag: FieldElement) -> bool {
        self.issuers.get(id).is_some_and(|secret| {
            IssuerKey {
                id: id.to_string(),
                secret: *secret,
            }
            .tag(root)
                == tag
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attestation {
    pub issuer_id: String,
    pub depth: usize,
    pub binding_pk: FieldElement,
    pub binding_salt: FieldElement,
    pub attributes: Vec<Attribute>,
    pub root: FieldElement,
    pub issuer_tag: FieldElement,
}

/// Issues an attestation with fresh random salts.
pub fn issue<R: Rng + ?Sized>(
    attributes: &[(String, i64)],
    binding_pk: FieldElement,
    issuer: &IssuerKey,
    depth: usize,
    rng: &mut R,
) -> Result<Attestation, CredentialError> {
    let salts: Vec<FieldElement> = (0..=attributes.len())
        .map(|_| {
            let mut bytes = [0u8; 48];
            rng.fill(&mut bytes[..]);
            FieldElement::from_be_bytes_mod_order(&bytes)
        })
        .collect();
    issue_with_salts(attributes, binding_pk, issuer, depth, &salts)
}

/// Deterministic issuance: `salts[0]` salts the binding leaf, `salts[i]`
/// attribute `i − 1`.
pub fn issue_with_salts(
    attributes: &[(String, i64)],
    binding_pk: FieldElement,
    issuer: &IssuerKey,
    depth: usize,
    salts: &[FieldElement],
) -> Result<Attestation, CredentialError> {
    if depth == 0 || depth > MAX_DEPTH {
        return Err(CredentialError::InvalidDepth);
    }
    if attributes.len() >= 1 << depth {
        return Err(CredentialError::CapacityExceeded {
            count: attributes.len(),
            depth,
        });
    }
    if salts.len() != attributes.len() + 1 {
        return Err(CredentialError::SaltCount {
            expected: attributes.len() + 1,
            got: salts.len(),
        });
    }
    if salts.iter().collect::<HashSet<_>>().len() != salts.len() {
        return Err(CredentialError::DuplicateSalt);
    }
    let mut names = HashSet::new();
    for (name, _) in attributes {
        if name == BINDING_ATTRIBUTE {
            return Err(CredentialError::ReservedName(name.clone()));
        }
        if !names.insert(name) {
            return Err(CredentialError::DuplicateAttribute(name.clone()));
        }
    }
    let attributes: Vec<Attribute> = attributes
        .iter()
        .zip(&salts[1..])
        .map(|((name, value), salt)| Attribute {
            name: name.clone(),
            value: *value,
            salt: *salt,
        })
        .collect();
    let mut att = Attestation {
        issuer_id: issuer.id.clone(),
        depth,
        binding_pk,
        binding_salt: salts[0],
        attributes,
        root: FieldElement::ZERO,
        issuer_tag: FieldElement::ZERO,
    };
    att.root = tree_levels(&att.leaves()).last().expect("at least one level")[0];
    att.issuer_tag = issuer.tag(att.root);
    Ok(att)
}

fn tree_levels(leaves: &[FieldElement]) -> Vec<Vec<FieldElement>> {
    let mut levels = vec![leaves.to_vec()];
    while levels.last().unwrap().len() > 1 {
        let next = levels
            .last()
            .unwrap()
            .chunks(2)
            .map(|p| node_hash(p[0], p[1]))
            .collect();
        levels.push(next);
    }
    levels
}

impl Attestation {
    pub fn binding_preimage(&self) -> LeafPreimage {
        LeafPreimage {
            code: attribute_code(BINDING_ATTRIBUTE),
            value: self.binding_pk,
            salt: self.binding_salt,
        }
    }

    /// All `2^depth` leaves; unused slots are zero.
    pub fn leaves(&self) -> Vec<FieldElement> {
        let mut leaves = vec![FieldElement::ZERO; 1 << self.depth];
        leaves[0] = self.binding_preimage().leaf();
        for (i, a) in self.attributes.iter().enumerate() {
            leaves[i + 1] = a.preimage().leaf();
        }
        leaves
    }

    pub fn attribute(&self, name: &str) -> Result<&Attribute, CredentialError> {
        self.attributes
            .iter()
            .find(|a| a.name == name)
            .ok_or_else(|| CredentialError::UnknownAttribute(name.to_string()))
    }

    pub fn prove_leaf(&self, name: &str) -> Result<InclusionPath, CredentialError> {
        let index = if name == BINDING_ATTRIBUTE {
            0
        } else {
            1 + self
                .attributes
                .iter()
                .position(|a| a.name == name)
                .ok_or_else(|| CredentialError::UnknownAttribute(name.to_string()))?
        };
        Ok(self.path_to(index))
    }

    pub fn prove_binding(&self) -> InclusionPath {
        self.path_to(0)
    }

    fn path_to(&self, index: usize) -> InclusionPath {
        let levels = tree_levels(&self.leaves());
        let mut siblings = Vec::with_capacity(self.depth);
        let mut directions = Vec::with_capacity(self.depth);
        let mut i = index;
        for level in &levels[..self.depth] {
            siblings.push(level[i ^ 1]);
            directions.push(i & 1 == 1);
            i >>= 1;
        }
        InclusionPath {
            index,
            siblings,
            directions,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("attestation serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}
