//! Rank-1 constraint systems.
//!
//! A [`ConstraintSystem`] is a list of constraints `<a,w> * <b,w> = <c,w>`
//! over a witness vector `w` whose slot 0 is the constant one. Every signal
//! is allocated together with a [`Hint`] that computes its value from
//! earlier signals, so witness generation is a single in-order pass and
//! constraint emission never branches on witness values.

pub mod gadgets;

use std::collections::{BTreeMap, HashMap};
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::field::FieldElement;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CsError {
    #[error("signal {0} has not been allocated")]
    UnknownSignal(usize),
    #[error("witness has {got} entries, system has {expected} signals")]
    LengthMismatch { expected: usize, got: usize },
    #[error("no value supplied for input `{0}`")]
    MissingInput(String),
    #[error("input `{0}` declared twice")]
    DuplicateInput(String),
    #[error("hint for signal {signal} failed: {reason}")]
    HintFailed { signal: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Visibility {
    Public,
    Private,
}

/// Handle to one slot of the witness vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignalId {
    index: usize,
    visibility: Visibility,
}

impl SignalId {
    /// The constant-one wire.
    pub const ONE: SignalId = SignalId {
        index: 0,
        visibility: Visibility::Public,
    };

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn visibility(&self) -> Visibility {
        self.visibility
    }
}

/// Sparse `Σ coeff · signal`, sorted by signal index with no duplicates
/// and no zero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinearCombination {
    terms: Vec<(usize, FieldElement)>,
}

impl LinearCombination {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: FieldElement) -> Self {
        Self::from_terms([(SignalId::ONE, c)])
    }

    pub fn one() -> Self {
        Self::constant(FieldElement::ONE)
    }

    pub fn from_u64(c: u64) -> Self {
        Self::constant(FieldElement::from_u64(c))
    }

    pub fn from_terms<I: IntoIterator<Item = (SignalId, FieldElement)>>(terms: I) -> Self {
        let mut raw: Vec<(usize, FieldElement)> = terms.into_iter().map(|(s, c)| (s.index, c)).collect();
        raw.sort_by_key(|(i, _)| *i);
        let mut merged: Vec<(usize, FieldElement)> = Vec::with_capacity(raw.len());
        for (i, c) in raw {
            match merged.last_mut() {
                Some((j, acc)) if *j == i => *acc += c,
                _ => merged.push((i, c)),
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        LinearCombination { terms: merged }
    }

    pub fn terms(&self) -> &[(usize, FieldElement)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn max_index(&self) -> Option<usize> {
        self.terms.last().map(|(i, _)| *i)
    }

    pub fn evaluate(&self, w: &[FieldElement]) -> FieldElement {
        self.terms.iter().map(|(i, c)| *c * w[*i]).sum()
    }

    fn combine(&self, other: &Self, sign: FieldElement) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut x, mut y) = (0, 0);
        while x < self.terms.len() || y < other.terms.len() {
            let left = self.terms.get(x);
            let right = other.terms.get(y).map(|(i, c)| (*i, *c * sign));
            match (left, right) {
                (Some(&(i, a)), Some((j, b))) if i == j => {
                    let s = a + b;
                    if !s.is_zero() {
                        out.push((i, s));
                    }
                    x += 1;
                    y += 1;
                }
                (Some(&(i, a)), Some((j, _))) if i < j => {
                    out.push((i, a));
                    x += 1;
                }
                (Some(&(i, a)), None) => {
                    out.push((i, a));
                    x += 1;
                }
                (_, Some((j, b))) => {
                    out.push((j, b));
                    y += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        LinearCombination { terms: out }
    }

    pub fn scale(&self, k: FieldElement) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        LinearCombination {
            terms: self.terms.iter().map(|(i, c)| (*i, *c * k)).collect(),
        }
    }
}

impl From<SignalId> for LinearCombination {
    fn from(s: SignalId) -> Self {
        LinearCombination::from_terms([(s, FieldElement::ONE)])
    }
}

impl From<&SignalId> for LinearCombination {
    fn from(s: &SignalId) -> Self {
        (*s).into()
    }
}

impl From<FieldElement> for LinearCombination {
    fn from(c: FieldElement) -> Self {
        LinearCombination::constant(c)
    }
}

impl From<&LinearCombination> for LinearCombination {
    fn from(lc: &LinearCombination) -> Self {
        lc.clone()
    }
}

impl<T: Into<LinearCombination>> Add<T> for LinearCombination {
    type Output = LinearCombination;
    fn add(self, rhs: T) -> LinearCombination {
        self.combine(&rhs.into(), FieldElement::ONE)
    }
}

impl<T: Into<LinearCombination>> Sub<T> for LinearCombination {
    type Output = LinearCombination;
    fn sub(self, rhs: T) -> LinearCombination {
        self.combine(&rhs.into(), -FieldElement::ONE)
    }
}

impl<T: Into<LinearCombination>> Add<T> for SignalId {
    type Output = LinearCombination;
    fn add(self, rhs: T) -> LinearCombination {
        LinearCombination::from(self) + rhs
    }
}

impl<T: Into<LinearCombination>> Sub<T> for SignalId {
    type Output = LinearCombination;
    fn sub(self, rhs: T) -> LinearCombination {
        LinearCombination::from(self) - rhs
    }
}

impl Mul<FieldElement> for LinearCombination {
    type Output = LinearCombination;
    fn mul(self, k: FieldElement) -> LinearCombination {
        self.scale(k)
    }
}

impl Mul<FieldElement> for SignalId {
    type Output = LinearCombination;
    fn mul(self, k: FieldElement) -> LinearCombination {
        LinearCombination::from(self).scale(k)
    }
}

impl Neg for LinearCombination {
    type Output = LinearCombination;
    fn neg(self) -> LinearCombination {
        self.scale(-FieldElement::ONE)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub a: LinearCombination,
    pub b: LinearCombination,
    pub c: LinearCombination,
}

impl Constraint {
    pub fn is_satisfied_by(&self, w: &[FieldElement]) -> bool {
        self.a.evaluate(w) * self.b.evaluate(w) == self.c.evaluate(w)
    }
}

/// How the witness generator computes a signal from earlier ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Hint {
    /// Index 0 only.
    One,
    /// Value supplied by the caller under the named input slot.
    Input(String),
    Linear(LinearCombination),
    Product(LinearCombination, LinearCombination),
    /// `1/x`, or 0 when `x = 0`.
    InverseOrZero(LinearCombination),
    /// 1 when `x = 0`, else 0.
    IsZero(LinearCombination),
    /// Bit `index` of the canonical integer value of `of`.
    Bit {
        of: LinearCombination,
        index: usize,
    },
    /// `of` read as an integer in `[0, P)`, divided by `modulus`.
    Quotient {
        of: LinearCombination,
        modulus: u64,
    },
    Remainder {
        of: LinearCombination,
        modulus: u64,
    },
}

impl Hint {
    fn max_index(&self) -> Option<usize> {
        match self {
            Hint::One | Hint::Input(_) => None,
            Hint::Linear(lc)
            | Hint::InverseOrZero(lc)
            | Hint::IsZero(lc)
            | Hint::Bit { of: lc, .. }
            | Hint::Quotient { of: lc, .. }
            | Hint::Remainder { of: lc, .. } => lc.max_index(),
            Hint::Product(a, b) => a.max_index().max(b.max_index()),
        }
    }

    fn evaluate(&self, w: &[FieldElement], inputs: &HashMap<String, FieldElement>) -> Result<FieldElement, String> {
        Ok(match self {
            Hint::One => FieldElement::ONE,
            Hint::Input(name) => *inputs.get(name).ok_or_else(|| format!("missing `{name}`"))?,
            Hint::Linear(lc) => lc.evaluate(w),
            Hint::Product(a, b) => a.evaluate(w) * b.evaluate(w),
            Hint::InverseOrZero(lc) => lc.evaluate(w).inverse().unwrap_or(FieldElement::ZERO),
            Hint::IsZero(lc) => lc.evaluate(w).is_zero().into(),
            Hint::Bit { of, index } => of.evaluate(w).bit(*index).into(),
            Hint::Quotient { of, modulus } => {
                let v = of.evaluate(w).to_biguint();
                FieldElement::from_biguint(&(v / BigUint::from(*modulus)))
            }
            Hint::Remainder { of, modulus } => {
                let v = of.evaluate(w).to_biguint();
                FieldElement::from_biguint(&(v % BigUint::from(*modulus)))
            }
        })
    }
}

/// Full assignment of every signal; slot 0 holds the constant one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness(pub Vec<FieldElement>);

impl Witness {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, s: SignalId) -> FieldElement {
        self.0[s.index]
    }

    pub fn values(&self) -> &[FieldElement] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Satisfaction {
    Satisfied,
    /// The first constraint that does not hold.
    Unsatisfied {
        constraint: usize,
    },
    /// Slot 0 of the witness is not one.
    BadOneWire,
}

impl Satisfaction {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, Satisfaction::Satisfied)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConstraintSystem {
    constraints: Vec<Constraint>,
    visibility: Vec<Visibility>,
    hints: Vec<Hint>,
    inputs: Vec<(String, SignalId)>,
    named: BTreeMap<String, SignalId>,
}

impl ConstraintSystem {
    pub fn new() -> Self {
        ConstraintSystem {
            constraints: Vec::new(),
            visibility: vec![Visibility::Public],
            hints: vec![Hint::One],
            inputs: Vec::new(),
            named: BTreeMap::new(),
        }
    }

    pub fn num_signals(&self) -> usize {
        self.visibility.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Public signals in allocation order, excluding the constant.
    pub fn public_signals(&self) -> Vec<SignalId> {
        self.visibility
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, v)| **v == Visibility::Public)
            .map(|(index, v)| SignalId { index, visibility: *v })
            .collect()
    }

    pub fn inputs(&self) -> &[(String, SignalId)] {
        &self.inputs
    }

    fn check_lc(&self, lc: &LinearCombination) -> Result<(), CsError> {
        match lc.max_index() {
            Some(i) if i >= self.num_signals() => Err(CsError::UnknownSignal(i)),
            _ => Ok(()),
        }
    }

    /// Allocates a signal computed by `hint` from already-allocated signals.
    pub fn alloc_signal(&mut self, visibility: Visibility, hint: Hint) -> Result<SignalId, CsError> {
        if let Some(i) = hint.max_index() {
            if i >= self.num_signals() {
                return Err(CsError::UnknownSignal(i));
            }
        }
        let index = self.visibility.len();
        self.visibility.push(visibility);
        self.hints.push(hint);
        Ok(SignalId { index, visibility })
    }

    /// Allocates a signal whose value the caller supplies at witness time.
    pub fn alloc_input(&mut self, name: &str, visibility: Visibility) -> Result<SignalId, CsError> {
        if self.inputs.iter().any(|(n, _)| n == name) {
            return Err(CsError::DuplicateInput(name.to_string()));
        }
        let id = self.alloc_signal(visibility, Hint::Input(name.to_string()))?;
        self.inputs.push((name.to_string(), id));
        Ok(id)
    }

    pub(crate) fn alloc(&mut self, hint: Hint) -> SignalId {
        self.alloc_signal(Visibility::Private, hint)
            .expect("gadget hint references an unallocated signal")
    }

    /// Appends `a * b = c`.
    pub fn enforce(
        &mut self,
        a: impl Into<LinearCombination>,
        b: impl Into<LinearCombination>,
        c: impl Into<LinearCombination>,
    ) -> Result<(), CsError> {
        let (a, b, c) = (a.into(), b.into(), c.into());
        self.check_lc(&a)?;
        self.check_lc(&b)?;
        self.check_lc(&c)?;
        self.constraints.push(Constraint { a, b, c });
        Ok(())
    }

    pub(crate) fn constrain(
        &mut self,
        a: impl Into<LinearCombination>,
        b: impl Into<LinearCombination>,
        c: impl Into<LinearCombination>,
    ) {
        self.enforce(a, b, c)
            .expect("gadget constraint references an unallocated signal")
    }

    /// Attaches a lookup name to a signal (outputs, public inputs).
    pub fn name_signal(&mut self, name: &str, id: SignalId) {
        self.named.insert(name.to_string(), id);
    }

    pub fn signal(&self, name: &str) -> Option<SignalId> {
        self.named.get(name).copied()
    }

    pub fn is_satisfied(&self, w: &Witness) -> Result<Satisfaction, CsError> {
        if w.len() != self.num_signals() {
            return Err(CsError::LengthMismatch {
                expected: self.num_signals(),
                got: w.len(),
            });
        }
        if w.0[0] != FieldElement::ONE {
            return Ok(Satisfaction::BadOneWire);
        }
        let values = w.values();
        Ok(
            match self
                .constraints
                .par_iter()
                .position_first(|c| !c.is_satisfied_by(values))
            {
                None => Satisfaction::Satisfied,
                Some(constraint) => Satisfaction::Unsatisfied { constraint },
            },
        )
    }

    pub fn generate_witness(&self, inputs: &HashMap<String, FieldElement>) -> Result<Witness, CsError> {
        self.generate_witness_with_overrides(inputs, &HashMap::new())
    }

    /// Runs the hints in order, but forces the listed signals to the given
    /// values; later hints see the forced values. Models a prover that
    /// deviates at chosen points and computes everything else honestly.
    pub fn generate_witness_with_overrides(
        &self,
        inputs: &HashMap<String, FieldElement>,
        overrides: &HashMap<usize, FieldElement>,
    ) -> Result<Witness, CsError> {
        for (name, _) in &self.inputs {
            if !inputs.contains_key(name) {
                return Err(CsError::MissingInput(name.clone()));
            }
        }
        let mut w = Vec::with_capacity(self.num_signals());
        for (signal, hint) in self.hints.iter().enumerate() {
            let v = match overrides.get(&signal) {
                Some(v) => *v,
                None => hint
                    .evaluate(&w, inputs)
                    .map_err(|reason| CsError::HintFailed { signal, reason })?,
            };
            w.push(v);
        }
        Ok(Witness(w))
    }

    /// JSON-friendly export of the constraint matrix.
    pub fn export(&self) -> SystemExport {
        let lc = |lc: &LinearCombination| lc.terms.iter().map(|(i, c)| (*i, c.to_hex())).collect::<Vec<_>>();
        SystemExport {
            num_signals: self.num_signals(),
            public_signals: self.public_signals().iter().map(|s| s.index).collect(),
            constraints: self
                .constraints
                .iter()
                .map(|c| [lc(&c.a), lc(&c.b), lc(&c.c)])
                .collect(),
        }
    }
}

type ExportedLc = Vec<(usize, String)>;

/// Constraints as `[a, b, c]` triples of `(signal index, hex coefficient)` lists.
#[derive(Debug, Clone, Serialize)]
pub struct SystemExport {
    pub num_signals: usize,
    pub public_signals: Vec<usize>,
    pub constraints: Vec<[ExportedLc; 3]>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_inputs() -> HashMap<String, FieldElement> {
        HashMap::new()
    }

    #[test]
    fn first_allocation_is_index_one() {
        let mut cs = ConstraintSystem::new();
        let a = cs
            .alloc_signal(Visibility::Private, Hint::Linear(LinearCombination::one()))
            .unwrap();
        let b = cs
            .alloc_signal(Visibility::Public, Hint::Linear(LinearCombination::one()))
            .unwrap();
        assert_eq!(a.index(), 1);
        assert_ne!(a.index(), b.index());
        assert_eq!(cs.public_signals(), vec![b]);
        assert_eq!(cs.num_signals(), 3);
    }

    #[test]
    fn enforce_product() {
        let mut cs = ConstraintSystem::new();
        let x = cs.alloc_input("x", Visibility::Private).unwrap();
        let y = cs.alloc_input("y", Visibility::Private).unwrap();
        let z = cs.alloc_input("z", Visibility::Public).unwrap();
        cs.enforce(x, y, z).unwrap();
        let mut inputs = HashMap::new();
        inputs.insert("x".to_string(), FieldElement::from_u64(2));
        inputs.insert("y".to_string(), FieldElement::from_u64(3));
        inputs.insert("z".to_string(), FieldElement::from_u64(6));
        let w = cs.generate_witness(&inputs).unwrap();
        assert_eq!(cs.is_satisfied(&w).unwrap(), Satisfaction::Satisfied);
        inputs.insert("z".to_string(), FieldElement::from_u64(7));
        let w = cs.generate_witness(&inputs).unwrap();
        assert_eq!(
            cs.is_satisfied(&w).unwrap(),
            Satisfaction::Unsatisfied { constraint: 0 }
        );
    }

    #[test]
    fn enforce_unknown_signal() {
        let mut cs = ConstraintSystem::new();
        let mut other = ConstraintSystem::new();
        other.alloc(Hint::Linear(LinearCombination::one()));
        let foreign = other.alloc(Hint::Linear(LinearCombination::one()));
        assert_eq!(
            cs.enforce(foreign, LinearCombination::one(), foreign),
            Err(CsError::UnknownSignal(2))
        );
    }

    #[test]
    fn empty_system_is_satisfied() {
        let cs = ConstraintSystem::new();
        let w = cs.generate_witness(&no_inputs()).unwrap();
        assert!(cs.is_satisfied(&w).unwrap().is_satisfied());
    }

    #[test]
    fn length_mismatch_and_one_wire() {
        let cs = ConstraintSystem::new();
        assert_eq!(
            cs.is_satisfied(&Witness(vec![])),
            Err(CsError::LengthMismatch { expected: 1, got: 0 })
        );
        assert_eq!(
            cs.is_satisfied(&Witness(vec![FieldElement::ZERO])).unwrap(),
            Satisfaction::BadOneWire
        );
    }

    #[test]
    fn missing_and_duplicate_inputs() {
        let mut cs = ConstraintSystem::new();
        cs.alloc_input("v", Visibility::Private).unwrap();
        assert_eq!(
            cs.alloc_input("v", Visibility::Private),
            Err(CsError::DuplicateInput("v".into()))
        );
        assert_eq!(
            cs.generate_witness(&no_inputs()),
            Err(CsError::MissingInput("v".into()))
        );
    }

    #[test]
    fn lc_merges_duplicates_and_drops_zeros() {
        let mut cs = ConstraintSystem::new();
        let x = cs.alloc(Hint::Linear(LinearCombination::one()));
        let lc = x + x - LinearCombination::from(x) * FieldElement::from_u64(2);
        assert!(lc.is_zero());
        let lc = LinearCombination::from_terms([
            (x, FieldElement::from_u64(3)),
            (SignalId::ONE, FieldElement::ONE),
            (x, FieldElement::from_u64(4)),
        ]);
        assert_eq!(lc.terms(), &[(0, FieldElement::ONE), (1, FieldElement::from_u64(7))]);
    }
}
