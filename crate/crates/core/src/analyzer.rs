//! Occurrence counting, role attribution and pricing.

use std::collections::BTreeMap;
use std::ops::{Add, AddAssign};

use num_rational::Rational64;

use crate::cost_model::{classify_function, CostCategory, CostModel};
use crate::scalar::CostScalar;
use crate::syntax::{DeclKind, ResolvedSpec, Term};

/// Occurrences per cost category plus calls to functions with no price.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct OperationCounts {
    per_category: [u64; 6],
    unclassified_calls: BTreeMap<String, u64>,
}

impl OperationCounts {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn get(&self, category: CostCategory) -> u64 {
        self.per_category[category.index()]
    }

    pub fn set(&mut self, category: CostCategory, count: u64) {
        self.per_category[category.index()] = count;
    }

    pub fn add_to(&mut self, category: CostCategory, count: u64) {
        self.per_category[category.index()] += count;
    }

    pub fn with(mut self, category: CostCategory, count: u64) -> Self {
        self.set(category, count);
        self
    }

    pub fn unclassified_calls(&self) -> &BTreeMap<String, u64> {
        &self.unclassified_calls
    }

    pub fn add_unclassified(&mut self, function: &str, count: u64) {
        if count > 0 {
            *self
                .unclassified_calls
                .entry(function.to_string())
                .or_default() += count;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (CostCategory, u64)> + '_ {
        CostCategory::ALL.into_iter().map(|c| (c, self.get(c)))
    }

    pub fn is_zero(&self) -> bool {
        self.per_category.iter().all(|&n| n == 0) && self.unclassified_calls.is_empty()
    }
}

impl AddAssign<&OperationCounts> for OperationCounts {
    fn add_assign(&mut self, rhs: &OperationCounts) {
        for (lhs, r) in self.per_category.iter_mut().zip(rhs.per_category) {
            *lhs += r;
        }
        for (name, n) in &rhs.unclassified_calls {
            self.add_unclassified(name, *n);
        }
    }
}

impl Add for OperationCounts {
    type Output = OperationCounts;

    fn add(mut self, rhs: OperationCounts) -> OperationCounts {
        self += &rhs;
        self
    }
}

impl<'a> std::iter::Sum<&'a OperationCounts> for OperationCounts {
    fn sum<I: Iterator<Item = &'a OperationCounts>>(iter: I) -> Self {
        iter.fold(OperationCounts::zero(), |mut acc, c| {
            acc += c;
            acc
        })
    }
}

impl std::iter::Sum for OperationCounts {
    fn sum<I: Iterator<Item = OperationCounts>>(iter: I) -> Self {
        iter.fold(OperationCounts::zero(), Add::add)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoleAttribution {
    pub role: String,
    pub counts: OperationCounts,
}

/// Output of [`count_operations`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tally {
    pub counts: OperationCounts,
    /// Message endpoints in order of first appearance.
    pub per_role: Vec<RoleAttribution>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisResult {
    pub protocol_name: String,
    pub counts: OperationCounts,
    pub per_role: Vec<RoleAttribution>,
    pub computation_ms: f64,
    pub communication: u64,
    pub model_name: String,
    pub model_digest: String,
    pub warnings: Vec<String>,
}

struct Walker<'a> {
    spec: &'a ResolvedSpec,
    model: &'a CostModel,
    roles: Vec<RoleAttribution>,
}

impl Walker<'_> {
    fn role_mut(&mut self, name: &str) -> &mut OperationCounts {
        let i = match self.roles.iter().position(|r| r.role == name) {
            Some(i) => i,
            None => {
                self.roles.push(RoleAttribution {
                    role: name.to_string(),
                    counts: OperationCounts::zero(),
                });
                self.roles.len() - 1
            }
        };
        &mut self.roles[i].counts
    }

    fn charge(&mut self, role: &str, category: CostCategory) {
        self.role_mut(role).add_to(category, 1);
    }

    fn walk(&mut self, term: &Term, sender: &str, receiver: &str) {
        match term {
            Term::Atom(_) => {}
            Term::Tuple(items) => {
                for item in items {
                    self.walk(item, sender, receiver);
                }
            }
            Term::Enc { body, key } => {
                let (enc, dec) = match self.spec.kind_of(key.as_str()) {
                    Some(DeclKind::PublicKey) => (CostCategory::PubEnc, CostCategory::PubDec),
                    _ => (CostCategory::SymEnc, CostCategory::SymDec),
                };
                self.charge(sender, enc);
                self.charge(receiver, dec);
                self.walk(body, sender, receiver);
            }
            Term::Apply { function, args } => {
                match classify_function(self.model, function.as_str()) {
                    Some(category) => self.charge(sender, category),
                    None => self.role_mut(sender).add_unclassified(function.as_str(), 1),
                }
                for arg in args {
                    self.walk(arg, sender, receiver);
                }
            }
        }
    }
}

/// Counts every encryption and function-application occurrence in every message.
///
/// Encryption is charged to the sender and the matching decryption to the
/// receiver; classified applications are charged to the sender.
pub fn count_operations(spec: &ResolvedSpec, model: &CostModel) -> Tally {
    let mut walker = Walker {
        spec,
        model,
        roles: Vec::new(),
    };
    for msg in &spec.spec().messages {
        walker.role_mut(msg.sender.as_str());
        walker.role_mut(msg.receiver.as_str());
        walker.walk(&msg.payload, msg.sender.as_str(), msg.receiver.as_str());
    }
    let per_role = walker.roles;
    let counts: OperationCounts = per_role.iter().map(|r| &r.counts).sum();

    let warnings = counts
        .unclassified_calls()
        .iter()
        .map(|(name, n)| {
            format!("function `{name}` has no cost classification; {n} call(s) priced at 0 ms")
        })
        .collect();
    Tally {
        counts,
        per_role,
        warnings,
    }
}

pub fn communication_cost(spec: &ResolvedSpec) -> u64 {
    spec.spec().messages.len() as u64
}

/// Σ count × unit cost over the six categories, evaluated in `S`.
pub fn compute_cost<S: CostScalar>(counts: &OperationCounts, model: &CostModel) -> S {
    counts.iter().fold(S::zero(), |acc, (category, n)| {
        acc + S::from_count(n) * model.unit_cost_as::<S>(category)
    })
}

/// Counts, prices and collects warnings for one protocol.
///
/// The total is summed exactly and rounded to `f64` once, so it is the
/// nearest double to the decimal result.
pub fn analyze(spec: &ResolvedSpec, model: &CostModel) -> AnalysisResult {
    let tally = count_operations(spec, model);
    let exact: Rational64 = compute_cost(&tally.counts, model);
    let warnings = spec
        .warnings()
        .iter()
        .map(ToString::to_string)
        .chain(tally.warnings)
        .collect();
    AnalysisResult {
        protocol_name: spec.name().to_string(),
        counts: tally.counts,
        per_role: tally.per_role,
        computation_ms: exact.to_f64(),
        communication: communication_cost(spec),
        model_name: model.name().to_string(),
        model_digest: model.digest(),
        warnings,
    }
}
