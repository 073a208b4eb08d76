//! Name resolution and lint checks.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::ast::{DeclKind, Ident, IdentRole, ProtocolSpec, Term};
use super::error::{SemanticError, SemanticErrors, Warning};

/// A specification whose identifiers are all declared with compatible kinds.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedSpec {
    spec: ProtocolSpec,
    kinds: BTreeMap<String, DeclKind>,
    warnings: Vec<Warning>,
}

impl ResolvedSpec {
    pub fn spec(&self) -> &ProtocolSpec {
        &self.spec
    }

    pub fn into_spec(self) -> ProtocolSpec {
        self.spec
    }

    pub fn kind_of(&self, name: &str) -> Option<DeclKind> {
        self.kinds.get(name).copied()
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }
}

/// Checks declarations and usage, then runs the knowledge lint.
pub fn resolve(spec: ProtocolSpec) -> Result<ResolvedSpec, SemanticErrors> {
    let mut errors = Vec::new();
    let mut kinds: BTreeMap<String, DeclKind> = BTreeMap::new();
    let mut first_seen: HashMap<&str, &Ident> = HashMap::new();

    for decl in &spec.declarations {
        if let Some(prev) = first_seen.get(decl.name.as_str()) {
            errors.push(SemanticError {
                span: decl.name.span,
                description: format!(
                    "duplicate declaration of `{}` (first declared at {})",
                    decl.name, prev.span
                ),
            });
            continue;
        }
        first_seen.insert(decl.name.as_str(), &decl.name);
        kinds.insert(decl.name.name.clone(), decl.kind);
    }

    let mut check = |id: &Ident, wanted: Option<&[DeclKind]>, what: &str| match (
        kinds.get(id.as_str()),
        wanted,
    ) {
        (None, _) => errors.push(SemanticError {
            span: id.span,
            description: format!("undeclared identifier `{id}`"),
        }),
        (Some(kind), Some(allowed)) if !allowed.contains(kind) => errors.push(SemanticError {
            span: id.span,
            description: format!("`{id}` is declared as {kind} but used as {what}"),
        }),
        _ => {}
    };

    const USER: &[DeclKind] = &[DeclKind::User];
    const KEYS: &[DeclKind] = &[DeclKind::SymmetricKey, DeclKind::PublicKey];
    const FUNCTION: &[DeclKind] = &[DeclKind::Function];

    for msg in &spec.messages {
        check(&msg.sender, Some(USER), "a message sender");
        check(&msg.receiver, Some(USER), "a message receiver");
        msg.payload.for_each_ident(&mut |id, role| match role {
            IdentRole::Atom => check(id, None, "a term"),
            IdentRole::Key => check(id, Some(KEYS), "an encryption key"),
            IdentRole::Function => check(id, Some(FUNCTION), "a function"),
        });
    }
    for entry in &spec.knowledge {
        check(&entry.role, Some(USER), "a knowledge role");
        for item in &entry.items {
            check(item, None, "a knowledge item");
        }
    }
    for group in &spec.session_instances {
        for binding in &group.bindings {
            check(&binding.role, None, "a session binding");
        }
    }
    for msg in &spec.messages {
        if msg.sender == msg.receiver {
            errors.push(SemanticError {
                span: msg.receiver.span,
                description: format!(
                    "message {} is sent by `{}` to itself",
                    msg.index, msg.sender
                ),
            });
        }
    }

    if !errors.is_empty() {
        errors.sort_by_key(|e| e.span);
        return Err(SemanticErrors(errors));
    }

    let warnings = lint(&spec, &kinds);
    Ok(ResolvedSpec {
        spec,
        kinds,
        warnings,
    })
}

fn lint(spec: &ProtocolSpec, kinds: &BTreeMap<String, DeclKind>) -> Vec<Warning> {
    let mut warnings = Vec::new();

    let mut seen_roles = BTreeSet::new();
    for msg in &spec.messages {
        for role in [&msg.sender, &msg.receiver] {
            if seen_roles.insert(role.as_str()) && spec.knowledge_of(role.as_str()).is_none() {
                warnings.push(Warning {
                    span: Some(role.span),
                    message: format!("role `{role}` has no knowledge entry"),
                });
            }
        }
    }

    for goal in &spec.goals {
        let scope = goal.scope.iter().flatten();
        for id in goal.args.iter().chain(scope) {
            if !kinds.contains_key(id.as_str()) && !GOAL_CONNECTIVES.contains(&id.as_str()) {
                warnings.push(Warning {
                    span: Some(id.span),
                    message: format!("goal mentions undeclared identifier `{id}`"),
                });
            }
        }
    }

    warnings.extend(key_availability(spec));
    warnings
}

/// Words of the `A authenticates B on X` goal form that are not identifiers.
const GOAL_CONNECTIVES: [&str; 4] = ["authenticates", "weakly", "strongly", "on"];

/// Replays the message sequence, letting each receiver learn the atoms it can
/// open, and warns for every encryption whose key the receiver does not hold
/// at the moment it arrives.
fn key_availability(spec: &ProtocolSpec) -> Vec<Warning> {
    let mut known: HashMap<&str, BTreeSet<&str>> = HashMap::new();
    for entry in &spec.knowledge {
        known
            .entry(entry.role.as_str())
            .or_default()
            .extend(entry.items.iter().map(Ident::as_str));
    }

    let mut sealed: HashMap<&str, Vec<(&Term, &str)>> = HashMap::new();
    let mut warnings = Vec::new();
    for msg in &spec.messages {
        let receiver = msg.receiver.as_str();
        let role_known = known.entry(receiver).or_default();
        let pending = sealed.entry(receiver).or_default();
        absorb(&msg.payload, role_known, pending, &mut |key: &Ident| {
            warnings.push(Warning {
                span: Some(key.span),
                message: format!(
                    "receiver lacks key `{key}`: `{receiver}` cannot open an encryption in message {}",
                    msg.index
                ),
            })
        });
        loop {
            let ready = pending.iter().position(|(_, key)| role_known.contains(key));
            let Some(i) = ready else { break };
            let (body, _) = pending.swap_remove(i);
            absorb(body, role_known, pending, &mut |_| {});
        }
    }
    warnings
}

fn absorb<'a>(
    term: &'a Term,
    known: &mut BTreeSet<&'a str>,
    pending: &mut Vec<(&'a Term, &'a str)>,
    on_sealed: &mut impl FnMut(&'a Ident),
) {
    match term {
        Term::Atom(id) => {
            known.insert(id.as_str());
        }
        Term::Tuple(items) => {
            for item in items {
                absorb(item, known, pending, on_sealed);
            }
        }
        Term::Enc { body, key } => {
            if known.contains(key.as_str()) {
                absorb(body, known, pending, on_sealed);
            } else {
                on_sealed(key);
                pending.push((body, key.as_str()));
            }
        }
        Term::Apply { .. } => {}
    }
}
