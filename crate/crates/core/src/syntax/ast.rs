use std::fmt;

use super::SourceSpan;

/// An identifier occurrence. Equality and hashing look at the name only.
#[derive(Debug, Clone, Eq)]
pub struct Ident {
    pub name: String,
    pub span: SourceSpan,
}

impl Ident {
    pub fn new(name: impl Into<String>, span: SourceSpan) -> Self {
        Ident {
            name: name.into(),
            span,
        }
    }

    /// An identifier with no source location, for programmatically built specs.
    pub fn synthetic(name: impl Into<String>) -> Self {
        Ident::new(name, SourceSpan::default())
    }

    pub fn as_str(&self) -> &str {
        &self.name
    }
}

impl PartialEq for Ident {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

impl std::hash::Hash for Ident {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.name.hash(state);
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DeclKind {
    User,
    Number,
    Text,
    SymmetricKey,
    PublicKey,
    Function,
}

impl DeclKind {
    pub const ALL: [DeclKind; 6] = [
        DeclKind::User,
        DeclKind::Number,
        DeclKind::Text,
        DeclKind::SymmetricKey,
        DeclKind::PublicKey,
        DeclKind::Function,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            DeclKind::User => "user",
            DeclKind::Number => "number",
            DeclKind::Text => "text",
            DeclKind::SymmetricKey => "symmetric_key",
            DeclKind::PublicKey => "public_key",
            DeclKind::Function => "function",
        }
    }

    pub fn from_keyword(word: &str) -> Option<DeclKind> {
        DeclKind::ALL.into_iter().find(|k| k.keyword() == word)
    }

    pub fn is_key(self) -> bool {
        matches!(self, DeclKind::SymmetricKey | DeclKind::PublicKey)
    }
}

impl fmt::Display for DeclKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Declaration {
    pub name: Ident,
    pub kind: DeclKind,
}

/// A message payload.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Atom(Ident),
    /// Two or more components; never directly contains another `Tuple`.
    Tuple(Vec<Term>),
    Enc {
        body: Box<Term>,
        key: Ident,
    },
    Apply {
        function: Ident,
        args: Vec<Term>,
    },
}

impl Term {
    pub fn atom(name: &str) -> Term {
        Term::Atom(Ident::synthetic(name))
    }

    pub fn enc(body: Term, key: &str) -> Term {
        Term::Enc {
            body: Box::new(body),
            key: Ident::synthetic(key),
        }
    }

    /// Tuple arguments are spliced in, since `f(a, b)` cannot express `f((a, b))`.
    pub fn apply(function: &str, args: Vec<Term>) -> Term {
        let args = match Term::tuple(args) {
            Term::Tuple(items) => items,
            single => vec![single],
        };
        Term::Apply {
            function: Ident::synthetic(function),
            args,
        }
    }

    /// Builds a tuple, splicing in the components of nested tuples.
    /// A single component is returned unwrapped.
    pub fn tuple(items: Vec<Term>) -> Term {
        let mut flat = Vec::with_capacity(items.len());
        for item in items {
            match item {
                Term::Tuple(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.len() == 1 {
            flat.pop().expect("length checked")
        } else {
            Term::Tuple(flat)
        }
    }

    /// Nesting depth; an atom has depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Term::Atom(_) => 1,
            Term::Tuple(items) | Term::Apply { args: items, .. } => {
                1 + items.iter().map(Term::depth).max().unwrap_or(0)
            }
            Term::Enc { body, .. } => 1 + body.depth(),
        }
    }

    /// Visits every identifier in the term, including keys and function names.
    pub fn for_each_ident<'a>(&'a self, f: &mut impl FnMut(&'a Ident, IdentRole)) {
        match self {
            Term::Atom(id) => f(id, IdentRole::Atom),
            Term::Tuple(items) => items.iter().for_each(|t| t.for_each_ident(f)),
            Term::Enc { body, key } => {
                body.for_each_ident(f);
                f(key, IdentRole::Key);
            }
            Term::Apply { function, args } => {
                f(function, IdentRole::Function);
                args.iter().for_each(|t| t.for_each_ident(f));
            }
        }
    }
}

/// Position an identifier occupies inside a [`Term`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdentRole {
    Atom,
    Key,
    Function,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub index: u32,
    pub sender: Ident,
    pub receiver: Ident,
    pub payload: Term,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeEntry {
    pub role: Ident,
    pub items: Vec<Ident>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionBinding {
    pub role: Ident,
    pub instance: Ident,
}

/// One bracketed `[A: alice, B: bob]` group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionInstance {
    pub bindings: Vec<SessionBinding>,
    pub span: SourceSpan,
}

/// A goal statement such as `secrecy_of Kab [];`. Kept for round-tripping only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Goal {
    pub kind: Ident,
    pub args: Vec<Ident>,
    pub scope: Option<Vec<Ident>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolSpec {
    pub name: String,
    pub declarations: Vec<Declaration>,
    pub messages: Vec<Message>,
    pub knowledge: Vec<KnowledgeEntry>,
    pub session_instances: Vec<SessionInstance>,
    pub goals: Vec<Goal>,
}

impl ProtocolSpec {
    pub fn declaration(&self, name: &str) -> Option<&Declaration> {
        self.declarations.iter().find(|d| d.name.name == name)
    }

    pub fn knowledge_of(&self, role: &str) -> Option<&KnowledgeEntry> {
        self.knowledge.iter().find(|k| k.role.name == role)
    }

    /// Compares two specs ignoring source locations.
    pub fn structurally_eq(&self, other: &ProtocolSpec) -> bool {
        // Ident equality is name-only; the remaining spans live on messages
        // and session groups.
        let strip = |spec: &ProtocolSpec| {
            let mut s = spec.clone();
            s.messages
                .iter_mut()
                .for_each(|m| m.span = SourceSpan::default());
            s.session_instances
                .iter_mut()
                .for_each(|g| g.span = SourceSpan::default());
            s
        };
        strip(self) == strip(other)
    }
}
