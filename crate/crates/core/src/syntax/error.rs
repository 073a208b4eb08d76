use thiserror::Error;

use super::SourceSpan;

/// Failure while turning source text into an unresolved [`ProtocolSpec`](super::ProtocolSpec).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{span}: unexpected character {found:?}")]
    Lex { span: SourceSpan, found: char },

    #[error("{span}: expected {expected}, found {found}")]
    Syntax {
        span: SourceSpan,
        expected: String,
        found: String,
    },

    #[error("missing required section `{name}`")]
    MissingSection { name: &'static str },
}

impl ParseError {
    pub fn span(&self) -> Option<SourceSpan> {
        match self {
            ParseError::Lex { span, .. } | ParseError::Syntax { span, .. } => Some(*span),
            ParseError::MissingSection { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {description}")]
pub struct SemanticError {
    pub span: SourceSpan,
    pub description: String,
}

/// Every semantic error found in one specification, in source order.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}", render_all(.0))]
pub struct SemanticErrors(pub Vec<SemanticError>);

fn render_all(errors: &[SemanticError]) -> String {
    errors
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("\n")
}

/// A lint finding. Never blocks analysis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Warning {
    pub span: Option<SourceSpan>,
    pub message: String,
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.span {
            Some(span) => write!(f, "{span}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}
