//! Tokenizer for the CAS+ subset.

use std::fmt;

use super::error::ParseError;
use super::SourceSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Keyword {
    Protocol,
    Identifiers,
    Messages,
    Knowledge,
    SessionInstances,
    Goal,
}

impl Keyword {
    pub fn as_str(self) -> &'static str {
        match self {
            Keyword::Protocol => "protocol",
            Keyword::Identifiers => "identifiers",
            Keyword::Messages => "messages",
            Keyword::Knowledge => "knowledge",
            Keyword::SessionInstances => "session-instances",
            Keyword::Goal => "goal",
        }
    }

    fn from_word(word: &str) -> Option<Keyword> {
        match word {
            "protocol" => Some(Keyword::Protocol),
            "identifiers" => Some(Keyword::Identifiers),
            "messages" => Some(Keyword::Messages),
            "knowledge" => Some(Keyword::Knowledge),
            "goal" => Some(Keyword::Goal),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Int(u64),
    Keyword(Keyword),
    /// Free text following the `protocol` keyword, up to end of line.
    ProtocolName(String),
    Dot,
    Colon,
    Semi,
    Comma,
    Arrow,
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Ident(name) => write!(f, "identifier `{name}`"),
            TokenKind::Int(n) => write!(f, "integer `{n}`"),
            TokenKind::Keyword(kw) => write!(f, "keyword `{}`", kw.as_str()),
            TokenKind::ProtocolName(name) => write!(f, "protocol name `{name}`"),
            TokenKind::Dot => f.write_str("`.`"),
            TokenKind::Colon => f.write_str("`:`"),
            TokenKind::Semi => f.write_str("`;`"),
            TokenKind::Comma => f.write_str("`,`"),
            TokenKind::Arrow => f.write_str("`->`"),
            TokenKind::LBrace => f.write_str("`{`"),
            TokenKind::RBrace => f.write_str("`}`"),
            TokenKind::LParen => f.write_str("`(`"),
            TokenKind::RParen => f.write_str("`)`"),
            TokenKind::LBracket => f.write_str("`[`"),
            TokenKind::RBracket => f.write_str("`]`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    column: u32,
    /// True until a non-blank character is seen on the current line.
    at_line_start: bool,
    tokens: Vec<Token>,
}

/// Splits CAS+ source text into tokens.
///
/// Lines whose first non-blank character is `%` are comments. The keyword
/// `session-instances` is also recognised when written `session -instances`.
pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut lexer = Lexer {
        chars: source.chars().collect(),
        pos: 0,
        line: 1,
        column: 1,
        at_line_start: true,
        tokens: Vec::new(),
    };
    lexer.run()?;
    Ok(lexer.tokens)
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic()
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

impl Lexer {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
            self.at_line_start = true;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn span_from(&self, line: u32, column: u32, start: usize) -> SourceSpan {
        SourceSpan::new(line, column, (self.pos - start) as u32)
    }

    fn push(&mut self, kind: TokenKind, line: u32, column: u32, start: usize) {
        let span = self.span_from(line, column, start);
        self.tokens.push(Token { kind, span });
    }

    fn skip_line(&mut self) {
        while let Some(c) = self.peek() {
            if c == '\n' {
                break;
            }
            self.bump();
        }
    }

    fn run(&mut self) -> Result<(), ParseError> {
        while let Some(c) = self.peek() {
            if c == '\n' || c == '\r' || c == ' ' || c == '\t' {
                self.bump();
                continue;
            }
            if c == '%' && self.at_line_start {
                self.skip_line();
                continue;
            }
            self.at_line_start = false;

            let (line, column, start) = (self.line, self.column, self.pos);
            let single = match c {
                '.' => Some(TokenKind::Dot),
                ':' => Some(TokenKind::Colon),
                ';' => Some(TokenKind::Semi),
                ',' => Some(TokenKind::Comma),
                '{' => Some(TokenKind::LBrace),
                '}' => Some(TokenKind::RBrace),
                '(' => Some(TokenKind::LParen),
                ')' => Some(TokenKind::RParen),
                '[' => Some(TokenKind::LBracket),
                ']' => Some(TokenKind::RBracket),
                _ => None,
            };
            if let Some(kind) = single {
                self.bump();
                self.push(kind, line, column, start);
                continue;
            }

            if c == '-' && self.peek_at(1) == Some('>') {
                self.bump();
                self.bump();
                self.push(TokenKind::Arrow, line, column, start);
            } else if c.is_ascii_digit() {
                self.lex_int(line, column, start)?;
            } else if is_ident_start(c) {
                self.lex_word(line, column, start);
            } else {
                return Err(ParseError::Lex {
                    span: SourceSpan::new(line, column, 1),
                    found: c,
                });
            }
        }
        Ok(())
    }

    fn lex_int(&mut self, line: u32, column: u32, start: usize) -> Result<(), ParseError> {
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        let span = self.span_from(line, column, start);
        let value = text.parse::<u64>().map_err(|_| ParseError::Syntax {
            span,
            expected: "an integer that fits in 64 bits".into(),
            found: format!("`{text}`"),
        })?;
        self.tokens.push(Token {
            kind: TokenKind::Int(value),
            span,
        });
        Ok(())
    }

    fn lex_word(&mut self, line: u32, column: u32, start: usize) {
        while self.peek().is_some_and(is_ident_continue) {
            self.bump();
        }
        let word: String = self.chars[start..self.pos].iter().collect();

        if word == "session" && self.try_instances_suffix() {
            self.push(
                TokenKind::Keyword(Keyword::SessionInstances),
                line,
                column,
                start,
            );
            return;
        }
        if let Some(kw) = Keyword::from_word(&word) {
            self.push(TokenKind::Keyword(kw), line, column, start);
            if kw == Keyword::Protocol {
                self.lex_protocol_name();
            }
            return;
        }
        self.push(TokenKind::Ident(word), line, column, start);
    }

    /// Consumes `[ \t]*-instances` when it directly follows `session`.
    fn try_instances_suffix(&mut self) -> bool {
        const SUFFIX: &str = "-instances";
        let mut offset = 0;
        while matches!(self.peek_at(offset), Some(' ' | '\t')) {
            offset += 1;
        }
        let matches_suffix = SUFFIX
            .chars()
            .enumerate()
            .all(|(i, expected)| self.peek_at(offset + i) == Some(expected));
        if !matches_suffix
            || self
                .peek_at(offset + SUFFIX.len())
                .is_some_and(is_ident_continue)
        {
            return false;
        }
        for _ in 0..offset + SUFFIX.len() {
            self.bump();
        }
        true
    }

    fn lex_protocol_name(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t')) {
            self.bump();
        }
        let (line, column, start) = (self.line, self.column, self.pos);
        self.skip_line();
        let raw: String = self.chars[start..self.pos].iter().collect();
        let name = raw.trim_end();
        if name.is_empty() {
            return;
        }
        let span = SourceSpan::new(line, column, name.chars().count() as u32);
        self.tokens.push(Token {
            kind: TokenKind::ProtocolName(name.to_string()),
            span,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    fn ident(name: &str) -> TokenKind {
        TokenKind::Ident(name.into())
    }

    #[test]
    fn message_line() {
        assert_eq!(
            kinds("A -> S : A, B, Na"),
            vec![
                ident("A"),
                TokenKind::Arrow,
                ident("S"),
                TokenKind::Colon,
                ident("A"),
                TokenKind::Comma,
                ident("B"),
                TokenKind::Comma,
                ident("Na"),
            ]
        );
    }

    #[test]
    fn empty_input() {
        assert!(tokenize("").unwrap().is_empty());
    }

    #[test]
    fn comment_lines_yield_nothing() {
        assert_eq!(kinds("% note\nA"), vec![ident("A")]);
        assert_eq!(kinds("   % indented -> }\n"), vec![]);
    }

    #[test]
    fn percent_mid_line_is_rejected() {
        let err = tokenize("A % B").unwrap_err();
        assert_eq!(
            err,
            ParseError::Lex {
                span: SourceSpan::new(1, 3, 1),
                found: '%'
            }
        );
    }

    #[test]
    fn spans_are_one_based() {
        let toks = tokenize("x\n  Kab}").unwrap();
        assert_eq!(toks[1].span, SourceSpan::new(2, 3, 3));
        assert_eq!(toks[2].span, SourceSpan::new(2, 6, 1));
    }

    #[test]
    fn session_instances_variants() {
        let kw = TokenKind::Keyword(Keyword::SessionInstances);
        assert_eq!(kinds("session-instances"), vec![kw.clone()]);
        assert_eq!(kinds("session -instances"), vec![kw]);
        assert_eq!(kinds("session"), vec![ident("session")]);
        assert!(tokenize("session -instancesX").is_err());
    }

    #[test]
    fn protocol_name_runs_to_end_of_line() {
        let toks = kinds("protocol Needham Schroeder  \r\nidentifiers");
        assert_eq!(
            toks,
            vec![
                TokenKind::Keyword(Keyword::Protocol),
                TokenKind::ProtocolName("Needham Schroeder".into()),
                TokenKind::Keyword(Keyword::Identifiers),
            ]
        );
    }

    #[test]
    fn lone_dash_is_a_lex_error() {
        assert!(matches!(
            tokenize("A - B"),
            Err(ParseError::Lex { found: '-', .. })
        ));
    }

    #[test]
    fn crlf_is_whitespace() {
        assert_eq!(kinds("A\r\nB"), vec![ident("A"), ident("B")]);
    }
}
