//! Recursive-descent parser producing an unresolved [`ProtocolSpec`].
//!
//! Section order is fixed: `protocol`, `identifiers`, `messages`, `knowledge`,
//! then the optional `session-instances` and `goal` sections.

use super::ast::{
    DeclKind, Declaration, Goal, Ident, KnowledgeEntry, Message, ProtocolSpec, SessionBinding,
    SessionInstance, Term,
};
use super::error::ParseError;
use super::lexer::{tokenize, Keyword, Token, TokenKind};
use super::SourceSpan;

/// Deepest term nesting accepted before the parser gives up.
pub const MAX_NESTING: usize = 128;

pub fn parse_source(source: &str) -> Result<ProtocolSpec, ParseError> {
    parse(&tokenize(source)?)
}

/// Parses raw bytes; invalid UTF-8 is reported as a lex error at the first bad byte.
pub fn parse_bytes(bytes: &[u8]) -> Result<ProtocolSpec, ParseError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_source(text),
        Err(err) => {
            let valid = std::str::from_utf8(&bytes[..err.valid_up_to()]).unwrap_or_default();
            // Lex the valid prefix first so earlier problems are reported in order.
            tokenize(valid)?;
            let line = valid.matches('\n').count() as u32 + 1;
            let column = valid.rsplit('\n').next().map_or(0, |l| l.chars().count()) as u32 + 1;
            Err(ParseError::Lex {
                span: SourceSpan::new(line, column, 1),
                found: char::REPLACEMENT_CHARACTER,
            })
        }
    }
}

pub fn parse(tokens: &[Token]) -> Result<ProtocolSpec, ParseError> {
    Parser {
        tokens,
        pos: 0,
        depth: 0,
    }
    .spec()
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    depth: usize,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> Option<&'t TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn bump(&mut self) -> Option<&'t Token> {
        let tok = self.tokens.get(self.pos)?;
        self.pos += 1;
        Some(tok)
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek() == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    /// Span of the current token, or a zero-length span just past the last one.
    fn here(&self) -> SourceSpan {
        match self.tokens.get(self.pos) {
            Some(tok) => tok.span,
            None => match self.tokens.last() {
                Some(last) => {
                    SourceSpan::new(last.span.line, last.span.column + last.span.length, 0)
                }
                None => SourceSpan::default(),
            },
        }
    }

    fn error(&self, expected: impl Into<String>) -> ParseError {
        let found = match self.peek() {
            Some(kind) => kind.to_string(),
            None => "end of input".to_string(),
        };
        ParseError::Syntax {
            span: self.here(),
            expected: expected.into(),
            found,
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<&'t Token, ParseError> {
        if self.peek() == Some(&kind) {
            Ok(self.bump().expect("peeked"))
        } else {
            Err(self.error(kind.to_string()))
        }
    }

    fn ident(&mut self, what: &str) -> Result<Ident, ParseError> {
        match self.tokens.get(self.pos) {
            Some(Token {
                kind: TokenKind::Ident(name),
                span,
            }) => {
                self.pos += 1;
                Ok(Ident::new(name.clone(), *span))
            }
            _ => Err(self.error(what)),
        }
    }

    fn at_ident(&self) -> bool {
        matches!(self.peek(), Some(TokenKind::Ident(_)))
    }

    fn section(&mut self, kw: Keyword) -> Result<(), ParseError> {
        match self.peek() {
            Some(TokenKind::Keyword(found)) if *found == kw => {
                self.pos += 1;
                Ok(())
            }
            None | Some(TokenKind::Keyword(_)) => {
                Err(ParseError::MissingSection { name: kw.as_str() })
            }
            Some(_) => Err(self.error(format!("keyword `{}`", kw.as_str()))),
        }
    }

    fn spec(&mut self) -> Result<ProtocolSpec, ParseError> {
        self.section(Keyword::Protocol)?;
        let name = match self.peek() {
            Some(TokenKind::ProtocolName(name)) => {
                self.pos += 1;
                name.clone()
            }
            _ => return Err(self.error("a protocol name")),
        };

        self.section(Keyword::Identifiers)?;
        let declarations = self.declarations()?;

        self.section(Keyword::Messages)?;
        let messages = self.messages()?;

        self.section(Keyword::Knowledge)?;
        let knowledge = self.knowledge()?;

        let session_instances = if self.eat(&TokenKind::Keyword(Keyword::SessionInstances)) {
            self.session_instances()?
        } else {
            Vec::new()
        };
        let goals = if self.eat(&TokenKind::Keyword(Keyword::Goal)) {
            self.goals()?
        } else {
            Vec::new()
        };

        if self.peek().is_some() {
            return Err(self.error("end of input"));
        }
        Ok(ProtocolSpec {
            name,
            declarations,
            messages,
            knowledge,
            session_instances,
            goals,
        })
    }

    fn declarations(&mut self) -> Result<Vec<Declaration>, ParseError> {
        let mut out = Vec::new();
        while self.at_ident() {
            let mut names = vec![self.ident("an identifier")?];
            while self.eat(&TokenKind::Comma) {
                names.push(self.ident("an identifier")?);
            }
            self.expect(TokenKind::Colon)?;
            let kind = match self.peek() {
                Some(TokenKind::Ident(word)) => DeclKind::from_keyword(word),
                _ => None,
            }
            .ok_or_else(|| {
                self.error(
                    "a declaration kind (user, number, text, symmetric_key, public_key, function)",
                )
            })?;
            self.pos += 1;
            self.expect(TokenKind::Semi)?;
            out.extend(names.into_iter().map(|name| Declaration { name, kind }));
        }
        Ok(out)
    }

    fn messages(&mut self) -> Result<Vec<Message>, ParseError> {
        let mut out = Vec::new();
        while let Some(TokenKind::Int(n)) = self.peek() {
            let expected = out.len() as u64 + 1;
            let start = self.here();
            if *n != expected {
                return Err(self.error(format!("message number {expected}")));
            }
            self.pos += 1;
            self.expect(TokenKind::Dot)?;
            let sender = self.ident("a sender role")?;
            self.expect(TokenKind::Arrow)?;
            let receiver = self.ident("a receiver role")?;
            self.expect(TokenKind::Colon)?;
            let payload = self.tuple()?;
            out.push(Message {
                index: expected as u32,
                sender,
                receiver,
                payload,
                span: start,
            });
        }
        if out.is_empty() {
            return Err(self.error("a numbered message"));
        }
        Ok(out)
    }

    fn tuple(&mut self) -> Result<Term, ParseError> {
        Ok(Term::tuple(self.term_list()?))
    }

    fn term_list(&mut self) -> Result<Vec<Term>, ParseError> {
        let mut items = vec![self.term()?];
        while self.eat(&TokenKind::Comma) {
            items.push(self.term()?);
        }
        Ok(items)
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        if self.depth >= MAX_NESTING {
            return Err(self.error(format!("at most {MAX_NESTING} levels of term nesting")));
        }
        self.depth += 1;
        let result = self.term_inner();
        self.depth -= 1;
        result
    }

    fn term_inner(&mut self) -> Result<Term, ParseError> {
        match self.peek() {
            Some(TokenKind::LBrace) => {
                self.pos += 1;
                let body = self.tuple()?;
                self.expect(TokenKind::RBrace)?;
                let key = self.ident("an encryption key identifier")?;
                if self.peek() == Some(&TokenKind::LParen) {
                    return Err(self.error("a bare key identifier"));
                }
                Ok(Term::Enc {
                    body: Box::new(body),
                    key,
                })
            }
            Some(TokenKind::Ident(_)) => {
                let name = self.ident("an identifier")?;
                if self.eat(&TokenKind::LParen) {
                    let args = self.term_list()?;
                    self.expect(TokenKind::RParen)?;
                    Ok(Term::Apply {
                        function: name,
                        args,
                    })
                } else {
                    Ok(Term::Atom(name))
                }
            }
            _ => Err(self.error("a term")),
        }
    }

    fn ident_list(&mut self) -> Result<Vec<Ident>, ParseError> {
        let mut items = vec![self.ident("an identifier")?];
        while self.eat(&TokenKind::Comma) {
            items.push(self.ident("an identifier")?);
        }
        Ok(items)
    }

    fn knowledge(&mut self) -> Result<Vec<KnowledgeEntry>, ParseError> {
        let mut out = Vec::new();
        while self.at_ident() {
            let role = self.ident("a role")?;
            self.expect(TokenKind::Colon)?;
            let items = self.ident_list()?;
            self.expect(TokenKind::Semi)?;
            out.push(KnowledgeEntry { role, items });
        }
        Ok(out)
    }

    fn session_instances(&mut self) -> Result<Vec<SessionInstance>, ParseError> {
        let mut out = Vec::new();
        while self.peek() == Some(&TokenKind::LBracket) {
            let span = self.here();
            self.pos += 1;
            let mut bindings = Vec::new();
            if self.at_ident() {
                loop {
                    let role = self.ident("an identifier")?;
                    self.expect(TokenKind::Colon)?;
                    let instance = self.ident("an instance name")?;
                    bindings.push(SessionBinding { role, instance });
                    if !self.eat(&TokenKind::Comma) {
                        break;
                    }
                }
            }
            self.expect(TokenKind::RBracket)?;
            self.expect(TokenKind::Semi)?;
            out.push(SessionInstance { bindings, span });
        }
        Ok(out)
    }

    fn goals(&mut self) -> Result<Vec<Goal>, ParseError> {
        let mut out = Vec::new();
        while self.at_ident() {
            let kind = self.ident("a goal kind")?;
            let mut args = Vec::new();
            while self.at_ident() {
                args.push(self.ident("an identifier")?);
            }
            let scope = if self.eat(&TokenKind::LBracket) {
                let items = if self.at_ident() {
                    self.ident_list()?
                } else {
                    Vec::new()
                };
                self.expect(TokenKind::RBracket)?;
                Some(items)
            } else {
                None
            };
            self.expect(TokenKind::Semi)?;
            out.push(Goal { kind, args, scope });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "protocol P\nidentifiers\nA, B: user;\nmessages\n1. A -> B : A\nknowledge\nA: A, B;\nB: A, B;\n";

    fn payload(src: &str) -> Term {
        let text = format!(
            "protocol T\nidentifiers\nA, B: user;\nmessages\n1. A -> B : {src}\nknowledge\nA: A;\n"
        );
        parse_source(&text).unwrap().messages.remove(0).payload
    }

    #[test]
    fn minimal_protocol() {
        let spec = parse_source(MINIMAL).unwrap();
        assert_eq!(spec.name, "P");
        assert_eq!(spec.messages.len(), 1);
        assert_eq!(spec.messages[0].payload, Term::atom("A"));
        assert_eq!(spec.knowledge.len(), 2);
        assert!(spec.goals.is_empty());
        assert!(spec.session_instances.is_empty());
    }

    #[test]
    fn application_inside_encryption() {
        assert_eq!(
            payload("{Dec (Nb)} Kab"),
            Term::enc(Term::apply("Dec", vec![Term::atom("Nb")]), "Kab")
        );
    }

    #[test]
    fn nested_encryption_and_tuple() {
        let expected = Term::enc(
            Term::Tuple(vec![
                Term::atom("Na"),
                Term::atom("B"),
                Term::atom("Kab"),
                Term::enc(Term::Tuple(vec![Term::atom("Kab"), Term::atom("A")]), "Kbs"),
            ]),
            "Kas",
        );
        assert_eq!(payload("{Na, B, Kab, {Kab, A}Kbs}Kas"), expected);
    }

    #[test]
    fn application_arguments_are_not_wrapped_in_a_tuple() {
        assert_eq!(
            payload("h(A, B), C"),
            Term::Tuple(vec![
                Term::apply("h", vec![Term::atom("A"), Term::atom("B")]),
                Term::atom("C"),
            ])
        );
    }

    #[test]
    fn compound_key_is_rejected() {
        let err = parse_source(
            "protocol T\nidentifiers\nA, B: user;\nmessages\n1. A -> B : {A}h(K)\nknowledge\nA: A;\n",
        )
        .unwrap_err();
        assert!(
            matches!(err, ParseError::Syntax { span, .. } if span == SourceSpan::new(5, 17, 1))
        );

        let err = parse_source(
            "protocol T\nidentifiers\nA, B: user;\nmessages\n1. A -> B : {A}{B}K\nknowledge\nA: A;\n",
        )
        .unwrap_err();
        assert!(matches!(err, ParseError::Syntax { .. }));
    }

    #[test]
    fn missing_sections() {
        assert_eq!(
            parse_source(""),
            Err(ParseError::MissingSection { name: "protocol" })
        );
        assert_eq!(
            parse_source("protocol P\nidentifiers\nA, B: user;\nknowledge\nA: A;"),
            Err(ParseError::MissingSection { name: "messages" })
        );
        assert_eq!(
            parse_source("protocol P\nidentifiers\nA, B: user;\nmessages\n1. A -> B : A\n"),
            Err(ParseError::MissingSection { name: "knowledge" })
        );
    }

    #[test]
    fn empty_messages_section() {
        let err = parse_source("protocol P\nidentifiers\nA: user;\nmessages\nknowledge\nA: A;")
            .unwrap_err();
        assert!(
            matches!(err, ParseError::Syntax { ref expected, .. } if expected == "a numbered message")
        );
    }

    #[test]
    fn out_of_sequence_message_number() {
        let err = parse_source(
            "protocol P\nidentifiers\nA, B: user;\nmessages\n1. A -> B : A\n3. B -> A : B\nknowledge\nA: A;",
        )
        .unwrap_err();
        match err {
            ParseError::Syntax { span, expected, .. } => {
                assert_eq!(span, SourceSpan::new(6, 1, 1));
                assert_eq!(expected, "message number 2");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_declaration_kind() {
        let err = parse_source(
            "protocol P\nidentifiers\nA: agent;\nmessages\n1. A -> A : A\nknowledge\n",
        )
        .unwrap_err();
        assert!(matches!(err, ParseError::Syntax { span, .. } if span == SourceSpan::new(3, 4, 5)));
    }

    #[test]
    fn sections_out_of_order() {
        let src = format!("{MINIMAL}goal\nsecrecy_of A [];\nsession-instances\n[A: a];\n");
        let err = parse_source(&src).unwrap_err();
        assert!(
            matches!(err, ParseError::Syntax { ref expected, .. } if expected == "end of input")
        );
    }

    #[test]
    fn goals_and_sessions_are_kept() {
        let src = format!(
            "{MINIMAL}session-instances\n[A: alice, B: bob];\n[];\ngoal\nsecrecy_of A [];\nA authenticates B on A;\n"
        );
        let spec = parse_source(&src).unwrap();
        assert_eq!(spec.session_instances.len(), 2);
        assert_eq!(spec.session_instances[0].bindings.len(), 2);
        assert_eq!(spec.goals.len(), 2);
        assert_eq!(spec.goals[0].kind.name, "secrecy_of");
        assert_eq!(spec.goals[0].scope, Some(vec![]));
        assert_eq!(spec.goals[1].args.len(), 4);
        assert_eq!(spec.goals[1].scope, None);
    }

    #[test]
    fn excessive_nesting_is_an_error() {
        let body = format!("{}A{}", "{".repeat(500), "}K".repeat(500));
        let src = format!(
            "protocol T\nidentifiers\nA, B: user;\nmessages\n1. A -> B : {body}\nknowledge\nA: A;\n"
        );
        assert!(matches!(parse_source(&src), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn invalid_utf8_is_a_lex_error() {
        let err = parse_bytes(b"protocol P\nab\xffc").unwrap_err();
        assert_eq!(
            err,
            ParseError::Lex {
                span: SourceSpan::new(2, 3, 1),
                found: char::REPLACEMENT_CHARACTER
            }
        );
    }
}
