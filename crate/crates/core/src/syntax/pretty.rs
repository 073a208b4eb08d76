//! Canonical CAS+ rendering.

use std::fmt::{self, Write};

use super::ast::{Ident, ProtocolSpec, Term};

/// Renders a specification as canonical CAS+ text, one message per line.
///
/// Parsing the output yields a structurally equal specification.
pub fn pretty_print(spec: &ProtocolSpec) -> String {
    let mut out = String::new();
    render(spec, &mut out).expect("writing to a String cannot fail");
    out
}

/// Writes a term in source syntax: `{body}Key`, `f(a, b)`, `a, b`.
pub fn write_term(out: &mut impl Write, term: &Term) -> fmt::Result {
    match term {
        Term::Atom(id) => out.write_str(id.as_str()),
        Term::Tuple(items) => write_list(out, items),
        Term::Enc { body, key } => {
            out.write_char('{')?;
            write_term(out, body)?;
            write!(out, "}}{key}")
        }
        Term::Apply { function, args } => {
            write!(out, "{function}(")?;
            write_list(out, args)?;
            out.write_char(')')
        }
    }
}

fn write_list(out: &mut impl Write, items: &[Term]) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.write_str(", ")?;
        }
        write_term(out, item)?;
    }
    Ok(())
}

fn join(ids: &[Ident]) -> String {
    ids.iter().map(Ident::as_str).collect::<Vec<_>>().join(", ")
}

fn render(spec: &ProtocolSpec, out: &mut String) -> fmt::Result {
    writeln!(out, "protocol {}", spec.name)?;

    writeln!(out, "\nidentifiers")?;
    let mut groups: Vec<(Vec<Ident>, _)> = Vec::new();
    for decl in &spec.declarations {
        match groups.last_mut() {
            Some((names, kind)) if *kind == decl.kind => names.push(decl.name.clone()),
            _ => groups.push((vec![decl.name.clone()], decl.kind)),
        }
    }
    for (names, kind) in &groups {
        writeln!(out, "{} : {kind};", join(names))?;
    }

    writeln!(out, "\nmessages")?;
    for (i, msg) in spec.messages.iter().enumerate() {
        write!(out, "{}. {} -> {} : ", i + 1, msg.sender, msg.receiver)?;
        write_term(out, &msg.payload)?;
        out.push('\n');
    }

    writeln!(out, "\nknowledge")?;
    for entry in &spec.knowledge {
        writeln!(out, "{} : {};", entry.role, join(&entry.items))?;
    }

    if !spec.session_instances.is_empty() {
        writeln!(out, "\nsession-instances")?;
        for group in &spec.session_instances {
            let bindings: Vec<String> = group
                .bindings
                .iter()
                .map(|b| format!("{}: {}", b.role, b.instance))
                .collect();
            writeln!(out, "[{}];", bindings.join(", "))?;
        }
    }

    if !spec.goals.is_empty() {
        writeln!(out, "\ngoal")?;
        for goal in &spec.goals {
            out.push_str(goal.kind.as_str());
            for arg in &goal.args {
                write!(out, " {arg}")?;
            }
            if let Some(scope) = &goal.scope {
                write!(out, " [{}]", join(scope))?;
            }
            out.push_str(";\n");
        }
    }
    Ok(())
}
