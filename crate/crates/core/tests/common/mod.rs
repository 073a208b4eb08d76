#![allow(dead_code)]

use std::path::{Path, PathBuf};

use num_rational::Rational64;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use protocost::syntax::{
    pretty_print, DeclKind, Declaration, Ident, KnowledgeEntry, Message, SourceSpan, Term,
};
use protocost::{
    analyze, compare, count_operations, load_model, parse_source, resolve, AnalysisResult,
    ComparisonSet, CostCategory, CostModel, ExactMillis, OperationCounts, ProtocolSpec,
    ResolvedSpec, StoredResult, UnitCost,
};

pub const NSSK: &str = include_str!("../../protocols/needham-schroeder-symmetric.cas");

/// One row of the reference corpus.
pub struct Golden {
    pub file: &'static str,
    pub name: &'static str,
    /// Th, Pm, Pe, Pd, Se, Sd.
    pub counts: [u64; 6],
    /// Total as printed in the reference table.
    pub printed_ms: f64,
    pub communication: u64,
}

pub const CORPUS: [Golden; 6] = [
    Golden {
        file: "wide-mouthed-frog.cas",
        name: "Wide Mouthed Frog",
        counts: [0, 0, 0, 0, 2, 2],
        printed_ms: 0.0184,
        communication: 2,
    },
    Golden {
        file: "needham-schroeder-pk.cas",
        name: "Needham Schroeder Public Key",
        counts: [0, 0, 3, 3, 0, 0],
        printed_ms: 23.1,
        communication: 3,
    },
    Golden {
        file: "otway-rees.cas",
        name: "Otway Rees",
        counts: [0, 0, 0, 0, 5, 5],
        printed_ms: 0.046,
        communication: 4,
    },
    Golden {
        file: "smak-iov.cas",
        name: "SMAK-IOV",
        counts: [0, 0, 9, 9, 0, 0],
        printed_ms: 69.3,
        communication: 9,
    },
    Golden {
        file: "ce-ske.cas",
        name: "CE-SKE",
        counts: [7, 0, 3, 3, 0, 0],
        printed_ms: 23.116,
        communication: 3,
    },
    Golden {
        file: "lske.cas",
        name: "LSKE",
        counts: [8, 2, 2, 2, 0, 0],
        printed_ms: 19.870,
        communication: 3,
    },
];

pub fn manifest_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

pub fn corpus_path(file: &str) -> PathBuf {
    manifest_dir().join("protocols").join(file)
}

/// Default unit costs with `h` → Th and `mul` → Pm.
pub fn corpus_model() -> CostModel {
    load_model(&corpus_path("corpus-classes.json")).expect("bundled model loads")
}

pub fn resolve_text(text: &str) -> ResolvedSpec {
    resolve(parse_source(text).expect("parses")).expect("resolves")
}

pub fn analyze_file(file: &str, model: &CostModel) -> AnalysisResult {
    let text = std::fs::read_to_string(corpus_path(file)).expect("corpus file readable");
    analyze(&resolve_text(&text), model)
}

pub fn counts_array(counts: &OperationCounts) -> [u64; 6] {
    CostCategory::ALL.map(|c| counts.get(c))
}

// ---- generated specifications -------------------------------------------

pub const USERS: [&str; 3] = ["A", "B", "S"];
pub const NUMBERS: [&str; 3] = ["Na", "Nb", "T"];
pub const SYM_KEYS: [&str; 2] = ["K1", "K2"];
pub const PUB_KEYS: [&str; 2] = ["P1", "P2"];
/// `h` and `mul` are classified by [`corpus_model`]; `f` is not.
pub const FUNCTIONS: [&str; 3] = ["h", "mul", "f"];

fn leaf() -> impl Strategy<Value = Term> {
    let names: Vec<&'static str> = USERS
        .iter()
        .chain(&NUMBERS)
        .chain(&SYM_KEYS)
        .chain(&PUB_KEYS)
        .copied()
        .collect();
    proptest::sample::select(names).prop_map(Term::atom)
}

/// Payload terms of depth at most 3.
pub fn arb_term() -> impl Strategy<Value = Term> {
    let keys: Vec<&'static str> = SYM_KEYS.iter().chain(&PUB_KEYS).copied().collect();
    leaf().prop_recursive(2, 16, 3, move |inner| {
        let keys = keys.clone();
        prop_oneof![
            proptest::collection::vec(inner.clone(), 2..4).prop_map(Term::tuple),
            (inner.clone(), proptest::sample::select(keys)).prop_map(|(b, k)| Term::enc(b, k)),
            (
                proptest::sample::select(FUNCTIONS.to_vec()),
                proptest::collection::vec(inner, 1..3)
            )
                .prop_map(|(f, args)| Term::apply(f, args)),
        ]
    })
}

fn arb_endpoints() -> impl Strategy<Value = (&'static str, &'static str)> {
    (0usize..3, 1usize..3).prop_map(|(s, off)| (USERS[s], USERS[(s + off) % 3]))
}

pub fn arb_message() -> impl Strategy<Value = (&'static str, &'static str, Term)> {
    (arb_endpoints(), arb_term()).prop_map(|((s, r), t)| (s, r, t))
}

/// Well-formed specifications with 1 to 6 messages.
pub fn arb_spec() -> impl Strategy<Value = ProtocolSpec> {
    proptest::collection::vec(arb_message(), 1..=6).prop_map(|msgs| build_spec("Generated", msgs))
}

pub fn build_spec(name: &str, msgs: Vec<(&str, &str, Term)>) -> ProtocolSpec {
    let mut declarations = Vec::new();
    let groups: [(&[&str], DeclKind); 5] = [
        (&USERS, DeclKind::User),
        (&NUMBERS, DeclKind::Number),
        (&SYM_KEYS, DeclKind::SymmetricKey),
        (&PUB_KEYS, DeclKind::PublicKey),
        (&FUNCTIONS, DeclKind::Function),
    ];
    for (names, kind) in groups {
        for n in names {
            declarations.push(Declaration {
                name: Ident::synthetic(*n),
                kind,
            });
        }
    }
    let messages = msgs
        .into_iter()
        .enumerate()
        .map(|(i, (s, r, payload))| Message {
            index: i as u32 + 1,
            sender: Ident::synthetic(s),
            receiver: Ident::synthetic(r),
            payload,
            span: SourceSpan::default(),
        })
        .collect();
    let everything: Vec<Ident> = declarations.iter().map(|d| d.name.clone()).collect();
    let knowledge = USERS
        .iter()
        .map(|u| KnowledgeEntry {
            role: Ident::synthetic(*u),
            items: everything.clone(),
        })
        .collect();
    ProtocolSpec {
        name: name.to_string(),
        declarations,
        messages,
        knowledge,
        session_instances: Vec::new(),
        goals: Vec::new(),
    }
}

pub fn resolved(spec: ProtocolSpec) -> ResolvedSpec {
    resolve(spec).expect("generated specs resolve")
}

// ---- brute-force oracle -------------------------------------------------

/// Recounts a spec from its canonical text with a character scan.
///
/// Every `}` followed by a key name is one encryption; every name followed
/// by `(` is one function call. Nothing from the tree walker is reused.
pub fn oracle_counts(spec: &ProtocolSpec) -> ([u64; 6], u64) {
    let text = pretty_print(spec);
    let mut counts = [0u64; 6];
    let mut unclassified = 0;
    let mut in_messages = false;
    for line in text.lines() {
        let line = line.trim();
        match line {
            "messages" => {
                in_messages = true;
                continue;
            }
            "knowledge" => break,
            _ => {}
        }
        if !in_messages || line.is_empty() {
            continue;
        }
        let payload = &line[line.find(':').expect("message line has a colon") + 1..];
        let chars: Vec<char> = payload.chars().collect();
        let word_after = |mut i: usize| {
            while i < chars.len() && chars[i] == ' ' {
                i += 1;
            }
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            (chars[start..i].iter().collect::<String>(), i)
        };
        let mut i = 0;
        while i < chars.len() {
            if chars[i] == '}' {
                let (key, _) = word_after(i + 1);
                if SYM_KEYS.contains(&key.as_str()) {
                    counts[4] += 1;
                    counts[5] += 1;
                } else if PUB_KEYS.contains(&key.as_str()) {
                    counts[2] += 1;
                    counts[3] += 1;
                } else {
                    panic!("unexpected key `{key}` in `{payload}`");
                }
                i += 1;
            } else if chars[i].is_alphabetic() {
                let (word, end) = word_after(i);
                let mut j = end;
                while j < chars.len() && chars[j] == ' ' {
                    j += 1;
                }
                if j < chars.len() && chars[j] == '(' {
                    match word.as_str() {
                        "h" => counts[0] += 1,
                        "mul" => counts[1] += 1,
                        _ => unclassified += 1,
                    }
                }
                i = end;
            } else {
                i += 1;
            }
        }
    }
    (counts, unclassified)
}

// ---- properties ---------------------------------------------------------

pub type PropResult = Result<(), TestCaseError>;

pub fn enc_symmetry(spec: &ProtocolSpec) -> PropResult {
    let counts = count_operations(&resolved(spec.clone()), &corpus_model()).counts;
    prop_assert_eq!(
        counts.get(CostCategory::SymEnc),
        counts.get(CostCategory::SymDec)
    );
    prop_assert_eq!(
        counts.get(CostCategory::PubEnc),
        counts.get(CostCategory::PubDec)
    );
    Ok(())
}

pub fn attribution_conservation(spec: &ProtocolSpec) -> PropResult {
    let tally = count_operations(&resolved(spec.clone()), &corpus_model());
    let summed: OperationCounts = tally.per_role.iter().map(|r| &r.counts).sum();
    prop_assert_eq!(summed, tally.counts);
    Ok(())
}

/// Exact decimal rendering of a rational with a terminating expansion.
pub fn decimal(value: Rational64) -> String {
    let (mut numer, denom) = (*value.numer(), *value.denom());
    assert!(numer >= 0);
    let mut out = (numer / denom).to_string();
    numer %= denom;
    if numer != 0 {
        out.push('.');
        while numer != 0 {
            numer *= 10;
            out.push(char::from(b'0' + (numer / denom) as u8));
            numer %= denom;
        }
    }
    out
}

pub fn scaled_model(model: &CostModel, k: Rational64) -> CostModel {
    let mut scaled = model.clone();
    for c in CostCategory::ALL {
        let v = model.unit_cost(c).exact() * k;
        scaled.set_unit_cost(c, UnitCost::parse(&decimal(v)).expect("scaled cost parses"));
    }
    scaled
}

pub const SCALES: [(i64, i64); 3] = [(1, 2), (2, 1), (10, 1)];

pub fn cost_linearity(spec: &ProtocolSpec) -> PropResult {
    let model = corpus_model();
    let counts = count_operations(&resolved(spec.clone()), &model).counts;
    let base: ExactMillis = protocost::compute_cost(&counts, &model);
    for (n, d) in SCALES {
        let k = Rational64::new(n, d);
        let scaled: ExactMillis = protocost::compute_cost(&counts, &scaled_model(&model, k));
        prop_assert_eq!(scaled, base * k);
        let approx: f64 = protocost::compute_cost(&counts, &scaled_model(&model, k));
        let expected = protocost::compute_cost::<f64>(&counts, &model) * (n as f64 / d as f64);
        prop_assert!((approx - expected).abs() <= 1e-9 * expected.abs().max(1.0));
    }
    Ok(())
}

pub fn stored(result: AnalysisResult) -> StoredResult {
    StoredResult::new(result, chrono::DateTime::UNIX_EPOCH, "generated.cas", b"")
}

pub fn ranking_invariance(specs: &[ProtocolSpec]) -> PropResult {
    let model = corpus_model();
    let named: Vec<ResolvedSpec> = specs
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut s = s.clone();
            s.name = format!("P{i}");
            resolved(s)
        })
        .collect();
    let ranking = |m: &CostModel| {
        let set: ComparisonSet = named.iter().map(|s| stored(analyze(s, m))).collect();
        let cmp = compare(&set).expect("non-empty set");
        let comp: Vec<String> = cmp
            .computation_ranking()
            .into_iter()
            .map(String::from)
            .collect();
        let comm: Vec<String> = cmp
            .communication_ranking()
            .into_iter()
            .map(String::from)
            .collect();
        (comp, comm)
    };
    let base = ranking(&model);
    for (n, d) in SCALES {
        prop_assert_eq!(
            &ranking(&scaled_model(&model, Rational64::new(n, d))),
            &base
        );
    }
    Ok(())
}

pub fn oracle_agreement(spec: &ProtocolSpec) -> PropResult {
    let counts = count_operations(&resolved(spec.clone()), &corpus_model()).counts;
    let (expected, unclassified) = oracle_counts(spec);
    prop_assert_eq!(counts_array(&counts), expected);
    prop_assert_eq!(
        counts.unclassified_calls().values().sum::<u64>(),
        unclassified
    );
    Ok(())
}

pub fn round_trip(spec: &ProtocolSpec) -> PropResult {
    let text = pretty_print(spec);
    let reparsed = parse_source(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
    prop_assert!(
        spec.structurally_eq(&reparsed),
        "round trip changed\n{}",
        text
    );
    Ok(())
}

// ---- fuzzing ------------------------------------------------------------

/// Mutates `seed` once: flip, insert, delete, duplicate or splice a token.
pub fn mutate(seed: &[u8], rng: &mut impl rand::Rng) -> Vec<u8> {
    const TOKENS: [&[u8]; 12] = [
        b"{",
        b"}",
        b"(",
        b")",
        b",",
        b";",
        b":",
        b"->",
        b"%",
        b"\n",
        b"\xff",
        b"session -instances",
    ];
    let mut bytes = seed.to_vec();
    let rounds = rng.gen_range(1..=8);
    for _ in 0..rounds {
        let len = bytes.len();
        let at = if len == 0 { 0 } else { rng.gen_range(0..len) };
        match rng.gen_range(0..6) {
            0 if len > 0 => bytes[at] ^= 1 << rng.gen_range(0..8),
            1 => bytes.insert(at, rng.gen()),
            2 if len > 0 => {
                let end = (at + rng.gen_range(1..16)).min(len);
                bytes.drain(at..end);
            }
            3 if len > 0 => {
                let end = (at + rng.gen_range(1..32)).min(len);
                let chunk = bytes[at..end].to_vec();
                let to = rng.gen_range(0..=bytes.len());
                bytes.splice(to..to, chunk);
            }
            4 => {
                let token = TOKENS[rng.gen_range(0..TOKENS.len())];
                bytes.splice(at..at, token.iter().copied());
            }
            _ => {
                let depth = rng.gen_range(1..200);
                let open = std::iter::repeat_n(b'{', depth);
                bytes.splice(at..at, open);
            }
        }
    }
    bytes
}

/// Pushes one input through every stage that accepts it.
pub fn exercise(bytes: &[u8], model: &CostModel) {
    if let Ok(spec) = protocost::syntax::parse_bytes(bytes) {
        let _ = pretty_print(&spec);
        if let Ok(resolved) = resolve(spec) {
            let _ = analyze(&resolved, model);
        }
    }
}
