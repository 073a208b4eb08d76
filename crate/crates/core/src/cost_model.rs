//! Unit execution times per cost category and the function-name classification.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::scalar::CostScalar;

/// A priced cryptographic operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CostCategory {
    #[serde(rename = "Th")]
    Hash,
    #[serde(rename = "Pm")]
    PointMul,
    #[serde(rename = "Pe")]
    PubEnc,
    #[serde(rename = "Pd")]
    PubDec,
    #[serde(rename = "Se")]
    SymEnc,
    #[serde(rename = "Sd")]
    SymDec,
}

impl CostCategory {
    /// Report order: Th, Pm, Pe, Pd, Se, Sd.
    pub const ALL: [CostCategory; 6] = [
        CostCategory::Hash,
        CostCategory::PointMul,
        CostCategory::PubEnc,
        CostCategory::PubDec,
        CostCategory::SymEnc,
        CostCategory::SymDec,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            CostCategory::Hash => "Th",
            CostCategory::PointMul => "Pm",
            CostCategory::PubEnc => "Pe",
            CostCategory::PubDec => "Pd",
            CostCategory::SymEnc => "Se",
            CostCategory::SymDec => "Sd",
        }
    }

    pub fn from_symbol(symbol: &str) -> Option<CostCategory> {
        CostCategory::ALL.into_iter().find(|c| c.symbol() == symbol)
    }

    pub fn description(self) -> &'static str {
        match self {
            CostCategory::Hash => "Hash operation",
            CostCategory::PointMul => "Point multiplication",
            CostCategory::PubEnc => "Public-key encryption",
            CostCategory::PubDec => "Public-key decryption",
            CostCategory::SymEnc => "Symmetric-key encryption",
            CostCategory::SymDec => "Symmetric-key decryption",
        }
    }

    /// Whether a function name may be classified into this category.
    pub fn is_function_class(self) -> bool {
        matches!(self, CostCategory::Hash | CostCategory::PointMul)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for CostCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("malformed cost model: {0}")]
    Format(String),

    #[error("invalid cost model value: {0}")]
    Value(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// A nonnegative unit cost in milliseconds, kept as the decimal text it was written as.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitCost {
    text: String,
    value: Rational64,
}

impl UnitCost {
    /// Parses a JSON-style decimal literal such as `3.8500` or `2.5e-3`.
    pub fn parse(text: &str) -> Result<UnitCost, ModelError> {
        let value = parse_decimal(text)
            .ok_or_else(|| ModelError::Format(format!("`{text}` is not a decimal number")))?;
        if value < Rational64::from_integer(0) {
            return Err(ModelError::Value(format!("unit cost {text} is negative")));
        }
        Ok(UnitCost {
            text: text.to_string(),
            value,
        })
    }

    /// The literal exactly as written.
    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn exact(&self) -> Rational64 {
        self.value
    }

    pub fn value<S: CostScalar>(&self) -> S {
        S::from_exact(self.value)
    }
}

impl fmt::Display for UnitCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// Exact value of `-?digits(.digits)?([eE][+-]?digits)?`.
fn parse_decimal(text: &str) -> Option<Rational64> {
    let (negative, rest) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (mantissa, exponent) = match rest.find(['e', 'E']) {
        Some(i) => (&rest[..i], rest[i + 1..].parse::<i32>().ok()?),
        None => (rest, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    let all_digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if int_part.is_empty() || !all_digits(int_part) || !all_digits(frac_part) {
        return None;
    }
    if mantissa.contains('.') && frac_part.is_empty() {
        return None;
    }

    let digits = format!("{int_part}{frac_part}");
    let digits = digits.trim_start_matches('0');
    let mut numer: i64 = if digits.is_empty() {
        0
    } else {
        digits.parse().ok()?
    };
    let scale = exponent - frac_part.len() as i32;
    let mut denom: i64 = 1;
    let pow = 10_i64.checked_pow(scale.unsigned_abs())?;
    if scale >= 0 {
        numer = numer.checked_mul(pow)?;
    } else {
        denom = pow;
    }
    if negative {
        numer = -numer;
    }
    Some(Rational64::new(numer, denom))
}

/// Unit costs (ms) for every category plus the function-name classification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostModel {
    name: String,
    unit_cost_ms: BTreeMap<CostCategory, UnitCost>,
    function_classes: BTreeMap<String, CostCategory>,
    display_symbols: BTreeMap<CostCategory, String>,
}

const DEFAULT_COSTS: [(CostCategory, &str); 6] = [
    (CostCategory::Hash, "0.0023"),
    (CostCategory::PointMul, "2.226"),
    (CostCategory::PubEnc, "3.8500"),
    (CostCategory::PubDec, "3.8500"),
    (CostCategory::SymEnc, "0.0046"),
    (CostCategory::SymDec, "0.0046"),
];

pub const DEFAULT_MODEL_NAME: &str = "default";

/// The reference unit costs with no functions classified.
pub fn default_model() -> CostModel {
    CostModel {
        name: DEFAULT_MODEL_NAME.to_string(),
        unit_cost_ms: DEFAULT_COSTS
            .iter()
            .map(|(cat, text)| (*cat, UnitCost::parse(text).expect("valid default")))
            .collect(),
        function_classes: BTreeMap::new(),
        display_symbols: CostCategory::ALL
            .iter()
            .map(|c| (*c, c.symbol().to_string()))
            .collect(),
    }
}

impl Default for CostModel {
    fn default() -> Self {
        default_model()
    }
}

impl CostModel {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn unit_cost(&self, category: CostCategory) -> &UnitCost {
        &self.unit_cost_ms[&category]
    }

    pub fn unit_cost_as<S: CostScalar>(&self, category: CostCategory) -> S {
        self.unit_cost(category).value()
    }

    pub fn set_unit_cost(&mut self, category: CostCategory, cost: UnitCost) {
        self.unit_cost_ms.insert(category, cost);
    }

    pub fn function_classes(&self) -> &BTreeMap<String, CostCategory> {
        &self.function_classes
    }

    /// Maps a function name to `Hash` or `PointMul`.
    pub fn classify_as(
        &mut self,
        function: impl Into<String>,
        category: CostCategory,
    ) -> Result<(), ModelError> {
        let function = function.into();
        if !category.is_function_class() {
            return Err(ModelError::Value(format!(
                "function `{function}` cannot be classified as {category}; only Th and Pm are allowed"
            )));
        }
        if !is_identifier(&function) {
            return Err(ModelError::Value(format!(
                "`{function}` is not a valid function identifier"
            )));
        }
        self.function_classes.insert(function, category);
        Ok(())
    }

    /// Short label shown for a category in reports.
    pub fn display_symbol(&self, category: CostCategory) -> &str {
        &self.display_symbols[&category]
    }

    pub fn set_display_symbol(&mut self, category: CostCategory, symbol: impl Into<String>) {
        self.display_symbols.insert(category, symbol.into());
    }

    /// Stable identifier of the priced content: a hash over the serialized
    /// form, so two models with the same costs and classes share a digest.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_json().as_bytes());
        format!("sha256:{}", hex::encode(hash))
    }

    pub fn from_json(text: &str) -> Result<CostModel, ModelError> {
        let file: ModelFileIn =
            serde_json::from_str(text).map_err(|e| ModelError::Format(e.to_string()))?;

        let mut model = default_model().with_name(file.name);
        for (symbol, raw) in file.unit_cost_ms {
            let category = CostCategory::from_symbol(&symbol)
                .ok_or_else(|| ModelError::Value(format!("unknown cost category `{symbol}`")))?;
            let text = raw.get();
            if text.starts_with('"') || text.starts_with('{') || text.starts_with('[') {
                return Err(ModelError::Format(format!(
                    "unit cost for {symbol} must be a number, found {text}"
                )));
            }
            let cost = UnitCost::parse(text).map_err(|err| match err {
                ModelError::Value(msg) => ModelError::Value(format!("{symbol}: {msg}")),
                other => other,
            })?;
            model.set_unit_cost(category, cost);
        }
        for (function, symbol) in file.function_classes {
            let category = CostCategory::from_symbol(&symbol).ok_or_else(|| {
                ModelError::Value(format!(
                    "unknown function class `{symbol}` for `{function}`"
                ))
            })?;
            model.classify_as(function, category)?;
        }
        Ok(model)
    }

    /// Pretty-printed JSON in the model file format, categories in report order.
    pub fn to_json(&self) -> String {
        let raw = |c: CostCategory| {
            RawValue::from_string(self.unit_cost(c).as_str().to_string())
                .expect("unit costs are valid JSON numbers")
        };
        let out = ModelFileOut {
            name: &self.name,
            unit_cost_ms: UnitCostsOut {
                th: raw(CostCategory::Hash),
                pm: raw(CostCategory::PointMul),
                pe: raw(CostCategory::PubEnc),
                pd: raw(CostCategory::PubDec),
                se: raw(CostCategory::SymEnc),
                sd: raw(CostCategory::SymDec),
            },
            function_classes: self
                .function_classes
                .iter()
                .map(|(name, cat)| (name.as_str(), cat.symbol()))
                .collect(),
        };
        serde_json::to_string_pretty(&out).expect("model serializes")
    }
}

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFileIn {
    name: String,
    #[serde(default)]
    unit_cost_ms: BTreeMap<String, Box<RawValue>>,
    #[serde(default)]
    function_classes: BTreeMap<String, String>,
}

#[derive(Serialize)]
struct ModelFileOut<'a> {
    name: &'a str,
    unit_cost_ms: UnitCostsOut,
    function_classes: BTreeMap<&'a str, &'static str>,
}

#[derive(Serialize)]
struct UnitCostsOut {
    #[serde(rename = "Th")]
    th: Box<RawValue>,
    #[serde(rename = "Pm")]
    pm: Box<RawValue>,
    #[serde(rename = "Pe")]
    pe: Box<RawValue>,
    #[serde(rename = "Pd")]
    pd: Box<RawValue>,
    #[serde(rename = "Se")]
    se: Box<RawValue>,
    #[serde(rename = "Sd")]
    sd: Box<RawValue>,
}

/// Reads a model file; categories it leaves out keep their default costs.
pub fn load_model(path: &Path) -> Result<CostModel, ModelError> {
    let text = fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    CostModel::from_json(&text)
}

pub fn save_model(model: &CostModel, path: &Path) -> Result<(), ModelError> {
    let mut text = model.to_json();
    text.push('\n');
    fs::write(path, text).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// `None` means unclassified, which is priced at zero.
pub fn classify_function(model: &CostModel, name: &str) -> Option<CostCategory> {
    model.function_classes.get(name).copied()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_table() {
        let m = default_model();
        let rendered: Vec<(&str, &str)> = CostCategory::ALL
            .iter()
            .map(|c| (c.symbol(), m.unit_cost(*c).as_str()))
            .collect();
        assert_eq!(
            rendered,
            vec![
                ("Th", "0.0023"),
                ("Pm", "2.226"),
                ("Pe", "3.8500"),
                ("Pd", "3.8500"),
                ("Se", "0.0046"),
                ("Sd", "0.0046"),
            ]
        );
        assert_eq!(m.unit_cost_as::<f64>(CostCategory::PubEnc), 3.85);
        assert_eq!(m.unit_cost_as::<f64>(CostCategory::Hash), 0.0023);
        assert!(m.function_classes().is_empty());
        assert_eq!(m.display_symbol(CostCategory::PointMul), "Pm");
    }

    #[test]
    fn decimal_parsing() {
        assert_eq!(parse_decimal("3.8500"), Some(Rational64::new(385, 100)));
        assert_eq!(parse_decimal("0"), Some(Rational64::from_integer(0)));
        assert_eq!(parse_decimal("2.5e-3"), Some(Rational64::new(25, 10_000)));
        assert_eq!(parse_decimal("1E2"), Some(Rational64::from_integer(100)));
        assert_eq!(parse_decimal("-1"), Some(Rational64::from_integer(-1)));
        for bad in ["", ".5", "1.", "1.2.3", "abc", "1e", "--1", "1e99"] {
            assert_eq!(parse_decimal(bad), None, "{bad}");
        }
    }

    #[test]
    fn partial_override_keeps_defaults() {
        let m =
            CostModel::from_json(r#"{"name": "fast-aes", "unit_cost_ms": {"Se": 0.01}}"#).unwrap();
        assert_eq!(m.name(), "fast-aes");
        assert_eq!(m.unit_cost(CostCategory::SymEnc).as_str(), "0.01");
        let defaults = default_model();
        for c in CostCategory::ALL {
            if c != CostCategory::SymEnc {
                assert_eq!(m.unit_cost(c), defaults.unit_cost(c), "{c}");
            }
        }
    }

    #[test]
    fn classification_from_file() {
        let m =
            CostModel::from_json(r#"{"name": "x", "function_classes": {"H1": "Th", "mul": "Pm"}}"#)
                .unwrap();
        assert_eq!(classify_function(&m, "H1"), Some(CostCategory::Hash));
        assert_eq!(classify_function(&m, "mul"), Some(CostCategory::PointMul));
        assert_eq!(classify_function(&m, "Dec"), None);
    }

    #[test]
    fn rejects_bad_values() {
        let neg = CostModel::from_json(r#"{"name": "x", "unit_cost_ms": {"Se": -1}}"#);
        assert!(matches!(neg, Err(ModelError::Value(_))));
        let unknown_cat = CostModel::from_json(r#"{"name": "x", "unit_cost_ms": {"Xx": 1}}"#);
        assert!(matches!(unknown_cat, Err(ModelError::Value(_))));
        let enc_class = CostModel::from_json(r#"{"name": "x", "function_classes": {"f": "Pe"}}"#);
        assert!(matches!(enc_class, Err(ModelError::Value(_))));
        let bogus_class = CostModel::from_json(r#"{"name": "x", "function_classes": {"f": "Zz"}}"#);
        assert!(matches!(bogus_class, Err(ModelError::Value(_))));
    }

    #[test]
    fn rejects_malformed_files() {
        for text in [
            r#"{"unit_cost_ms": {}}"#,
            r#"{"name": "x", "extra": 1}"#,
            r#"{"name": "x", "unit_cost_ms": {"Th": "0.1"}}"#,
            r#"{"name": "x", "unit_cost_ms": {"Th": null}}"#,
            "not json",
        ] {
            assert!(
                matches!(CostModel::from_json(text), Err(ModelError::Format(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn json_round_trip_preserves_literals() {
        let mut m =
            CostModel::from_json(r#"{"name": "x", "unit_cost_ms": {"Pm": 2.2260, "Th": 1e-3}}"#)
                .unwrap();
        m.classify_as("h", CostCategory::Hash).unwrap();
        let text = m.to_json();
        assert!(text.contains("\"Pm\": 2.2260"));
        assert!(text.contains("\"Th\": 1e-3"));
        assert_eq!(CostModel::from_json(&text).unwrap(), m);
    }

    #[test]
    fn digest_tracks_content() {
        let a = default_model();
        let mut b = default_model();
        assert_eq!(a.digest(), b.digest());
        b.classify_as("h", CostCategory::Hash).unwrap();
        assert_ne!(a.digest(), b.digest());
    }
}
