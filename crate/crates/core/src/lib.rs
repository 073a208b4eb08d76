//! Static computation and communication cost analysis for authentication and
//! key-exchange protocols written in CAS+.
//!
//! The pipeline is: [`syntax::parse_source`] → [`syntax::resolve`] →
//! [`analyzer::analyze`] with a [`cost_model::CostModel`], then
//! [`store`] for persistence and comparison and [`report`] for output.

pub mod analyzer;
pub mod cli;
pub mod cost_model;
pub mod report;
pub mod scalar;
pub mod store;
pub mod syntax;

pub use analyzer::{
    analyze, communication_cost, compute_cost, count_operations, AnalysisResult, OperationCounts,
    RoleAttribution, Tally,
};
pub use cost_model::{
    classify_function, default_model, load_model, save_model, CostCategory, CostModel, ModelError,
    UnitCost,
};
pub use scalar::CostScalar;
pub use store::{
    compare, load_results, save_result, Comparison, ComparisonSet, StoreError, StoredResult,
};
pub use syntax::{parse_source, pretty_print, resolve, ProtocolSpec, ResolvedSpec};

/// Milliseconds in binary floating point, the type reports and result files use.
pub type Millis = f64;

/// Milliseconds as an exact fraction; decimal unit costs convert without loss.
pub type ExactMillis = num_rational::Rational64;

/// Single-precision milliseconds.
pub type Millis32 = f32;
