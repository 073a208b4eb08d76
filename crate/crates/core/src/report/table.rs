use std::fmt::Write;

use num_rational::Rational64;

use super::format_ms;
use crate::analyzer::AnalysisResult;
use crate::cost_model::{CostCategory, CostModel};
use crate::scalar::CostScalar;
use crate::store::Comparison;

/// Per-category breakdown for one protocol with the two total lines at the bottom.
pub fn render_result_table(result: &AnalysisResult, model: &CostModel) -> String {
    let header = ["Operation", "Symbol", "Count", "Unit (ms)", "Subtotal (ms)"];
    let mut rows: Vec<[String; 5]> = Vec::new();
    for category in CostCategory::ALL {
        let count = result.counts.get(category);
        let unit = model.unit_cost(category);
        let subtotal = Rational64::from_count(count) * unit.exact();
        rows.push([
            category.description().to_string(),
            model.display_symbol(category).to_string(),
            count.to_string(),
            unit.as_str().to_string(),
            format_ms(subtotal.to_f64()),
        ]);
    }

    let mut out = String::new();
    writeln!(out, "Protocol: {}", result.protocol_name).unwrap();
    writeln!(out, "Cost model: {}", result.model_name).unwrap();
    out.push('\n');
    out.push_str(&grid(&header, &rows, &[false, false, true, true, true]));

    let unclassified = result.counts.unclassified_calls();
    if !unclassified.is_empty() {
        let calls: Vec<String> = unclassified
            .iter()
            .map(|(name, n)| format!("{name} x{n}"))
            .collect();
        writeln!(out, "Unclassified calls (0 ms): {}", calls.join(", ")).unwrap();
    }
    out.push('\n');
    writeln!(
        out,
        "Total computation (ms): {}",
        format_ms(result.computation_ms)
    )
    .unwrap();
    writeln!(out, "Communication: {}", result.communication).unwrap();
    out
}

/// One row per protocol in set order, then both rankings and any warnings.
pub fn render_comparison_table(cmp: &Comparison) -> String {
    let header = ["No", "Protocol", "Computation (ms)", "Communication"];
    let rows: Vec<[String; 4]> = cmp
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            [
                (i + 1).to_string(),
                row.protocol_name.clone(),
                format_ms(row.computation_ms),
                row.communication.to_string(),
            ]
        })
        .collect();

    let mut out = grid(&header, &rows, &[false, false, true, true]);
    out.push('\n');
    writeln!(
        out,
        "Ranking by computation: {}",
        cmp.computation_ranking().join(" < ")
    )
    .unwrap();
    writeln!(
        out,
        "Ranking by communication: {}",
        cmp.communication_ranking().join(" < ")
    )
    .unwrap();
    for warning in &cmp.warnings {
        writeln!(out, "warning: {warning}").unwrap();
    }
    out
}

fn grid<const N: usize>(header: &[&str; N], rows: &[[String; N]], right: &[bool; N]) -> String {
    let mut widths = header.map(|h| h.chars().count());
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }

    let mut out = String::new();
    let mut line = |cells: &mut dyn Iterator<Item = &str>| {
        let mut text = String::new();
        for (i, cell) in cells.enumerate() {
            if i > 0 {
                text.push_str("  ");
            }
            if right[i] {
                write!(text, "{cell:>width$}", width = widths[i]).unwrap();
            } else {
                write!(text, "{cell:<width$}", width = widths[i]).unwrap();
            }
        }
        out.push_str(text.trim_end());
        out.push('\n');
    };
    line(&mut header.iter().copied());
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    line(&mut rule.iter().map(String::as_str));
    for row in rows {
        line(&mut row.iter().map(String::as_str));
    }
    out
}
