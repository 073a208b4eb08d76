//! Text tables, CSV and SVG charts for analyses and comparisons.

mod csv_out;
mod svg;
mod table;

pub use csv_out::{export_csv, write_csv, CsvRow, CSV_HEADER};
pub use svg::{render_svg, write_svg, ChartError, ChartKind, ChartMode, ChartSpec, Series};
pub use table::{render_comparison_table, render_result_table};

/// Rounds half-up to four decimals and prints all four, e.g. `19.8704`, `23.1000`.
///
/// The value is first printed to twelve decimals so binary noise such as
/// `0.018399999999999999` does not decide the rounding.
pub fn format_ms(value: f64) -> String {
    if !value.is_finite() {
        return value.to_string();
    }
    let negative = value < 0.0;
    let text = format!("{:.12}", value.abs());
    let (int_part, frac_part) = text.split_once('.').expect("fixed-point format has a dot");
    let mut scaled: u128 = format!("{int_part}{}", &frac_part[..4])
        .parse()
        .expect("digits");
    if frac_part.as_bytes()[4] >= b'5' {
        scaled += 1;
    }
    let sign = if negative && scaled != 0 { "-" } else { "" };
    format!("{sign}{}.{:04}", scaled / 10_000, scaled % 10_000)
}

/// [`format_ms`] without trailing zeros: `7.7`, `0.0184`, `8`.
pub fn format_compact(value: f64) -> String {
    let full = format_ms(value);
    let trimmed = full.trim_end_matches('0').trim_end_matches('.');
    trimmed.to_string()
}
