use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use crate::analyzer::{AnalysisResult, OperationCounts};
use crate::cost_model::CostCategory;
use crate::store::Comparison;

pub const CSV_HEADER: [&str; 9] = [
    "protocol",
    "Th",
    "Pm",
    "Pe",
    "Pd",
    "Se",
    "Sd",
    "computation_ms",
    "communication",
];

/// One CSV line: a protocol's counts and totals.
#[derive(Debug, Clone, Copy)]
pub struct CsvRow<'a> {
    pub protocol: &'a str,
    pub counts: &'a OperationCounts,
    pub computation_ms: f64,
    pub communication: u64,
}

impl<'a> From<&'a AnalysisResult> for CsvRow<'a> {
    fn from(r: &'a AnalysisResult) -> Self {
        CsvRow {
            protocol: &r.protocol_name,
            counts: &r.counts,
            computation_ms: r.computation_ms,
            communication: r.communication,
        }
    }
}

impl Comparison {
    pub fn csv_rows(&self) -> impl Iterator<Item = CsvRow<'_>> {
        self.rows.iter().map(|r| CsvRow {
            protocol: &r.protocol_name,
            counts: &r.counts,
            computation_ms: r.computation_ms,
            communication: r.communication,
        })
    }
}

/// RFC 4180 output (CRLF line ends, quoting as needed); numbers at full precision.
pub fn write_csv<'a, W: Write>(
    out: W,
    rows: impl IntoIterator<Item = CsvRow<'a>>,
) -> io::Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(out);
    writer.write_record(CSV_HEADER)?;
    for row in rows {
        let mut record = vec![row.protocol.to_string()];
        record.extend(
            CostCategory::ALL
                .iter()
                .map(|c| row.counts.get(*c).to_string()),
        );
        record.push(row.computation_ms.to_string());
        record.push(row.communication.to_string());
        writer.write_record(&record)?;
    }
    writer.flush()
}

pub fn export_csv<'a>(rows: impl IntoIterator<Item = CsvRow<'a>>, path: &Path) -> io::Result<()> {
    write_csv(File::create(path)?, rows)
}
