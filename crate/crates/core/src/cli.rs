//! Command-line front end: `check`, `analyze`, `compare`, `chart`.
//!
//! Only the requested artifact goes to stdout; diagnostics, warnings and
//! progress notes go to stderr.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use clap::{Parser, Subcommand, ValueEnum};

use crate::analyzer::{analyze, AnalysisResult};
use crate::cost_model::{default_model, load_model, CostModel, ModelError};
use crate::report::{
    render_comparison_table, render_result_table, write_csv, write_svg, ChartError, ChartMode,
    ChartSpec, CsvRow,
};
use crate::store::{self, StoreError, StoredResult};
use crate::syntax::{parse_bytes, resolve, ParseError, ResolvedSpec, SourceSpan};

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    Usage = 1,
    Syntax = 2,
    Semantic = 3,
    Io = 4,
    Store = 5,
}

impl From<ExitCode> for i32 {
    fn from(code: ExitCode) -> i32 {
        code as i32
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "protocost",
    version,
    about = "Computation and communication cost analysis for CAS+ protocol specifications"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and resolve a protocol file, reporting any problems
    Check {
        /// Protocol source (.cas or .cas+)
        file: PathBuf,
    },
    /// Count operations and price them
    Analyze {
        file: PathBuf,
        /// Cost model JSON; categories it omits keep the default costs
        #[arg(long)]
        model: Option<PathBuf>,
        /// Also save the result into this directory
        #[arg(long)]
        store: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = AnalyzeFormat::Table)]
        format: AnalyzeFormat,
    },
    /// Compare stored results
    Compare {
        #[arg(long)]
        store: PathBuf,
        /// Protocol names as they appear after the `protocol` keyword
        #[arg(required = true)]
        names: Vec<String>,
        #[arg(long, value_enum, default_value_t = CompareFormat::Table)]
        format: CompareFormat,
        /// Write a grouped bar chart of both totals
        #[arg(long)]
        chart: Option<PathBuf>,
    },
    /// Draw a per-category bar chart for one protocol
    Chart {
        /// Protocol file, or the name of a stored result when --store is given
        input: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Counts)]
        mode: Mode,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        store: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum AnalyzeFormat {
    Table,
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum CompareFormat {
    Table,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Counts,
    Costs,
}

/// A failure already rendered for the user, with its exit status.
struct Failure {
    code: ExitCode,
    lines: Vec<String>,
}

impl Failure {
    fn new(code: ExitCode, line: impl Into<String>) -> Self {
        Failure {
            code,
            lines: vec![line.into()],
        }
    }
}

type CmdResult = Result<(), Failure>;

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Io<'_> {
    fn emit(&mut self, text: &str) -> CmdResult {
        self.out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::new(ExitCode::Io, format!("error: writing output: {e}")))
    }

    fn note(&mut self, line: &str) {
        let _ = writeln!(self.err, "{line}");
    }
}

/// Runs one command line and returns its exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let text = err.render().to_string();
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    ExitCode::Success
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    ExitCode::Usage
                }
            };
        }
    };

    let mut io = Io {
        out: stdout,
        err: stderr,
    };
    let outcome = match cli.command {
        Command::Check { file } => check(&mut io, &file),
        Command::Analyze {
            file,
            model,
            store,
            format,
        } => analyze_cmd(&mut io, &file, model.as_deref(), store.as_deref(), format),
        Command::Compare {
            store,
            names,
            format,
            chart,
        } => compare_cmd(&mut io, &store, &names, format, chart.as_deref()),
        Command::Chart {
            input,
            out,
            mode,
            model,
            store,
        } => chart_cmd(
            &mut io,
            &input,
            &out,
            mode,
            model.as_deref(),
            store.as_deref(),
        ),
    };
    let _ = io.out.flush();
    match outcome {
        Ok(()) => ExitCode::Success,
        Err(failure) => {
            for line in &failure.lines {
                io.note(line);
            }
            failure.code
        }
    }
}

fn located(path: &Path, span: Option<SourceSpan>, level: &str, message: &str) -> String {
    match span {
        Some(span) => format!("{}:{span}: {level}: {message}", path.display()),
        None => format!("{}: {level}: {message}", path.display()),
    }
}

fn parse_message(err: &ParseError) -> String {
    match err {
        ParseError::Lex { found, .. } => format!("unexpected character {found:?}"),
        ParseError::Syntax {
            expected, found, ..
        } => format!("expected {expected}, found {found}"),
        ParseError::MissingSection { name } => format!("missing required section `{name}`"),
    }
}

fn has_protocol_extension(path: &Path) -> bool {
    path.file_name()
        .map(|n| n.to_string_lossy().to_ascii_lowercase())
        .is_some_and(|n| n.ends_with(".cas") || n.ends_with(".cas+"))
}

struct Loaded {
    bytes: Vec<u8>,
    spec: ResolvedSpec,
}

/// Reads, parses and resolves a protocol file; warnings go to stderr.
fn load_protocol(io: &mut Io<'_>, path: &Path) -> Result<Loaded, Failure> {
    let bytes = fs::read(path).map_err(|e| {
        Failure::new(
            ExitCode::Io,
            format!("error: cannot read {}: {e}", path.display()),
        )
    })?;
    if !has_protocol_extension(path) {
        io.note(&located(
            path,
            None,
            "warning",
            "protocol files normally end in .cas or .cas+",
        ));
    }
    let parsed = parse_bytes(&bytes).map_err(|err| {
        Failure::new(
            ExitCode::Syntax,
            located(path, err.span(), "error", &parse_message(&err)),
        )
    })?;
    let spec = resolve(parsed).map_err(|errs| Failure {
        code: ExitCode::Semantic,
        lines: errs
            .0
            .iter()
            .map(|e| located(path, Some(e.span), "error", &e.description))
            .collect(),
    })?;
    Ok(Loaded { bytes, spec })
}

fn model_from(path: Option<&Path>) -> Result<CostModel, Failure> {
    let Some(path) = path else {
        return Ok(default_model());
    };
    load_model(path).map_err(|err| {
        let code = match err {
            ModelError::Io { .. } => ExitCode::Io,
            ModelError::Format(_) | ModelError::Value(_) => ExitCode::Usage,
        };
        Failure::new(code, format!("error: {}: {err}", path.display()))
    })
}

fn store_failure(err: StoreError) -> Failure {
    let code = match err {
        StoreError::Io { .. } => ExitCode::Io,
        _ => ExitCode::Store,
    };
    Failure::new(code, format!("error: {err}"))
}

fn chart_failure(err: ChartError) -> Failure {
    let code = match err {
        ChartError::Io { .. } => ExitCode::Io,
        _ => ExitCode::Usage,
    };
    Failure::new(code, format!("error: {err}"))
}

/// `SOURCE_DATE_EPOCH` when set, otherwise the source file's modification
/// time, so repeated runs over an unchanged file print identical JSON.
fn creation_time(path: &Path) -> DateTime<Utc> {
    if let Some(epoch) = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.trim().parse::<i64>().ok())
        .and_then(|secs| DateTime::from_timestamp(secs, 0))
    {
        return epoch;
    }
    fs::metadata(path)
        .and_then(|m| m.modified())
        .map(DateTime::<Utc>::from)
        .unwrap_or_else(|_| Utc::now())
}

fn check(io: &mut Io<'_>, path: &Path) -> CmdResult {
    let loaded = load_protocol(io, path)?;
    for warning in loaded.spec.warnings() {
        io.note(&located(path, warning.span, "warning", &warning.message));
    }
    let spec = loaded.spec.spec();
    io.emit(&format!(
        "{}: ok ({} messages, {} declarations)\n",
        path.display(),
        spec.messages.len(),
        spec.declarations.len()
    ))
}

fn analyze_file(io: &mut Io<'_>, path: &Path, model: &CostModel) -> Result<StoredResult, Failure> {
    let loaded = load_protocol(io, path)?;
    let result = analyze(&loaded.spec, model);
    let lints = loaded.spec.warnings();
    for warning in lints {
        io.note(&located(path, warning.span, "warning", &warning.message));
    }
    for warning in &result.warnings[lints.len()..] {
        io.note(&format!("{}: warning: {warning}", path.display()));
    }
    Ok(StoredResult::new(
        result,
        creation_time(path),
        path.display().to_string(),
        &loaded.bytes,
    ))
}

fn csv_text<'a>(rows: impl IntoIterator<Item = CsvRow<'a>>) -> Result<String, Failure> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows)
        .map_err(|e| Failure::new(ExitCode::Io, format!("error: writing CSV: {e}")))?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

fn analyze_cmd(
    io: &mut Io<'_>,
    path: &Path,
    model_path: Option<&Path>,
    store_dir: Option<&Path>,
    format: AnalyzeFormat,
) -> CmdResult {
    let model = model_from(model_path)?;
    let stored = analyze_file(io, path, &model)?;

    let text = match format {
        AnalyzeFormat::Table => render_result_table(&stored.result, &model),
        AnalyzeFormat::Csv => csv_text([CsvRow::from(&stored.result)])?,
        AnalyzeFormat::Json => stored.to_json() + "\n",
    };
    io.emit(&text)?;

    if let Some(dir) = store_dir {
        let saved = store::save_result(&stored, dir).map_err(store_failure)?;
        io.note(&format!("stored {}", saved.display()));
    }
    Ok(())
}

fn compare_cmd(
    io: &mut Io<'_>,
    store_dir: &Path,
    names: &[String],
    format: CompareFormat,
    chart: Option<&Path>,
) -> CmdResult {
    let set = store::load_results(store_dir, names).map_err(store_failure)?;
    let cmp = store::compare(&set).map_err(store_failure)?;

    match format {
        CompareFormat::Table => io.emit(&render_comparison_table(&cmp))?,
        CompareFormat::Csv => {
            io.emit(&csv_text(cmp.csv_rows())?)?;
            for warning in &cmp.warnings {
                io.note(&format!("warning: {warning}"));
            }
        }
    }

    if let Some(out) = chart {
        write_svg(&ChartSpec::totals(&cmp), out).map_err(chart_failure)?;
        io.note(&format!("wrote {}", out.display()));
    }
    Ok(())
}

fn chart_cmd(
    io: &mut Io<'_>,
    input: &str,
    out: &Path,
    mode: Mode,
    model_path: Option<&Path>,
    store_dir: Option<&Path>,
) -> CmdResult {
    let model = model_from(model_path)?;
    let input_path = Path::new(input);

    let result: AnalysisResult = if input_path.is_file() {
        analyze_file(io, input_path, &model)?.result
    } else if let Some(dir) = store_dir {
        let set = store::load_results(dir, &[input.to_string()]).map_err(store_failure)?;
        let stored = set.entries()[0].result.clone();
        if mode == Mode::Costs && stored.model_digest != model.digest() {
            io.note(&format!(
                "warning: `{}` was analyzed with model `{}`; costs are recomputed with `{}`",
                stored.protocol_name,
                stored.model_name,
                model.name()
            ));
        }
        stored
    } else {
        return Err(Failure::new(
            ExitCode::Io,
            format!(
                "error: cannot read {input}: no such file (pass --store to chart a stored result)"
            ),
        ));
    };

    let mode = match mode {
        Mode::Counts => ChartMode::Counts,
        Mode::Costs => ChartMode::Costs,
    };
    write_svg(&ChartSpec::per_category(&result, mode, &model), out).map_err(chart_failure)?;
    io.note(&format!("wrote {}", out.display()));
    Ok(())
}
