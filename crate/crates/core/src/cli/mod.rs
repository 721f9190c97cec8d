//! The `calibr` command line: argument parsing, strict config files,
//! deterministic JSON reports and exit codes (0 pass, 1 failed check, 2 bad
//! input or numerical failure).

mod args;
mod commands;

use std::io::Write;
use std::path::Path;

use clap::Parser;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

pub use args::*;

use crate::error::{Error, Result};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// What a subcommand hands back for output.
pub struct Outcome {
    pub passed: bool,
    pub result: Value,
    /// Tabular form of the result, when there is one.
    pub csv: Option<String>,
    /// CSV is the natural output (batch modes).
    pub prefer_csv: bool,
    /// Printed verbatim instead of a report (form dumps).
    pub raw: Option<String>,
}

impl Outcome {
    pub fn new(passed: bool, result: impl Serialize) -> Result<Self> {
        Ok(Self { passed, result: serde_json::to_value(result)?, csv: None, prefer_csv: false, raw: None })
    }

    pub fn with_csv(mut self, csv: String, prefer: bool) -> Self {
        self.csv = Some(csv);
        self.prefer_csv = prefer;
        self
    }
}

/// Floats as `{:.16e}` (17 significant digits), so equal inputs give equal bytes.
struct ScientificFloats;

impl serde_json::ser::Formatter for ScientificFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes with sorted keys and scientific floats.
pub fn to_report_json(value: &impl Serialize) -> Result<String> {
    // Value maps are ordered by key
    let value = serde_json::to_value(value)?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, ScientificFloats);
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

/// Reads a JSON file, reporting the file, line and column of any error.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse { location: path.display().to_string(), message: e.to_string() })?;
    serde_json::from_str(&text).map_err(|e| {
        let mut message = e.to_string();
        if let Some(cut) = message.rfind(" at line ") {
            message.truncate(cut);
        }
        Error::Parse { location: format!("{}:{}:{}", path.display(), e.line(), e.column()), message }
    })
}

fn resolve(cli: Cli) -> Result<RunConfig> {
    match (cli.config, cli.command) {
        (Some(_), Some(_)) => Err(Error::InvalidParameter("--config cannot be combined with a subcommand".into())),
        (Some(path), None) => {
            let mut cfg: RunConfig = read_json(&path)?;
            if cli.threads.is_some() {
                cfg.threads = cli.threads;
            }
            Ok(cfg)
        }
        (None, Some(command)) => Ok(RunConfig {
            command,
            seed: cli.seed.unwrap_or(crate::grassmann::DEFAULT_SEED),
            threads: cli.threads,
            format: cli.format,
            output: cli.output,
        }),
        (None, None) => Err(Error::InvalidParameter("a subcommand or --config is required (see --help)".into())),
    }
}

#[derive(Serialize)]
struct Report<'a> {
    command: &'static str,
    config: &'a RunConfig,
    passed: bool,
    result: &'a Value,
    version: &'static str,
}

fn emit(cfg: &RunConfig, outcome: &Outcome) -> Result<()> {
    let write = |text: &str| -> Result<()> {
        match &cfg.output {
            Some(path) => std::fs::write(path, text)?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    };
    if let Some(raw) = &outcome.raw {
        return write(raw);
    }
    let report = Report {
        command: cfg.command.name(),
        config: cfg,
        passed: outcome.passed,
        result: &outcome.result,
        version: env!("CARGO_PKG_VERSION"),
    };
    match cfg.format {
        Some(Format::Csv) => {
            let csv = outcome
                .csv
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter(format!("`{}` has no CSV output", cfg.command.name())))?;
            write(csv)?;
            if cfg.output.is_some() {
                // the CSV went to the file; the audit report goes to stdout
                std::io::stdout().write_all(to_report_json(&report)?.as_bytes())?;
            }
            Ok(())
        }
        _ => write(&to_report_json(&report)?),
    }
}

/// Runs a resolved config and returns the exit code.
pub fn run_config(mut cfg: RunConfig) -> i32 {
    if let Some(n) = cfg.threads {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let outcome = match commands::dispatch(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    if cfg.format.is_none() {
        cfg.format = Some(if outcome.prefer_csv { Format::Csv } else { Format::Json });
    }
    if let Err(e) = emit(&cfg, &outcome) {
        eprintln!("error: {e}");
        return EXIT_INPUT;
    }
    if outcome.passed {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

/// Entry point for the binary.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match resolve(cli) {
        Ok(cfg) => run_config(cfg),
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

/// Runs a command line in-process and returns the report it would print.
/// The first argument is the program name, as for the binary.
pub fn report_from_args<I, T>(args: I) -> Result<Value>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let cfg = resolve(cli)?;
    let outcome = commands::dispatch(&cfg)?;
    if let Some(raw) = &outcome.raw {
        return Ok(serde_json::from_str(raw)?);
    }
    let report = Report {
        command: cfg.command.name(),
        config: &cfg,
        passed: outcome.passed,
        result: &outcome.result,
        version: env!("CARGO_PKG_VERSION"),
    };
    Ok(serde_json::to_value(report)?)
}
