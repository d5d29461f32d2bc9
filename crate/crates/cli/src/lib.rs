//! Command-line front end for `laxdyn-core`.
//!
//! Inputs are JSON files (see [`schema`]), `-` for standard input, or
//! `examples:<name>` for a built-in fixture. Every command prints a report
//! as pretty JSON or as a plain-text table; output is deterministic for a
//! given input and seed.
//!
//! Exit codes: 0 success, 1 validation violation (or a negative answer such
//! as "not isomorphic"), 2 usage or parse error, 3 search budget exceeded.

pub mod commands;
pub mod schema;

use std::io::Read;

use clap::{Parser, Subcommand, ValueEnum};
use laxdyn_core::fixtures::{self, Payload};
use laxdyn_core::interaction::InteractiveFamily;
use laxdyn_core::{random, OpenDynamic, DEFAULT_SEARCH_CAP};
use thiserror::Error;

use crate::schema::{DynamicJson, FamilyJson, SchemaError};

#[derive(Debug, Parser)]
#[command(name = "laxdyn", version, about = "Finite open dynamics: realizations, interactions, global dynamics")]
pub struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Cap on enumerated candidates in searches.
    #[arg(long, global = true, env = "LAXDYN_CAP", default_value_t = DEFAULT_SEARCH_CAP,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub cap: u64,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = random::DEFAULT_SEED)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GlobalMode {
    Transparent,
    Demanded,
    Responsible,
    Opaque,
    J,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the laws of a dynamic, or build and classify a family.
    Validate { input: String },
    /// Enumerate the realizations of a dynamic.
    Realize { input: String },
    /// Classify a family's request and its coherent part.
    ClassifyRequest { input: String },
    /// The four connectivity structures of a family's request.
    Connectivity { input: String },
    /// A global dynamic of an interactive family.
    Global {
        input: String,
        #[arg(long, value_enum, default_value_t = GlobalMode::Demanded)]
        mode: GlobalMode,
        /// Member indices whose parameters stay visible (mode `j`).
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        j: Option<Vec<String>>,
    },
    /// The control system of a functorial hyper-deterministic dynamic.
    ControlSystem { input: String },
    /// List the built-in fixtures, or dump one as JSON.
    Examples { name: Option<String> },
    /// Search for an isomorphism between two dynamics.
    IsoCheck { first: String, second: String },
    /// Seeded randomized checks of the library's laws.
    Laws {
        #[arg(long, default_value_t = 200)]
        cases: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("violation: {0}")]
    Violation(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Violation(_) => 1,
            CliError::Usage(_) | CliError::Parse(_) => 2,
            CliError::Budget(_) => 3,
        }
    }
}

impl From<SchemaError> for CliError {
    fn from(e: SchemaError) -> Self {
        match e {
            SchemaError::Malformed(m) => CliError::Parse(m),
            SchemaError::Invalid(m) => CliError::Violation(m),
            SchemaError::Budget(cap) => CliError::Budget(format!("search budget of {cap} candidates exceeded")),
        }
    }
}

/// A rendered command result with its exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub text: String,
    pub code: i32,
}

pub enum Input {
    Dynamic(OpenDynamic),
    Family(InteractiveFamily),
}

fn read_source(input: &str) -> Result<String, CliError> {
    if input == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Parse(format!("stdin: {e}")))?;
        return Ok(s);
    }
    std::fs::read_to_string(input).map_err(|e| CliError::Parse(format!("{input}: {e}")))
}

/// Parses a dynamic or family document. A document with a `dynamic` field
/// (such as a `global` report) stands for that dynamic.
pub fn parse_input(text: &str, cap: u64) -> Result<Input, CliError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    let parse_err = |e: serde_json::Error| CliError::Parse(e.to_string());
    let value = match value.get("dynamic") {
        Some(d) => d.clone(),
        None if value.get("members").is_some() => {
            let f: FamilyJson = serde_json::from_value(value).map_err(parse_err)?;
            return Ok(Input::Family(f.to_core(cap)?));
        }
        None => value,
    };
    let d: DynamicJson = serde_json::from_value(value).map_err(parse_err)?;
    Ok(Input::Dynamic(d.to_core()?))
}

pub fn load(input: &str, cap: u64) -> Result<Input, CliError> {
    if let Some(name) = input.strip_prefix("examples:") {
        let fx = fixtures::fixture(name).map_err(|e| CliError::Parse(e.to_string()))?;
        return Ok(match fx.payload {
            Payload::Dynamic(d) => Input::Dynamic(d),
            Payload::Family(f) => Input::Family(f),
        });
    }
    parse_input(&read_source(input)?, cap)
}

pub fn load_dynamic(input: &str, cap: u64) -> Result<OpenDynamic, CliError> {
    match load(input, cap)? {
        Input::Dynamic(d) => Ok(d),
        Input::Family(_) => Err(CliError::Usage(format!("`{input}` is a family; this command needs a dynamic"))),
    }
}

pub fn load_family(input: &str, cap: u64) -> Result<InteractiveFamily, CliError> {
    match load(input, cap)? {
        Input::Family(f) => Ok(f),
        Input::Dynamic(_) => Err(CliError::Usage(format!("`{input}` is a dynamic; this command needs a family"))),
    }
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<Output, CliError> {
    commands::dispatch(cli)
}

/// Parses arguments and runs them, folding every error into an exit code.
/// Returns the text for standard output, the text for standard error and
/// the exit code.
pub fn run_args<I, T>(args: I) -> (String, String, i32)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 { (text, String::new(), 0) } else { (String::new(), text, code) };
        }
    };
    match run(&cli) {
        Ok(out) => (out.text, String::new(), out.code),
        Err(e) => (String::new(), format!("error: {e}\n"), e.code()),
    }
}
