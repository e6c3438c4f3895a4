use std::path::PathBuf;
use std::process::ExitCode;

use silverner::corpus::{LoadError, ValidationError};
use silverner::filter::FilterError;
use silverner::ner_eval::EvalError;
use silverner::pipeline::PipelineError;
use silverner::retrieval::RetrievalError;

pub const USAGE: u8 = 2;
pub const INPUT: u8 = 3;
pub const INVARIANT: u8 = 4;
pub const OTHER: u8 = 1;

/// An input path that does not exist.
#[derive(Debug, thiserror::Error)]
#[error("missing input {flag}: {}", path.display())]
pub struct MissingInput {
    pub flag: &'static str,
    pub path: PathBuf,
}

/// Bad argument combination detected after parsing.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct Usage(pub String);

fn classify(err: &anyhow::Error) -> (u8, &'static str) {
    for cause in err.chain() {
        if cause.is::<MissingInput>() {
            return (INPUT, "missing-input");
        }
        if cause.is::<Usage>() {
            return (USAGE, "usage");
        }
        if let Some(e) = cause.downcast_ref::<LoadError>() {
            return match e {
                LoadError::Io { .. } => (INPUT, e.kind()),
                _ => (INVARIANT, e.kind()),
            };
        }
        if cause.is::<ValidationError>() {
            return (INVARIANT, "invariant-violation");
        }
        if let Some(e) = cause.downcast_ref::<PipelineError>() {
            return match e {
                PipelineError::Io(_) => (INPUT, "io"),
                PipelineError::Config(_) => (USAGE, "invalid-config"),
                _ => (INVARIANT, "invariant-violation"),
            };
        }
        if cause.is::<FilterError>() || cause.is::<RetrievalError>() || cause.is::<EvalError>() {
            return (INVARIANT, "invariant-violation");
        }
        if cause.is::<std::io::Error>() {
            return (INPUT, "io");
        }
    }
    (OTHER, "error")
}

fn emit(code: u8, kind: &str, message: String) -> ExitCode {
    let line = serde_json::json!({ "error": kind, "exit_code": code, "message": message });
    eprintln!("{line}");
    ExitCode::from(code)
}

pub fn report(err: &anyhow::Error) -> ExitCode {
    let (code, kind) = classify(err);
    emit(code, kind, format!("{err:#}"))
}

pub fn report_usage(err: &clap::Error) -> ExitCode {
    emit(USAGE, "usage", err.render().to_string().trim().to_string())
}
