//! File formats read and written by the `qca` binary.

pub mod dot;
pub mod report;
pub mod rulefile;
pub mod state;

use std::io;

/// Problems reading or interpreting an input file.
#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{source_name}:{line}:{column}: {message}")]
    Syntax { source_name: String, line: usize, column: usize, message: String },

    /// `line` is 0 when the field could not be located in the text.
    #[error("{source_name}:{line}: {field}: {message}")]
    Field { source_name: String, line: usize, field: String, message: String },

    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },

    #[error(transparent)]
    Rule(#[from] qca_core::Error),
}

/// Reads a whole file, or standard input for `-`.
pub fn read_input(path: &str) -> Result<String, FormatError> {
    let wrap = |source| FormatError::Io { path: path.to_string(), source };
    if path == "-" {
        io::read_to_string(io::stdin()).map_err(wrap)
    } else {
        std::fs::read_to_string(path).map_err(wrap)
    }
}

pub(crate) fn source_label(path: &str) -> String {
    if path == "-" { "<stdin>".into() } else { path.into() }
}

pub(crate) fn syntax_error(source_name: &str, e: serde_json::Error) -> FormatError {
    let text = e.to_string();
    // the position is reported separately
    let suffix = format!(" at line {} column {}", e.line(), e.column());
    let message = text.strip_suffix(&suffix).unwrap_or(&text).to_string();
    FormatError::Syntax { source_name: source_name.into(), line: e.line(), column: e.column(), message }
}
