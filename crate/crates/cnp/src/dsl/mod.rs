//! Textual `.cn` source format: parser and renderer.
//!
//! Grammar sketch (line comments start with `#`; layout is free-form):
//!
//! ```text
//! SUBNET Name(p1, p2)
//! VARS x, y
//! INIT s0
//! NODE fin FINISH
//! NODE c CONTROL {order=best, width=2, range=1..6, backtracking=false}
//! ARROW s0 -> fin [eval=cityH] : move(x), call Sub(7), done ;
//! ```
//!
//! The first subnet in the file is the main subnet. A chain is a
//! comma-separated list of calls terminated by `;`; `call Name(args)` marks a
//! subnet call. The `CONTROL {...}` node marker attaches dynamic option
//! changes to a node.

mod lexer;
mod parser;
mod printer;

use crate::net::{validate, ControlNetwork};

/// A `.cn` source text together with where it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceProgram {
    pub text: String,
    pub origin: String,
}

impl SourceProgram {
    pub fn inline(text: impl Into<String>) -> Self {
        SourceProgram { text: text.into(), origin: "<inline>".to_string() }
    }

    pub fn from_file(path: &std::path::Path) -> std::io::Result<Self> {
        Ok(SourceProgram {
            text: std::fs::read_to_string(path)?,
            origin: path.display().to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: u32,
    pub column: u32,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(line: u32, column: u32, message: impl Into<String>) -> Self {
        ParseError { line, column, message: message.into() }
    }
}

/// Parses a source program into a control network.
///
/// Syntax errors are reported with their line/column. A syntactically valid
/// network may still fail [`validate`]; callers decide whether to enforce it.
pub fn parse(src: &SourceProgram) -> Result<ControlNetwork, Vec<ParseError>> {
    parser::parse(&src.text)
}

/// Parses and additionally requires the result to pass structural validation.
pub fn parse_validated(src: &SourceProgram) -> Result<ControlNetwork, Vec<ParseError>> {
    let net = parse(src)?;
    let report = validate(&net);
    if report.is_valid() {
        Ok(net)
    } else {
        Err(report
            .violations
            .into_iter()
            .map(|v| ParseError::new(1, 1, format!("{v}")))
            .collect())
    }
}

/// Renders a network back to `.cn` source; `parse(render(net))` equals `net`.
pub fn render(net: &ControlNetwork) -> SourceProgram {
    SourceProgram::inline(printer::render(net))
}
