//! Concrete syntax for expressions, commands, programs and assertions, with a
//! printer whose output parses back to the same tree.

mod lexer;
mod parser;
pub mod pretty;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::assertion::Assertion;
use crate::command::{Command, Program};
use crate::error::{AssertError, KindError};
use crate::expr::{Expr, Kind, Name};
use crate::value::Value;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{col}: {msg}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl SyntaxError {
    pub(crate) fn at(line: usize, col: usize, msg: impl Into<String>) -> SyntaxError {
        SyntaxError { line, col, msg: msg.into() }
    }
}

/// Anything that can go wrong turning source text into a checked object.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SourceError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Kind(#[from] KindError),
    #[error(transparent)]
    Assert(#[from] AssertError),
}

/// Parses declarations followed by a command and builds the program,
/// classifying variables whose kind is not annotated.
pub fn parse_program(src: &str) -> Result<Program, SourceError> {
    let (decls, body) = parser::Parser::new(src, None)?.program()?;
    Ok(Program::new(decls, body)?)
}

/// Parses an expression; every identifier must be a local or appear in
/// `kinds`.
pub fn parse_expr(src: &str, kinds: &BTreeMap<Name, Kind>) -> Result<Expr, SyntaxError> {
    parser::Parser::new(src, Some(kinds))?.whole(|p| p.expr())
}

pub fn parse_command(src: &str, kinds: &BTreeMap<Name, Kind>) -> Result<Command, SyntaxError> {
    parser::Parser::new(src, Some(kinds))?.whole(|p| p.block_body())
}

pub fn parse_assertion(src: &str, kinds: &BTreeMap<Name, Kind>) -> Result<Assertion, SourceError> {
    parser::Parser::new(src, Some(kinds))?.whole_assertion()
}

/// Parses and evaluates a closed expression.
pub fn parse_value(src: &str) -> Result<Value, SyntaxError> {
    let e = parse_expr(src, &BTreeMap::new())?;
    e.eval(&crate::expr::EmptyEnv).map_err(|err| SyntaxError::at(1, 1, format!("cannot evaluate `{src}`: {err}")))
}

#[cfg(test)]
mod tests;
