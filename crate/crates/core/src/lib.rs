//! Exact semantics, assertion checking and proof-rule validation for a small
//! probabilistic imperative language with deterministic and random
//! variables, plus an obliviousness harness that measures trace leakage
//! exactly.

pub mod assertion;
pub mod builtins;
pub mod cases;
pub mod command;
pub mod config;
pub mod dist;
pub mod error;
pub mod expr;
pub mod interp;
pub mod logic;
pub mod oracle;
pub mod report;
pub mod security;
pub mod syntax;
pub mod value;
