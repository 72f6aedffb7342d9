//! Error types shared across the crate.

use thiserror::Error;

use crate::value::Value;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("type mismatch: expected {expected}, found {found}")]
    TypeMismatch { expected: String, found: String },
    #[error("division by zero")]
    DivisionByZero,
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: i64, len: usize },
    #[error("empty set where a non-empty set is required")]
    EmptySet,
    #[error("integer overflow")]
    Overflow,
    #[error("invalid argument to `{op}`: {reason}")]
    InvalidArgument { op: String, reason: String },
}

impl EvalError {
    pub fn type_mismatch(expected: &str, found: &Value) -> Self {
        EvalError::TypeMismatch { expected: expected.to_string(), found: format!("{} {found}", found.type_name()) }
    }

    pub fn invalid(op: &str, reason: impl Into<String>) -> Self {
        EvalError::InvalidArgument { op: op.to_string(), reason: reason.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DistError {
    #[error("uniform distribution over an empty set")]
    EmptySet,
    #[error("conditioning on an event of probability zero")]
    ZeroMassCondition,
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
}

/// Errors raised while executing a command.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error("fuel exhausted after {0} loop unfoldings")]
    FuelExhausted(u64),
    #[error("path enumeration exceeded its budget of {0} paths")]
    PathExplosion(usize),
    #[error("ill-formed command: {0}")]
    IllFormed(String),
}

/// Well-formedness violations of a program or command.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum KindError {
    #[error("variable `{0}` is used but not declared")]
    Undeclared(String),
    #[error("variable `{0}` is declared more than once")]
    Redeclared(String),
    #[error("variable `{var}` is declared deterministic but {reason}")]
    MustBeRandom { var: String, reason: String },
    #[error("deterministic assignment to `{0}` has a random right-hand side")]
    RandomRhs(String),
    #[error("deterministic assignment to `{0}` inside a random conditional or loop")]
    DetAssignInRandomBody(String),
    #[error("guard mentions random variables but the {0} is marked deterministic")]
    GuardKind(&'static str),
    #[error("sampling into deterministic variable `{0}`")]
    SampleIntoDet(String),
}

/// Failures of assertion checking and enumeration.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum AssertError {
    #[error("the set expression of a uniformity assertion must be deterministic: {0}")]
    NonDeterministicSet(String),
    #[error("universe too small: {0}")]
    UniverseTooSmall(String),
    #[error("enumeration needs {needed} candidates, over the budget of {budget}")]
    EnumerationBudgetExceeded { needed: u128, budget: u128 },
}

/// Failures of rule checking and semantic triple validation.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("side condition violated: {0}")]
    SideConditionViolated(String),
    #[error(transparent)]
    Assert(#[from] AssertError),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error("could not generate enough valid instances: {0}")]
    GenerationBudgetExceeded(String),
}
