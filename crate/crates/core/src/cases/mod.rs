//! Program builders for five oblivious algorithms, with ghost code that
//! records the observable accesses in a `Trace` variable.

pub mod melbourne;
pub mod path_oram;
pub mod poh;
pub mod sampling;
pub mod synthetic;

use thiserror::Error;

use crate::command::Program;
use crate::error::{ExecError, KindError};
use crate::security::SecurityError;
use crate::syntax::{parse_program, pretty, SourceError};
use crate::value::Value;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CaseError {
    #[error("parameter constraint violated: {0}")]
    ConstraintViolation(String),
    #[error("no permutation satisfies the threshold: {0}")]
    EmptyChoiceSet(String),
    #[error("invalid delete reference: {0}")]
    InvalidDeleteReference(String),
    #[error(transparent)]
    Source(#[from] SourceError),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    Kind(#[from] KindError),
    #[error(transparent)]
    Security(#[from] SecurityError),
}

/// Outcome of one named check on a case study.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CaseCheck {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> CaseCheck {
        CaseCheck { name: name.into(), passed, detail: detail.into() }
    }
}

pub(crate) fn lit(v: &Value) -> String {
    pretty::expr(&crate::expr::Expr::Const(v.clone()))
}

pub(crate) fn token_tuple<const N: usize>(parts: [Value; N]) -> Value {
    Value::tuple(parts)
}

pub(crate) fn tok(s: &str) -> Value {
    Value::token(s)
}

pub(crate) fn build(src: &str) -> Result<Program, CaseError> {
    Ok(parse_program(src)?)
}

pub(crate) fn constraint(ok: bool, msg: impl FnOnce() -> String) -> Result<(), CaseError> {
    if ok {
        Ok(())
    } else {
        Err(CaseError::ConstraintViolation(msg()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Study {
    Synthetic,
    Melbourne,
    Sampling,
    PathOram,
    Poh,
}

impl Study {
    pub const ALL: [Study; 5] = [Study::Synthetic, Study::Melbourne, Study::Sampling, Study::PathOram, Study::Poh];

    pub fn name(self) -> &'static str {
        match self {
            Study::Synthetic => "synthetic",
            Study::Melbourne => "melbourne",
            Study::Sampling => "sampling",
            Study::PathOram => "path-oram",
            Study::Poh => "poh",
        }
    }

    pub fn from_name(s: &str) -> Option<Study> {
        Study::ALL.into_iter().find(|st| st.name() == s)
    }

    /// Parameter keys accepted by [`Case::new`].
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            Study::Synthetic => &["n"],
            Study::Melbourne => &["n", "p"],
            Study::Sampling => &["n", "m", "k"],
            Study::PathOram => &["L", "addresses", "Z", "ops", "max-len"],
            Study::Poh => &["N", "n_root", "ops"],
        }
    }
}

/// A study with its parameters. Operation lists are comma separated:
/// `w:0=1,r:0` for Path ORAM, `i:3=30,d:0` for the heap.
#[derive(Clone, Debug, PartialEq)]
pub enum Case {
    Synthetic { n: usize },
    Melbourne(melbourne::Params),
    Sampling(sampling::Params),
    PathOram { params: path_oram::Params, ops: Vec<path_oram::Op>, max_len: usize },
    Poh { params: poh::Params, ops: Vec<poh::HeapOp> },
}

fn setting<T: std::str::FromStr>(settings: &[(String, String)], key: &str, default: T) -> Result<T, CaseError> {
    match settings.iter().rev().find(|(k, _)| k == key) {
        None => Ok(default),
        Some((_, v)) => v.parse().map_err(|_| CaseError::ConstraintViolation(format!("cannot read {key} = `{v}`"))),
    }
}

fn op_list<T>(settings: &[(String, String)], default: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Vec<T>, CaseError> {
    let src = settings.iter().rev().find(|(k, _)| k == "ops").map(|(_, v)| v.as_str()).unwrap_or(default);
    src.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse(s).ok_or_else(|| CaseError::ConstraintViolation(format!("cannot read operation `{s}`"))))
        .collect()
}

impl Case {
    pub fn new(study: Study, settings: &[(String, String)]) -> Result<Case, CaseError> {
        if let Some((k, _)) = settings.iter().find(|(k, _)| !study.keys().contains(&k.as_str())) {
            return Err(CaseError::ConstraintViolation(format!("{} takes no parameter `{k}` (expected one of {})", study.name(), study.keys().join(", "))));
        }
        Ok(match study {
            Study::Synthetic => Case::Synthetic { n: setting(settings, "n", 2)? },
            Study::Melbourne => {
                let d = melbourne::Params::default();
                Case::Melbourne(melbourne::Params { n: setting(settings, "n", d.n)?, p: setting(settings, "p", d.p)? })
            }
            Study::Sampling => {
                let d = sampling::Params::default();
                Case::Sampling(sampling::Params { n: setting(settings, "n", d.n)?, m: setting(settings, "m", d.m)?, k: setting(settings, "k", d.k)? })
            }
            Study::PathOram => {
                let d = path_oram::Params::default();
                let params = path_oram::Params { height: setting(settings, "L", d.height)?, addresses: setting(settings, "addresses", d.addresses)?, z: setting(settings, "Z", d.z)? };
                Case::PathOram { params, ops: op_list(settings, "w:0=1,r:0", path_oram::Op::parse)?, max_len: setting(settings, "max-len", 2)? }
            }
            Study::Poh => {
                let d = poh::Params::default();
                let params = poh::Params { n: setting(settings, "N", d.n)?, n_root: setting(settings, "n_root", d.n_root)? };
                Case::Poh { params, ops: op_list(settings, "i:3=30,d:0", poh::HeapOp::parse)? }
            }
        })
    }

    pub fn study(&self) -> Study {
        match self {
            Case::Synthetic { .. } => Study::Synthetic,
            Case::Melbourne(_) => Study::Melbourne,
            Case::Sampling(_) => Study::Sampling,
            Case::PathOram { .. } => Study::PathOram,
            Case::Poh { .. } => Study::Poh,
        }
    }

    /// One instance: default secrets, the given operations.
    pub fn program(&self) -> Result<Program, CaseError> {
        match self {
            Case::Synthetic { n } => synthetic::build_synthetic(*n),
            Case::Melbourne(p) => {
                let input = melbourne::default_input(p.n);
                let mut reversed = input.clone();
                reversed.reverse();
                melbourne::build_melbourne(p, &input, &crate::builtins::perm_of(&reversed))
            }
            Case::Sampling(p) => sampling::build_sampling(*p, &sampling::default_databases(p.n)[0]),
            Case::PathOram { params, ops, .. } => path_oram::build_path_oram(params, ops),
            Case::Poh { params, ops } => poh::build_poh(*params, ops),
        }
    }

    /// The study's security and correctness claims, checked exactly.
    pub fn checks(&self, fuel: u64) -> Result<Vec<CaseCheck>, CaseError> {
        match self {
            Case::Synthetic { n } => synthetic::checks(*n, fuel),
            Case::Melbourne(p) => melbourne::checks(p, fuel),
            Case::Sampling(p) => sampling::checks(*p, fuel),
            Case::PathOram { params, max_len, .. } => path_oram::checks(params, *max_len, fuel),
            Case::Poh { params, .. } => poh::checks(*params, fuel),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settings() {
        let s = |k: &str, v: &str| (k.to_string(), v.to_string());
        assert_eq!(Case::new(Study::Synthetic, &[s("n", "1")]).unwrap(), Case::Synthetic { n: 1 });
        assert!(Case::new(Study::Synthetic, &[s("m", "1")]).is_err());
        assert!(Case::new(Study::Sampling, &[s("n", "x")]).is_err());
        let Case::Poh { ops, .. } = Case::new(Study::Poh, &[]).unwrap() else { panic!() };
        assert_eq!(ops, vec![poh::HeapOp::Insert(3, 30), poh::HeapOp::Delete(0)]);
        for st in Study::ALL {
            assert_eq!(Study::from_name(st.name()), Some(st));
            Case::new(st, &[]).unwrap().program().unwrap();
        }
    }
}
