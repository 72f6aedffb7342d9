//! Hoare triples: semantic validity by enumeration, the proof rules with
//! their side conditions, proof scripts, and a soundness fuzzer.

pub mod fuzz;
mod rules;
pub mod script;

use std::fmt;

use crate::assertion::{satisfies, Assertion, Universe};
use crate::command::Command;
use crate::config::Config;
use crate::error::LogicError;
use crate::interp::exec;

pub use rules::{check_rule_app, check_rule_app_in, Obligations, Rule, RuleApp};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Triple {
    pub pre: Assertion,
    pub cmd: Command,
    pub post: Assertion,
}

impl Triple {
    pub fn new(pre: Assertion, cmd: Command, post: Assertion) -> Triple {
        Triple { pre, cmd, post }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cmd = crate::syntax::pretty::command(&self.cmd).replace('\n', " ");
        let cmd = cmd.split_whitespace().collect::<Vec<_>>().join(" ");
        write!(f, "{{{}}} {} {{{}}}", self.pre, cmd, self.post)
    }
}

/// A run that starts in the precondition and ends outside the
/// postcondition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub initial: Config,
    pub result: Config,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "from {} the command reaches {}", self.initial, self.result)
    }
}

/// Checks `t` from every total configuration of `u` that satisfies the
/// precondition.
pub fn holds_semantically(t: &Triple, u: &Universe, fuel: u64) -> Result<Option<Violation>, LogicError> {
    holds_on(t, u, fuel, &[])
}

/// As [`holds_semantically`], also starting from each of `extra`.
pub fn holds_on(t: &Triple, u: &Universe, fuel: u64, extra: &[Config]) -> Result<Option<Violation>, LogicError> {
    let mut names = t.pre.free_names();
    names.extend(t.post.free_names());
    names.extend(t.cmd.vars().into_iter().map(|v| v.name));
    u.require(&names)?;
    let mut out: Option<Result<Violation, crate::error::ExecError>> = None;
    let mut visit = |m: &Config| -> Result<bool, crate::error::AssertError> {
        if !satisfies(m, &t.pre, u)? {
            return Ok(false);
        }
        match exec(&t.cmd, m, fuel) {
            Ok(r) if satisfies(&r, &t.post, u)? => Ok(false),
            Ok(r) => {
                out = Some(Ok(Violation { initial: m.clone(), result: r }));
                Ok(true)
            }
            Err(e) => {
                out = Some(Err(e));
                Ok(true)
            }
        }
    };
    let mut stopped = false;
    for m in extra {
        if visit(m)? {
            stopped = true;
            break;
        }
    }
    if !stopped {
        u.find_total(&mut visit)?;
    }
    match out {
        None => Ok(None),
        Some(Ok(v)) => Ok(Some(v)),
        Some(Err(e)) => Err(e.into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Kind;
    use crate::syntax::{parse_assertion, parse_command};

    fn u() -> Universe {
        Universe::new(2).var("x", Kind::Rand, [0.into(), 1.into()])
    }

    fn triple(pre: &str, c: &str, post: &str) -> Triple {
        let k = u().kinds();
        Triple::new(parse_assertion(pre, &k).unwrap(), parse_command(c, &k).unwrap(), parse_assertion(post, &k).unwrap())
    }

    #[test]
    fn increment() {
        assert_eq!(holds_semantically(&triple("C[x = 1]", "x := x + 1", "C[x = 2]"), &u(), 10).unwrap(), None);
    }

    #[test]
    fn sampling_is_not_certain() {
        assert!(holds_semantically(&triple("top", "x :$= {0, 1}", "C[x = 0]"), &u(), 10).unwrap().is_some());
    }

    #[test]
    fn non_atomic_assignment_post_is_unsatisfiable() {
        let t = triple("C[0 = 0] * C[0 = 0]", "x := 0", "D[x] * D[x]");
        let v = holds_semantically(&t, &u(), 10).unwrap().expect("invalid");
        assert!(!satisfies(&v.result, &t.post, &u()).unwrap());
    }
}
