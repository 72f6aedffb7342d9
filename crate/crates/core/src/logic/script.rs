//! Proof scripts: a tree of rule applications in JSON, checked node by
//! node.
//!
//! ```json
//! { "universe": "x:rand={0,1}; denom=2",
//!   "proof": { "rule": "Weak", "pre": "C[x = 0]", "cmd": "skip", "post": "D[x]",
//!              "by": ["enumerate", "enumerate"],
//!              "premises": [ { "rule": "Skip", "pre": "C[x = 0]", "cmd": "skip", "post": "C[x = 0]" } ] } }
//! ```
//!
//! Each entailment obligation of a node is justified by the matching entry
//! of `by`: `"enumerate"` (the default) decides it over the universe,
//! `"defined"` accepts goals that are conjunctions of `D[..]` over
//! variables the left side binds, `"normalize"` accepts sides equal up to
//! reordering, and a catalogue name (see [`Prop`]) cites that fact. The
//! pseudo-rule `"semantic"` closes a branch by checking the triple itself
//! over the universe.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::rules::{check_rule_app, Rule, RuleApp};
use super::{holds_semantically, Triple};
use crate::assertion::props::{cite, defined_follows, discharge, normalize, Obligation, Prop};
use crate::assertion::{entails, is_supported, Assertion, Support, Universe};
use crate::error::LogicError;
use crate::expr::{Kind, Name, Var};
use crate::syntax::{parse_assertion, parse_command, SourceError};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Script {
    pub universe: String,
    #[serde(default)]
    pub fuel: Option<u64>,
    pub proof: Node,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Node {
    pub rule: String,
    pub pre: String,
    pub cmd: String,
    pub post: String,
    #[serde(default)]
    pub premises: Vec<Node>,
    #[serde(default)]
    pub frame_vars: Vec<String>,
    #[serde(default)]
    pub by: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    Passed,
    Failed { reason: String },
}

impl Status {
    fn fail(reason: impl Into<String>) -> Status {
        Status::Failed { reason: reason.into() }
    }
}

/// One checked fact. `path` lists premise indices from the root.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub path: Vec<usize>,
    pub rule: String,
    pub what: String,
    pub by: String,
    /// Set for supportedness facts, which are decided only over the
    /// declared universe.
    pub universe_relative: bool,
    #[serde(flatten)]
    pub status: Status,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProofReport {
    pub universe: String,
    pub checks: Vec<Check>,
}

impl ProofReport {
    pub fn accepted(&self) -> bool {
        self.checks.iter().all(|c| c.status == Status::Passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status != Status::Passed)
    }
}

pub fn parse_script(src: &str) -> Result<Script, LogicError> {
    serde_json::from_str(src).map_err(|e| LogicError::SchemaMismatch(format!("proof script: {e}")))
}

/// Checks a script against its own universe, or `universe` when given.
pub fn check_proof(script: &Script, universe: Option<&Universe>) -> Result<ProofReport, LogicError> {
    let owned;
    let u = match universe {
        Some(u) => u,
        None => {
            owned = Universe::parse(&script.universe).map_err(|e| LogicError::SchemaMismatch(format!("universe: {e}")))?;
            &owned
        }
    };
    let mut checker = Checker { u, kinds: u.kinds(), fuel: script.fuel.unwrap_or(super::fuzz::DEFAULT_FUEL), checks: Vec::new() };
    checker.node(&script.proof, &mut Vec::new())?;
    Ok(ProofReport { universe: u.to_string(), checks: checker.checks })
}

struct Checker<'a> {
    u: &'a Universe,
    kinds: BTreeMap<Name, Kind>,
    fuel: u64,
    checks: Vec<Check>,
}

impl Checker<'_> {
    fn push(&mut self, path: &[usize], rule: &str, what: String, by: &str, universe_relative: bool, status: Status) {
        self.checks.push(Check { path: path.to_vec(), rule: rule.into(), what, by: by.into(), universe_relative, status });
    }

    fn triple(&self, n: &Node) -> Result<Triple, SourceError> {
        Ok(Triple::new(parse_assertion(&n.pre, &self.kinds)?, parse_command(&n.cmd, &self.kinds)?, parse_assertion(&n.post, &self.kinds)?))
    }

    fn node(&mut self, n: &Node, path: &mut Vec<usize>) -> Result<(), LogicError> {
        let t = match self.triple(n) {
            Ok(t) => t,
            Err(e) => {
                self.push(path, &n.rule, "parse".into(), "syntax", false, Status::fail(e.to_string()));
                return Ok(());
            }
        };
        if n.rule.eq_ignore_ascii_case("semantic") {
            let status = match holds_semantically(&t, self.u, self.fuel) {
                Ok(None) => Status::Passed,
                Ok(Some(v)) => Status::fail(v.to_string()),
                Err(e @ (LogicError::Exec(_) | LogicError::Assert(_))) => Status::fail(e.to_string()),
                Err(e) => return Err(e),
            };
            self.push(path, &n.rule, t.to_string(), "semantic", true, status);
            return Ok(());
        }
        let Some(rule) = Rule::from_name(&n.rule) else {
            self.push(path, &n.rule, "rule".into(), "schema", false, Status::fail(format!("unknown rule `{}`", n.rule)));
            return Ok(());
        };
        let mut premises = Vec::new();
        for (i, p) in n.premises.iter().enumerate() {
            path.push(i);
            self.node(p, path)?;
            path.pop();
            match self.triple(p) {
                Ok(pt) => premises.push(pt),
                Err(_) => return Ok(()),
            }
        }
        let frame: Vec<Var> = n.frame_vars.iter().map(|v| Var::new(v, self.u.kind(v).unwrap_or(Kind::Rand))).collect();
        let app = RuleApp::new(rule, t.clone(), premises).with_frame_vars(frame);
        let obs = match check_rule_app(&app) {
            Ok(obs) => obs,
            Err(e @ (LogicError::SchemaMismatch(_) | LogicError::SideConditionViolated(_) | LogicError::Assert(_))) => {
                self.push(path, rule.name(), t.to_string(), "schema", false, Status::fail(e.to_string()));
                return Ok(());
            }
            Err(e) => return Err(e),
        };
        self.push(path, rule.name(), t.to_string(), "schema", false, Status::Passed);
        for (i, (a, b)) in obs.entailments.iter().enumerate() {
            let by = n.by.get(i).map(String::as_str).unwrap_or("enumerate");
            let status = self.entailment(a, b, by)?;
            self.push(path, rule.name(), format!("{a} ⟹ {b}"), by, false, status);
        }
        for a in &obs.supported {
            let status = match is_supported(a, self.u) {
                Ok(Support::Supported) => Status::Passed,
                Ok(Support::Unsupported { reason, .. }) => Status::fail(reason),
                Err(e) => Status::fail(e.to_string()),
            };
            self.push(path, rule.name(), format!("supported({a})"), "enumerate", true, status);
        }
        Ok(())
    }

    fn entailment(&self, a: &Assertion, b: &Assertion, by: &str) -> Result<Status, LogicError> {
        let decide = |a: &Assertion, b: &Assertion| -> Status {
            match entails(a, b, self.u) {
                Ok(None) => Status::Passed,
                Ok(Some(cex)) => Status::fail(format!("counterexample {cex}")),
                Err(e) => Status::fail(e.to_string()),
            }
        };
        Ok(match by {
            "enumerate" => decide(a, b),
            "defined" => {
                if defined_follows(a, b) {
                    Status::Passed
                } else {
                    Status::fail("the right side is not a conjunction of D[..] over variables the left side binds")
                }
            }
            "normalize" => {
                if normalize(a) == normalize(b) {
                    Status::Passed
                } else {
                    Status::fail("the sides differ after normalization")
                }
            }
            name => {
                let Some(prop) = Prop::from_name(name) else { return Ok(Status::fail(format!("unknown justification `{name}`"))) };
                let Some(obs) = cite(prop, a, b) else { return Ok(Status::fail(format!("not an instance of {prop}"))) };
                for ob in &obs {
                    let failed = match ob {
                        Obligation::Entails(l, r) if defined_follows(l, r) => None,
                        _ => discharge(ob, self.u).map_err(LogicError::from)?,
                    };
                    if let Some(msg) = failed {
                        return Ok(Status::fail(msg));
                    }
                }
                Status::Passed
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(src: &str) -> ProofReport {
        check_proof(&parse_script(src).unwrap(), None).unwrap()
    }

    #[test]
    fn skip_axiom() {
        let r = check(r#"{"universe": "x:rand={0,1}; denom=2", "proof": {"rule": "Skip", "pre": "U[{0, 1}, x]", "cmd": "skip", "post": "U[{0, 1}, x]"}}"#);
        assert!(r.accepted(), "{r:?}");
    }

    #[test]
    fn sequence_mismatch_is_reported() {
        let r = check(
            r#"{"universe": "x:rand={0,1,2}; denom=1", "proof": {"rule": "Seqn", "pre": "C[x = 0]", "cmd": "x := x + 1; x := x + 1", "post": "C[x = 2]",
                "premises": [{"rule": "RAssign", "pre": "C[x + 1 = 1]", "cmd": "x := x + 1", "post": "C[x = 1]"},
                             {"rule": "RAssign", "pre": "C[x + 1 = 2]", "cmd": "x := x + 1", "post": "C[x = 2]"}]}}"#,
        );
        assert!(!r.accepted());
        let failed: Vec<_> = r.failures().collect();
        assert_eq!(failed.len(), 1);
        assert!(failed[0].path.is_empty());
    }

    #[test]
    fn weak_with_citation_and_enumeration() {
        let r = check(
            r#"{"universe": "x:rand={0,1}; denom=2", "proof": {"rule": "Weak", "pre": "U[{0, 1}, x]", "cmd": "skip", "post": "C[x in {0, 1}]",
                "by": ["normalize", "uniform-in-set"],
                "premises": [{"rule": "Skip", "pre": "U[{0, 1}, x]", "cmd": "skip", "post": "U[{0, 1}, x]"}]}}"#,
        );
        assert!(r.accepted(), "{r:?}");
        let wrong = check(
            r#"{"universe": "x:rand={0,1}; denom=2", "proof": {"rule": "Weak", "pre": "D[x]", "cmd": "skip", "post": "U[{0, 1}, x]",
                "premises": [{"rule": "Skip", "pre": "D[x]", "cmd": "skip", "post": "D[x]"}]}}"#,
        );
        assert_eq!(wrong.failures().count(), 1);
    }

    #[test]
    fn supportedness_is_flagged_as_universe_relative() {
        let r = check(
            r#"{"universe": "x:rand={0,1}; y:rand={0,1}; denom=2", "proof": {"rule": "RCase", "pre": "C[y = 0] * D[x = 0]", "cmd": "skip", "post": "C[y = 0] * D[x = 0]",
                "premises": [{"rule": "semantic", "pre": "C[y = 0] * C[(x = 0) != false]", "cmd": "skip", "post": "C[y = 0] * C[(x = 0) != false]"},
                             {"rule": "semantic", "pre": "C[y = 0] * C[(x = 0) = false]", "cmd": "skip", "post": "C[y = 0] * C[(x = 0) = false]"}]}}"#,
        );
        assert!(r.accepted(), "{r:?}");
        assert!(r.checks.iter().any(|c| c.universe_relative && c.what.starts_with("supported")));
    }
}
