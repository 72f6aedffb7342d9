//! Exact leakage measurement: the distribution of an observable variable per
//! secret input, pairwise statistical distances, and the success
//! probability of the best attacker telling two secrets apart.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::assertion::{satisfies, Assertion, Universe};
use crate::command::Program;
use crate::dist::{statistical_distance, FinDist, Prob};
use crate::error::{AssertError, ExecError, KindError};
use crate::expr::{Kind, Name};
use crate::interp::run;
use crate::value::Value;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SecurityError {
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    Kind(#[from] KindError),
    #[error(transparent)]
    Assert(#[from] AssertError),
    #[error("program has no variable `{0}`")]
    UnknownVariable(String),
    #[error("secrets of different shapes cannot be compared: {0} and {1}")]
    MixedShapes(String, String),
    #[error("at least one secret is required")]
    NoSecrets,
}

/// Which secrets, which observable, and how far to run.
#[derive(Clone, Debug)]
pub struct ObliviousnessQuery {
    pub program: Program,
    pub secret_var: Name,
    pub secrets: Vec<Value>,
    pub observe_var: Name,
    pub fuel: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    PerfectlyOblivious,
    Leaks,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::PerfectlyOblivious => "perfectly oblivious",
            Verdict::Leaks => "leaks",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SecrecyReport {
    pub secret_var: Name,
    pub observe_var: Name,
    pub secrets: Vec<Value>,
    pub distributions: Vec<FinDist<Value>>,
    /// `sd[i][j]`: statistical distance between the observations under
    /// secrets `i` and `j`.
    pub sd: Vec<Vec<Prob>>,
    /// `advantage[i][j]`: success probability of the best guess between
    /// secrets `i` and `j` under a uniform prior.
    pub advantage: Vec<Vec<Prob>>,
    /// Largest excess of the advantage over one half.
    pub epsilon: Prob,
    pub verdict: Verdict,
}

/// Coarse shape of a value: scalars by type, containers by length and
/// element shapes.
pub fn shape(v: &Value) -> String {
    match v {
        Value::Seq(xs) | Value::Tuple(xs) => {
            let inner: Vec<String> = xs.iter().map(shape).collect();
            format!("{}[{}]", v.type_name(), inner.join(","))
        }
        Value::Set(xs) => format!("set/{}", xs.len()),
        other => other.type_name().to_string(),
    }
}

/// Distribution of `observe` after running `program` with `secret_var`
/// initially set to `secret`. The secret variable may be random if the
/// program resamples it; its initial value is then a point mass.
pub fn trace_distribution(program: &Program, secret_var: &str, secret: &Value, observe: &str, fuel: u64) -> Result<FinDist<Value>, SecurityError> {
    if program.kind_of(secret_var).is_none() {
        return Err(SecurityError::UnknownVariable(secret_var.into()));
    }
    let p = program.with_inputs(&BTreeMap::from([(Name::from(secret_var), secret.clone())]))?;
    observe_distribution(&p, observe, fuel)
}

/// Distribution of `observe` after running `program` as declared.
pub fn observe_distribution(program: &Program, observe: &str, fuel: u64) -> Result<FinDist<Value>, SecurityError> {
    let kind = program.kind_of(observe).ok_or_else(|| SecurityError::UnknownVariable(observe.into()))?;
    let out = run(program, fuel)?;
    Ok(match kind {
        Kind::Det => FinDist::unit(out.sigma[observe].clone()),
        Kind::Rand => {
            let i = out.mu.position(observe).expect("random variables stay bound");
            out.mu.rows().map(|row| row[i].clone())
        }
    })
}

/// Success probability of the best guess of which of `p`, `q` produced an
/// observation, each chosen with probability one half, and the guess: `true`
/// means "p".
pub fn attacker_advantage<T: Ord + Clone>(p: &FinDist<T>, q: &FinDist<T>) -> (Prob, BTreeMap<T, bool>) {
    advantage_with_prior(p, q, &Prob::new(1, 2))
}

/// As [`attacker_advantage`] with `p` chosen with probability `prior`.
pub fn advantage_with_prior<T: Ord + Clone>(p: &FinDist<T>, q: &FinDist<T>, prior: &Prob) -> (Prob, BTreeMap<T, bool>) {
    let wp = prior.ratio();
    let wq = prior.complement().ratio().clone();
    let support: BTreeSet<&T> = p.support().chain(q.support()).collect();
    let mut total = BigRational::zero();
    let mut guess = BTreeMap::new();
    for e in support {
        let a = wp * p.prob(e).ratio();
        let b = &wq * q.prob(e).ratio();
        let pick_p = a >= b;
        total += if pick_p { a } else { b };
        guess.insert(e.clone(), pick_p);
    }
    (Prob::from_ratio(total), guess)
}

pub fn statistical_secrecy(query: &ObliviousnessQuery) -> Result<SecrecyReport, SecurityError> {
    let Some(first) = query.secrets.first() else { return Err(SecurityError::NoSecrets) };
    let s0 = shape(first);
    for s in &query.secrets {
        if shape(s) != s0 {
            return Err(SecurityError::MixedShapes(first.to_string(), s.to_string()));
        }
    }
    let distributions = std::thread::scope(|scope| {
        let handles: Vec<_> = query
            .secrets
            .iter()
            .map(|s| scope.spawn(move || trace_distribution(&query.program, &query.secret_var, s, &query.observe_var, query.fuel)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("trace worker panicked")).collect::<Result<Vec<_>, _>>()
    })?;
    Ok(secrecy_report(query.secret_var.clone(), query.observe_var.clone(), query.secrets.clone(), distributions))
}

/// Secrecy across separately built programs, one per secret. The labels
/// stand in for the secrets in the report.
pub fn compare_programs(label: &str, runs: &[(Value, Program)], observe: &str, fuel: u64) -> Result<SecrecyReport, SecurityError> {
    if runs.is_empty() {
        return Err(SecurityError::NoSecrets);
    }
    let distributions = std::thread::scope(|scope| {
        let handles: Vec<_> = runs
            .iter()
            .map(|(_, p)| scope.spawn(move || observe_distribution(p, observe, fuel)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("trace worker panicked")).collect::<Result<Vec<_>, _>>()
    })?;
    Ok(secrecy_report(label.into(), observe.into(), runs.iter().map(|(l, _)| l.clone()).collect(), distributions))
}

fn secrecy_report(secret_var: Name, observe_var: Name, secrets: Vec<Value>, distributions: Vec<FinDist<Value>>) -> SecrecyReport {
    let n = distributions.len();
    let mut sd = vec![vec![Prob::zero(); n]; n];
    let mut advantage = vec![vec![Prob::new(1, 2); n]; n];
    let mut epsilon = Prob::zero();
    for i in 0..n {
        for j in i + 1..n {
            let d = statistical_distance(&distributions[i], &distributions[j]);
            let (a, _) = attacker_advantage(&distributions[i], &distributions[j]);
            let excess = &a - &Prob::new(1, 2);
            if excess > epsilon {
                epsilon = excess;
            }
            sd[i][j] = d.clone();
            sd[j][i] = d;
            advantage[i][j] = a.clone();
            advantage[j][i] = a;
        }
    }
    let verdict = if sd.iter().flatten().all(Prob::is_zero) { Verdict::PerfectlyOblivious } else { Verdict::Leaks };
    SecrecyReport { secret_var, observe_var, secrets, distributions, sd, advantage, epsilon, verdict }
}

/// Runs `program` and checks `a` on the final configuration restricted to
/// the variables `a` mentions.
pub fn check_invariant_after(program: &Program, a: &Assertion, u: &Universe, fuel: u64) -> Result<bool, SecurityError> {
    let out = run(program, fuel)?;
    Ok(satisfies(&out.restrict(&a.free_names()), a, u)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_assertion, parse_program};

    fn leaky() -> Program {
        parse_program("det var s := 0; var o := []; if s = 1 { o := o ++ [1] } else { skip }").unwrap()
    }

    #[test]
    fn leaky_program() {
        let q = ObliviousnessQuery { program: leaky(), secret_var: "s".into(), secrets: vec![0.into(), 1.into()], observe_var: "o".into(), fuel: 10 };
        let r = statistical_secrecy(&q).unwrap();
        assert_eq!(r.sd[0][1], Prob::one());
        assert_eq!(r.advantage[0][1], Prob::one());
        assert_eq!(r.verdict, Verdict::Leaks);
    }

    #[test]
    fn no_observable_writes() {
        let p = parse_program("det var s := 0; rand var o := []; var t := 0; t :$= {0, 1}").unwrap();
        for s in [0, 5] {
            assert_eq!(trace_distribution(&p, "s", &s.into(), "o", 10).unwrap(), FinDist::unit(Value::Seq(vec![])));
        }
    }

    #[test]
    fn advantage_examples() {
        let u = FinDist::uniform([0, 1]).unwrap();
        let z = FinDist::unit(0);
        assert_eq!(attacker_advantage(&u, &u).0, Prob::new(1, 2));
        assert_eq!(attacker_advantage(&z, &FinDist::unit(1)).0, Prob::one());
        let (a, g) = attacker_advantage(&u, &z);
        assert_eq!(a, Prob::new(3, 4));
        assert_eq!(g, BTreeMap::from([(0, false), (1, true)]));
    }

    #[test]
    fn mixed_shapes_are_refused() {
        let p = parse_program("det var s := [0]; var o := 0; skip").unwrap();
        let q = ObliviousnessQuery { program: p, secret_var: "s".into(), secrets: vec![Value::Seq(vec![0.into()]), Value::Seq(vec![])], observe_var: "o".into(), fuel: 10 };
        assert!(matches!(statistical_secrecy(&q), Err(SecurityError::MixedShapes(..))));
    }

    #[test]
    fn false_invariant() {
        let p = leaky();
        let a = parse_assertion("C[false]", p.kinds()).unwrap();
        assert!(!check_invariant_after(&p, &a, &Universe::new(1), 10).unwrap());
    }
}
