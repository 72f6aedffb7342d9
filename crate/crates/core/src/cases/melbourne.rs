//! Two-pass shuffle. The first pass permutes by `pi1`, drawn uniformly
//! from the permutations that stay within the bucket threshold of both the
//! target and the input's own arrangement; the second applies the target
//! permutation. Each pass appends the same fixed access sequence.
//!
//! A permutation is a set of `(value, index)` pairs.

use std::collections::{BTreeMap, BTreeSet};

use super::{build, constraint, lit, tok, token_tuple, CaseCheck, CaseError};
use crate::assertion::Universe;
use crate::builtins::{perm_of, permutations, within_threshold};
use crate::command::Program;
use crate::expr::Kind;
use crate::security::{check_invariant_after, compare_programs, observe_distribution, Verdict};
use crate::syntax::parse_assertion;
use crate::value::Value;

#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub n: usize,
    /// Threshold constant: buckets may share at most `ceil(p * log2 n)`
    /// elements.
    pub p: f64,
}

impl Default for Params {
    fn default() -> Params {
        Params { n: 4, p: 1.0 }
    }
}

impl Params {
    pub fn threshold(&self) -> i64 {
        (self.p * (self.n as f64).log2()).ceil() as i64
    }
}

fn sqrt_exact(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n).then_some(r)
}

/// Accesses of one pass over arrays `I`, `T` (twice as long) and `O`.
pub fn pass_trace(n: usize) -> Value {
    let ev = |op: &str, arr: &str, k: usize| token_tuple([tok(op), tok(arr), Value::Int(k as i64)]);
    let mut out = Vec::new();
    out.extend((0..n).map(|k| ev("read", "I", k)));
    out.extend((0..2 * n).map(|k| ev("write", "T", k)));
    out.extend((0..2 * n).map(|k| ev("read", "T", k)));
    out.extend((0..n).map(|k| ev("write", "O", k)));
    Value::Seq(out)
}

/// The final trace: one pass, the copy back, another pass.
pub fn expected_trace(n: usize) -> Value {
    let Value::Seq(mut t) = pass_trace(n) else { unreachable!() };
    t.push(token_tuple([tok("copy"), tok("O"), tok("I")]));
    let Value::Seq(again) = pass_trace(n) else { unreachable!() };
    t.extend(again);
    Value::Seq(t)
}

/// Permutation as a graph from a list of target indices aligned with
/// `items`.
pub fn perm(items: &[Value], targets: &[i64]) -> Value {
    Value::Set(items.iter().zip(targets).map(|(v, i)| Value::tuple([v.clone(), Value::Int(*i)])).collect())
}

/// Every permutation of `items`.
pub fn all_perms(items: &[Value]) -> Vec<Value> {
    let idx: Vec<Value> = (0..items.len() as i64).map(Value::Int).collect();
    permutations(&idx).into_iter().map(|order| perm(items, &order.iter().map(|v| v.as_int().expect("int")).collect::<Vec<_>>())).collect()
}

fn graph(pi: &Value) -> Vec<(Value, i64)> {
    pi.elements()
        .expect("permutation is a set")
        .into_iter()
        .map(|pair| {
            let Value::Tuple(kv) = pair else { panic!("permutation entry is not a pair") };
            (kv[0].clone(), kv[1].as_int().expect("index"))
        })
        .collect()
}

/// Whether `b` lies within the threshold set of `a`.
pub fn in_sp(a: &Value, b: &Value, threshold: i64) -> bool {
    within_threshold(&graph(a), &graph(b), threshold).unwrap_or(false)
}

fn check_inputs(params: &Params, input: &[Value], pi: &Value) -> Result<(), CaseError> {
    let n = params.n;
    constraint(sqrt_exact(n).is_some(), || format!("n = {n} is not a perfect square"))?;
    constraint(input.len() == n, || format!("input has {} elements, expected {n}", input.len()))?;
    let distinct: BTreeSet<&Value> = input.iter().collect();
    constraint(distinct.len() == n, || "input elements must be distinct".into())?;
    let g = graph(pi);
    let keys: BTreeSet<&Value> = g.iter().map(|(v, _)| v).collect();
    let idx: BTreeSet<i64> = g.iter().map(|(_, i)| *i).collect();
    constraint(g.len() == n && keys == distinct && idx == (0..n as i64).collect(), || format!("{pi} is not a permutation of the input"))?;
    Ok(())
}

pub fn source(params: &Params, input: &[Value], pi: &Value) -> Result<String, CaseError> {
    check_inputs(params, input, pi)?;
    let thr = params.threshold();
    let own = perm_of(input);
    let choices = all_perms(input).into_iter().filter(|c| in_sp(pi, c, thr) && in_sp(&own, c, thr)).count();
    if choices == 0 {
        return Err(CaseError::EmptyChoiceSet(format!("n = {}, threshold {thr}", params.n)));
    }
    Ok(format!(
        "var I := {i};
det var pi := {pi};
det var T := [];
var O := {zeros};
var pi1 := {{}};
var Trace := [];
Trace := [];
pi1 :$= inter(sp(pi, {thr}), sp(permof(I), {thr}));
T := [];
Trace := Trace ++ {ts};
O := place(I, pi1);
I := O;
Trace := Trace ++ [(\"copy\", \"O\", \"I\")];
Trace := Trace ++ {ts};
O := place(I, pi)
",
        i = lit(&Value::Seq(input.to_vec())),
        pi = lit(pi),
        zeros = lit(&Value::Seq(vec![Value::Int(0); params.n])),
        ts = lit(&pass_trace(params.n)),
    ))
}

pub fn build_melbourne(params: &Params, input: &[Value], pi: &Value) -> Result<Program, CaseError> {
    build(&source(params, input, pi)?)
}

/// `O[pi(v)] = v` for every element.
pub const CORRECTNESS: &str = "C[all(v in set(O) => O[find(v, pi)] = v)]";

/// Input `[10, 20, ..]` of length `n`.
pub fn default_input(n: usize) -> Vec<Value> {
    (1..=n as i64).map(|k| Value::Int(10 * k)).collect()
}

/// Permutations the first pass may pick.
pub fn choice_set(params: &Params, input: &[Value], pi: &Value) -> BTreeSet<Value> {
    let thr = params.threshold();
    let own = perm_of(input);
    all_perms(input).into_iter().filter(|c| in_sp(pi, c, thr) && in_sp(&own, c, thr)).collect()
}

/// Runs every arrangement of the default input against every target
/// permutation.
pub fn checks(params: &Params, fuel: u64) -> Result<Vec<CaseCheck>, CaseError> {
    let items = default_input(params.n);
    let targets = all_perms(&items);
    let mut programs = Vec::new();
    let mut correct = true;
    let mut uniform = true;
    let correctness = parse_assertion(CORRECTNESS, &BTreeMap::from([("O".into(), Kind::Rand), ("pi".into(), Kind::Det)]))?;
    let u = Universe::new(1);
    for order in permutations(&items) {
        for pi in &targets {
            let p = build_melbourne(params, &order, pi)?;
            correct &= check_invariant_after(&p, &correctness, &u, fuel)?;
            let first = observe_distribution(&p, "pi1", fuel)?;
            uniform &= first.is_uniform_over(&choice_set(params, &order, pi));
            programs.push((Value::tuple([Value::Seq(order.clone()), pi.clone()]), p));
        }
    }
    let report = compare_programs("(I, pi)", &programs, "Trace", fuel)?;
    let fixed = report.distributions.iter().all(|d| d.as_point() == Some(&expected_trace(params.n)));
    let thr = params.threshold();
    let symmetric = targets.iter().all(|a| targets.iter().all(|b| in_sp(a, b, thr) == in_sp(b, a, thr)));
    Ok(vec![
        CaseCheck::new("trace-fixed", fixed, format!("{} runs produce the fixed {}-event trace", programs.len(), 6 * params.n + 1)),
        CaseCheck::new("secrecy", report.verdict == Verdict::PerfectlyOblivious, format!("epsilon = {}", report.epsilon)),
        CaseCheck::new("correctness", correct, format!("{CORRECTNESS} after every run")),
        CaseCheck::new("first-pass-uniform", uniform, format!("pi1 uniform over the threshold choices (threshold {thr})")),
        CaseCheck::new("threshold-symmetric", symmetric, format!("membership symmetric on all {} pairs", targets.len() * targets.len())),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks_pass_at_four() {
        for p in [1.0, 0.5] {
            for c in checks(&Params { n: 4, p }, 100).unwrap() {
                assert!(c.passed, "p = {p}: {c:?}");
            }
        }
    }

    #[test]
    fn threshold_one_restricts_choices() {
        let items = default_input(4);
        let pi = perm_of(&items);
        let loose = choice_set(&Params { n: 4, p: 1.0 }, &items, &pi);
        let tight = choice_set(&Params { n: 4, p: 0.5 }, &items, &pi);
        assert_eq!(loose.len(), 24);
        assert!(tight.len() < loose.len() && !tight.is_empty());
    }

    #[test]
    fn rejects_bad_parameters() {
        let items = default_input(3);
        assert!(matches!(source(&Params { n: 3, p: 1.0 }, &items, &perm_of(&items)), Err(CaseError::ConstraintViolation(_))));
        let four = default_input(4);
        let wrong = perm(&four, &[0, 0, 1, 2]);
        assert!(matches!(source(&Params::default(), &four, &wrong), Err(CaseError::ConstraintViolation(_))));
    }
}
