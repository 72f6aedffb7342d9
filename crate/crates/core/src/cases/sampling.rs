//! Oblivious sampling of `k` batches of `m` elements from a database of
//! `n = m * k` elements: shuffle the database, choose a membership matrix,
//! collect `(element, batch)` pairs, shuffle the pairs and distribute them.
//!
//! Indices in the ghost events are 1-based; arrays are stored 0-based.

use std::collections::BTreeSet;

use super::{build, constraint, lit, CaseCheck, CaseError};
use crate::builtins::permutations;
use crate::command::Program;
use crate::expr::Name;
use crate::interp::run;
use crate::security::{compare_programs, Verdict};
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Params {
    pub n: usize,
    pub m: usize,
    pub k: usize,
}

impl Default for Params {
    fn default() -> Params {
        Params { n: 2, m: 1, k: 2 }
    }
}

const MAX_MATRICES: usize = 512;

/// Boolean rows of length `n` with exactly `m` entries set.
fn rows(n: usize, m: usize) -> Vec<Vec<bool>> {
    (0..1u64 << n)
        .filter(|b| b.count_ones() as usize == m)
        .map(|b| (0..n).map(|i| b >> i & 1 == 1).collect())
        .collect()
}

/// All `k x n` membership matrices whose rows each select `m` positions.
pub fn matrices(p: Params) -> Vec<Value> {
    let rs = rows(p.n, p.m);
    let mut out: Vec<Vec<Value>> = vec![Vec::new()];
    for _ in 0..p.k {
        out = out
            .into_iter()
            .flat_map(|prefix| rs.iter().map(move |r| [prefix.clone(), vec![Value::Seq(r.iter().map(|b| Value::Bool(*b)).collect())]].concat()))
            .collect();
    }
    out.into_iter().map(Value::Seq).collect()
}

fn check(p: Params, db: &[Value]) -> Result<(), CaseError> {
    constraint(p.n == p.m * p.k, || format!("n = {} is not m * k = {} * {}", p.n, p.m, p.k))?;
    constraint(db.len() == p.n, || format!("database has {} elements, expected {}", db.len(), p.n))?;
    let count = rows(p.n, p.m).len().checked_pow(p.k as u32).unwrap_or(usize::MAX);
    constraint(count <= MAX_MATRICES, || format!("{count} membership matrices exceed the limit of {MAX_MATRICES}"))
}

pub fn source(p: Params, db: &[Value]) -> Result<String, CaseError> {
    check(p, db)?;
    let x = Value::Set(matrices(p).into_iter().collect());
    let empties = Value::Seq(vec![Value::Seq(vec![]); p.k]);
    Ok(format!(
        "det var n := {n};
det var m := {m};
det var k := {k};
var D := {db};
var SWO := [];
var S := [];
var j := 0;
var l := 0;
var i := 0;
var e := 0;
var e_next := 0;
var s := [];
var p := 0;
var Trace := [];
Trace := [];
D :$= perms(D);
Trace := Trace ++ [(\"oblishuffle\", n)];
SWO :$= {x};
S := [];
j := 1;
l := 1;
e := D[0];
Trace := Trace ++ [(\"read\", \"D\", 1)];
e_next := D[0];
Trace := Trace ++ [(\"read\", \"D\", 1)];
while l < n + 1 {{
    i := 1;
    while i < k + 1 {{
        if SWO[i - 1][j - 1] {{
            S := S ++ [(e, i)];
            Trace := Trace ++ [(\"write\", \"S\", len(S))];
            l := l + 1;
            if l < n + 1 {{
                e_next := D[l - 1]
            }};
            Trace := Trace ++ [(\"read\", \"S\", l)]
        }};
        i := i + 1
    }};
    e := e_next;
    j := j + 1
}};
S :$= perms(S);
Trace := Trace ++ [(\"oblishuffle\", len(S))];
s := {empties};
p := 1;
while p < len(S) + 1 {{
    e := fst(S[p - 1]);
    i := snd(S[p - 1]);
    Trace := Trace ++ [(\"read\", \"S\", p)];
    s[i - 1] := s[i - 1] ++ [e];
    Trace := Trace ++ [(\"write\", \"s\", i, len(s[i - 1]))];
    p := p + 1
}}
",
        n = p.n,
        m = p.m,
        k = p.k,
        db = lit(&Value::Seq(db.to_vec())),
        x = lit(&x),
        empties = lit(&empties),
    ))
}

pub fn build_sampling(p: Params, db: &[Value]) -> Result<Program, CaseError> {
    build(&source(p, db)?)
}

/// Batch labels of the collected pairs before the second shuffle: `m`
/// copies of each of `1 .. k`.
pub fn batch_labels(p: Params) -> Vec<i64> {
    (1..=p.k as i64).flat_map(|b| std::iter::repeat(b).take(p.m)).collect()
}

/// Outputs the batches may take: each batch an ordered selection of `m`
/// distinct positions of `db`, chosen independently of the other batches.
pub fn batch_outputs(p: Params, db: &[Value]) -> BTreeSet<Value> {
    let idx: Vec<Value> = (0..db.len() as i64).map(Value::Int).collect();
    let one: BTreeSet<Value> = permutations(&idx)
        .into_iter()
        .map(|order| Value::Seq(order[..p.m].iter().map(|i| db[i.as_int().expect("index") as usize].clone()).collect()))
        .collect();
    let mut out: Vec<Vec<Value>> = vec![Vec::new()];
    for _ in 0..p.k {
        out = out.into_iter().flat_map(|prefix| one.iter().map(move |b| [prefix.clone(), vec![b.clone()]].concat())).collect();
    }
    out.into_iter().map(Value::Seq).collect()
}

pub fn default_databases(n: usize) -> Vec<Vec<Value>> {
    let base: Vec<Value> = (1..=n as i64).map(|k| Value::Int(10 * k)).collect();
    let shifted: Vec<Value> = (1..=n as i64).map(|k| Value::Int(10 * k + 5)).collect();
    let mut reversed = base.clone();
    reversed.reverse();
    vec![base, reversed, shifted]
}

pub fn checks(p: Params, fuel: u64) -> Result<Vec<CaseCheck>, CaseError> {
    let dbs = default_databases(p.n);
    let mut runs = Vec::new();
    let mut traces_uniform = true;
    let mut trace_count = BTreeSet::new();
    let mut independent = true;
    let mut outputs_uniform = true;
    for db in &dbs {
        let prog = build_sampling(p, db)?;
        let out = run(&prog, fuel)?;
        let trace = out.marginal(&["Trace"]).map_err(|e| CaseError::ConstraintViolation(e.to_string()))?;
        let tdist = trace.rows().map(|r| r[0].clone());
        traces_uniform &= tdist.is_uniform_over(&tdist.support_set());
        trace_count.insert(tdist.len());
        let t = BTreeSet::from([Name::from("Trace")]);
        for other in ["SWO", "D", "s"] {
            independent &= out.mu.is_independent(&t, &BTreeSet::from([Name::from(other)])).unwrap_or(false);
        }
        let s = out.mu.position("s").expect("s is random");
        outputs_uniform &= out.mu.rows().map(|r| r[s].clone()).is_uniform_over(&batch_outputs(p, db));
        runs.push((Value::Seq(db.clone()), prog));
    }
    let report = compare_programs("D", &runs, "Trace", fuel)?;
    let expected = multinomial(p);
    Ok(vec![
        CaseCheck::new(
            "trace-uniform",
            traces_uniform && trace_count == BTreeSet::from([expected]),
            format!("trace uniform over {expected} sequences (labels of the shuffled pairs)"),
        ),
        CaseCheck::new("secrecy", report.verdict == Verdict::PerfectlyOblivious, format!("epsilon = {} over {} databases", report.epsilon, dbs.len())),
        CaseCheck::new("trace-independent", independent, "Trace independent of SWO, of the shuffled database and of the batches"),
        CaseCheck::new("batches-uniform", outputs_uniform, "each batch an independent uniform ordered selection of m elements"),
    ])
}

/// `n! / (m!)^k`: arrangements of the batch labels.
pub fn multinomial(p: Params) -> usize {
    let fact = |x: usize| (1..=x).product::<usize>();
    fact(p.n) / fact(p.m).pow(p.k as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks_pass_at_minimum() {
        for c in checks(Params::default(), 200).unwrap() {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn matrix_count() {
        assert_eq!(matrices(Params::default()).len(), 4);
        assert_eq!(matrices(Params { n: 4, m: 2, k: 2 }).len(), 36);
    }

    #[test]
    fn rejects_bad_parameters() {
        let db = default_databases(3).remove(0);
        assert!(matches!(source(Params { n: 3, m: 2, k: 2 }, &db), Err(CaseError::ConstraintViolation(_))));
        assert!(matches!(source(Params { n: 2, m: 1, k: 2 }, &db), Err(CaseError::ConstraintViolation(_))));
    }
}
