//! Path Oblivious Heap interfaces with the deterministic sub-functions
//! replaced by their trace contracts. A random argument `p` selects the
//! access pattern through a constant table `{(p, pattern)}`, so
//! `Trace := Trace ++ find(p, table)` appends exactly what the sub-function
//! would record.
//!
//! Positions of live elements are kept one variable per insertion (`Pos0`,
//! `Pos1`, ..). The heap contents are a set of `(key, value, timestamp)`
//! triples; elements are not moved between nodes, since eviction happens in
//! private memory and only its access pattern is observable.

use std::collections::BTreeSet;
use std::fmt;

use super::{build, constraint, lit, tok, CaseCheck, CaseError};
use crate::assertion::Universe;
use crate::command::Program;
use crate::security::{check_invariant_after, compare_programs, observe_distribution, Verdict};
use crate::syntax::parse_assertion;
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Params {
    /// Number of leaves, a power of two.
    pub n: usize,
    /// Slots in the root node; other nodes have four.
    pub n_root: usize,
}

impl Default for Params {
    fn default() -> Params {
        Params { n: 4, n_root: 4 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeapOp {
    Insert(i64, i64),
    /// Delete the element with this timestamp, i.e. the one added by that
    /// insertion.
    Delete(usize),
}

impl HeapOp {
    pub fn parse(s: &str) -> Option<HeapOp> {
        let (head, rest) = s.trim().split_once(':')?;
        match head {
            "i" | "insert" => {
                let (k, v) = rest.split_once('=')?;
                Some(HeapOp::Insert(k.parse().ok()?, v.parse().ok()?))
            }
            "d" | "delete" => rest.parse().ok().map(HeapOp::Delete),
            _ => None,
        }
    }

    fn is_insert(&self) -> bool {
        matches!(self, HeapOp::Insert(..))
    }
}

impl fmt::Display for HeapOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeapOp::Insert(k, v) => write!(f, "i:{k}={v}"),
            HeapOp::Delete(t) => write!(f, "d:{t}"),
        }
    }
}

fn log2(n: usize) -> usize {
    n.trailing_zeros() as usize
}

/// Node indexes from the root to leaf `p`; the root is 1 and leaf `p` is
/// `n + p`.
pub fn path(n: usize, p: usize) -> Vec<usize> {
    (0..=log2(n)).rev().map(|k| (n + p) >> k).collect()
}

pub fn path_r(n: usize, p: usize) -> Vec<usize> {
    let mut v = path(n, p);
    v.reverse();
    v
}

fn ev(op: &str, args: &[usize]) -> Value {
    Value::tuple(std::iter::once(tok(op)).chain(args.iter().map(|a| Value::Int(*a as i64))))
}

/// Pattern of adding to node `x`: a read and a write of every slot.
pub fn ta(params: Params, x: usize) -> Vec<Value> {
    let slots = if x == 1 { params.n_root } else { 4 };
    (0..slots).flat_map(|j| [ev("read", &[x, j]), ev("write", &[x, j])]).collect()
}

/// Pattern of deleting from node `x`; the same slots as adding.
pub fn td(params: Params, x: usize) -> Vec<Value> {
    ta(params, x)
}

pub fn tr(params: Params, p: usize) -> Vec<Value> {
    path(params.n, p).into_iter().flat_map(|x| td(params, x)).collect()
}

pub fn tu(params: Params, p: usize) -> Vec<Value> {
    let mut out = Vec::new();
    for (i, j) in path_r(params.n, p).into_iter().enumerate() {
        out.push(ev("readAll", &[j]));
        if i > 0 {
            out.push(ev("readMin", &[2 * j]));
            out.push(ev("readMin", &[2 * j + 1]));
        }
        out.push(ev("writeMin", &[j]));
    }
    out
}

pub fn te(params: Params, p: usize) -> Vec<Value> {
    let nodes = path(params.n, p);
    nodes.iter().map(|x| ev("readAll", &[*x])).chain(nodes.iter().map(|x| ev("writeAll", &[*x]))).collect()
}

/// Evict then update along leaf `p`.
pub fn evict_update(params: Params, p: usize) -> Vec<Value> {
    [te(params, p), tu(params, p)].concat()
}

/// Everything a deletion at leaf `p` records.
pub fn delete_trace(params: Params, p: usize) -> Vec<Value> {
    [tr(params, p), te(params, p), tu(params, p)].concat()
}

fn table(range: std::ops::Range<usize>, f: impl Fn(usize) -> Vec<Value>) -> Value {
    Value::Set(range.map(|p| Value::tuple([Value::Int(p as i64), Value::Seq(f(p))])).collect())
}

fn check(params: Params, ops: &[HeapOp]) -> Result<(), CaseError> {
    constraint(params.n >= 2 && params.n.is_power_of_two(), || format!("N = {} is not a power of two of at least 2", params.n))?;
    constraint(params.n <= 16, || format!("N = {} exceeds 16", params.n))?;
    constraint(params.n_root >= 1, || "the root needs at least one slot".into())?;
    let mut live = BTreeSet::new();
    let mut inserted = 0;
    for op in ops {
        match *op {
            HeapOp::Insert(..) => {
                live.insert(inserted);
                inserted += 1;
            }
            HeapOp::Delete(t) => {
                if !live.remove(&t) {
                    return Err(CaseError::InvalidDeleteReference(format!("timestamp {t} is not a live element")));
                }
            }
        }
    }
    Ok(())
}

pub fn source(params: Params, ops: &[HeapOp]) -> Result<String, CaseError> {
    check(params, ops)?;
    let n = params.n;
    let inserts = ops.iter().filter(|o| o.is_insert()).count();
    let mut src = String::from("det var H := {};\n");
    for t in 0..inserts {
        src.push_str(&format!("var Pos{t} := 0;\n"));
    }
    src.push_str("var P := 0;\nvar P2 := 0;\nvar Trace := [];\nTrace := [];\n");
    let low = lit(&table(0..n / 2, |p| evict_update(params, p)));
    let high = lit(&table(n / 2..n, |p| evict_update(params, p)));
    let del = lit(&table(0..n, |p| delete_trace(params, p)));
    let add_root = lit(&Value::Seq(ta(params, 1)));
    let mut tau = 0;
    for op in ops {
        match *op {
            HeapOp::Insert(k, v) => {
                src.push_str(&format!(
                    "Pos{tau} :$= {{0 .. {last}}};
H := union(H, {{({k}, {v}, {tau})}});
Trace := Trace ++ {add_root};
P :$= {{0 .. {half_last}}};
P2 :$= {{{half} .. {last}}};
Trace := Trace ++ find(P, {low});
Trace := Trace ++ find(P2, {high});
",
                    last = n - 1,
                    half = n / 2,
                    half_last = n / 2 - 1,
                ));
                tau += 1;
            }
            HeapOp::Delete(t) => {
                src.push_str(&format!(
                    "H := filter(e in H => e[2] != {t});
Trace := Trace ++ find(Pos{t}, {del});
"
                ));
            }
        }
    }
    src.push_str("skip\n");
    Ok(src)
}

pub fn build_poh(params: Params, ops: &[HeapOp]) -> Result<Program, CaseError> {
    build(&source(params, ops)?)
}

/// Traces `ops` may produce: per insertion the root pattern followed by
/// one evict-update pattern from each half, per deletion one deletion
/// pattern for any leaf.
pub fn trace_support(params: Params, ops: &[HeapOp]) -> BTreeSet<Value> {
    let n = params.n;
    let mut out: Vec<Vec<Value>> = vec![Vec::new()];
    for op in ops {
        let steps: Vec<Vec<Value>> = match op {
            HeapOp::Insert(..) => (0..n / 2)
                .flat_map(|p| (n / 2..n).map(move |q| (p, q)))
                .map(|(p, q)| [ta(params, 1), evict_update(params, p), evict_update(params, q)].concat())
                .collect(),
            HeapOp::Delete(_) => (0..n).map(|p| delete_trace(params, p)).collect(),
        };
        out = out.into_iter().flat_map(|prefix| steps.iter().map(move |s| [prefix.clone(), s.clone()].concat())).collect();
    }
    out.into_iter().map(Value::Seq).collect()
}

/// Timestamps alive after `ops`.
pub fn live(ops: &[HeapOp]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut tau = 0;
    for op in ops {
        match *op {
            HeapOp::Insert(..) => {
                out.push(tau);
                tau += 1;
            }
            HeapOp::Delete(t) => out.retain(|x| *x != t),
        }
    }
    out
}

/// Each live position independently uniform over the leaves, and the trace
/// uniform over `support` and independent of them.
pub fn invariant(params: Params, ops: &[HeapOp], support: &BTreeSet<Value>) -> String {
    let mut parts: Vec<String> = live(ops).into_iter().map(|t| format!("U[{{0 .. {}}}, Pos{t}]", params.n - 1)).collect();
    parts.push(format!("U[{}, Trace]", lit(&Value::Set(support.clone()))));
    parts.join(" * ")
}

/// Operation sequences up to length 2 with two choices of arguments each;
/// runs of one shape are compared with each other.
pub fn shapes() -> Vec<Vec<Vec<HeapOp>>> {
    let args = [(3, 30), (7, 70)];
    let ins = |i: usize| HeapOp::Insert(args[i].0, args[i].1);
    vec![
        (0..2).map(|i| vec![ins(i)]).collect(),
        (0..2).flat_map(|i| (0..2).map(move |j| vec![ins(i), ins(j)])).collect(),
        (0..2).map(|i| vec![ins(i), HeapOp::Delete(0)]).collect(),
    ]
}

pub fn checks(params: Params, fuel: u64) -> Result<Vec<CaseCheck>, CaseError> {
    let u = Universe::new(1);
    let mut out = Vec::new();
    let nodes = 1..2 * params.n;
    let ta_td = nodes.clone().all(|x| ta(params, x) == td(params, x));
    let paths = (0..params.n).all(|p| {
        let fwd = path(params.n, p);
        let mut back = path_r(params.n, p);
        back.reverse();
        fwd == back && fwd.len() == log2(2 * params.n)
    });
    out.push(CaseCheck::new("trace-functions", ta_td && paths, "TA = TD on every node; pathR reverses path, of log2(2N) nodes"));
    for group in shapes() {
        let name: Vec<&str> = group[0].iter().map(|o| if o.is_insert() { "insert" } else { "delete" }).collect();
        let name = name.join("-");
        let mut runs = Vec::new();
        let mut inv_ok = true;
        let mut uniform = true;
        for ops in &group {
            for k in 1..=ops.len() {
                let prefix = &ops[..k];
                let p = build_poh(params, prefix)?;
                let support = trace_support(params, prefix);
                let inv = parse_assertion(&invariant(params, prefix, &support), p.kinds())?;
                inv_ok &= check_invariant_after(&p, &inv, &u, fuel)?;
                if k == ops.len() {
                    uniform &= observe_distribution(&p, "Trace", fuel)?.is_uniform_over(&support);
                    let label = Value::Seq(ops.iter().map(|o| Value::token(&o.to_string())).collect());
                    runs.push((label, p));
                }
            }
        }
        let report = compare_programs("ops", &runs, "Trace", fuel)?;
        out.push(CaseCheck::new(
            format!("secrecy-{name}"),
            report.verdict == Verdict::PerfectlyOblivious && uniform,
            format!("{} runs: epsilon = {}, trace uniform over {} sequences", runs.len(), report.epsilon, trace_support(params, &group[0]).len()),
        ));
        out.push(CaseCheck::new(format!("invariant-{name}"), inv_ok, "live positions uniform and independent after each operation"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks_pass_at_four() {
        for c in checks(Params::default(), 100).unwrap() {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn paths() {
        assert_eq!(path(4, 0), vec![1, 2, 4]);
        assert_eq!(path(4, 3), vec![1, 3, 7]);
        assert_eq!(path_r(8, 5), vec![13, 6, 3, 1]);
    }

    #[test]
    fn root_pattern_ignores_arguments() {
        let a = source(Params::default(), &[HeapOp::Insert(1, 2)]).unwrap();
        let b = source(Params::default(), &[HeapOp::Insert(9, 9)]).unwrap();
        let root = lit(&Value::Seq(ta(Params::default(), 1)));
        assert!(a.contains(&root) && b.contains(&root));
        assert_eq!(ta(Params::default(), 1).len(), 8);
        assert_eq!(ta(Params::default(), 5).len(), 8);
        assert_eq!(ta(Params { n: 4, n_root: 6 }, 1).len(), 12);
    }

    #[test]
    fn deletion_patterns_are_distinct_and_equal_length() {
        let p = Params::default();
        let all: BTreeSet<Vec<Value>> = (0..4).map(|x| delete_trace(p, x)).collect();
        assert_eq!(all.len(), 4);
        assert!(all.iter().all(|t| t.len() == delete_trace(p, 0).len()));
    }

    #[test]
    fn invalid_deletes() {
        let p = Params::default();
        assert!(matches!(source(p, &[HeapOp::Delete(0)]), Err(CaseError::InvalidDeleteReference(_))));
        assert!(matches!(source(p, &[HeapOp::Insert(1, 1), HeapOp::Delete(0), HeapOp::Delete(0)]), Err(CaseError::InvalidDeleteReference(_))));
        assert!(matches!(source(Params { n: 3, n_root: 4 }, &[]), Err(CaseError::ConstraintViolation(_))));
    }

    #[test]
    fn heap_contents_track_operations() {
        let p = build_poh(Params::default(), &[HeapOp::Insert(1, 10), HeapOp::Insert(2, 20), HeapOp::Delete(0)]).unwrap();
        let out = crate::interp::run(&p, 100).unwrap();
        let expect = Value::Set([Value::tuple([2.into(), 20.into(), 1.into()])].into_iter().collect());
        assert_eq!(out.sigma["H"], expect);
    }

    #[test]
    fn op_syntax() {
        assert_eq!(HeapOp::parse("i:3=30"), Some(HeapOp::Insert(3, 30)));
        assert_eq!(HeapOp::parse("d:0"), Some(HeapOp::Delete(0)));
        assert_eq!(HeapOp::parse(&HeapOp::Insert(-1, 2).to_string()), Some(HeapOp::Insert(-1, 2)));
    }
}
