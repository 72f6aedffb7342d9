//! The perfectly oblivious Path ORAM approximation. Each access remaps the
//! block to a fresh uniform leaf, reads the old leaf's path into the stash
//! and writes the path back greedily from the leaf up.
//!
//! Buckets live in `B`, indexed by `P(x, l) = 2^l - 1 + x / 2^(L - l)`. The
//! stash `S` and the buckets hold `(address, data)` pairs; every block starts
//! in the stash with data 0. Reads empty the bucket so that no block is
//! stored twice.
//!
//! The position map is one variable per address (`Q0`, `Q1`, ..) so that
//! its entries can be separated from each other in assertions.

use std::collections::BTreeSet;
use std::fmt;

use super::{build, constraint, lit, tok, token_tuple, CaseCheck, CaseError};
use crate::assertion::Universe;
use crate::command::Program;
use crate::interp::run;
use crate::security::{check_invariant_after, compare_programs, observe_distribution, Verdict};
use crate::syntax::parse_assertion;
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Op {
    Read(usize),
    Write(usize, i64),
}

impl Op {
    pub fn addr(&self) -> usize {
        match *self {
            Op::Read(a) | Op::Write(a, _) => a,
        }
    }

    pub fn parse(s: &str) -> Option<Op> {
        let (head, rest) = s.trim().split_once(':')?;
        match head {
            "r" | "read" => rest.parse().ok().map(Op::Read),
            "w" | "write" => {
                let (a, d) = rest.split_once('=')?;
                Some(Op::Write(a.parse().ok()?, d.parse().ok()?))
            }
            _ => None,
        }
    }

    fn value(&self) -> Value {
        match *self {
            Op::Read(a) => token_tuple([tok("read"), Value::Int(a as i64)]),
            Op::Write(a, d) => token_tuple([tok("write"), Value::Int(a as i64), Value::Int(d)]),
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::Read(a) => write!(f, "r:{a}"),
            Op::Write(a, d) => write!(f, "w:{a}={d}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Params {
    /// Tree height: `2^L` leaves, `L + 1` levels.
    pub height: u32,
    pub addresses: usize,
    /// Bucket capacity.
    pub z: usize,
}

impl Default for Params {
    fn default() -> Params {
        Params { height: 2, addresses: 2, z: 4 }
    }
}

impl Params {
    pub fn leaves(&self) -> i64 {
        1 << self.height
    }

    fn check(&self, ops: &[Op]) -> Result<(), CaseError> {
        constraint(self.height <= 4, || format!("tree height {} exceeds 4", self.height))?;
        constraint(self.addresses >= 1, || "at least one address is required".into())?;
        constraint(self.addresses as i64 <= self.leaves(), || format!("{} addresses exceed the {} leaves", self.addresses, self.leaves()))?;
        constraint(self.z >= 1, || "bucket capacity must be positive".into())?;
        for op in ops {
            constraint(op.addr() < self.addresses, || format!("{op} addresses beyond {}", self.addresses))?;
        }
        Ok(())
    }
}

pub fn source(params: &Params, ops: &[Op]) -> Result<String, CaseError> {
    params.check(ops)?;
    let l = params.height;
    let stash = Value::Set((0..params.addresses as i64).map(|a| Value::tuple([Value::Int(a), Value::Int(0)])).collect());
    let buckets = Value::Seq(vec![Value::Set(BTreeSet::new()); (1 << (l + 1)) - 1]);
    let mut src = format!(
        "det var L := {l};
det var Z := {z};
det var op := 0;
det var a := 0;
det var dstar := 0;
det var l := 0;
{qs}var B := {buckets};
var S := {stash};
var S1 := {{}};
var x := 0;
var data := 0;
var Res := [];
var T0 := [];
var Trace := [];
Trace := [];
{init}",
        z = params.z,
        qs = (0..params.addresses).map(|a| format!("var Q{a} := 0;\n")).collect::<String>(),
        init = (0..params.addresses).map(|a| format!("Q{a} :$= {{0 .. 2 ^ L - 1}};\n")).collect::<String>(),
        buckets = lit(&buckets),
        stash = lit(&stash),
    );
    for op in ops {
        let (code, a, d) = match *op {
            Op::Read(a) => (0, a, 0),
            Op::Write(a, d) => (1, a, d),
        };
        src.push_str(&format!(
            "op := {code};
a := {a};
dstar := {d};
T0 := Trace;
x := Q{a};
Q{a} :$= {{0 .. 2 ^ L - 1}};
l := 0;
while l <= L {{
    S := union(S, B[2 ^ l - 1 + x / 2 ^ (L - l)]);
    B[2 ^ l - 1 + x / 2 ^ (L - l)] := {{}};
    Trace := Trace ++ [(\"ReadBucket\", x, l)];
    l := l + 1
}};
data := find(a, S);
Res := Res ++ [data];
if op = 1 {{
    S := union(diff(S, {{(a, data)}}), {{(a, dstar)}})
}};
l := L;
while l >= 0 {{
    S1 := filter(e in S => 2 ^ l - 1 + x / 2 ^ (L - l) = 2 ^ l - 1 + {leaf} / 2 ^ (L - l));
    S1 := take(Z, S1);
    S := diff(S, S1);
    B[2 ^ l - 1 + x / 2 ^ (L - l)] := S1;
    Trace := Trace ++ [(\"WriteBucket\", x, l)];
    l := l - 1
}};
",
            leaf = leaf_of("fst(e)", params.addresses),
        ));
    }
    src.push_str("skip\n");
    Ok(src)
}

/// `Q[addr]` as a chain of conditionals over the per-address variables.
fn leaf_of(addr: &str, n: usize) -> String {
    (0..n - 1).rev().fold(format!("Q{}", n - 1), |rest, a| format!("ite({addr} = {a}, Q{a}, {rest})"))
}

pub fn build_path_oram(params: &Params, ops: &[Op]) -> Result<Program, CaseError> {
    build(&source(params, ops)?)
}

/// Events of one access whose old leaf is `x`.
pub fn access_trace(height: u32, x: i64) -> Vec<Value> {
    let ev = |name: &str, l: i64| token_tuple([tok(name), Value::Int(x), Value::Int(l)]);
    let l = height as i64;
    (0..=l).map(|k| ev("ReadBucket", k)).chain((0..=l).rev().map(|k| ev("WriteBucket", k))).collect()
}

/// Traces `k` accesses may produce: one old leaf per access.
pub fn trace_support(height: u32, k: usize) -> BTreeSet<Value> {
    let mut out: Vec<Vec<Value>> = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|prefix| (0..1i64 << height).map(move |x| [prefix.clone(), access_trace(height, x)].concat()))
            .collect();
    }
    out.into_iter().map(Value::Seq).collect()
}

/// What a plain array returns for each operation.
pub fn expected_results(params: &Params, ops: &[Op]) -> Value {
    let mut mem = vec![0i64; params.addresses];
    let mut out = Vec::new();
    for op in ops {
        out.push(Value::Int(mem[op.addr()]));
        if let Op::Write(a, d) = *op {
            mem[a] = d;
        }
    }
    Value::Seq(out)
}

/// The position map uniform and independent entry by entry, and the trace
/// uniform over `support`, independent of the map.
pub fn main_invariant(params: &Params, support: &BTreeSet<Value>) -> String {
    let w = params.leaves() - 1;
    let mut parts: Vec<String> = (0..params.addresses).map(|a| format!("U[{{0 .. {w}}}, Q{a}]")).collect();
    parts.push(format!("U[{}, Trace]", lit(&Value::Set(support.clone()))));
    parts.join(" * ")
}

/// Every operation sequence of length `k` over reads and writes (of `1`)
/// to each address.
pub fn op_sequences(addresses: usize, k: usize) -> Vec<Vec<Op>> {
    let ops: Vec<Op> = (0..addresses).flat_map(|a| [Op::Read(a), Op::Write(a, 1)]).collect();
    let mut out: Vec<Vec<Op>> = vec![Vec::new()];
    for _ in 0..k {
        out = out.into_iter().flat_map(|p| ops.iter().map(move |o| [p.clone(), vec![*o]].concat())).collect();
    }
    out
}

/// Runs every sequence of each length up to `max_len`, checking the Main
/// Invariant after every access, results against a plain array, and trace
/// equality across sequences of one length.
pub fn checks(params: &Params, max_len: usize, fuel: u64) -> Result<Vec<CaseCheck>, CaseError> {
    let u = Universe::new(1);
    let mut out = Vec::new();
    for k in 1..=max_len {
        let support = trace_support(params.height, k);
        let inv_src = main_invariant(params, &support);
        let mut runs = Vec::new();
        let mut invariant = true;
        let mut results = true;
        for ops in op_sequences(params.addresses, k) {
            let p = build_path_oram(params, &ops)?;
            let inv = parse_assertion(&inv_src, p.kinds())?;
            invariant &= check_invariant_after(&p, &inv, &u, fuel)?;
            results &= observe_distribution(&p, "Res", fuel)?.as_point() == Some(&expected_results(params, &ops));
            runs.push((Value::Seq(ops.iter().map(Op::value).collect()), p));
        }
        let report = compare_programs("ops", &runs, "Trace", fuel)?;
        let uniform = report.distributions.iter().all(|d| d.is_uniform_over(&support));
        out.push(CaseCheck::new(
            format!("secrecy-{k}"),
            report.verdict == Verdict::PerfectlyOblivious && uniform,
            format!("{} sequences of length {k}: epsilon = {}, trace uniform over {} sequences", runs.len(), report.epsilon, support.len()),
        ));
        out.push(CaseCheck::new(format!("main-invariant-{k}"), invariant, format!("after {k} accesses")));
        out.push(CaseCheck::new(format!("results-{k}"), results, "reads return the last write"));
    }
    Ok(out)
}

/// Largest bucket after running `ops`, over all outcomes.
pub fn max_bucket(params: &Params, ops: &[Op], fuel: u64) -> Result<usize, CaseError> {
    let out = run(&build_path_oram(params, ops)?, fuel)?;
    let b = out.mu.position("B").expect("B is random");
    let mut most = 0;
    for (row, _) in out.mu.rows().iter() {
        if let Value::Seq(buckets) = &row[b] {
            most = buckets.iter().map(|bucket| if let Value::Set(s) = bucket { s.len() } else { 0 }).max().unwrap_or(0).max(most);
        }
    }
    Ok(most)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks_pass_at_height_two() {
        for c in checks(&Params::default(), 2, 1000).unwrap() {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn trace_shape() {
        let t = access_trace(2, 3);
        assert_eq!(t.len(), 6);
        assert_eq!(trace_support(2, 2).len(), 16);
    }

    #[test]
    fn buckets_respect_capacity() {
        let p = Params { z: 1, ..Params::default() };
        let ops = [Op::Write(0, 5), Op::Read(1)];
        assert!(max_bucket(&p, &ops, 1000).unwrap() <= 1);
        let prog = build_path_oram(&p, &ops).unwrap();
        assert_eq!(observe_distribution(&prog, "Res", 1000).unwrap().as_point(), Some(&expected_results(&p, &ops)));
    }

    #[test]
    fn op_syntax() {
        assert_eq!(Op::parse("w:1=7"), Some(Op::Write(1, 7)));
        assert_eq!(Op::parse("read:0"), Some(Op::Read(0)));
        assert_eq!(Op::parse("x:0"), None);
        assert_eq!(Op::parse(&Op::Write(0, 3).to_string()), Some(Op::Write(0, 3)));
    }

    #[test]
    fn rejects_out_of_range_address() {
        assert!(matches!(source(&Params::default(), &[Op::Read(2)]), Err(CaseError::ConstraintViolation(_))));
    }
}
