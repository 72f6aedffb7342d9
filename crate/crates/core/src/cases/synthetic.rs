//! Two random cells `A`, read at secret indices `S[i]`; each read value is
//! appended to `O` and the cell is refreshed through a loop whose length is
//! random and a draw from a random range.

use std::collections::BTreeSet;

use super::{build, lit, CaseCheck, CaseError};
use crate::command::Program;
use crate::expr::Name;
use crate::interp::run;
use crate::security::{statistical_secrecy, ObliviousnessQuery, Verdict};
use crate::value::Value;

/// Source of the program for secret `s` (a sequence of bits).
pub fn source(s: &[i64]) -> String {
    format!(
        "det var n := {n};
det var S := {s};
var O := [];
var A := [0, 0];
var i := 0;
var m := 0;
var j := 0;
var t := 0;
t :$= {{0 .. 7}};
A[0] := t;
t :$= {{0 .. 7}};
A[1] := t;
i := 0;
while n > i {{
    O := O ++ [A[S[i]]];
    m := 8;
    j := 0;
    while A[S[i]] > j {{
        m := 2 * m;
        j := j + 1;
        if (j + S[i]) % 3 == 0 {{
            j := j + 1
        }}
    }};
    t :$= {{1 .. m}};
    A[S[i]] := t % 8;
    i := i + 1
}}
",
        n = s.len(),
        s = lit(&Value::int_seq(s.iter().copied())),
    )
}

/// The program with `S` all zeros; the secret is varied through `S`.
pub fn build_synthetic(n: usize) -> Result<Program, CaseError> {
    build(&source(&vec![0; n]))
}

/// Every secret of length `n`.
pub fn secrets(n: usize) -> Vec<Value> {
    (0..1u32 << n).map(|bits| Value::int_seq((0..n).map(|k| i64::from((bits >> k) & 1)))).collect()
}

/// All sequences of length `n` over `{0 .. 7}`.
pub fn eight(n: usize) -> Vec<Value> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out.into_iter().flat_map(|p: Vec<i64>| (0..8).map(move |x| [p.clone(), vec![x]].concat())).collect();
    }
    out.into_iter().map(Value::int_seq).collect()
}

/// For every secret of length `n`: `O` uniform over [`eight`], the same
/// across secrets, and independent of the cells `A`.
pub fn checks(n: usize, fuel: u64) -> Result<Vec<CaseCheck>, CaseError> {
    let program = build_synthetic(n)?;
    let query = ObliviousnessQuery { program: program.clone(), secret_var: "S".into(), secrets: secrets(n), observe_var: "O".into(), fuel };
    let report = statistical_secrecy(&query)?;
    let expected: BTreeSet<Value> = eight(n).into_iter().collect();
    let uniform = report.distributions.iter().all(|d| d.is_uniform_over(&expected));
    let out = run(&program, fuel)?;
    let independent = out.mu.is_independent(&BTreeSet::from([Name::from("O")]), &BTreeSet::from([Name::from("A")])).unwrap_or(false);
    Ok(vec![
        CaseCheck::new("trace-uniform", uniform, format!("O uniform over {} sequences for each of {} secrets", expected.len(), query.secrets.len())),
        CaseCheck::new("secrecy", report.verdict == Verdict::PerfectlyOblivious, format!("epsilon = {}", report.epsilon)),
        CaseCheck::new("independent-of-cells", independent, "O independent of A"),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::FinDist;
    use crate::security::trace_distribution;

    #[test]
    fn empty_secret_leaves_output_empty() {
        let p = build_synthetic(0).unwrap();
        assert_eq!(trace_distribution(&p, "S", &Value::int_seq([]), "O", 100).unwrap(), FinDist::unit(Value::Seq(vec![])));
    }

    #[test]
    fn shipped_source_matches_builder() {
        let shipped = crate::syntax::parse_program(include_str!("../../programs/synthetic.obl")).unwrap();
        assert_eq!(shipped, build_synthetic(2).unwrap());
    }

    #[test]
    fn one_step() {
        for c in checks(1, 10_000).unwrap() {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn two_steps() {
        for c in checks(2, 10_000).unwrap() {
            assert!(c.passed, "{c:?}");
        }
    }
}
