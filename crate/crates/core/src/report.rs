//! JSON documents for distributions, configurations, secrecy reports and
//! verdicts. Probabilities are `{"num", "den", "decimal"}` objects; the
//! rational is authoritative and the decimal has six places. Values are
//! rendered in source syntax so that they parse back.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Map, Number, Value as Json};
use thiserror::Error;

use crate::config::Config;
use crate::dist::{FinDist, Prob};
use crate::logic::fuzz::FuzzReport;
use crate::security::SecrecyReport;
use crate::syntax::parse_value;
use crate::value::Value;

pub const DECIMAL_PLACES: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("malformed document: {0}")]
    Malformed(String),
}

fn malformed(msg: impl Into<String>) -> ReportError {
    ReportError::Malformed(msg.into())
}

fn int_json(i: &BigInt) -> Json {
    match i64::try_from(i) {
        Ok(small) => Json::Number(Number::from(small)),
        Err(_) => Json::String(i.to_string()),
    }
}

fn int_from_json(j: &Json) -> Result<BigInt, ReportError> {
    match j {
        Json::Number(n) => n.as_i64().map(BigInt::from).ok_or_else(|| malformed(format!("{n} is not an integer"))),
        Json::String(s) => s.parse().map_err(|_| malformed(format!("`{s}` is not an integer"))),
        other => Err(malformed(format!("expected an integer, found {other}"))),
    }
}

pub fn prob_json(p: &Prob) -> Json {
    json!({ "num": int_json(p.numer()), "den": int_json(p.denom()), "decimal": p.to_decimal(DECIMAL_PLACES) })
}

pub fn prob_from_json(j: &Json) -> Result<Prob, ReportError> {
    let num = int_from_json(j.get("num").ok_or_else(|| malformed("probability without `num`"))?)?;
    let den = int_from_json(j.get("den").ok_or_else(|| malformed("probability without `den`"))?)?;
    if den == BigInt::from(0) {
        return Err(malformed("zero denominator"));
    }
    Ok(Prob::from_ratio(BigRational::new(num, den)))
}

pub fn value_json(v: &Value) -> Json {
    Json::String(v.to_string())
}

pub fn value_from_json(j: &Json) -> Result<Value, ReportError> {
    let s = j.as_str().ok_or_else(|| malformed(format!("expected a value string, found {j}")))?;
    parse_value(s).map_err(|e| malformed(e.to_string()))
}

/// Outcomes in value order.
pub fn dist_json(d: &FinDist<Value>) -> Json {
    let outcomes: Vec<Json> = d.iter_probs().map(|(v, p)| json!({ "value": value_json(v), "prob": prob_json(&p) })).collect();
    json!({ "support": d.len(), "outcomes": outcomes })
}

pub fn dist_from_json(j: &Json) -> Result<FinDist<Value>, ReportError> {
    let outcomes = j.get("outcomes").and_then(Json::as_array).ok_or_else(|| malformed("distribution without `outcomes`"))?;
    let mut items = Vec::new();
    for o in outcomes {
        let v = value_from_json(o.get("value").ok_or_else(|| malformed("outcome without `value`"))?)?;
        let p = prob_from_json(o.get("prob").ok_or_else(|| malformed("outcome without `prob`"))?)?;
        items.push((v, p));
    }
    FinDist::from_probs(items).map_err(|e| malformed(e.to_string()))
}

/// Deterministic store plus the joint distribution of the random store,
/// one row per memory.
pub fn config_json(c: &Config) -> Json {
    let det: Map<String, Json> = c.sigma.iter().map(|(n, v)| (n.to_string(), value_json(v))).collect();
    let vars: Vec<Json> = c.mu.vars().iter().map(|n| Json::String(n.to_string())).collect();
    let rows: Vec<Json> = c
        .mu
        .rows()
        .iter_probs()
        .map(|(row, p)| json!({ "values": row.iter().map(value_json).collect::<Vec<_>>(), "prob": prob_json(&p) }))
        .collect();
    json!({ "deterministic": det, "random": { "vars": vars, "rows": rows } })
}

fn matrix_json(m: &[Vec<Prob>]) -> Json {
    Json::Array(m.iter().map(|row| Json::Array(row.iter().map(prob_json).collect())).collect())
}

pub fn secrecy_json(r: &SecrecyReport) -> Json {
    json!({
        "secret_var": &*r.secret_var,
        "observe_var": &*r.observe_var,
        "secrets": r.secrets.iter().map(value_json).collect::<Vec<_>>(),
        "distributions": r.distributions.iter().map(dist_json).collect::<Vec<_>>(),
        "sd": matrix_json(&r.sd),
        "advantage": matrix_json(&r.advantage),
        "epsilon": prob_json(&r.epsilon),
        "verdict": r.verdict,
    })
}

pub fn fuzz_json(r: &FuzzReport) -> Json {
    json!({
        "rule": r.rule.name(),
        "seed": r.seed,
        "attempts": r.attempts,
        "valid": r.valid,
        "violations": r.violations.iter().map(|v| json!({ "triple": v.app.conclusion.to_string(), "violation": v.violation.to_string() })).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn probability_document() {
        let j = prob_json(&Prob::new(1, 3));
        assert_eq!(j, json!({ "num": 1, "den": 3, "decimal": "0.333333" }));
        assert_eq!(prob_from_json(&j).unwrap(), Prob::new(1, 3));
        let big = Prob::from_ratio(BigRational::new(BigInt::from(1), BigInt::from(10).pow(30)));
        assert_eq!(prob_from_json(&prob_json(&big)).unwrap(), big);
    }

    #[test]
    fn structured_values_round_trip() {
        let v = Value::tuple([Value::token("read"), Value::Int(-3), Value::Seq(vec![Value::Bool(true)]), Value::Set([Value::Int(1)].into_iter().collect())]);
        assert_eq!(value_from_json(&value_json(&v)).unwrap(), v);
        let one = Value::tuple([Value::Int(1)]);
        assert_eq!(value_from_json(&value_json(&one)).unwrap(), one);
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(dist_from_json(&json!({})).is_err());
        assert!(prob_from_json(&json!({ "num": 1, "den": 0 })).is_err());
        assert!(dist_from_json(&json!({ "outcomes": [{ "value": "1", "prob": { "num": 1, "den": 2 } }] })).is_err());
    }

    fn small_value() -> impl Strategy<Value = Value> {
        let leaf = prop_oneof![any::<i64>().prop_map(Value::Int), any::<bool>().prop_map(Value::Bool), "[a-z]{1,4}".prop_map(|s| Value::token(&s))];
        leaf.prop_recursive(2, 8, 3, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 0..3).prop_map(Value::Seq),
                prop::collection::vec(inner.clone(), 0..3).prop_map(Value::tuple),
                prop::collection::btree_set(inner, 0..3).prop_map(Value::Set),
            ]
        })
    }

    proptest! {
        #[test]
        fn distributions_round_trip(items in prop::collection::btree_map(small_value(), 1u32..20, 1..6)) {
            let d = FinDist::from_weights(items.into_iter().map(|(v, w)| (v, BigRational::from_integer(BigInt::from(w))))).unwrap();
            prop_assert_eq!(dist_from_json(&dist_json(&d)).unwrap(), d);
        }
    }
}
