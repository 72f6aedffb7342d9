//! Evaluation of named built-in functions.

use std::collections::BTreeSet;

use crate::error::EvalError;
use crate::expr::Builtin;
use crate::value::Value;

pub(crate) fn apply(f: Builtin, args: Vec<Value>) -> Result<Value, EvalError> {
    let name = f.name();
    if args.len() != f.arity() {
        return Err(EvalError::invalid(name, format!("expected {} arguments, got {}", f.arity(), args.len())));
    }
    let mut args = args.into_iter();
    let mut next = || args.next().expect("arity checked");
    match f {
        Builtin::Len => match next() {
            Value::Seq(s) | Value::Tuple(s) => Ok(Value::Int(s.len() as i64)),
            Value::Set(s) => Ok(Value::Int(s.len() as i64)),
            other => Err(EvalError::type_mismatch("collection", &other)),
        },
        Builtin::Count => {
            let v = next();
            let a = next();
            let n = match &a {
                Value::Seq(s) => s.iter().filter(|x| **x == v).count(),
                Value::Set(s) => usize::from(s.contains(&v)),
                other => return Err(EvalError::type_mismatch("sequence", other)),
            };
            Ok(Value::Int(n as i64))
        }
        Builtin::Perms => {
            let items = next().elements()?;
            Ok(Value::Set(permutations(&items).into_iter().map(Value::Seq).collect()))
        }
        Builtin::SetOf => Ok(Value::Set(next().elements()?.into_iter().collect())),
        Builtin::SeqOf => Ok(Value::Seq(next().elements()?)),
        Builtin::Union | Builtin::Inter | Builtin::Diff => {
            let a = next();
            let b = next();
            let (a, b) = (a.as_set()?, b.as_set()?);
            let out: BTreeSet<Value> = match f {
                Builtin::Union => a.union(b).cloned().collect(),
                Builtin::Inter => a.intersection(b).cloned().collect(),
                _ => a.difference(b).cloned().collect(),
            };
            Ok(Value::Set(out))
        }
        Builtin::Min | Builtin::Max => {
            let items = next().elements()?;
            let pick = if f == Builtin::Min { items.into_iter().min() } else { items.into_iter().max() };
            pick.ok_or_else(|| EvalError::invalid(name, "empty collection"))
        }
        Builtin::Sum => {
            let mut total: i64 = 0;
            for v in next().elements()? {
                total = total.checked_add(v.as_int()?).ok_or(EvalError::Overflow)?;
            }
            Ok(Value::Int(total))
        }
        Builtin::Take => {
            let n = usize::try_from(next().as_int()?).map_err(|_| EvalError::invalid(name, "negative count"))?;
            match next() {
                Value::Set(s) => Ok(Value::Set(s.into_iter().take(n).collect())),
                Value::Seq(s) => Ok(Value::Seq(s.into_iter().take(n).collect())),
                other => Err(EvalError::type_mismatch("set or sequence", &other)),
            }
        }
        Builtin::Slice => {
            let a = next();
            let lo = next().as_int()?;
            let hi = next().as_int()?;
            let s = a.as_seq()?;
            let lo_u = usize::try_from(lo).map_err(|_| EvalError::IndexOutOfRange { index: lo, len: s.len() })?;
            let hi_u = usize::try_from(hi).map_err(|_| EvalError::IndexOutOfRange { index: hi, len: s.len() })?;
            if lo_u > hi_u || hi_u > s.len() {
                return Err(EvalError::IndexOutOfRange { index: hi, len: s.len() });
            }
            Ok(Value::Seq(s[lo_u..hi_u].to_vec()))
        }
        Builtin::Seqs => {
            let n = usize::try_from(next().as_int()?).map_err(|_| EvalError::invalid(name, "negative length"))?;
            let alphabet = next().elements()?;
            let mut out: Vec<Vec<Value>> = vec![vec![]];
            for _ in 0..n {
                out = out
                    .into_iter()
                    .flat_map(|prefix| {
                        alphabet.iter().map(move |a| {
                            let mut p = prefix.clone();
                            p.push(a.clone());
                            p
                        })
                    })
                    .collect();
            }
            Ok(Value::Set(out.into_iter().map(Value::Seq).collect()))
        }
        Builtin::Ite => {
            let c = next();
            let a = next();
            let b = next();
            Ok(if c.is_truthy() { a } else { b })
        }
        Builtin::Fst | Builtin::Snd => {
            let t = next();
            let i = if f == Builtin::Fst { 0 } else { 1 };
            crate::expr::index(&t, i).cloned()
        }
        Builtin::Find => {
            let key = next();
            for pair in next().elements()? {
                if let Value::Tuple(kv) = &pair {
                    if kv.len() == 2 && kv[0] == key {
                        return Ok(kv[1].clone());
                    }
                }
            }
            Err(EvalError::invalid(name, format!("no entry for key {key}")))
        }
        Builtin::Place => {
            let items = next().elements()?;
            let pi = next();
            place(&items, &pi)
        }
        Builtin::Sp => {
            let pi = next();
            let threshold = next().as_int()?;
            within_threshold_perms(&pi, threshold)
        }
        Builtin::PermOf => {
            let items = next().elements()?;
            Ok(perm_of(&items))
        }
    }
}

/// All orderings of `items`, without duplicates when items repeat.
pub fn permutations(items: &[Value]) -> BTreeSet<Vec<Value>> {
    let mut out = BTreeSet::new();
    let mut work = items.to_vec();
    work.sort();
    loop {
        out.insert(work.clone());
        if !next_permutation(&mut work) {
            break;
        }
    }
    out
}

fn next_permutation(xs: &mut [Value]) -> bool {
    if xs.len() < 2 {
        return false;
    }
    let mut i = xs.len() - 1;
    while i > 0 && xs[i - 1] >= xs[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = xs.len() - 1;
    while xs[j] <= xs[i - 1] {
        j -= 1;
    }
    xs.swap(i - 1, j);
    xs[i..].reverse();
    true
}

/// A permutation is represented as the graph of the map from each element to
/// its target index: a set of `(value, index)` pairs.
fn perm_graph(pi: &Value) -> Result<Vec<(Value, i64)>, EvalError> {
    let mut out = Vec::new();
    for pair in pi.elements()? {
        match pair {
            Value::Tuple(kv) if kv.len() == 2 => out.push((kv[0].clone(), kv[1].as_int()?)),
            other => return Err(EvalError::type_mismatch("(value, index) pair", &other)),
        }
    }
    Ok(out)
}

/// The permutation that describes an array's contents: each element maps to
/// its current index.
pub fn perm_of(items: &[Value]) -> Value {
    Value::Set(items.iter().enumerate().map(|(i, v)| Value::tuple([v.clone(), Value::Int(i as i64)])).collect())
}

/// Output array `O` with `O[pi(v)] = v` for every element `v`.
pub fn place(items: &[Value], pi: &Value) -> Result<Value, EvalError> {
    let graph = perm_graph(pi)?;
    let n = items.len();
    let mut out: Vec<Option<Value>> = vec![None; n];
    for v in items {
        let (_, idx) = graph
            .iter()
            .find(|(k, _)| k == v)
            .ok_or_else(|| EvalError::invalid("place", format!("permutation has no entry for {v}")))?;
        let slot = usize::try_from(*idx).ok().filter(|i| *i < n).ok_or(EvalError::IndexOutOfRange { index: *idx, len: n })?;
        if out[slot].replace(v.clone()).is_some() {
            return Err(EvalError::invalid("place", format!("index {idx} targeted twice")));
        }
    }
    Ok(Value::Seq(out.into_iter().map(|v| v.expect("bijection fills every slot")).collect()))
}

fn isqrt_exact(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n).then_some(r)
}

/// Values whose target index lies in bucket `b` of width `w`.
fn bucket(graph: &[(Value, i64)], b: usize, w: usize) -> BTreeSet<&Value> {
    let lo = (b * w) as i64;
    let hi = lo + w as i64;
    graph.iter().filter(|(_, i)| lo <= *i && *i < hi).map(|(v, _)| v).collect()
}

/// Whether two permutations over the same n elements share at most
/// `threshold` elements in every bucket of width sqrt(n).
pub fn within_threshold(a: &[(Value, i64)], b: &[(Value, i64)], threshold: i64) -> Result<bool, EvalError> {
    let n = a.len();
    if b.len() != n {
        return Ok(false);
    }
    let w = isqrt_exact(n).ok_or_else(|| EvalError::invalid("sp", format!("length {n} is not a perfect square")))?;
    for i in 0..w {
        let shared = bucket(a, i, w).intersection(&bucket(b, i, w)).count();
        if shared as i64 > threshold {
            return Ok(false);
        }
    }
    Ok(true)
}

fn within_threshold_perms(pi: &Value, threshold: i64) -> Result<Value, EvalError> {
    let graph = perm_graph(pi)?;
    let values: Vec<Value> = graph.iter().map(|(v, _)| v.clone()).collect();
    let n = values.len() as i64;
    let mut out = BTreeSet::new();
    for order in permutations(&(0..n).map(Value::Int).collect::<Vec<_>>()) {
        let candidate: Vec<(Value, i64)> = values.iter().cloned().zip(order.iter().map(|i| i.as_int().expect("ints"))).collect();
        if within_threshold(&graph, &candidate, threshold)? {
            out.insert(Value::Set(candidate.into_iter().map(|(v, i)| Value::tuple([v, Value::Int(i)])).collect()));
        }
    }
    Ok(Value::Set(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(f: Builtin, args: Vec<Value>) -> Value {
        apply(f, args).unwrap()
    }

    #[test]
    fn permutations_count_and_dedup() {
        assert_eq!(permutations(&[Value::Int(1), Value::Int(2), Value::Int(3)]).len(), 6);
        assert_eq!(permutations(&[Value::Int(1), Value::Int(1), Value::Int(2)]).len(), 3);
        assert_eq!(permutations(&[]).len(), 1);
    }

    #[test]
    fn count_len_and_sets() {
        assert_eq!(call(Builtin::Count, vec![Value::Int(1), Value::int_seq([1, 2, 1])]), Value::Int(2));
        assert_eq!(call(Builtin::Len, vec![Value::int_seq([1, 2, 1])]), Value::Int(3));
        assert_eq!(call(Builtin::Union, vec![Value::int_set([1]), Value::int_set([2])]), Value::int_set([1, 2]));
        assert_eq!(call(Builtin::Diff, vec![Value::int_set([1, 2]), Value::int_set([2])]), Value::int_set([1]));
    }

    #[test]
    fn seqs_enumerates_words() {
        let s = call(Builtin::Seqs, vec![Value::Int(2), Value::int_set([0, 1])]);
        assert_eq!(s.as_set().unwrap().len(), 4);
        let s = call(Builtin::Seqs, vec![Value::Int(0), Value::int_set([0, 1])]);
        assert_eq!(s, Value::Set([Value::Seq(vec![])].into_iter().collect()));
    }

    #[test]
    fn place_realizes_permutation() {
        // pi(x)=1, pi(y)=0, pi(z)=2 sends [x, y, z] to [y, x, z].
        let pi = Value::Set(
            [(10, 1), (20, 0), (30, 2)].into_iter().map(|(v, i)| Value::tuple([Value::Int(v), Value::Int(i)])).collect(),
        );
        let out = place(&[Value::Int(10), Value::Int(20), Value::Int(30)], &pi).unwrap();
        assert_eq!(out, Value::int_seq([20, 10, 30]));
        let items = [Value::Int(10), Value::Int(20)];
        assert_eq!(place(&items, &perm_of(&items)).unwrap(), Value::int_seq([10, 20]));
    }

    #[test]
    fn threshold_perms_at_n4() {
        let items: Vec<Value> = (0..4).map(Value::Int).collect();
        let id = perm_of(&items);
        let all = call(Builtin::Sp, vec![id.clone(), Value::Int(2)]);
        assert_eq!(all.as_set().unwrap().len(), 24);
        let tight = call(Builtin::Sp, vec![id, Value::Int(1)]);
        // Excluded: {0, 1} stays in bucket 0 (which forces {2, 3} into bucket 1).
        assert_eq!(tight.as_set().unwrap().len(), 24 - 4);
    }

    #[test]
    fn find_looks_up_pairs() {
        let s = Value::Set([Value::tuple([Value::Int(0), Value::Int(7)])].into_iter().collect());
        assert_eq!(call(Builtin::Find, vec![Value::Int(0), s.clone()]), Value::Int(7));
        assert!(apply(Builtin::Find, vec![Value::Int(1), s]).is_err());
    }
}
