//! The resource monoid on partial configurations and assertion
//! satisfaction.
//!
//! Satisfaction of an assertion depends only on the projection of the
//! configuration onto the assertion's free variables. The checker uses this
//! to restrict the witnesses it searches: splits for `*` range over subsets
//! of the free variables, and the quantifiers of `->` and `-*` range over
//! extensions onto free variables only, bounded by the universe.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_rational::BigRational;

use super::universe::{subsets, Universe};
use super::Assertion;
use crate::config::Config;
use crate::dist::{Builder, MemDist};
use crate::error::AssertError;
use crate::expr::{Kind, Name, Var};
use crate::value::{vset, Value};

/// The monoid operation: defined when the deterministic memories agree on
/// shared variables and the random domains are disjoint.
pub fn combine(a: &Config, b: &Config) -> Option<Config> {
    for (n, v) in &a.sigma {
        if b.sigma.get(n).is_some_and(|w| w != v) {
            return None;
        }
    }
    let mu = a.mu.product(&b.mu).ok()?;
    let mut sigma = a.sigma.clone();
    sigma.extend(b.sigma.iter().map(|(n, v)| (n.clone(), v.clone())));
    Some(Config { sigma, mu })
}

/// The preorder: `a` is a sub-configuration of `b`.
pub fn sub_config(a: &Config, b: &Config) -> bool {
    a.sigma.iter().all(|(n, v)| b.sigma.get(n) == Some(v))
        && a.mu.vars().iter().all(|n| b.mu.contains(n))
        && b.mu.project(a.mu.vars().iter().map(|n| &**n)).map(|p| p == a.mu).unwrap_or(false)
}

/// Whether `m` satisfies `phi`; the universe bounds the quantifiers of
/// `->` and `-*`.
pub fn satisfies(m: &Config, phi: &Assertion, u: &Universe) -> Result<bool, AssertError> {
    sat(m, phi, u)
}

fn bound(m: &Config, vars: &BTreeSet<Var>) -> bool {
    vars.iter().all(|v| m.binds(&v.name))
}

fn local(m: &Config, vars: &BTreeSet<Var>) -> Config {
    let keep: Vec<&str> = vars.iter().filter(|v| m.mu.contains(&v.name)).map(|v| &*v.name).collect();
    Config { sigma: m.sigma.clone(), mu: m.mu.project(keep).expect("names come from the domain") }
}

fn sat(m: &Config, phi: &Assertion, u: &Universe) -> Result<bool, AssertError> {
    match phi {
        Assertion::Top => Ok(true),
        Assertion::Bot => Ok(false),
        Assertion::Certain(e) => {
            let fv = e.free_vars();
            if !bound(m, &fv) {
                return Ok(false);
            }
            let m = local(m, &fv);
            let ok = m.mu.rows().support().all(|row| m.eval_row(e, row) == Ok(Value::Bool(true)));
            Ok(ok)
        }
        Assertion::Uniform(s, e) => {
            let mut fv = e.free_vars();
            fv.extend(s.expr().free_vars());
            if !bound(m, &fv) {
                return Ok(false);
            }
            let Ok(set) = m.eval_det(s.expr()).and_then(|v| vset(&v)) else { return Ok(false) };
            let m = local(m, &fv);
            match m.pushforward(e) {
                Ok(d) => Ok(d.is_uniform_over(&set)),
                Err(_) => Ok(false),
            }
        }
        Assertion::And(a, b) => Ok(sat(m, a, u)? && sat(m, b, u)?),
        Assertion::Or(a, b) => Ok(sat(m, a, u)? || sat(m, b, u)?),
        Assertion::Star(a, b) => sat_star(m, a, b, u),
        Assertion::Implies(a, b) => sat_implies(m, a, b, u),
        Assertion::Wand(a, b) => sat_wand(m, a, b, u),
    }
}

fn sat_star(m: &Config, a: &Assertion, b: &Assertion, u: &Universe) -> Result<bool, AssertError> {
    let fa = a.free_names();
    let fb = b.free_names();
    let rel: Vec<Name> = m.mu.vars().iter().filter(|n| fa.contains(*n) || fb.contains(*n)).cloned().collect();
    let mut left_cache: HashMap<Vec<Name>, bool> = HashMap::new();
    let mut right_cache: HashMap<Vec<Name>, bool> = HashMap::new();
    let side = |d: &[Name]| Config { sigma: m.sigma.clone(), mu: m.mu.project(d.iter().map(|n| &**n)).expect("subset of the domain") };
    // Each relevant variable goes left, right, or nowhere.
    let mut choice = vec![0u8; rel.len()];
    loop {
        let valid = rel.iter().zip(&choice).all(|(n, c)| match c {
            1 => fa.contains(n),
            2 => fb.contains(n),
            _ => true,
        });
        if valid {
            let d1: Vec<Name> = rel.iter().zip(&choice).filter(|(_, c)| **c == 1).map(|(n, _)| n.clone()).collect();
            let d2: Vec<Name> = rel.iter().zip(&choice).filter(|(_, c)| **c == 2).map(|(n, _)| n.clone()).collect();
            let l = match left_cache.get(&d1) {
                Some(v) => *v,
                None => {
                    let v = sat(&side(&d1), a, u)?;
                    left_cache.insert(d1.clone(), v);
                    v
                }
            };
            if l {
                let r = match right_cache.get(&d2) {
                    Some(v) => *v,
                    None => {
                        let v = sat(&side(&d2), b, u)?;
                        right_cache.insert(d2.clone(), v);
                        v
                    }
                };
                let x: BTreeSet<Name> = d1.iter().cloned().collect();
                let y: BTreeSet<Name> = d2.iter().cloned().collect();
                if r && m.mu.is_independent(&x, &y).expect("disjoint subsets of the domain") {
                    return Ok(true);
                }
            }
        }
        // Next assignment in base 3.
        let mut i = 0;
        loop {
            if i == choice.len() {
                return Ok(false);
            }
            choice[i] += 1;
            if choice[i] < 3 {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// Kinds of the free variables not bound in `m`, which the universe must
/// provide candidates for.
fn unbound(m: &Config, vars: &BTreeSet<Var>, u: &Universe) -> Result<(Vec<Name>, Vec<Name>), AssertError> {
    let free: Vec<&Var> = vars.iter().filter(|v| !m.binds(&v.name)).collect();
    u.require(free.iter().map(|v| &v.name))?;
    let det = free.iter().filter(|v| v.kind == Kind::Det).map(|v| v.name.clone()).collect();
    let rand = free.iter().filter(|v| v.kind == Kind::Rand).map(|v| v.name.clone()).collect();
    Ok((det, rand))
}

fn sat_implies(m: &Config, a: &Assertion, b: &Assertion, u: &Universe) -> Result<bool, AssertError> {
    let mut fv = a.free_vars();
    fv.extend(b.free_vars());
    let m0 = local(m, &fv);
    let (new_det, new_rand) = unbound(&m0, &fv, u)?;
    let sigmas = u.det_memories(&new_det, true, &BTreeMap::new());
    for ext in sigmas {
        let mut sigma = m0.sigma.clone();
        sigma.extend(ext);
        for r in subsets(&new_rand) {
            for mu in extensions(&m0.mu, &r, u)? {
                let m1 = Config { sigma: sigma.clone(), mu };
                if sat(&m1, a, u)? && !sat(&m1, b, u)? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Every extension of `mu` onto the extra variables `r` whose conditional
/// distributions (per row of `mu`) are multiples of `1/denom`.
fn extensions(mu: &MemDist, r: &[Name], u: &Universe) -> Result<Vec<MemDist>, AssertError> {
    if r.is_empty() {
        return Ok(vec![mu.clone()]);
    }
    let kernels = u.distributions(r)?;
    let rows: Vec<(&Vec<Value>, &BigRational)> = mu.rows().iter().collect();
    let needed = (kernels.len() as u128).checked_pow(rows.len() as u32).unwrap_or(u128::MAX);
    if needed > u.budget() {
        return Err(AssertError::EnumerationBudgetExceeded { needed, budget: u.budget() });
    }
    let mut vars: Vec<Name> = mu.vars().iter().chain(r).cloned().collect();
    vars.sort();
    let layout: Vec<(bool, usize)> = vars
        .iter()
        .map(|v| match mu.position(v) {
            Some(i) => (true, i),
            None => (false, r.iter().position(|x| x == v).expect("new variable")),
        })
        .collect();
    let mut out = Vec::new();
    let mut pick = vec![0usize; rows.len()];
    loop {
        let mut b = Builder::default();
        for ((row, p), &k) in rows.iter().zip(&pick) {
            for (cell, q) in kernels[k].rows().iter() {
                let merged: Vec<Value> = layout.iter().map(|&(old, i)| if old { row[i].clone() } else { cell[i].clone() }).collect();
                b.add(merged, &(*p * q));
            }
        }
        out.push(MemDist::from_rows(vars.clone(), b.finish().expect("positive mass")));
        let mut i = 0;
        loop {
            if i == pick.len() {
                return Ok(out);
            }
            pick[i] += 1;
            if pick[i] < kernels.len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

fn sat_wand(m: &Config, a: &Assertion, b: &Assertion, u: &Universe) -> Result<bool, AssertError> {
    let mut fv = a.free_vars();
    fv.extend(b.free_vars());
    let m0 = local(m, &fv);
    let det: Vec<Name> = fv.iter().filter(|v| v.kind == Kind::Det).map(|v| v.name.clone()).collect();
    let rand: Vec<Name> = fv.iter().filter(|v| v.kind == Kind::Rand && !m0.mu.contains(&v.name)).map(|v| v.name.clone()).collect();
    let free_det: Vec<&Name> = det.iter().filter(|n| !m0.sigma.contains_key(*n)).collect();
    u.require(free_det.into_iter().chain(rand.iter()))?;
    let fixed: BTreeMap<Name, Value> = m0.sigma.iter().filter(|(n, _)| det.contains(n)).map(|(n, v)| (n.clone(), v.clone())).collect();
    for sigma in u.det_memories(&det, true, &fixed) {
        for r in subsets(&rand) {
            for mu in u.distributions(&r)? {
                let other = Config { sigma: sigma.clone(), mu };
                if !sat(&other, a, u)? {
                    continue;
                }
                let joined = combine(&m0, &other).expect("agreeing memories with disjoint domains");
                if !sat(&joined, b, u)? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::FinDist;
    use crate::expr::{BinOp, Expr};
    use num_bigint::BigInt;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn mem(pairs: &[(&str, i64)]) -> BTreeMap<Name, Value> {
        pairs.iter().map(|(n, v)| (Name::from(*n), Value::Int(*v))).collect()
    }

    fn dist(items: &[(&[(&str, i64)], BigRational)]) -> Config {
        Config::new(BTreeMap::new(), MemDist::from_memories(items.iter().map(|(m, p)| (mem(m), p.clone()))).unwrap())
    }

    fn bits() -> Universe {
        Universe::new(2).var("x", Kind::Rand, [0.into(), 1.into()]).var("y", Kind::Rand, [0.into(), 1.into()])
    }

    fn x() -> Expr {
        Expr::var(&Var::rand("x"))
    }

    fn y() -> Expr {
        Expr::var(&Var::rand("y"))
    }

    fn unif01(e: Expr) -> Assertion {
        Assertion::uniform(Expr::Const(Value::int_set([0, 1])), e).unwrap()
    }

    #[test]
    fn certain_over_uniform_bit() {
        let m = dist(&[(&[("x", 0)], r(1, 2)), (&[("x", 1)], r(1, 2))]);
        let u = bits();
        let in01 = Assertion::certain(Expr::bin(BinOp::In, x(), Expr::Const(Value::int_set([0, 1]))));
        assert!(satisfies(&m, &in01, &u).unwrap());
        assert!(!satisfies(&m, &Assertion::certain(Expr::eq(x(), Expr::int(0))), &u).unwrap());
    }

    #[test]
    fn star_needs_independence() {
        let u = bits();
        let indep = dist(&[
            (&[("x", 0), ("y", 0)], r(1, 4)),
            (&[("x", 0), ("y", 1)], r(1, 4)),
            (&[("x", 1), ("y", 0)], r(1, 4)),
            (&[("x", 1), ("y", 1)], r(1, 4)),
        ]);
        let coupled = dist(&[(&[("x", 0), ("y", 0)], r(1, 2)), (&[("x", 1), ("y", 1)], r(1, 2))]);
        let phi = Assertion::star(unif01(x()), unif01(y()));
        assert!(satisfies(&indep, &phi, &u).unwrap());
        assert!(!satisfies(&coupled, &phi, &u).unwrap());
    }

    #[test]
    fn monoid_laws_on_examples() {
        let a = dist(&[(&[("x", 0)], r(1, 2)), (&[("x", 1)], r(1, 2))]);
        let b = dist(&[(&[("y", 1)], r(1, 1))]);
        assert_eq!(combine(&Config::empty(), &a).unwrap(), a);
        assert!(combine(&a, &a).is_none());
        let ab = combine(&a, &b).unwrap();
        assert!(sub_config(&a, &ab) && sub_config(&b, &ab) && sub_config(&Config::empty(), &ab));
        assert!(sub_config(&ab, &ab));
    }

    #[test]
    fn implication_quantifies_over_extensions() {
        // Over any extension, y being certainly 0 forces y = 0 pointwise.
        let u = bits();
        let phi = Assertion::implies(Assertion::certain(Expr::eq(y(), Expr::int(0))), Assertion::certain(Expr::bin(BinOp::Le, y(), Expr::int(0))));
        assert!(satisfies(&Config::empty(), &phi, &u).unwrap());
        // D[y] -> C[y = 0] fails: some extension has y = 1.
        let bad = Assertion::implies(Assertion::defined(y()), Assertion::certain(Expr::eq(y(), Expr::int(0))));
        assert!(!satisfies(&Config::empty(), &bad, &u).unwrap());
    }

    #[test]
    fn wand_combines_with_fresh_resources() {
        let u = bits();
        let m = dist(&[(&[("x", 0)], r(1, 2)), (&[("x", 1)], r(1, 2))]);
        // Given any independent uniform y, x and y are independent uniforms.
        let phi = Assertion::wand(unif01(y()), Assertion::star(unif01(x()), unif01(y())));
        assert!(satisfies(&m, &phi, &u).unwrap());
        let psi = Assertion::wand(unif01(y()), Assertion::certain(Expr::eq(x(), y())));
        assert!(!satisfies(&m, &psi, &u).unwrap());
    }

    #[test]
    fn uniform_requires_variables_in_domain() {
        let u = bits();
        let m = Config::new(BTreeMap::new(), MemDist::from_rows(vec![], FinDist::unit(vec![])));
        assert!(!satisfies(&m, &unif01(x()), &u).unwrap());
    }
}
