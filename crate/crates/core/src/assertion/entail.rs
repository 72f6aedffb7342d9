//! Entailment between assertions and the supportedness check, both decided
//! by enumerating partial configurations over a universe.

use std::collections::{BTreeMap, BTreeSet};

use super::sat::satisfies;
use super::universe::{subsets, Universe};
use super::Assertion;
use crate::config::Config;
use crate::dist::MemDist;
use crate::error::AssertError;
use crate::expr::{Kind, Name};
use crate::value::Value;

/// Checks that every partial configuration over the universe satisfying
/// `phi` also satisfies `psi`. Returns a counterexample on failure.
pub fn entails(phi: &Assertion, psi: &Assertion, u: &Universe) -> Result<Option<Config>, AssertError> {
    let mut names = phi.free_names();
    names.extend(psi.free_names());
    // For conjunctions of certainty facts, a violating distribution has a
    // violating support memory, so point masses suffice.
    let u1;
    let search = if phi.is_certain_conjunction() && psi.is_certain_conjunction() {
        u1 = u.clone().with_denom(1);
        &u1
    } else {
        u
    };
    search.find_partial(&names, |m| Ok(satisfies(m, phi, u)? && !satisfies(m, psi, u)?))
}

/// Outcome of the supportedness check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Support {
    Supported,
    /// No least satisfying distribution exists for this deterministic memory.
    Unsupported { sigma: BTreeMap<Name, Value>, reason: String },
}

impl Support {
    pub fn holds(&self) -> bool {
        matches!(self, Support::Supported)
    }
}

/// For every deterministic memory, the satisfying random parts (over the
/// universe) must be empty or have a least element that itself satisfies
/// `phi`.
pub fn is_supported(phi: &Assertion, u: &Universe) -> Result<Support, AssertError> {
    let names = phi.free_names();
    u.require(&names)?;
    let det: Vec<Name> = names.iter().filter(|n| u.kind(n) == Some(Kind::Det)).cloned().collect();
    let rand: Vec<Name> = names.iter().filter(|n| u.kind(n) == Some(Kind::Rand)).cloned().collect();
    let subs = subsets(&rand);
    let mut dists = Vec::new();
    for s in &subs {
        dists.push(u.distributions(s)?);
    }
    for sigma in u.det_memories(&det, true, &BTreeMap::new()) {
        // First pass: common domain of all satisfiers.
        let mut common: Option<BTreeSet<Name>> = None;
        for (s, ds) in subs.iter().zip(&dists) {
            for mu in ds {
                if satisfies(&Config::new(sigma.clone(), mu.clone()), phi, u)? {
                    let d: BTreeSet<Name> = s.iter().cloned().collect();
                    common = Some(match common {
                        None => d,
                        Some(c) => c.intersection(&d).cloned().collect(),
                    });
                    break;
                }
            }
        }
        let Some(common) = common else { continue };
        // Second pass: every satisfier must project to the same candidate.
        let mut candidate: Option<MemDist> = None;
        for ds in &dists {
            for mu in ds {
                if !satisfies(&Config::new(sigma.clone(), mu.clone()), phi, u)? {
                    continue;
                }
                let p = mu.project(common.iter().map(|n| &**n)).expect("common domain");
                match &candidate {
                    None => candidate = Some(p),
                    Some(c) if *c == p => {}
                    Some(c) => {
                        return Ok(Support::Unsupported {
                            sigma,
                            reason: format!("satisfiers disagree on the common domain: {c} versus {p}"),
                        })
                    }
                }
            }
        }
        let candidate = candidate.expect("at least one satisfier");
        if !satisfies(&Config::new(sigma.clone(), candidate.clone()), phi, u)? {
            return Ok(Support::Unsupported { sigma, reason: format!("the greatest common marginal {candidate} does not satisfy the assertion") });
        }
    }
    Ok(Support::Supported)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{BinOp, Expr, Var};

    fn a() -> Expr {
        Expr::var(&Var::rand("a"))
    }

    fn u() -> Universe {
        Universe::new(4).var("a", Kind::Rand, [0.into(), 1.into(), 2.into()])
    }

    #[test]
    fn disjunction_inside_and_outside_certainty() {
        let eq = |k| Expr::eq(a(), Expr::int(k));
        let outer = Assertion::or(Assertion::certain(eq(1)), Assertion::certain(eq(2)));
        let inner = Assertion::certain(Expr::bin(BinOp::Or, eq(1), eq(2)));
        assert_eq!(entails(&outer, &inner, &u()).unwrap(), None);
        let cex = entails(&inner, &outer, &u()).unwrap().expect("the weaker form admits a mixture");
        let d = cex.pushforward(&a()).unwrap();
        assert_eq!(d.support_set(), BTreeSet::from([Value::Int(1), Value::Int(2)]));
    }

    #[test]
    fn support_examples() {
        let u = Universe::new(2).var("x", Kind::Rand, [0.into(), 1.into()]);
        let x = Expr::var(&Var::rand("x"));
        assert!(is_supported(&Assertion::certain(Expr::eq(x.clone(), Expr::int(1))), &u).unwrap().holds());
        assert!(is_supported(&Assertion::uniform(Expr::Const(Value::int_set([0, 1])), x.clone()).unwrap(), &u).unwrap().holds());
        let either = Assertion::or(Assertion::certain(Expr::eq(x.clone(), Expr::int(0))), Assertion::certain(Expr::eq(x, Expr::int(1))));
        assert!(!is_supported(&either, &u).unwrap().holds());
        assert!(is_supported(&Assertion::Top, &u).unwrap().holds());
    }
}
