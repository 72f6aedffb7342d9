//! Assertions over partial configurations: certainty, uniformity and the
//! connectives of the resource logic, with satisfaction, entailment and the
//! supportedness check.

mod entail;
pub mod props;
mod sat;
mod universe;

use std::collections::BTreeSet;
use std::fmt;

use crate::error::AssertError;
use crate::expr::{BinOp, Expr, Name, Var};

pub use entail::{entails, is_supported, Support};
pub use sat::{combine, satisfies, sub_config};
pub use universe::{compositions, Universe};

/// A deterministic expression, checked at construction.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DetExpr(Expr);

impl DetExpr {
    pub fn new(e: Expr) -> Result<DetExpr, AssertError> {
        if e.is_deterministic() {
            Ok(DetExpr(e))
        } else {
            Err(AssertError::NonDeterministicSet(crate::syntax::pretty::expr(&e)))
        }
    }

    pub fn expr(&self) -> &Expr {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Assertion {
    Top,
    Bot,
    /// `C[e]`: `e` is true in every memory of the support.
    Certain(Expr),
    /// `U[S, e]`: `e` is distributed uniformly over the set denoted by `S`.
    Uniform(DetExpr, Expr),
    And(Box<Assertion>, Box<Assertion>),
    Or(Box<Assertion>, Box<Assertion>),
    Implies(Box<Assertion>, Box<Assertion>),
    /// Separating conjunction: independence.
    Star(Box<Assertion>, Box<Assertion>),
    /// Separating implication.
    Wand(Box<Assertion>, Box<Assertion>),
}

impl Assertion {
    pub fn certain(e: Expr) -> Assertion {
        Assertion::Certain(e)
    }

    pub fn uniform(set: Expr, e: Expr) -> Result<Assertion, AssertError> {
        Ok(Assertion::Uniform(DetExpr::new(set)?, e))
    }

    /// `D[e]`, sugar for `C[e = e]`: every variable of `e` is in the domain.
    pub fn defined(e: Expr) -> Assertion {
        Assertion::Certain(Expr::eq(e.clone(), e))
    }

    /// `D[x]` for each name, conjoined (`top` when empty).
    pub fn defined_vars<'a>(vars: impl IntoIterator<Item = &'a Var>) -> Assertion {
        Assertion::conj(vars.into_iter().map(|v| Assertion::defined(Expr::var(v))))
    }

    pub fn and(a: Assertion, b: Assertion) -> Assertion {
        Assertion::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Assertion, b: Assertion) -> Assertion {
        Assertion::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Assertion, b: Assertion) -> Assertion {
        Assertion::Implies(Box::new(a), Box::new(b))
    }

    pub fn star(a: Assertion, b: Assertion) -> Assertion {
        Assertion::Star(Box::new(a), Box::new(b))
    }

    pub fn wand(a: Assertion, b: Assertion) -> Assertion {
        Assertion::Wand(Box::new(a), Box::new(b))
    }

    /// Left-nested conjunction; `top` when empty.
    pub fn conj(items: impl IntoIterator<Item = Assertion>) -> Assertion {
        items.into_iter().reduce(Assertion::and).unwrap_or(Assertion::Top)
    }

    /// Left-nested separating conjunction; `top` when empty.
    pub fn star_all(items: impl IntoIterator<Item = Assertion>) -> Assertion {
        items.into_iter().reduce(Assertion::star).unwrap_or(Assertion::Top)
    }

    /// `C[b != false]`, the then-branch guard fact.
    pub fn guard_true(b: &Expr) -> Assertion {
        Assertion::Certain(Expr::bin(BinOp::Ne, b.clone(), Expr::bool(false)))
    }

    /// `C[b = false]`, the else-branch guard fact.
    pub fn guard_false(b: &Expr) -> Assertion {
        Assertion::Certain(Expr::eq(b.clone(), Expr::bool(false)))
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Assertion::Certain(_) | Assertion::Uniform(..))
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect(&mut out);
        out
    }

    pub fn free_names(&self) -> BTreeSet<Name> {
        self.free_vars().into_iter().map(|v| v.name).collect()
    }

    fn collect(&self, out: &mut BTreeSet<Var>) {
        match self {
            Assertion::Top | Assertion::Bot => {}
            Assertion::Certain(e) => out.extend(e.free_vars()),
            Assertion::Uniform(s, e) => {
                out.extend(s.0.free_vars());
                out.extend(e.free_vars());
            }
            Assertion::And(a, b) | Assertion::Or(a, b) | Assertion::Implies(a, b) | Assertion::Star(a, b) | Assertion::Wand(a, b) => {
                a.collect(out);
                b.collect(out);
            }
        }
    }

    /// Whether the assertion only uses `C[..]`, `top`, `bot` and `/\`.
    pub fn is_certain_conjunction(&self) -> bool {
        match self {
            Assertion::Top | Assertion::Bot | Assertion::Certain(_) => true,
            Assertion::And(a, b) => a.is_certain_conjunction() && b.is_certain_conjunction(),
            _ => false,
        }
    }

    /// Substitution `φ[e/x]` through every atom. Fails if the result would
    /// put a random expression into the set position of `U[..]`.
    pub fn subst(&self, x: &str, e: &Expr) -> Result<Assertion, AssertError> {
        let go = |a: &Assertion| a.subst(x, e).map(Box::new);
        Ok(match self {
            Assertion::Top => Assertion::Top,
            Assertion::Bot => Assertion::Bot,
            Assertion::Certain(c) => Assertion::Certain(c.subst(x, e)),
            Assertion::Uniform(s, r) => Assertion::Uniform(DetExpr::new(s.0.subst(x, e))?, r.subst(x, e)),
            Assertion::And(a, b) => Assertion::And(go(a)?, go(b)?),
            Assertion::Or(a, b) => Assertion::Or(go(a)?, go(b)?),
            Assertion::Implies(a, b) => Assertion::Implies(go(a)?, go(b)?),
            Assertion::Star(a, b) => Assertion::Star(go(a)?, go(b)?),
            Assertion::Wand(a, b) => Assertion::Wand(go(a)?, go(b)?),
        })
    }

    /// Number of nodes, used to keep generated assertions small.
    pub fn size(&self) -> usize {
        match self {
            Assertion::Top | Assertion::Bot | Assertion::Certain(_) | Assertion::Uniform(..) => 1,
            Assertion::And(a, b) | Assertion::Or(a, b) | Assertion::Implies(a, b) | Assertion::Star(a, b) | Assertion::Wand(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::pretty::assertion(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::Value;

    #[test]
    fn uniform_rejects_random_set() {
        let r = Var::rand("r");
        assert!(matches!(Assertion::uniform(Expr::var(&r), Expr::int(0)), Err(AssertError::NonDeterministicSet(_))));
        assert!(Assertion::uniform(Expr::Const(Value::int_set([0, 1])), Expr::var(&r)).is_ok());
    }

    #[test]
    fn free_vars_of_star() {
        let (x, y) = (Var::rand("x"), Var::rand("y"));
        let a = Assertion::star(
            Assertion::certain(Expr::eq(Expr::var(&x), Expr::int(1))),
            Assertion::uniform(Expr::range(Expr::int(0), Expr::int(7)), Expr::var(&y)).unwrap(),
        );
        assert_eq!(a.free_vars(), BTreeSet::from([x, y]));
        assert!(Assertion::certain(Expr::int(5)).free_vars().is_empty());
    }

    #[test]
    fn substitution_respects_determinism_of_sets() {
        let (d, r) = (Var::det("d"), Var::rand("r"));
        let a = Assertion::uniform(Expr::range(Expr::int(0), Expr::var(&d)), Expr::var(&r)).unwrap();
        assert!(a.subst("d", &Expr::int(3)).is_ok());
        assert!(a.subst("d", &Expr::var(&r)).is_err());
    }
}
