//! A catalogue of entailment facts relating certainty, uniformity and
//! independence, with concrete instances checked on small universes, and a
//! syntactic matcher that lets proof scripts cite a fact instead of
//! enumerating.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{entails, Assertion, DetExpr, Universe};
use crate::config::Config;
use crate::error::AssertError;
use crate::expr::{BinOp, Binder, Builtin, Expr, Kind, Name, Var};
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Prop {
    /// `(φ * ψ) /\ η ⟹ (φ /\ η) * ψ` when `φ ⟹ D[FV(η) ∩ RV]`.
    ConjIntoStar,
    /// `φ * ψ ⟹ φ /\ ψ`.
    StarToConj,
    /// `U[S, e] /\ C[f bijective S → S'] ⟹ U[S', f(e)]`.
    Bijection,
    /// `C[p && q] ⟹ C[p] /\ C[q]`.
    CertainSplit,
    /// `C[p] /\ C[q] ⟹ C[p && q]`.
    CertainJoin,
    /// `U[S, e] ⟹ C[e in S]`.
    UniformInSet,
    /// `U[S, e] /\ C[e = e'] ⟹ U[S, e']`.
    UniformCongruence,
    /// `C[x = e] /\ (D[e] * D[e']) ⟹ D[x] * D[e']` when `x ∉ FV(e')`.
    DefinedTransfer,
    /// `C[f injective on S × S'] /\ (U[S, x] * U[S', e']) ⟹ U[S ×_f S', f(x, e')]`.
    ProductUniform,
}

impl Prop {
    pub const ALL: [Prop; 9] = [
        Prop::ConjIntoStar,
        Prop::StarToConj,
        Prop::Bijection,
        Prop::CertainSplit,
        Prop::CertainJoin,
        Prop::UniformInSet,
        Prop::UniformCongruence,
        Prop::DefinedTransfer,
        Prop::ProductUniform,
    ];

    /// Position in the catalogue, starting at 1.
    pub fn item(self) -> usize {
        Prop::ALL.iter().position(|p| *p == self).expect("listed") + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            Prop::ConjIntoStar => "conj-into-star",
            Prop::StarToConj => "star-to-conj",
            Prop::Bijection => "bijection",
            Prop::CertainSplit => "certain-split",
            Prop::CertainJoin => "certain-join",
            Prop::UniformInSet => "uniform-in-set",
            Prop::UniformCongruence => "uniform-congruence",
            Prop::DefinedTransfer => "defined-transfer",
            Prop::ProductUniform => "product-uniform",
        }
    }

    /// Accepts the name or the item number.
    pub fn from_name(s: &str) -> Option<Prop> {
        Prop::ALL.iter().copied().find(|p| p.name() == s || p.item().to_string() == s)
    }
}

impl fmt::Display for Prop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.name(), self.item())
    }
}

/// Bijection fact for item 3: `f` evenly partitions `S` into `S'` with
/// fibers of size one.
pub fn bijection_fact(u: &str, f: &Expr, s: &Expr, s2: &Expr) -> Expr {
    let ei = Expr::EvenPartition { var: u.into(), source: Box::new(s.clone()), body: Box::new(f.clone()), target: Box::new(s2.clone()) };
    let same_size = Expr::eq(Expr::call(Builtin::Len, vec![s2.clone()]), Expr::call(Builtin::Len, vec![s.clone()]));
    Expr::and(ei, same_size)
}

/// Injectivity fact for item 9, with `f` a body over the locals `a`
/// (first argument) and `b` (second).
pub fn injectivity_fact(f: &Expr, s: &Expr, s2: &Expr) -> Expr {
    let l = |n: &str| Expr::Local(n.into());
    let f1 = f.subst_local("a", &l("p")).subst_local("b", &l("q"));
    let f2 = f.subst_local("a", &l("r")).subst_local("b", &l("t"));
    let body = Expr::bin(
        BinOp::Or,
        Expr::bin(BinOp::Ne, f1, f2),
        Expr::and(Expr::eq(l("p"), l("r")), Expr::eq(l("q"), l("t"))),
    );
    let all = |v: &str, src: &Expr, b: Expr| Expr::Comprehension { binder: Binder::All, var: v.into(), source: Box::new(src.clone()), body: Box::new(b) };
    all("p", s, all("r", s, all("q", s2, all("t", s2, body))))
}

/// Recovers `f` (over locals `a`, `b`) and the two sets from an
/// injectivity fact.
fn match_injectivity(e: &Expr) -> Option<(Expr, Expr, Expr)> {
    let Expr::Comprehension { binder: Binder::All, var: p, source: s, body } = e else { return None };
    let Expr::Comprehension { binder: Binder::All, var: r, source: s_again, body } = &**body else { return None };
    let Expr::Comprehension { binder: Binder::All, var: q, source: s2, body } = &**body else { return None };
    let Expr::Comprehension { binder: Binder::All, var: t, source: s2_again, body } = &**body else { return None };
    if s != s_again || s2 != s2_again || (&**p, &**r, &**q, &**t) != ("p", "r", "q", "t") {
        return None;
    }
    let Expr::Binary(BinOp::Or, ne, _) = &**body else { return None };
    let Expr::Binary(BinOp::Ne, f1, _) = &**ne else { return None };
    let f = f1.subst_local("p", &Expr::Local("a".into())).subst_local("q", &Expr::Local("b".into()));
    (injectivity_fact(&f, s, s2) == *e).then(|| (f, (**s).clone(), (**s2).clone()))
}

/// The set `{f(a, b) | a in S, b in S'}` as a deterministic check that `t`
/// denotes it.
pub fn product_set_fact(f: &Expr, s: &Expr, s2: &Expr, t: &Expr) -> Expr {
    let l = |n: &str| Expr::Local(n.into());
    let f_ab = f.clone();
    let covers = Expr::Comprehension {
        binder: Binder::All,
        var: "a".into(),
        source: Box::new(s.clone()),
        body: Box::new(Expr::Comprehension {
            binder: Binder::All,
            var: "b".into(),
            source: Box::new(s2.clone()),
            body: Box::new(Expr::bin(BinOp::In, f_ab.clone(), t.clone())),
        }),
    };
    let onto = Expr::Comprehension {
        binder: Binder::All,
        var: "v".into(),
        source: Box::new(t.clone()),
        body: Box::new(Expr::Comprehension {
            binder: Binder::Any,
            var: "a".into(),
            source: Box::new(s.clone()),
            body: Box::new(Expr::Comprehension {
                binder: Binder::Any,
                var: "b".into(),
                source: Box::new(s2.clone()),
                body: Box::new(Expr::eq(f_ab, l("v"))),
            }),
        }),
    };
    Expr::and(covers, onto)
}

/// A leftover obligation from citing a fact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Obligation {
    /// An entailment still to be decided by enumeration.
    Entails(Assertion, Assertion),
    /// A deterministic boolean expression that must hold for every
    /// deterministic memory of the universe.
    Valid(Expr),
}

/// Checks that `lhs ⟹ rhs` is an instance of `prop`, returning the side
/// obligations. `None` when the shapes do not match.
pub fn match_instance(prop: Prop, lhs: &Assertion, rhs: &Assertion) -> Option<Vec<Obligation>> {
    use Assertion::*;
    match (prop, lhs, rhs) {
        (Prop::ConjIntoStar, And(l, eta), Star(r, psi)) => {
            let (Star(phi, psi0), And(phi1, eta1)) = (&**l, &**r) else { return None };
            if psi0 != psi || phi1 != phi || eta1 != eta {
                return None;
            }
            let rv: Vec<Var> = eta.free_vars().into_iter().filter(|v| v.is_random()).collect();
            Some(vec![Obligation::Entails((**phi).clone(), Assertion::defined_vars(&rv))])
        }
        (Prop::StarToConj, Star(a, b), And(c, d)) => (a == c && b == d).then(Vec::new),
        (Prop::Bijection, And(u, c), Uniform(s2, fe)) => {
            let (Uniform(s, e), Certain(fact)) = (&**u, &**c) else { return None };
            let Expr::Binary(BinOp::And, ei, _) = fact else { return None };
            let Expr::EvenPartition { var, body, .. } = &**ei else { return None };
            (bijection_fact(var, body, s.expr(), s2.expr()) == *fact && body.subst_local(var, e) == *fe).then(Vec::new)
        }
        (Prop::CertainSplit, Certain(Expr::Binary(BinOp::And, p, q)), And(a, b)) => {
            (**a == Certain((**p).clone()) && **b == Certain((**q).clone())).then(Vec::new)
        }
        (Prop::CertainJoin, And(a, b), Certain(Expr::Binary(BinOp::And, p, q))) => {
            (**a == Certain((**p).clone()) && **b == Certain((**q).clone())).then(Vec::new)
        }
        (Prop::UniformInSet, Uniform(s, e), Certain(Expr::Binary(BinOp::In, e2, s2))) => (**e2 == *e && **s2 == *s.expr()).then(Vec::new),
        (Prop::UniformCongruence, And(u, c), Uniform(s2, e2)) => {
            let (Uniform(s, e), Certain(Expr::Binary(BinOp::Eq, a, b))) = (&**u, &**c) else { return None };
            (s == s2 && **a == *e && **b == *e2).then(Vec::new)
        }
        (Prop::DefinedTransfer, And(c, st), Star(dx, de2)) => {
            let Certain(Expr::Binary(BinOp::Eq, x, e)) = &**c else { return None };
            let Expr::Var(xv) = &**x else { return None };
            let Star(de, de2_) = &**st else { return None };
            let ok = **de == Assertion::defined((**e).clone())
                && de2_ == de2
                && **dx == Assertion::defined((**x).clone())
                && matches!(&**de2, Certain(Expr::Binary(BinOp::Eq, a, b)) if a == b && !a.free_vars().contains(xv));
            ok.then(Vec::new)
        }
        (Prop::ProductUniform, And(c, st), Uniform(t, fxe)) => {
            let (Certain(inj), Star(ux, ue)) = (&**c, &**st) else { return None };
            let (Uniform(s, x), Uniform(s2, e2)) = (&**ux, &**ue) else { return None };
            let (f, s_, s2_) = match_injectivity(inj)?;
            if s_ != *s.expr() || s2_ != *s2.expr() || f.subst_local("a", x).subst_local("b", e2) != *fxe {
                return None;
            }
            Some(vec![Obligation::Valid(product_set_fact(&f, s.expr(), s2.expr(), t.expr()))])
        }
        _ => None,
    }
}

/// A concrete instance of a catalogue fact over a universe.
#[derive(Clone, Debug)]
pub struct PropInstance {
    pub prop: Prop,
    pub label: String,
    pub lhs: Assertion,
    pub rhs: Assertion,
    pub universe: Universe,
}

/// Result of checking an instance.
#[derive(Clone, Debug)]
pub enum PropOutcome {
    Holds,
    /// The entailment holds only because nothing in the universe satisfies
    /// the left side.
    Vacuous,
    /// A side obligation failed, so the instance does not apply.
    SideConditionFails(String),
    Counterexample(Config),
}

impl PropInstance {
    pub fn check(&self) -> Result<PropOutcome, AssertError> {
        let Some(obligations) = match_instance(self.prop, &self.lhs, &self.rhs) else {
            return Ok(PropOutcome::SideConditionFails(format!("not an instance of {}", self.prop)));
        };
        for ob in &obligations {
            if let Some(msg) = discharge(ob, &self.universe)? {
                return Ok(PropOutcome::SideConditionFails(msg));
            }
        }
        if let Some(cex) = entails(&self.lhs, &self.rhs, &self.universe)? {
            return Ok(PropOutcome::Counterexample(cex));
        }
        let names = self.lhs.free_names();
        let witness = self.universe.find_partial(&names, |m| super::satisfies(m, &self.lhs, &self.universe))?;
        Ok(if witness.is_some() { PropOutcome::Holds } else { PropOutcome::Vacuous })
    }
}

/// Decides an obligation over `u`; `Some(reason)` when it fails.
pub fn discharge(ob: &Obligation, u: &Universe) -> Result<Option<String>, AssertError> {
    match ob {
        Obligation::Entails(a, b) => Ok(entails(a, b, u)?.map(|cex| format!("{a} does not entail {b}: {cex}"))),
        Obligation::Valid(e) => {
            let names: Vec<Name> = e.free_vars().into_iter().map(|v| v.name).collect();
            u.require(&names)?;
            for sigma in u.det_memories(&names, false, &BTreeMap::new()) {
                if e.eval(&sigma) != Ok(Value::Bool(true)) {
                    let shown: Vec<String> = sigma.iter().map(|(n, v)| format!("{n} = {v}")).collect();
                    return Ok(Some(format!("fails when {}", shown.join(", "))));
                }
            }
            Ok(None)
        }
    }
}

fn parse(src: &str, u: &Universe) -> Assertion {
    crate::syntax::parse_assertion(src, &u.kinds()).unwrap_or_else(|e| panic!("catalogue assertion `{src}`: {e}"))
}

fn ex(src: &str, u: &Universe) -> Expr {
    crate::syntax::parse_expr(src, &u.kinds()).unwrap_or_else(|e| panic!("catalogue expression `{src}`: {e}"))
}

fn values(xs: &[i64]) -> Vec<Value> {
    xs.iter().map(|&x| Value::Int(x)).collect()
}

/// Two random variables over three values and one deterministic
/// variable, with probabilities in twelfths.
pub fn standard_universe() -> Universe {
    Universe::new(12).var("x", Kind::Rand, values(&[0, 1, 2])).var("y", Kind::Rand, values(&[0, 1, 2])).var("d", Kind::Det, values(&[0, 1]))
}

/// Instances of every catalogue item.
pub fn proposition_suite() -> Vec<PropInstance> {
    let u = standard_universe();
    let mut out = Vec::new();
    let mut add = |prop: Prop, label: &str, lhs: Assertion, rhs: Assertion, universe: &Universe| {
        out.push(PropInstance { prop, label: label.to_string(), lhs, rhs, universe: universe.clone() })
    };
    let p = |s: &str| parse(s, &u);

    add(Prop::ConjIntoStar, "uniform x, uniform y, eta on x", p("U[{0, 1}, x] * U[{0, 1}, y] /\\ C[x + d < 3]"), p("(U[{0, 1}, x] /\\ C[x + d < 3]) * U[{0, 1}, y]"), &u);
    add(Prop::ConjIntoStar, "defined x, certain y, eta on x", p("D[x] * C[y = 0] /\\ C[x <= 1]"), p("(D[x] /\\ C[x <= 1]) * C[y = 0]"), &u);
    add(Prop::StarToConj, "uniform x, certain y", p("U[{0, 1}, x] * C[y != d]"), p("U[{0, 1}, x] /\\ C[y != d]"), &u);
    add(Prop::StarToConj, "defined x, uniform y", p("D[x] * U[{0 .. 2}, y]"), p("D[x] /\\ U[{0 .. 2}, y]"), &u);

    for (label, s, f, s2, e) in [
        ("successor {0,1} to {1,2}", "{0, 1}", "w + 1", "{1, 2}", "x"),
        ("rotation of {0,1,2}", "{0, 1, 2}", "(w + 1) % 3", "{0, 1, 2}", "y"),
        ("reflection {0,1} to {1,2}", "{0, 1}", "2 - w", "{1, 2}", "x"),
    ] {
        let (s, s2, e) = (ex(s, &u), ex(s2, &u), ex(e, &u));
        let mut k = u.kinds();
        k.insert("w".into(), Kind::Det);
        let f = crate::syntax::parse_expr(f, &k).expect("body").map_vars(&mut |v| if &*v.name == "w" { Expr::Local("w".into()) } else { Expr::Var(v.clone()) });
        let lhs = Assertion::and(Assertion::Uniform(DetExpr::new(s.clone()).expect("det"), e.clone()), Assertion::certain(bijection_fact("w", &f, &s, &s2)));
        let rhs = Assertion::Uniform(DetExpr::new(s2).expect("det"), f.subst_local("w", &e));
        add(Prop::Bijection, label, lhs, rhs, &u);
    }

    add(Prop::CertainSplit, "bound and equation", p("C[x <= 1 && y = d]"), p("C[x <= 1] /\\ C[y = d]"), &u);
    add(Prop::CertainSplit, "membership and order", p("C[x in {0, 2} && x < y + d]"), p("C[x in {0, 2}] /\\ C[x < y + d]"), &u);
    add(Prop::CertainJoin, "bound and equation", p("C[x <= 1] /\\ C[y = d]"), p("C[x <= 1 && y = d]"), &u);
    add(Prop::CertainJoin, "sum and difference", p("C[x + y = 2] /\\ C[x != y]"), p("C[x + y = 2 && x != y]"), &u);
    add(Prop::UniformInSet, "constant set", p("U[{0, 1}, x]"), p("C[x in {0, 1}]"), &u);
    add(Prop::UniformInSet, "set depending on d", p("U[{0 .. d + 1}, x + y]"), p("C[x + y in {0 .. d + 1}]"), &u);
    add(Prop::UniformCongruence, "copy", p("U[{0, 1}, x] /\\ C[x = y]"), p("U[{0, 1}, y]"), &u);
    add(Prop::UniformCongruence, "rotation equals y", p("U[{0, 1, 2}, (x + 1) % 3] /\\ C[(x + 1) % 3 = y]"), p("U[{0, 1, 2}, y]"), &u);
    add(Prop::DefinedTransfer, "x copies deterministic d", p("C[x = d] /\\ D[d] * D[y]"), p("D[x] * D[y]"), &u);
    add(Prop::DefinedTransfer, "x is a function of d", p("C[x = d + 1] /\\ D[d + 1] * D[y]"), p("D[x] * D[y]"), &u);

    let seqs = Universe::new(12)
        .var("x", Kind::Rand, vec![Value::int_seq([0]), Value::int_seq([1])])
        .var("y", Kind::Rand, vec![Value::int_seq([0]), Value::int_seq([1])]);
    for (label, uu, s, s2, f, t) in [
        ("concatenation of length-1 sequences", &seqs, "{[0], [1]}", "{[0], [1]}", "a ++ b", "{[0, 0], [0, 1], [1, 0], [1, 1]}"),
        ("pairing 3a + b", &u, "{0, 1}", "{0, 1, 2}", "3 * a + b", "{0 .. 5}"),
    ] {
        let (s, s2, t) = (ex(s, uu), ex(s2, uu), ex(t, uu));
        let mut k = uu.kinds();
        k.insert("a".into(), Kind::Det);
        k.insert("b".into(), Kind::Det);
        let f = crate::syntax::parse_expr(f, &k)
            .expect("body")
            .map_vars(&mut |v| if matches!(&*v.name, "a" | "b") { Expr::Local(v.name.clone()) } else { Expr::Var(v.clone()) });
        let (x, y) = (Expr::var(&Var::rand("x")), Expr::var(&Var::rand("y")));
        let lhs = Assertion::and(
            Assertion::certain(injectivity_fact(&f, &s, &s2)),
            Assertion::star(Assertion::Uniform(DetExpr::new(s).expect("det"), x.clone()), Assertion::Uniform(DetExpr::new(s2).expect("det"), y.clone())),
        );
        let rhs = Assertion::Uniform(DetExpr::new(t).expect("det"), f.subst_local("a", &x).subst_local("b", &y));
        add(Prop::ProductUniform, label, lhs, rhs, uu);
    }
    out
}

/// One instance beyond the two-variable bound: `x` copies a random `a`
/// that is independent of `y`.
pub fn defined_transfer_three_vars() -> PropInstance {
    let u = Universe::new(4).var("x", Kind::Rand, values(&[0, 1])).var("a", Kind::Rand, values(&[0, 1])).var("y", Kind::Rand, values(&[0, 1]));
    PropInstance {
        prop: Prop::DefinedTransfer,
        label: "x copies random a".into(),
        lhs: parse("C[x = a] /\\ D[a] * D[y]", &u),
        rhs: parse("D[x] * D[y]", &u),
        universe: u,
    }
}

/// `C[a = 1] \/ C[a = 2]` against `C[a = 1 || a = 2]`: the first entails the
/// second, not conversely. Returns (stronger, weaker, universe).
pub fn disjunction_example() -> (Assertion, Assertion, Universe) {
    let u = Universe::new(2).var("a", Kind::Rand, values(&[0, 1, 2]));
    (parse("C[a = 1] \\/ C[a = 2]", &u), parse("C[a = 1 || a = 2]", &u), u)
}

/// Normal form modulo associativity, commutativity and idempotence of
/// `/\`, associativity and commutativity of `*`, and `top` as a unit of
/// both.
pub fn normalize(a: &Assertion) -> Assertion {
    fn gather(a: &Assertion, star: bool, out: &mut Vec<Assertion>) {
        match (a, star) {
            (Assertion::And(l, r), false) | (Assertion::Star(l, r), true) => {
                gather(l, star, out);
                gather(r, star, out);
            }
            (Assertion::Top, _) => {}
            _ => out.push(normalize(a)),
        }
    }
    match a {
        Assertion::And(..) | Assertion::Star(..) => {
            let star = matches!(a, Assertion::Star(..));
            let mut items = Vec::new();
            gather(a, star, &mut items);
            items.sort();
            if !star {
                items.dedup();
            }
            if star {
                Assertion::star_all(items)
            } else {
                Assertion::conj(items)
            }
        }
        Assertion::Or(l, r) => Assertion::or(normalize(l), normalize(r)),
        Assertion::Implies(l, r) => Assertion::implies(normalize(l), normalize(r)),
        Assertion::Wand(l, r) => Assertion::wand(normalize(l), normalize(r)),
        other => other.clone(),
    }
}

/// Variables that any configuration satisfying `a` must bind.
pub fn defined_by(a: &Assertion) -> BTreeSet<Var> {
    match a {
        Assertion::Certain(_) | Assertion::Uniform(..) => a.free_vars(),
        Assertion::And(l, r) | Assertion::Star(l, r) => {
            let mut s = defined_by(l);
            s.extend(defined_by(r));
            s
        }
        Assertion::Or(l, r) => defined_by(l).intersection(&defined_by(r)).cloned().collect(),
        _ => BTreeSet::new(),
    }
}

/// Whether `rhs` is a conjunction of `D[..]` facts over variables that
/// `lhs` is syntactically known to bind.
pub fn defined_follows(lhs: &Assertion, rhs: &Assertion) -> bool {
    fn defs(a: &Assertion, out: &mut BTreeSet<Var>) -> bool {
        match a {
            Assertion::Top => true,
            Assertion::Certain(Expr::Binary(BinOp::Eq, l, r)) if l == r => {
                out.extend(l.free_vars());
                true
            }
            Assertion::And(l, r) => defs(l, out) && defs(r, out),
            _ => false,
        }
    }
    let mut need = BTreeSet::new();
    defs(rhs, &mut need) && need.is_subset(&defined_by(lhs))
}

/// Attempts to justify `lhs ⟹ rhs` by `prop`, allowing the instance to sit
/// inside a shared context built from `/\`, `\/` and `*` (all monotone),
/// modulo [`normalize`]. Returns the leftover obligations.
pub fn cite(prop: Prop, lhs: &Assertion, rhs: &Assertion) -> Option<Vec<Obligation>> {
    let (l, r) = (normalize(lhs), normalize(rhs));
    if l == r {
        return Some(Vec::new());
    }
    if let Some(obs) = match_instance(prop, lhs, rhs).or_else(|| match_instance(prop, &l, &r)) {
        return Some(obs);
    }
    match (&l, &r) {
        (Assertion::Or(a, b), Assertion::Or(c, d)) => {
            let mut out = cite(prop, a, c)?;
            out.extend(cite(prop, b, d)?);
            Some(out)
        }
        (Assertion::And(..), Assertion::And(..)) => cite_items(prop, flat(&l, false), flat(&r, false), false),
        (Assertion::Star(..), Assertion::Star(..)) => cite_items(prop, flat(&l, true), flat(&r, true), true),
        _ => None,
    }
}

fn flat(a: &Assertion, star: bool) -> Vec<Assertion> {
    match (a, star) {
        (Assertion::And(l, r), false) | (Assertion::Star(l, r), true) => {
            let mut v = flat(l, star);
            v.extend(flat(r, star));
            v
        }
        _ => vec![a.clone()],
    }
}

/// Congruence for an n-ary `/\` or `*`: shared items cancel, the rest are
/// either one instance as a whole or matched pairwise.
fn cite_items(prop: Prop, mut left: Vec<Assertion>, mut right: Vec<Assertion>, star: bool) -> Option<Vec<Obligation>> {
    let mut i = 0;
    while i < left.len() {
        if let Some(j) = right.iter().position(|x| *x == left[i]) {
            left.remove(i);
            right.remove(j);
        } else {
            i += 1;
        }
    }
    let rebuild = |items: &[Assertion]| if star { Assertion::star_all(items.to_vec()) } else { Assertion::conj(items.to_vec()) };
    if let Some(obs) = match_instance(prop, &rebuild(&left), &rebuild(&right)) {
        return Some(obs);
    }
    if left.len() != right.len() || left.len() > 6 || left.is_empty() {
        return None;
    }
    pair_up(prop, &left, &mut right.iter().map(Some).collect())
}

fn pair_up(prop: Prop, left: &[Assertion], right: &mut Vec<Option<&Assertion>>) -> Option<Vec<Obligation>> {
    let Some((first, rest)) = left.split_first() else { return Some(Vec::new()) };
    for k in 0..right.len() {
        let Some(cand) = right[k] else { continue };
        if let Some(mut obs) = cite(prop, first, cand) {
            right[k] = None;
            if let Some(more) = pair_up(prop, rest, right) {
                obs.extend(more);
                return Some(obs);
            }
            right[k] = Some(cand);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_item_has_an_instance() {
        let suite = proposition_suite();
        for p in Prop::ALL {
            assert!(suite.iter().any(|i| i.prop == p), "{p}");
        }
        for i in &suite {
            assert!(match_instance(i.prop, &i.lhs, &i.rhs).is_some(), "{}: {} does not match", i.label, i.prop);
        }
    }

    #[test]
    fn cheap_items_hold() {
        for i in proposition_suite().into_iter().filter(|i| matches!(i.prop, Prop::CertainSplit | Prop::CertainJoin | Prop::UniformInSet)) {
            assert!(matches!(i.check().unwrap(), PropOutcome::Holds), "{}", i.label);
        }
    }

    #[test]
    fn citation_inside_context_and_modulo_order() {
        let u = standard_universe();
        let p = |s: &str| parse(s, &u);
        let lhs = p("U[{0, 1}, x] * C[y = 0] /\\ C[d = 0]");
        let rhs = p("C[d = 0] /\\ C[x in {0, 1}] * C[y = 0]");
        assert_eq!(cite(Prop::UniformInSet, &lhs, &rhs), Some(vec![]));
        assert_eq!(cite(Prop::StarToConj, &lhs, &rhs), None);
    }

    #[test]
    fn defined_facts_follow_syntactically() {
        let u = standard_universe();
        let p = |s: &str| parse(s, &u);
        assert!(defined_follows(&p("U[{0, 1}, x] * C[y = d]"), &p("D[x] /\\ D[y] /\\ D[d]")));
        assert!(!defined_follows(&p("U[{0, 1}, x] \\/ C[y = d]"), &p("D[x]")));
    }

    #[test]
    fn product_set_obligation_is_checked() {
        let seqs = Universe::new(1).var("d", Kind::Det, values(&[0, 1]));
        let f = Expr::bin(BinOp::Concat, Expr::Local("a".into()), Expr::Local("b".into()));
        let s = Expr::Const(Value::Set([Value::int_seq([0]), Value::int_seq([1])].into()));
        let good = Expr::call(Builtin::Seqs, vec![Expr::int(2), Expr::Const(Value::int_set([0, 1]))]);
        assert_eq!(discharge(&Obligation::Valid(product_set_fact(&f, &s, &s, &good)), &seqs).unwrap(), None);
        let bad = Expr::call(Builtin::Seqs, vec![Expr::int(1), Expr::Const(Value::int_set([0, 1]))]);
        assert!(discharge(&Obligation::Valid(product_set_fact(&f, &s, &s, &bad)), &seqs).unwrap().is_some());
    }
}
