//! Commands, programs, variable classification and the read/write/modify
//! variable sets used by rule side conditions.

use std::collections::{BTreeMap, BTreeSet};

use crate::config::Config;
use crate::dist::MemDist;
use crate::error::KindError;
use crate::expr::{Expr, Kind, Name, Var};
use crate::value::Value;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Command {
    Skip,
    /// `x := e`; deterministic or random according to the kind of `x`.
    Assign(Var, Expr),
    /// `x :$= e`: draw uniformly from the value set of `e`.
    Sample(Var, Expr),
    Seq(Box<Command>, Box<Command>),
    If(Kind, Expr, Box<Command>, Box<Command>),
    While(Kind, Expr, Box<Command>),
}

impl Command {
    pub fn assign(x: &Var, e: Expr) -> Command {
        Command::Assign(x.clone(), e)
    }

    pub fn sample(x: &Var, e: Expr) -> Command {
        Command::Sample(x.clone(), e)
    }

    /// Right-nested sequence; the empty list is `skip`.
    pub fn seq(cmds: impl IntoIterator<Item = Command>) -> Command {
        let mut cmds: Vec<Command> = cmds.into_iter().collect();
        let Some(mut acc) = cmds.pop() else { return Command::Skip };
        while let Some(c) = cmds.pop() {
            acc = Command::Seq(Box::new(c), Box::new(acc));
        }
        acc
    }

    pub fn then(self, next: Command) -> Command {
        Command::Seq(Box::new(self), Box::new(next))
    }

    /// Conditional whose kind follows the guard.
    pub fn if_(b: Expr, c: Command, c2: Command) -> Command {
        let kind = if b.is_deterministic() { Kind::Det } else { Kind::Rand };
        Command::If(kind, b, Box::new(c), Box::new(c2))
    }

    /// Loop whose kind follows the guard.
    pub fn while_(b: Expr, c: Command) -> Command {
        let kind = if b.is_deterministic() { Kind::Det } else { Kind::Rand };
        Command::While(kind, b, Box::new(c))
    }

    /// Every variable mentioned anywhere in the command.
    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.visit(&mut |c| match c {
            Command::Assign(x, e) | Command::Sample(x, e) => {
                out.insert(x.clone());
                out.extend(e.free_vars());
            }
            Command::If(_, b, ..) | Command::While(_, b, _) => out.extend(b.free_vars()),
            _ => {}
        });
        out
    }

    fn visit(&self, f: &mut impl FnMut(&Command)) {
        f(self);
        match self {
            Command::Seq(a, b) | Command::If(_, _, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Command::While(_, _, a) => a.visit(f),
            _ => {}
        }
    }

    /// Variables the command reads before (possibly) writing them.
    pub fn read_vars(&self) -> BTreeSet<Var> {
        match self {
            Command::Skip => BTreeSet::new(),
            Command::Assign(_, e) | Command::Sample(_, e) => e.free_vars(),
            Command::Seq(c, c2) => {
                let wv = c.write_only_vars();
                let mut out = c.read_vars();
                out.extend(c2.read_vars().into_iter().filter(|v| !wv.contains(v)));
                out
            }
            Command::If(Kind::Det, _, c, c2) => union(c.read_vars(), c2.read_vars()),
            Command::If(Kind::Rand, b, c, c2) => union(union(c.read_vars(), c2.read_vars()), b.free_vars()),
            Command::While(Kind::Det, _, c) => c.read_vars(),
            Command::While(Kind::Rand, b, c) => union(c.read_vars(), b.free_vars()),
        }
    }

    /// Variables the command certainly overwrites without reading first.
    pub fn write_only_vars(&self) -> BTreeSet<Var> {
        match self {
            Command::Skip | Command::While(..) => BTreeSet::new(),
            Command::Assign(x, e) | Command::Sample(x, e) => {
                if e.free_vars().contains(x) {
                    BTreeSet::new()
                } else {
                    BTreeSet::from([x.clone()])
                }
            }
            Command::Seq(c, c2) => {
                let rv = c.read_vars();
                let mut out = c.write_only_vars();
                out.extend(c2.write_only_vars().into_iter().filter(|v| !rv.contains(v)));
                out
            }
            Command::If(Kind::Det, _, c, c2) => c.write_only_vars().intersection(&c2.write_only_vars()).cloned().collect(),
            Command::If(Kind::Rand, b, c, c2) => {
                let fv = b.free_vars();
                c.write_only_vars().intersection(&c2.write_only_vars()).filter(|v| !fv.contains(*v)).cloned().collect()
            }
        }
    }

    /// Variables the command may modify.
    pub fn modified_vars(&self) -> BTreeSet<Var> {
        match self {
            Command::Skip => BTreeSet::new(),
            Command::Assign(x, _) | Command::Sample(x, _) => BTreeSet::from([x.clone()]),
            Command::Seq(c, c2) | Command::If(_, _, c, c2) => union(c.modified_vars(), c2.modified_vars()),
            Command::While(_, _, c) => c.modified_vars(),
        }
    }

    /// True iff the command contains no deterministic assignment at any depth
    /// and every nested random-kind body obeys the same restriction.
    pub fn is_restricted(&self) -> bool {
        match self {
            Command::Skip | Command::Sample(..) => true,
            Command::Assign(x, _) => x.is_random(),
            Command::Seq(a, b) | Command::If(_, _, a, b) => a.is_restricted() && b.is_restricted(),
            Command::While(_, _, a) => a.is_restricted(),
        }
    }

    /// Rewrites variable kinds (and conditional/loop kinds) from `kinds`.
    pub fn rekind(&self, kinds: &BTreeMap<Name, Kind>) -> Command {
        let e = |e: &Expr| rekind_expr(e, kinds);
        let v = |x: &Var| Var { name: x.name.clone(), kind: kinds.get(&x.name).copied().unwrap_or(x.kind) };
        match self {
            Command::Skip => Command::Skip,
            Command::Assign(x, ex) => Command::Assign(v(x), e(ex)),
            Command::Sample(x, ex) => Command::Sample(v(x), e(ex)),
            Command::Seq(a, b) => Command::Seq(Box::new(a.rekind(kinds)), Box::new(b.rekind(kinds))),
            Command::If(_, b, c, c2) => Command::if_(e(b), c.rekind(kinds), c2.rekind(kinds)),
            Command::While(_, b, c) => Command::while_(e(b), c.rekind(kinds)),
        }
    }

    /// Checks the kind discipline: deterministic assignments have
    /// deterministic right-hand sides, samples target random variables,
    /// guard kinds match, and random bodies contain no deterministic writes.
    pub fn check_well_formed(&self) -> Result<(), KindError> {
        self.check_in(false)
    }

    fn check_in(&self, in_random: bool) -> Result<(), KindError> {
        match self {
            Command::Skip => Ok(()),
            Command::Assign(x, e) => {
                if !x.is_random() {
                    if in_random {
                        return Err(KindError::DetAssignInRandomBody(x.name.to_string()));
                    }
                    if !e.is_deterministic() {
                        return Err(KindError::RandomRhs(x.name.to_string()));
                    }
                }
                Ok(())
            }
            Command::Sample(x, _) => {
                if x.is_random() {
                    Ok(())
                } else {
                    Err(KindError::SampleIntoDet(x.name.to_string()))
                }
            }
            Command::Seq(a, b) => {
                a.check_in(in_random)?;
                b.check_in(in_random)
            }
            Command::If(kind, b, c, c2) => {
                if *kind == Kind::Det && !b.is_deterministic() {
                    return Err(KindError::GuardKind("conditional"));
                }
                let inner = in_random || *kind == Kind::Rand;
                c.check_in(inner)?;
                c2.check_in(inner)
            }
            Command::While(kind, b, c) => {
                if *kind == Kind::Det && !b.is_deterministic() {
                    return Err(KindError::GuardKind("loop"));
                }
                c.check_in(in_random || *kind == Kind::Rand)
            }
        }
    }
}

fn union<T: Ord>(mut a: BTreeSet<T>, b: BTreeSet<T>) -> BTreeSet<T> {
    a.extend(b);
    a
}

pub fn rekind_expr(e: &Expr, kinds: &BTreeMap<Name, Kind>) -> Expr {
    e.map_vars(&mut |x| Expr::Var(Var { name: x.name.clone(), kind: kinds.get(&x.name).copied().unwrap_or(x.kind) }))
}

/// Least fixpoint of the classification rules, starting from `initial`
/// (names missing from `initial` start deterministic). Kinds already on the
/// command's variables are ignored; only names matter.
pub fn classify_variables(body: &Command, initial: &BTreeMap<Name, Kind>) -> BTreeMap<Name, Kind> {
    let mut kinds: BTreeMap<Name, Kind> = body.vars().into_iter().map(|v| (v.name, Kind::Det)).collect();
    for (n, k) in initial {
        kinds.insert(n.clone(), *k);
    }
    loop {
        let mut changed = false;
        mark(body, false, &mut kinds, &mut changed);
        if !changed {
            return kinds;
        }
    }
}

fn mentions_random(e: &Expr, kinds: &BTreeMap<Name, Kind>) -> bool {
    e.free_vars().iter().any(|v| kinds.get(&v.name) == Some(&Kind::Rand))
}

fn make_random(x: &Var, kinds: &mut BTreeMap<Name, Kind>, changed: &mut bool) {
    if kinds.insert(x.name.clone(), Kind::Rand) != Some(Kind::Rand) {
        *changed = true;
    }
}

fn mark(c: &Command, in_random: bool, kinds: &mut BTreeMap<Name, Kind>, changed: &mut bool) {
    match c {
        Command::Skip => {}
        Command::Sample(x, _) => make_random(x, kinds, changed),
        Command::Assign(x, e) => {
            if in_random || mentions_random(e, kinds) {
                make_random(x, kinds, changed)
            }
        }
        Command::Seq(a, b) => {
            mark(a, in_random, kinds, changed);
            mark(b, in_random, kinds, changed);
        }
        Command::If(_, b, a, a2) => {
            let r = in_random || mentions_random(b, kinds);
            mark(a, r, kinds, changed);
            mark(a2, r, kinds, changed);
        }
        Command::While(_, b, a) => {
            let r = in_random || mentions_random(b, kinds);
            mark(a, r, kinds, changed);
        }
    }
}

/// A variable declaration: optional kind annotation and initial value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decl {
    pub name: Name,
    pub kind: Option<Kind>,
    pub init: Value,
}

impl Decl {
    pub fn new(name: &str, kind: Option<Kind>, init: Value) -> Decl {
        Decl { name: Name::from(name), kind, init }
    }
}

/// A well-formed program: declared variables with their kinds and initial
/// values, and a body whose variable kinds agree with the declarations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    kinds: BTreeMap<Name, Kind>,
    init: BTreeMap<Name, Value>,
    body: Command,
}

impl Program {
    /// Classifies undeclared kinds, rekinds the body and checks it.
    pub fn new(decls: Vec<Decl>, body: Command) -> Result<Program, KindError> {
        let mut init = BTreeMap::new();
        let mut annotated = BTreeMap::new();
        for d in &decls {
            if init.insert(d.name.clone(), d.init.clone()).is_some() {
                return Err(KindError::Redeclared(d.name.to_string()));
            }
            if d.kind == Some(Kind::Rand) {
                annotated.insert(d.name.clone(), Kind::Rand);
            }
        }
        for v in body.vars() {
            if !init.contains_key(&v.name) {
                return Err(KindError::Undeclared(v.name.to_string()));
            }
        }
        let mut kinds = classify_variables(&body, &annotated);
        for d in &decls {
            let k = kinds.entry(d.name.clone()).or_insert(Kind::Det);
            if d.kind == Some(Kind::Det) && *k == Kind::Rand {
                return Err(KindError::MustBeRandom { var: d.name.to_string(), reason: random_reason(&body, &d.name, &kinds) });
            }
        }
        let body = body.rekind(&kinds);
        body.check_well_formed()?;
        Ok(Program { kinds, init, body })
    }

    pub fn body(&self) -> &Command {
        &self.body
    }

    pub fn kinds(&self) -> &BTreeMap<Name, Kind> {
        &self.kinds
    }

    pub fn init(&self) -> &BTreeMap<Name, Value> {
        &self.init
    }

    pub fn var(&self, name: &str) -> Option<Var> {
        self.kinds.get_key_value(name).map(|(n, k)| Var { name: n.clone(), kind: *k })
    }

    pub fn kind_of(&self, name: &str) -> Option<Kind> {
        self.kinds.get(name).copied()
    }

    /// Same program with some initial values replaced.
    pub fn with_inputs(&self, inputs: &BTreeMap<Name, Value>) -> Result<Program, KindError> {
        let mut p = self.clone();
        for (n, v) in inputs {
            match p.init.get_mut(n) {
                Some(slot) => *slot = v.clone(),
                None => return Err(KindError::Undeclared(n.to_string())),
            }
        }
        Ok(p)
    }

    /// Deterministic variables in sigma; random ones as a point mass.
    pub fn initial_config(&self) -> Config {
        let mut sigma = BTreeMap::new();
        let mut rand = BTreeMap::new();
        for (n, v) in &self.init {
            match self.kinds[n] {
                Kind::Det => sigma.insert(n.clone(), v.clone()),
                Kind::Rand => rand.insert(n.clone(), v.clone()),
            };
        }
        Config { sigma, mu: MemDist::point(rand) }
    }
}

fn random_reason(body: &Command, name: &str, kinds: &BTreeMap<Name, Kind>) -> String {
    let mut reason = String::from("it is assigned inside a random conditional or loop");
    let mut found = false;
    body.visit(&mut |c| {
        if found {
            return;
        }
        match c {
            Command::Sample(x, _) if &*x.name == name => {
                reason = "it is sampled".into();
                found = true;
            }
            Command::Assign(x, e) if &*x.name == name && mentions_random(e, kinds) => {
                let rv: Vec<String> =
                    e.free_vars().into_iter().filter(|v| kinds.get(&v.name) == Some(&Kind::Rand)).map(|v| v.name.to_string()).collect();
                reason = format!("its right-hand side mentions random variable(s) {}", rv.join(", "));
                found = true;
            }
            _ => {}
        }
    });
    reason
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::BinOp;

    fn names(vs: &BTreeSet<Var>) -> Vec<String> {
        vs.iter().map(|v| v.name.to_string()).collect()
    }

    fn kinds_of(m: &BTreeMap<Name, Kind>) -> Vec<(String, Kind)> {
        m.iter().map(|(n, k)| (n.to_string(), *k)).collect()
    }

    #[test]
    fn sampled_and_dependent_vars_become_random() {
        let (t, x) = (Var::det("t"), Var::det("x"));
        let body = Command::seq([
            Command::sample(&t, Expr::Const(Value::int_set([0, 1]))),
            Command::assign(&x, Expr::add(Expr::var(&t), Expr::int(1))),
        ]);
        let k = classify_variables(&body, &BTreeMap::new());
        assert_eq!(kinds_of(&k), vec![("t".into(), Kind::Rand), ("x".into(), Kind::Rand)]);
    }

    #[test]
    fn counters_stay_deterministic() {
        let i = Var::det("i");
        let body = Command::seq([Command::assign(&i, Expr::int(0)), Command::assign(&i, Expr::add(Expr::var(&i), Expr::int(1)))]);
        assert_eq!(kinds_of(&classify_variables(&body, &BTreeMap::new())), vec![("i".into(), Kind::Det)]);
    }

    #[test]
    fn assignments_under_random_guards_become_random() {
        let (b, y) = (Var::det("b"), Var::det("y"));
        let body = Command::seq([
            Command::sample(&b, Expr::Const(Value::int_set([0, 1]))),
            Command::if_(Expr::var(&b), Command::assign(&y, Expr::int(1)), Command::assign(&y, Expr::int(2))),
        ]);
        let k = classify_variables(&body, &BTreeMap::new());
        assert_eq!(kinds_of(&k), vec![("b".into(), Kind::Rand), ("y".into(), Kind::Rand)]);
        // Idempotent: re-running on the output changes nothing.
        assert_eq!(classify_variables(&body.rekind(&k), &k), k);
    }

    #[test]
    fn classification_propagates_backwards_through_loops() {
        // y := x is classified random only once x becomes random later.
        let (x, y, r) = (Var::det("x"), Var::det("y"), Var::det("r"));
        let body = Command::while_(
            Expr::bin(BinOp::Lt, Expr::var(&y), Expr::int(3)),
            Command::seq([Command::assign(&y, Expr::var(&x)), Command::sample(&r, Expr::Const(Value::int_set([0, 1]))), Command::assign(&x, Expr::var(&r))]),
        );
        let k = classify_variables(&body, &BTreeMap::new());
        assert!(k.values().all(|k| *k == Kind::Rand));
    }

    #[test]
    fn aux_functions_follow_definitions() {
        let (x, y) = (Var::det("x"), Var::det("y"));
        let xr = Var::rand("xr");
        assert_eq!(names(&Command::assign(&x, Expr::int(1)).modified_vars()), vec!["x"]);
        let inc = Command::assign(&xr, Expr::add(Expr::var(&xr), Expr::int(1)));
        assert!(inc.write_only_vars().is_empty());
        let c = Command::seq([Command::Skip, Command::assign(&x, Expr::var(&y))]);
        assert_eq!(names(&c.read_vars()), vec!["y"]);
        // RV(c;c') drops what c wrote-only.
        let c = Command::seq([Command::assign(&y, Expr::int(0)), Command::assign(&x, Expr::var(&y))]);
        assert!(c.read_vars().is_empty());
        assert_eq!(names(&c.write_only_vars()), vec!["x", "y"]);
    }

    #[test]
    fn restricted_grammar_check() {
        let (d, r) = (Var::det("d"), Var::rand("r"));
        let bad = Command::If(Kind::Rand, Expr::var(&r), Box::new(Command::assign(&d, Expr::int(1))), Box::new(Command::Skip));
        assert_eq!(bad.check_well_formed(), Err(KindError::DetAssignInRandomBody("d".into())));
        assert!(!Command::assign(&d, Expr::int(1)).is_restricted());
        assert!(Command::assign(&r, Expr::int(1)).is_restricted());
    }

    #[test]
    fn program_rejects_forced_random_det_decl() {
        let (t, x) = (Var::det("t"), Var::det("x"));
        let body = Command::seq([
            Command::sample(&t, Expr::Const(Value::int_set([0, 1]))),
            Command::assign(&x, Expr::var(&t)),
        ]);
        let decls = vec![Decl::new("t", None, Value::Int(0)), Decl::new("x", Some(Kind::Det), Value::Int(0))];
        match Program::new(decls, body) {
            Err(KindError::MustBeRandom { var, reason }) => {
                assert_eq!(var, "x");
                assert!(reason.contains('t'));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn program_requires_declarations() {
        let x = Var::det("x");
        assert_eq!(Program::new(vec![], Command::assign(&x, Expr::int(1))), Err(KindError::Undeclared("x".into())));
    }
}
