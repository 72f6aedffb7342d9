//! Randomized soundness testing of the proof rules: generate rule
//! instances whose premises hold, then check that the conclusion holds.
//!
//! Premises are checked on every total configuration of the universe and
//! also on the configurations the premises' commands reach from them, so
//! that intermediate states outside the universe (values that grew, odd
//! denominators) are covered.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::rules::{check_rule_app, check_rule_app_in, Rule, RuleApp};
use super::{holds_on, Triple, Violation};
use crate::assertion::{is_supported, satisfies, Assertion, Universe};
use crate::command::Command;
use crate::config::Config;
use crate::error::{AssertError, LogicError};
use crate::expr::{Expr, Kind, Name, Var};
use crate::interp::exec;
use crate::syntax::{parse_assertion, parse_command, parse_expr};
use crate::value::Value;

pub const DEFAULT_FUEL: u64 = 50;

/// Two random bits `x`, `y` and a deterministic bit `d`, with
/// probabilities in quarters.
pub fn test_universe() -> Universe {
    Universe::new(4)
        .var("x", Kind::Rand, [Value::Int(0), Value::Int(1)])
        .var("y", Kind::Rand, [Value::Int(0), Value::Int(1)])
        .var("d", Kind::Det, [Value::Int(0), Value::Int(1)])
}

#[derive(Clone, Debug)]
pub struct FuzzViolation {
    pub app: RuleApp,
    pub violation: Violation,
}

#[derive(Clone, Debug)]
pub struct FuzzReport {
    pub rule: Rule,
    pub seed: u64,
    pub attempts: usize,
    /// Instances whose premises and side conditions held and whose
    /// precondition is satisfiable in the universe.
    pub valid: usize,
    pub violations: Vec<FuzzViolation>,
}

/// Generates rule instances until `n` valid ones have been checked.
pub fn soundness_fuzz(rule: Rule, n: usize, u: &Universe, seed: u64) -> Result<FuzzReport, LogicError> {
    let mut g = Gen::new(u, seed)?;
    let mut report = FuzzReport { rule, seed, attempts: 0, valid: 0, violations: Vec::new() };
    let max_attempts = 60 * n.max(1);
    while report.valid < n {
        if report.attempts >= max_attempts {
            return Err(LogicError::GenerationBudgetExceeded(format!("{rule}: {} valid instances in {} attempts", report.valid, report.attempts)));
        }
        report.attempts += 1;
        let Some(app) = g.instance(rule)? else { continue };
        match g.check(&app)? {
            Outcome::Discarded => {}
            Outcome::Valid => report.valid += 1,
            Outcome::Violated(v) => {
                report.valid += 1;
                report.violations.push(FuzzViolation { app, violation: v });
            }
        }
    }
    Ok(report)
}

/// Searches for an instance of `Const` whose frame `eta` mentions a
/// modified variable and whose conclusion fails, showing that the side
/// condition cannot be dropped.
pub fn const_without_side_condition(u: &Universe, seed: u64, attempts: usize) -> Result<Option<FuzzViolation>, LogicError> {
    let mut g = Gen::new(u, seed)?;
    for _ in 0..attempts {
        let c = g.cmd(1, &["x", "y"], false);
        let phi = g.assertion(1);
        let Some(psi) = g.mine(&phi, &c, &[&c], |p| p.clone())? else { continue };
        let mv: Vec<String> = c.modified_vars().iter().map(|v| v.name.to_string()).collect();
        let Some(v) = mv.choose(&mut g.rng) else { continue };
        let k = g.rng.gen_range(0..2);
        let eta = g.parse_assertion(&format!("C[{v} = {k}]"));
        let app = RuleApp::new(
            Rule::Const,
            Triple::new(Assertion::and(phi.clone(), eta.clone()), c.clone(), Assertion::and(psi.clone(), eta)),
            vec![Triple::new(phi, c, psi)],
        );
        if let Some(violation) = super::holds_semantically(&app.conclusion, u, g.fuel)? {
            return Ok(Some(FuzzViolation { app, violation }));
        }
    }
    Ok(None)
}

enum Outcome {
    Discarded,
    Valid,
    Violated(Violation),
}

const RAND_EXPRS: &[&str] = &["x", "y", "x + y", "(x + 1) % 2", "x * y", "y + d", "1 - x", "0", "1", "d"];
const DET_EXPRS: &[&str] = &["0", "1", "d", "d + 1", "1 - d", "(d + 1) % 2"];
const RAND_GUARDS: &[&str] = &["x = 0", "x < y", "x + y = 1", "y != d", "x = y", "y = 1"];
const DET_GUARDS: &[&str] = &["d = 0", "d < 1", "d != 1"];
const SETS: &[&str] = &["{0, 1}", "{0}", "{1}", "{0 .. d}", "{d, 1}"];
const CMPS: &[&str] = &["=", "!=", "<=", "<"];

struct Gen<'a> {
    rng: ChaCha8Rng,
    u: &'a Universe,
    kinds: BTreeMap<Name, Kind>,
    fuel: u64,
    base: Vec<Config>,
}

impl<'a> Gen<'a> {
    fn new(u: &'a Universe, seed: u64) -> Result<Gen<'a>, LogicError> {
        let mut base = Vec::new();
        u.find_total(|m| {
            base.push(m.clone());
            Ok(false)
        })?;
        for v in ["x", "y", "d"] {
            if u.kind(v).is_none() {
                return Err(AssertError::UniverseTooSmall(format!("the fuzzer needs `{v}`")).into());
            }
        }
        Ok(Gen { rng: ChaCha8Rng::seed_from_u64(seed), u, kinds: u.kinds(), fuel: DEFAULT_FUEL, base })
    }

    fn pick(&mut self, xs: &[&'static str]) -> &'static str {
        xs.choose(&mut self.rng).expect("non-empty pool")
    }

    fn parse_assertion(&self, s: &str) -> Assertion {
        parse_assertion(s, &self.kinds).unwrap_or_else(|e| panic!("generated assertion `{s}`: {e}"))
    }

    fn parse_cmd(&self, s: &str) -> Command {
        parse_command(s, &self.kinds).unwrap_or_else(|e| panic!("generated command `{s}`: {e}"))
    }

    fn expr(&self, s: &str) -> Expr {
        parse_expr(s, &self.kinds).unwrap_or_else(|e| panic!("generated expression `{s}`: {e}"))
    }

    fn atom_src(&mut self) -> String {
        match self.rng.gen_range(0..10) {
            0..=4 => {
                let (a, c, b) = (self.pick(RAND_EXPRS), self.pick(CMPS), self.pick(RAND_EXPRS));
                format!("C[{a} {c} {b}]")
            }
            5..=7 => {
                let (s, e) = (self.pick(SETS), self.pick(&["x", "y", "(x + y) % 2", "(x + d) % 2", "1 - y"]));
                format!("U[{s}, {e}]")
            }
            8 => format!("D[{}]", self.pick(&["x", "y", "d"])),
            _ => "top".into(),
        }
    }

    fn assertion_src(&mut self, depth: u32) -> String {
        if depth == 0 || self.rng.gen_bool(0.5) {
            return self.atom_src();
        }
        let op = self.pick(&["/\\", "\\/", "*"]);
        format!("({} {op} {})", self.assertion_src(depth - 1), self.assertion_src(depth - 1))
    }

    fn assertion(&mut self, depth: u32) -> Assertion {
        let s = self.assertion_src(depth);
        self.parse_assertion(&s)
    }

    /// A random command assigning only to `targets`; `det` allows
    /// deterministic assignments and conditionals.
    fn cmd_src(&mut self, depth: u32, targets: &[&'static str], det: bool) -> String {
        let rand_targets: Vec<&'static str> = targets.iter().copied().filter(|t| *t != "d").collect();
        let mut choices = vec![0];
        if !rand_targets.is_empty() {
            choices.extend([1, 1, 2]);
        }
        if det && targets.contains(&"d") {
            choices.push(3);
        }
        if depth > 0 {
            choices.extend([4, 5]);
        }
        match *choices.choose(&mut self.rng).expect("non-empty") {
            0 => "skip".into(),
            1 => {
                let x = *rand_targets.choose(&mut self.rng).expect("target");
                format!("{x} := {}", self.pick(RAND_EXPRS))
            }
            2 => {
                let x = *rand_targets.choose(&mut self.rng).expect("target");
                let other = if x == "x" { "y" } else { "x" };
                let s = self.pick(&["{0, 1}", "{0 .. 2}", "{d, 1}", "{0 .. OTHER}", "{OTHER, 1 - OTHER}"]).replace("OTHER", other);
                format!("{x} :$= {s}")
            }
            3 => format!("d := {}", self.pick(DET_EXPRS)),
            4 => {
                let a = self.cmd_src(depth - 1, targets, det);
                let b = self.cmd_src(depth - 1, targets, det);
                format!("{a}; {b}")
            }
            _ => {
                let det_guard = det && self.rng.gen_bool(0.4);
                let g = if det_guard { self.pick(DET_GUARDS) } else { self.pick(RAND_GUARDS) };
                let a = self.cmd_src(depth - 1, targets, det_guard);
                let b = self.cmd_src(depth - 1, targets, det_guard);
                format!("if {g} {{ {a} }} else {{ {b} }}")
            }
        }
    }

    fn cmd(&mut self, depth: u32, targets: &[&'static str], det: bool) -> Command {
        let s = self.cmd_src(depth, targets, det);
        self.parse_cmd(&s)
    }

    /// Configurations reached from the universe by repeatedly running the
    /// given commands.
    fn reach(&self, cmds: &[&Command]) -> Vec<Config> {
        let mut seen: HashSet<Config> = self.base.iter().cloned().collect();
        let mut frontier = self.base.clone();
        let mut extra = Vec::new();
        for _ in 0..4 {
            let mut next = Vec::new();
            for c in cmds {
                for m in &frontier {
                    if let Ok(r) = exec(c, m, self.fuel) {
                        if seen.insert(r.clone()) {
                            next.push(r);
                        }
                    }
                }
            }
            extra.extend(next.iter().cloned());
            if next.is_empty() || extra.len() > 600 {
                break;
            }
            frontier = next;
        }
        extra
    }

    fn valid(&self, t: &Triple, extra: &[Config]) -> Result<bool, LogicError> {
        match holds_on(t, self.u, self.fuel, extra) {
            Ok(v) => Ok(v.is_none()),
            Err(LogicError::Exec(_)) => Ok(false),
            Err(e) => Err(e),
        }
    }

    /// A postcondition `psi` with `{pre} c {wrap(psi)}` valid, found among
    /// random candidates.
    fn mine(&mut self, pre: &Assertion, c: &Command, reach: &[&Command], wrap: impl Fn(&Assertion) -> Assertion) -> Result<Option<Assertion>, LogicError> {
        let extra = self.reach(reach);
        for _ in 0..12 {
            let psi = self.assertion(1);
            if self.valid(&Triple::new(pre.clone(), c.clone(), wrap(&psi)), &extra)? {
                return Ok(Some(psi));
            }
        }
        Ok(None)
    }

    /// Like [`Gen::mine`] for several premises sharing one postcondition
    /// shape.
    fn mine_all(&mut self, premises: &[(Assertion, Command)], reach: &[&Command], wrap: impl Fn(&Assertion, usize) -> Assertion) -> Result<Option<Assertion>, LogicError> {
        let extra = self.reach(reach);
        'candidates: for _ in 0..16 {
            let psi = self.assertion(1);
            for (i, (pre, c)) in premises.iter().enumerate() {
                if !self.valid(&Triple::new(pre.clone(), c.clone(), wrap(&psi, i)), &extra)? {
                    continue 'candidates;
                }
            }
            return Ok(Some(psi));
        }
        Ok(None)
    }

    fn check(&mut self, app: &RuleApp) -> Result<Outcome, LogicError> {
        match check_rule_app_in(app, self.u) {
            Ok(()) => {}
            Err(LogicError::SchemaMismatch(m)) => panic!("generator produced a malformed {} instance: {m}", app.rule),
            Err(LogicError::SideConditionViolated(_)) | Err(LogicError::Assert(_)) => return Ok(Outcome::Discarded),
            Err(e) => return Err(e),
        }
        let cmds: Vec<&Command> = app.premises.iter().map(|p| &p.cmd).collect();
        let extra = self.reach(&cmds);
        for p in &app.premises {
            if !self.valid(p, &extra)? {
                return Ok(Outcome::Discarded);
            }
        }
        let pre = &app.conclusion.pre;
        let mut satisfiable = false;
        for m in &self.base {
            if satisfies(m, pre, self.u)? {
                satisfiable = true;
                break;
            }
        }
        if !satisfiable {
            return Ok(Outcome::Discarded);
        }
        match holds_on(&app.conclusion, self.u, self.fuel, &[]) {
            Ok(None) => Ok(Outcome::Valid),
            Ok(Some(v)) => Ok(Outcome::Violated(v)),
            Err(LogicError::Exec(_)) => Ok(Outcome::Discarded),
            Err(e) => Err(e),
        }
    }

    /// A candidate instance of `rule`, or `None` when generation gave up.
    fn instance(&mut self, rule: Rule) -> Result<Option<RuleApp>, LogicError> {
        let t = Triple::new;
        Ok(Some(match rule {
            Rule::RAssign | Rule::DAssign => {
                let (x, e) = if rule == Rule::RAssign {
                    (*["x", "y"].choose(&mut self.rng).expect("x or y"), self.pick(RAND_EXPRS))
                } else {
                    ("d", self.pick(DET_EXPRS))
                };
                let post = if rule == Rule::RAssign {
                    let a = self.atom_src();
                    self.parse_assertion(&a)
                } else {
                    self.assertion(2)
                };
                let Ok(pre) = post.subst(x, &self.expr(e)) else { return Ok(None) };
                let c = self.parse_cmd(&format!("{x} := {e}"));
                RuleApp::new(rule, t(pre, c, post), vec![])
            }
            Rule::RSample => {
                let x = *["x", "y"].choose(&mut self.rng).expect("x or y");
                let other = if x == "x" { "y" } else { "x" };
                let (s, f, target) = *[
                    ("{0 .. 3}", "w % 2", "{0, 1}"),
                    ("{0 .. 2 * OTHER + 1}", "w % 2", "{0, 1}"),
                    ("{0 .. OTHER + 1}", "w % 2", "{0, 1}"),
                    ("{OTHER, OTHER + 1}", "(w + d) % 2", "{0, 1}"),
                    ("{0, 1}", "w", "{0, 1}"),
                    ("{0 .. 3}", "w / 2", "{0, 1}"),
                    ("{1 .. 4}", "w % 2 + OTHER", "{OTHER, OTHER + 1}"),
                    ("{0 .. 5}", "w % 3", "{0 .. 2}"),
                ]
                .choose(&mut self.rng)
                .expect("templates");
                let (s, f, target) = (s.replace("OTHER", other), f.replace("OTHER", other), target.replace("OTHER", other));
                // The target set must stay deterministic.
                if target.contains(other) {
                    return Ok(None);
                }
                let pre = self.parse_assertion(&format!("C[ei(w in {s} => {f}, {target})]"));
                let Assertion::Certain(Expr::EvenPartition { var, body, .. }) = &pre else { unreachable!() };
                let x_var = Var::rand(x);
                let post = Assertion::uniform(self.expr(&target), body.subst_local(var, &Expr::var(&x_var)))?;
                RuleApp::new(rule, t(pre, self.parse_cmd(&format!("{x} :$= {s}")), post), vec![])
            }
            Rule::Skip => {
                let a = self.assertion(2);
                RuleApp::new(rule, t(a.clone(), Command::Skip, a), vec![])
            }
            Rule::True => {
                let c = self.cmd(2, &["x", "y", "d"], true);
                RuleApp::new(rule, t(Assertion::Top, c, Assertion::Top), vec![])
            }
            Rule::Seqn => {
                let c1 = self.cmd(1, &["x", "y", "d"], true);
                let c2 = self.cmd(1, &["x", "y", "d"], true);
                let phi = self.assertion(1);
                let Some(psi) = self.mine(&phi, &c1, &[&c1], |p| p.clone())? else { return Ok(None) };
                let Some(eta) = self.mine(&psi, &c2, &[&c1, &c2], |p| p.clone())? else { return Ok(None) };
                RuleApp::new(rule, t(phi.clone(), c1.clone().then(c2.clone()), eta.clone()), vec![t(phi, c1, psi.clone()), t(psi, c2, eta)])
            }
            Rule::Weak => {
                let c = self.cmd(1, &["x", "y", "d"], true);
                let phi = self.assertion(1);
                let Some(psi) = self.mine(&phi, &c, &[&c], |p| p.clone())? else { return Ok(None) };
                let strengthen = self.assertion(0);
                let weaken = self.assertion(0);
                let phi2 = if self.rng.gen_bool(0.5) { Assertion::and(phi.clone(), strengthen) } else { Assertion::star(phi.clone(), strengthen) };
                let psi2 = if self.rng.gen_bool(0.5) { Assertion::or(psi.clone(), weaken) } else { weaken_atoms(&psi) };
                RuleApp::new(rule, t(phi2, c.clone(), psi2), vec![t(phi, c, psi)])
            }
            Rule::Const | Rule::Frame => {
                let targets: &[&'static str] = if self.rng.gen_bool(0.5) { &["x", "d"] } else { &["y"] };
                let c = self.cmd(1, targets, true);
                let mut phi = self.assertion(1);
                let mut frame_vars = Vec::new();
                if rule == Rule::Frame {
                    frame_vars = [Var::rand("x"), Var::rand("y"), Var::det("d")].into_iter().filter(|_| self.rng.gen_bool(0.5)).collect();
                    let mut need: Vec<Var> = c.read_vars().into_iter().collect();
                    need.extend(frame_vars.iter().cloned());
                    phi = Assertion::and(phi, Assertion::defined_vars(&need));
                }
                let Some(psi) = self.mine(&phi, &c, &[&c], |p| p.clone())? else { return Ok(None) };
                let untouched: Vec<&str> = ["x", "y", "d"].into_iter().filter(|v| !c.modified_vars().iter().any(|m| &*m.name == *v)).collect();
                let v = *untouched.choose(&mut self.rng).expect("one variable is untouched");
                let k = self.rng.gen_range(0..2);
                let eta_src = match self.rng.gen_range(0..3) {
                    0 => format!("C[{v} = {k}]"),
                    1 => format!("U[{{0, 1}}, {v}]"),
                    _ => format!("D[{v}]"),
                };
                let eta = self.parse_assertion(&eta_src);
                let join = |a: Assertion, b: Assertion| if rule == Rule::Const { Assertion::and(a, b) } else { Assertion::star(a, b) };
                let mut app = RuleApp::new(rule, t(join(phi.clone(), eta.clone()), c.clone(), join(psi.clone(), eta)), vec![t(phi, c.clone(), psi.clone())]);
                if rule == Rule::Frame {
                    app = app.with_frame_vars(frame_vars);
                }
                app
            }
            Rule::DCond | Rule::RDCond | Rule::RCondCertain => {
                let det = rule == Rule::DCond;
                let g = if det { self.pick(DET_GUARDS) } else { self.pick(RAND_GUARDS) };
                let b = self.expr(g);
                let c1 = self.cmd(1, &["x", "y", "d"], det);
                let c2 = self.cmd(1, &["x", "y", "d"], det);
                let c = Command::If(if det { Kind::Det } else { Kind::Rand }, b.clone(), Box::new(c1.clone()), Box::new(c2.clone()));
                if rule == Rule::RCondCertain {
                    let p = format!("{} {} {}", self.pick(RAND_EXPRS), self.pick(CMPS), self.pick(RAND_EXPRS));
                    let phi = self.expr(&p);
                    let pre_t = Assertion::certain(Expr::and(phi.clone(), Expr::bin(crate::expr::BinOp::Ne, b.clone(), Expr::bool(false))));
                    let pre_f = Assertion::certain(Expr::and(phi.clone(), Expr::eq(b.clone(), Expr::bool(false))));
                    let extra = self.reach(&[&c1, &c2]);
                    let mut found = None;
                    for _ in 0..16 {
                        let q = format!("{} {} {}", self.pick(RAND_EXPRS), self.pick(CMPS), self.pick(RAND_EXPRS));
                        let psi = Assertion::certain(self.expr(&q));
                        if self.valid(&t(pre_t.clone(), c1.clone(), psi.clone()), &extra)? && self.valid(&t(pre_f.clone(), c2.clone(), psi.clone()), &extra)? {
                            found = Some(psi);
                            break;
                        }
                    }
                    let Some(psi) = found else { return Ok(None) };
                    return Ok(Some(RuleApp::new(rule, t(Assertion::certain(phi), c, psi.clone()), vec![t(pre_t, c1, psi.clone()), t(pre_f, c2, psi)])));
                }
                let phi = if rule == Rule::RDCond {
                    // Make the guard certain one way or the other.
                    let (a1, a2) = (self.assertion(0), self.assertion(0));
                    let s = format!("({a1} /\\ C[{g}]) \\/ ({a2} /\\ C[!({g})])");
                    self.parse_assertion(&s)
                } else {
                    self.assertion(1)
                };
                let (pt, pf) = (Assertion::and(phi.clone(), Assertion::guard_true(&b)), Assertion::and(phi.clone(), Assertion::guard_false(&b)));
                let Some(psi) = self.mine_all(&[(pt.clone(), c1.clone()), (pf.clone(), c2.clone())], &[&c1, &c2], |p, _| p.clone())? else { return Ok(None) };
                RuleApp::new(rule, t(phi, c, psi.clone()), vec![t(pt, c1, psi.clone()), t(pf, c2, psi)])
            }
            Rule::RCond | Rule::RCase => {
                let g = self.pick(&["x = 0", "x = 1", "x < 1"]);
                let b = self.expr(g);
                let c1 = self.cmd(1, &["y"], false);
                let c2 = if rule == Rule::RCond { self.cmd(1, &["y"], false) } else { c1.clone() };
                let c = if rule == Rule::RCond { Command::If(Kind::Rand, b.clone(), Box::new(c1.clone()), Box::new(c2.clone())) } else { c1.clone() };
                let phi_src = self.pick(&["U[{0, 1}, y]", "C[y = 0]", "D[y]", "C[y <= d]", "top"]);
                let phi = self.parse_assertion(phi_src);
                let (bt, bf) = (Assertion::guard_true(&b), Assertion::guard_false(&b));
                let premises = [(Assertion::star(phi.clone(), bt.clone()), c1.clone()), (Assertion::star(phi.clone(), bf.clone()), c2.clone())];
                let guards = [bt.clone(), bf.clone()];
                let Some(psi) = self.mine_all(&premises, &[&c1, &c2], |p, i| Assertion::star(p.clone(), guards[i].clone()))? else { return Ok(None) };
                if !is_supported(&psi, self.u)?.holds() {
                    return Ok(None);
                }
                let db = Assertion::defined(b.clone());
                RuleApp::new(
                    rule,
                    t(Assertion::star(phi.clone(), db.clone()), c, Assertion::star(psi.clone(), db)),
                    vec![t(premises[0].0.clone(), c1, Assertion::star(psi.clone(), bt)), t(premises[1].0.clone(), c2, Assertion::star(psi, bf))],
                )
            }
            Rule::Conj | Rule::Case => {
                let c = self.cmd(1, &["x", "y", "d"], true);
                let (p1, p2) = (self.assertion(1), self.assertion(1));
                let Some(q1) = self.mine(&p1, &c, &[&c], |p| p.clone())? else { return Ok(None) };
                let Some(q2) = self.mine(&p2, &c, &[&c], |p| p.clone())? else { return Ok(None) };
                let join = |a: Assertion, b: Assertion| if rule == Rule::Conj { Assertion::and(a, b) } else { Assertion::or(a, b) };
                RuleApp::new(rule, t(join(p1.clone(), p2.clone()), c.clone(), join(q1.clone(), q2.clone())), vec![t(p1, c.clone(), q1), t(p2, c, q2)])
            }
            Rule::DLoop | Rule::RLoop => {
                let (v, k) = if rule == Rule::DLoop { ("d", 1) } else { (*["x", "y"].choose(&mut self.rng).expect("x or y"), self.rng.gen_range(1..3)) };
                let other: &'static str = if v == "x" { "y" } else { "x" };
                let inner = if rule == Rule::DLoop { self.cmd(1, &["x", "y"], false) } else { self.cmd(1, &[other], false) };
                let body = self.parse_cmd(&format!("{v} := {v} + 1")).then(inner);
                let b = self.expr(&format!("{v} < {k}"));
                let c = Command::while_(b.clone(), body.clone());
                let step = if rule == Rule::DLoop { body.clone() } else { Command::If(Kind::Rand, b.clone(), Box::new(body.clone()), Box::new(Command::Skip)) };
                let extra = self.reach(&[&step]);
                let mut found = None;
                for _ in 0..16 {
                    let phi = self.assertion(1);
                    let pre = if rule == Rule::DLoop { Assertion::and(phi.clone(), Assertion::guard_true(&b)) } else { phi.clone() };
                    if self.valid(&t(pre, step.clone(), phi.clone()), &extra)? {
                        found = Some(phi);
                        break;
                    }
                }
                let Some(phi) = found else { return Ok(None) };
                let post = Assertion::and(phi.clone(), Assertion::guard_false(&b));
                let premise = if rule == Rule::DLoop { t(Assertion::and(phi.clone(), Assertion::guard_true(&b)), body, phi.clone()) } else { t(phi.clone(), step, phi.clone()) };
                RuleApp::new(rule, t(phi, c, post), vec![premise])
            }
            Rule::UnifIdp => {
                let (a, c_src) = *[
                    ("x", "y :$= {0, 1}"),
                    ("x", "y :$= {0 .. 3}; y := y % 2"),
                    ("x", "if x = 0 { y :$= {0, 1} } else { y :$= {2, 3} }; y := y % 2"),
                    ("d", "x :$= {0, 1}"),
                    ("d", "if d = 0 { x :$= {0, 1} } else { x :$= {0, 1}; x := 1 - x }"),
                    ("x + d", "y :$= {d, d + 1}"),
                ]
                .choose(&mut self.rng)
                .expect("templates");
                let c = self.parse_cmd(c_src);
                let target = if c.modified_vars().iter().any(|v| &*v.name == "y") { "y" } else { "x" };
                let (s, bexpr) = *[("{0, 1}", target), ("{0, 1}", "(TARGET + 1) % 2")].choose(&mut self.rng).expect("b");
                let bexpr = bexpr.replace("TARGET", target);
                let set = if c_src.contains("{d, d + 1}") && bexpr == "y" { "{d, d + 1}" } else { s };
                let q = self.pick(&["top", "U[{0, 1}, y]", "D[y]", "C[y = 0]"]);
                let p = self.pick(&["true", "d = 0", "d <= 1"]);
                let big_a = self.pick(&["{0, 1}", "{0 .. 2}", "{0}"]);
                let pre = self.parse_assertion(&format!("(C[{a} in {big_a}] * {q}) /\\ C[{p}]"));
                let ub = self.parse_assertion(&format!("U[{set}, {bexpr}]"));
                let post = Assertion::star(Assertion::defined(self.expr(a)), ub.clone());
                RuleApp::new(rule, t(pre.clone(), c.clone(), post), vec![t(pre, c, ub)])
            }
        }))
    }
}

/// Replaces atoms by weaker ones: `U[S, e]` by `C[e in S]`, `C[p]` by
/// `C[p || q]`.
fn weaken_atoms(a: &Assertion) -> Assertion {
    match a {
        Assertion::Uniform(s, e) => Assertion::certain(Expr::bin(crate::expr::BinOp::In, e.clone(), s.expr().clone())),
        Assertion::Certain(e) => Assertion::certain(Expr::bin(crate::expr::BinOp::Or, e.clone(), Expr::bool(false))),
        Assertion::And(l, r) => Assertion::and(weaken_atoms(l), weaken_atoms(r)),
        Assertion::Or(l, r) => Assertion::or(weaken_atoms(l), weaken_atoms(r)),
        other => other.clone(),
    }
}

/// The non-atomic random assignment `{C[0 = 0] * C[0 = 0]} x := 0
/// {D[x] * D[x]}`: rejected by the rule check, and invalid.
pub fn non_atomic_assignment(u: &Universe) -> Result<(LogicError, Option<Violation>), LogicError> {
    let k = u.kinds();
    let p = |s: &str| parse_assertion(s, &k).expect("fixed assertion");
    let app = RuleApp::new(
        Rule::RAssign,
        Triple::new(p("C[0 = 0] * C[0 = 0]"), parse_command("x := 0", &k).expect("fixed command"), p("D[x] * D[x]")),
        vec![],
    );
    let rejected = match check_rule_app(&app) {
        Err(e) => e,
        Ok(_) => return Err(LogicError::SchemaMismatch("the non-atomic instance was accepted".into())),
    };
    Ok((rejected, super::holds_semantically(&app.conclusion, u, DEFAULT_FUEL)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_atomic_instance_is_rejected_and_invalid() {
        let (err, v) = non_atomic_assignment(&test_universe()).unwrap();
        assert!(matches!(err, LogicError::SideConditionViolated(_)));
        assert!(v.is_some());
    }

    #[test]
    fn dropping_the_const_side_condition_is_unsound() {
        let found = const_without_side_condition(&test_universe(), 3, 200).unwrap();
        let v = found.expect("a violating instance");
        assert!(matches!(check_rule_app(&v.app), Err(LogicError::SideConditionViolated(_))));
    }

    proptest::proptest! {
        #[test]
        fn substitution_matches_assignment(seed in 0u64..10_000) {
            let u = test_universe();
            let mut g = Gen::new(&u, seed).unwrap();
            let a = g.atom_src();
            let phi = g.parse_assertion(&a);
            let (x, e) = if g.rng.gen_bool(0.5) { ("d", g.pick(DET_EXPRS)) } else { (*["x", "y"].choose(&mut g.rng).unwrap(), g.pick(RAND_EXPRS)) };
            let c = g.parse_cmd(&format!("{x} := {e}"));
            let pre = phi.subst(x, &g.expr(e)).unwrap();
            for m in &g.base {
                let after = exec(&c, m, DEFAULT_FUEL).unwrap();
                proptest::prop_assert_eq!(satisfies(m, &pre, &u).unwrap(), satisfies(&after, &phi, &u).unwrap(), "{} with {} := {} at {}", phi, x, e, m);
            }
        }
    }

    #[test]
    fn a_few_instances_per_rule() {
        let u = test_universe();
        for rule in Rule::ALL {
            let r = soundness_fuzz(rule, 3, &u, 7).unwrap_or_else(|e| panic!("{rule}: {e}"));
            assert!(r.violations.is_empty(), "{rule}: {:?}", r.violations.first().map(|v| v.violation.to_string()));
        }
    }
}
