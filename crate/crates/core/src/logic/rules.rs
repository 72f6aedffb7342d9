use std::collections::BTreeSet;
use std::fmt;

use super::Triple;
use crate::assertion::{entails, is_supported, Assertion, Support, Universe};
use crate::command::Command;
use crate::error::LogicError;
use crate::expr::{BinOp, Expr, Kind, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    RAssign,
    RSample,
    RCondCertain,
    RLoop,
    UnifIdp,
    DAssign,
    Skip,
    Seqn,
    Weak,
    Const,
    DCond,
    True,
    DLoop,
    RDCond,
    RCond,
    Conj,
    Case,
    RCase,
    Frame,
}

impl Rule {
    pub const ALL: [Rule; 19] = [
        Rule::RAssign,
        Rule::RSample,
        Rule::RCondCertain,
        Rule::RLoop,
        Rule::UnifIdp,
        Rule::DAssign,
        Rule::Skip,
        Rule::Seqn,
        Rule::Weak,
        Rule::Const,
        Rule::DCond,
        Rule::True,
        Rule::DLoop,
        Rule::RDCond,
        Rule::RCond,
        Rule::Conj,
        Rule::Case,
        Rule::RCase,
        Rule::Frame,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::RAssign => "RAssign",
            Rule::RSample => "RSample",
            Rule::RCondCertain => "RCond-certain",
            Rule::RLoop => "RLoop",
            Rule::UnifIdp => "Unif-Idp",
            Rule::DAssign => "DAssign",
            Rule::Skip => "Skip",
            Rule::Seqn => "Seqn",
            Rule::Weak => "Weak",
            Rule::Const => "Const",
            Rule::DCond => "DCond",
            Rule::True => "True",
            Rule::DLoop => "DLoop",
            Rule::RDCond => "RDCond",
            Rule::RCond => "RCond",
            Rule::Conj => "Conj",
            Rule::Case => "Case",
            Rule::RCase => "RCase",
            Rule::Frame => "Frame",
        }
    }

    pub fn from_name(s: &str) -> Option<Rule> {
        Rule::ALL.iter().copied().find(|r| r.name().eq_ignore_ascii_case(s))
    }

    /// Rules with no premises.
    pub fn is_axiom(self) -> bool {
        matches!(self, Rule::RAssign | Rule::RSample | Rule::DAssign | Rule::Skip | Rule::True)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One rule application: the conclusion, its premises, and the frame
/// variables `T` that `Frame` needs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleApp {
    pub rule: Rule,
    pub conclusion: Triple,
    pub premises: Vec<Triple>,
    pub frame_vars: BTreeSet<Var>,
}

impl RuleApp {
    pub fn new(rule: Rule, conclusion: Triple, premises: Vec<Triple>) -> RuleApp {
        RuleApp { rule, conclusion, premises, frame_vars: BTreeSet::new() }
    }

    pub fn with_frame_vars(mut self, t: impl IntoIterator<Item = Var>) -> RuleApp {
        self.frame_vars = t.into_iter().collect();
        self
    }
}

/// Semantic obligations left after the syntactic check.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Obligations {
    pub entailments: Vec<(Assertion, Assertion)>,
    /// Assertions that must be supported; decided relative to a universe.
    pub supported: Vec<Assertion>,
}

fn schema(ok: bool, msg: impl FnOnce() -> String) -> Result<(), LogicError> {
    if ok {
        Ok(())
    } else {
        Err(LogicError::SchemaMismatch(msg()))
    }
}

fn side(ok: bool, msg: impl FnOnce() -> String) -> Result<(), LogicError> {
    if ok {
        Ok(())
    } else {
        Err(LogicError::SideConditionViolated(msg()))
    }
}

fn same(what: &str, found: &Assertion, expected: &Assertion) -> Result<(), LogicError> {
    schema(found == expected, || format!("{what} is {found}, expected {expected}"))
}

fn same_cmd(what: &str, found: &Command, expected: &Command) -> Result<(), LogicError> {
    schema(found == expected, || format!("{what} does not match the conclusion's command"))
}

fn names(vars: &BTreeSet<Var>) -> String {
    let v: Vec<&str> = vars.iter().map(|v| &*v.name).collect();
    format!("{{{}}}", v.join(", "))
}

fn flatten(c: &Command, out: &mut Vec<Command>) {
    match c {
        Command::Seq(a, b) => {
            flatten(a, out);
            flatten(b, out);
        }
        c => out.push(c.clone()),
    }
}

fn flat(c: &Command) -> Vec<Command> {
    let mut v = Vec::new();
    flatten(c, &mut v);
    v
}

fn disjoint(a: &BTreeSet<Var>, b: &BTreeSet<Var>) -> bool {
    a.is_disjoint(b)
}

/// Checks the schema and the syntactic side conditions of `app`. The
/// entailments and supportedness facts it cannot decide syntactically are
/// returned.
pub fn check_rule_app(app: &RuleApp) -> Result<Obligations, LogicError> {
    let Triple { pre, cmd, post } = &app.conclusion;
    let mut obs = Obligations::default();
    let arity = match app.rule {
        r if r.is_axiom() => 0,
        Rule::RLoop | Rule::UnifIdp | Rule::Weak | Rule::Const | Rule::DLoop | Rule::Frame => 1,
        _ => 2,
    };
    schema(app.premises.len() == arity, || format!("{} takes {arity} premises, got {}", app.rule, app.premises.len()))?;
    cmd.check_well_formed().map_err(|e| LogicError::SchemaMismatch(format!("ill-formed command: {e}")))?;
    let p = &app.premises;
    match app.rule {
        Rule::RAssign | Rule::DAssign => {
            let Command::Assign(x, e) = cmd else { return Err(LogicError::SchemaMismatch("expected an assignment".into())) };
            let want = if app.rule == Rule::RAssign { Kind::Rand } else { Kind::Det };
            schema(x.kind == want, || format!("{} assigns a {} variable, `{}` is {}", app.rule, want, x.name, x.kind))?;
            if app.rule == Rule::RAssign {
                side(post.is_atomic(), || format!("the postcondition {post} must be atomic"))?;
            }
            let expected = post.subst(&x.name, e)?;
            same("precondition", pre, &expected)?;
        }
        Rule::RSample => {
            let Command::Sample(x, s) = cmd else { return Err(LogicError::SchemaMismatch("expected a sampling".into())) };
            let Assertion::Certain(Expr::EvenPartition { var, source, body, target }) = pre else {
                return Err(LogicError::SchemaMismatch(format!("precondition {pre} is not C[ei(..)]")));
            };
            schema(**source == *s, || "the partitioned set differs from the sampled set".into())?;
            side(!body.free_vars().contains(x), || format!("the partitioning function must not mention `{}`", x.name))?;
            let expected = Assertion::uniform((**target).clone(), body.subst_local(var, &Expr::var(x)))?;
            same("postcondition", post, &expected)?;
        }
        Rule::RCondCertain => {
            let Command::If(Kind::Rand, b, c1, c2) = cmd else { return Err(LogicError::SchemaMismatch("expected a random conditional".into())) };
            let (Assertion::Certain(phi), Assertion::Certain(_)) = (pre, post) else {
                return Err(LogicError::SchemaMismatch("pre and postcondition must be single certainty facts".into()));
            };
            let bt = Expr::bin(BinOp::Ne, b.clone(), Expr::bool(false));
            let bf = Expr::eq(b.clone(), Expr::bool(false));
            same("first premise precondition", &p[0].pre, &Assertion::certain(Expr::and(phi.clone(), bt)))?;
            same("second premise precondition", &p[1].pre, &Assertion::certain(Expr::and(phi.clone(), bf)))?;
            same("first premise postcondition", &p[0].post, post)?;
            same("second premise postcondition", &p[1].post, post)?;
            same_cmd("first premise", &p[0].cmd, c1)?;
            same_cmd("second premise", &p[1].cmd, c2)?;
        }
        Rule::RLoop => {
            let Command::While(Kind::Rand, b, body) = cmd else { return Err(LogicError::SchemaMismatch("expected a random loop".into())) };
            same("premise precondition", &p[0].pre, pre)?;
            same("premise postcondition", &p[0].post, pre)?;
            same_cmd("premise", &p[0].cmd, &Command::If(Kind::Rand, b.clone(), body.clone(), Box::new(Command::Skip)))?;
            same("postcondition", post, &Assertion::and(pre.clone(), Assertion::guard_false(b)))?;
        }
        Rule::UnifIdp => {
            let Assertion::And(l, _) = pre else { return Err(LogicError::SchemaMismatch(format!("precondition {pre} is not (C[a in A] * Q) /\\ C[P]"))) };
            let Assertion::Star(ca, _) = &**l else { return Err(LogicError::SchemaMismatch(format!("precondition {pre} is not (C[a in A] * Q) /\\ C[P]"))) };
            let (Assertion::Certain(Expr::Binary(BinOp::In, a, _)), Assertion::And(_, cp)) = (&**ca, pre) else {
                return Err(LogicError::SchemaMismatch(format!("precondition {pre} is not (C[a in A] * Q) /\\ C[P]")));
            };
            schema(matches!(**cp, Assertion::Certain(_)), || "the last conjunct of the precondition must be C[P]".into())?;
            let Assertion::Star(da, ub) = post else { return Err(LogicError::SchemaMismatch(format!("postcondition {post} is not D[a] * U[S, b]"))) };
            same("left of the postcondition", da, &Assertion::defined((**a).clone()))?;
            let Assertion::Uniform(_, b) = &**ub else { return Err(LogicError::SchemaMismatch("right of the postcondition must be U[S, b]".into())) };
            same("premise precondition", &p[0].pre, pre)?;
            same("premise postcondition", &p[0].post, ub)?;
            same_cmd("premise", &p[0].cmd, cmd)?;
            let fa = a.free_vars();
            let mv = cmd.modified_vars();
            side(disjoint(&fa, &mv), || format!("FV(a) ∩ MV(c) = ∅ fails: {} meets {}", names(&fa), names(&mv)))?;
            let fb = b.free_vars();
            side(disjoint(&fa, &fb), || format!("b must not mention FV(a): {} meets {}", names(&fb), names(&fa)))?;
        }
        Rule::Skip => {
            schema(*cmd == Command::Skip, || "expected skip".into())?;
            same("postcondition", post, pre)?;
        }
        Rule::True => {
            same("precondition", pre, &Assertion::Top)?;
            same("postcondition", post, &Assertion::Top)?;
        }
        Rule::Seqn => {
            schema(matches!(cmd, Command::Seq(..)), || "expected a sequence".into())?;
            let mut parts = flat(&p[0].cmd);
            parts.extend(flat(&p[1].cmd));
            schema(parts == flat(cmd), || "the premises' commands do not compose to the conclusion's".into())?;
            same("first premise precondition", &p[0].pre, pre)?;
            same("second premise precondition", &p[1].pre, &p[0].post)?;
            same("second premise postcondition", &p[1].post, post)?;
        }
        Rule::Weak => {
            same_cmd("premise", &p[0].cmd, cmd)?;
            obs.entailments.push((pre.clone(), p[0].pre.clone()));
            obs.entailments.push((p[0].post.clone(), post.clone()));
        }
        Rule::Const | Rule::Frame => {
            let split = |a: &Assertion| match (app.rule, a) {
                (Rule::Const, Assertion::And(l, r)) | (Rule::Frame, Assertion::Star(l, r)) => Some(((**l).clone(), (**r).clone())),
                _ => None,
            };
            let op = if app.rule == Rule::Const { "/\\" } else { "*" };
            let ((phi, eta), (psi, eta2)) = match (split(pre), split(post)) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(LogicError::SchemaMismatch(format!("pre and postcondition must both have the form _ {op} eta"))),
            };
            same("framed assertion in the postcondition", &eta2, &eta)?;
            same("premise precondition", &p[0].pre, &phi)?;
            same("premise postcondition", &p[0].post, &psi)?;
            same_cmd("premise", &p[0].cmd, cmd)?;
            let fe = eta.free_vars();
            let mv = cmd.modified_vars();
            side(disjoint(&fe, &mv), || format!("FV(eta) ∩ MV(c) = ∅ fails: {} meets {}", names(&fe), names(&mv)))?;
            if app.rule == Rule::Frame {
                let mut allowed = app.frame_vars.clone();
                allowed.extend(cmd.read_vars());
                let fpsi = psi.free_vars();
                let mut with_wv = allowed.clone();
                with_wv.extend(cmd.write_only_vars());
                side(fpsi.is_subset(&with_wv), || format!("FV(psi) ⊆ T ∪ RV(c) ∪ WV(c) fails: {} is not within {}", names(&fpsi), names(&with_wv)))?;
                obs.entailments.push((phi, Assertion::defined_vars(&allowed)));
            }
        }
        Rule::DCond | Rule::RDCond => {
            let want = if app.rule == Rule::DCond { Kind::Det } else { Kind::Rand };
            let Command::If(k, b, c1, c2) = cmd else { return Err(LogicError::SchemaMismatch("expected a conditional".into())) };
            schema(*k == want, || format!("{} needs a {} conditional", app.rule, want))?;
            same("first premise precondition", &p[0].pre, &Assertion::and(pre.clone(), Assertion::guard_true(b)))?;
            same("second premise precondition", &p[1].pre, &Assertion::and(pre.clone(), Assertion::guard_false(b)))?;
            same("first premise postcondition", &p[0].post, post)?;
            same("second premise postcondition", &p[1].post, post)?;
            same_cmd("first premise", &p[0].cmd, c1)?;
            same_cmd("second premise", &p[1].cmd, c2)?;
            if app.rule == Rule::RDCond {
                obs.entailments.push((pre.clone(), Assertion::or(Assertion::guard_true(b), Assertion::guard_false(b))));
            }
        }
        Rule::DLoop => {
            let Command::While(Kind::Det, b, body) = cmd else { return Err(LogicError::SchemaMismatch("expected a deterministic loop".into())) };
            same("premise precondition", &p[0].pre, &Assertion::and(pre.clone(), Assertion::guard_true(b)))?;
            same("premise postcondition", &p[0].post, pre)?;
            same_cmd("premise", &p[0].cmd, body)?;
            same("postcondition", post, &Assertion::and(pre.clone(), Assertion::guard_false(b)))?;
        }
        Rule::RCond | Rule::RCase => {
            let (Assertion::Star(phi, db), Assertion::Star(psi, db2)) = (pre, post) else {
                return Err(LogicError::SchemaMismatch("pre and postcondition must have the form _ * D[b]".into()));
            };
            same("guard fact in the postcondition", db2, db)?;
            let Assertion::Certain(Expr::Binary(BinOp::Eq, b, b_)) = &**db else { return Err(LogicError::SchemaMismatch("expected D[b]".into())) };
            schema(b == b_, || "expected D[b]".into())?;
            let (c1, c2) = match (app.rule, cmd) {
                (Rule::RCond, Command::If(Kind::Rand, g, c1, c2)) => {
                    schema(g == &**b, || "the guard differs from b in D[b]".into())?;
                    ((**c1).clone(), (**c2).clone())
                }
                (Rule::RCond, _) => return Err(LogicError::SchemaMismatch("expected a random conditional".into())),
                _ => (cmd.clone(), cmd.clone()),
            };
            let (t, f) = (Assertion::guard_true(b), Assertion::guard_false(b));
            same("first premise precondition", &p[0].pre, &Assertion::star((**phi).clone(), t.clone()))?;
            same("first premise postcondition", &p[0].post, &Assertion::star((**psi).clone(), t))?;
            same("second premise precondition", &p[1].pre, &Assertion::star((**phi).clone(), f.clone()))?;
            same("second premise postcondition", &p[1].post, &Assertion::star((**psi).clone(), f))?;
            same_cmd("first premise", &p[0].cmd, &c1)?;
            same_cmd("second premise", &p[1].cmd, &c2)?;
            obs.supported.push((**psi).clone());
        }
        Rule::Conj | Rule::Case => {
            let split = |a: &Assertion| match (app.rule, a) {
                (Rule::Conj, Assertion::And(l, r)) | (Rule::Case, Assertion::Or(l, r)) => Some(((**l).clone(), (**r).clone())),
                _ => None,
            };
            let ((p1, p2), (q1, q2)) = match (split(pre), split(post)) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(LogicError::SchemaMismatch(format!("pre and postcondition must be binary {}", if app.rule == Rule::Conj { "conjunctions" } else { "disjunctions" }))),
            };
            same("first premise precondition", &p[0].pre, &p1)?;
            same("second premise precondition", &p[1].pre, &p2)?;
            same("first premise postcondition", &p[0].post, &q1)?;
            same("second premise postcondition", &p[1].post, &q2)?;
            same_cmd("first premise", &p[0].cmd, cmd)?;
            same_cmd("second premise", &p[1].cmd, cmd)?;
        }
    }
    Ok(obs)
}

/// [`check_rule_app`] followed by deciding its obligations over `u`.
/// Supportedness is only checked relative to `u`.
pub fn check_rule_app_in(app: &RuleApp, u: &Universe) -> Result<(), LogicError> {
    let obs = check_rule_app(app)?;
    for (a, b) in &obs.entailments {
        if let Some(cex) = entails(a, b, u)? {
            return Err(LogicError::SideConditionViolated(format!("{a} does not entail {b}; counterexample {cex}")));
        }
    }
    for a in &obs.supported {
        if let Support::Unsupported { reason, .. } = is_supported(a, u)? {
            return Err(LogicError::SideConditionViolated(format!("{a} is not supported: {reason}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_assertion, parse_command};

    fn u() -> Universe {
        Universe::new(2)
            .var("x", Kind::Rand, [0.into(), 1.into()])
            .var("t", Kind::Rand, [1.into()])
            .var("m", Kind::Rand, [8.into(), 16.into()])
            .var("a", Kind::Rand, [0.into()])
    }

    fn t(pre: &str, c: &str, post: &str) -> Triple {
        let k = u().kinds();
        Triple::new(parse_assertion(pre, &k).unwrap(), parse_command(c, &k).unwrap(), parse_assertion(post, &k).unwrap())
    }

    #[test]
    fn random_assignment_needs_atomic_post() {
        let app = RuleApp::new(Rule::RAssign, t("C[0 = 0] * C[0 = 0]", "x := 0", "D[x] * D[x]"), vec![]);
        assert!(matches!(check_rule_app(&app), Err(LogicError::SideConditionViolated(_))));
        let ok = RuleApp::new(Rule::RAssign, t("C[x + 1 = 2]", "x := x + 1", "C[x = 2]"), vec![]);
        assert_eq!(check_rule_app(&ok), Ok(Obligations::default()));
    }

    #[test]
    fn dynamic_sampling() {
        let app = RuleApp::new(Rule::RSample, t("C[ei(v in {1 .. m} => v % 8, {0 .. 7})]", "t :$= {1 .. m}", "U[{0 .. 7}, t % 8]"), vec![]);
        assert!(check_rule_app(&app).is_ok());
        let wrong = RuleApp::new(Rule::RSample, t("C[ei(v in {1 .. m} => v % 8, {0 .. 7})]", "t :$= {1 .. m}", "U[{0 .. 7}, t % 4]"), vec![]);
        assert!(matches!(check_rule_app(&wrong), Err(LogicError::SchemaMismatch(_))));
    }

    #[test]
    fn uniform_independence_rejects_modified_input() {
        let pre = "(C[x in {0, 1}] * top) /\\ C[true]";
        let app = RuleApp::new(Rule::UnifIdp, t(pre, "x :$= {0, 1}", "D[x] * U[{0, 1}, x]"), vec![t(pre, "x :$= {0, 1}", "U[{0, 1}, x]")]);
        let Err(LogicError::SideConditionViolated(msg)) = check_rule_app(&app) else { panic!() };
        assert!(msg.starts_with("FV(a) ∩ MV(c)"), "{msg}");
    }

    #[test]
    fn sequencing_mismatch() {
        let app = RuleApp::new(
            Rule::Seqn,
            t("C[x = 0]", "x := x + 1; x := x + 1", "C[x = 2]"),
            vec![t("C[x = 0]", "x := x + 1", "C[x = 1]"), t("C[x = 2]", "x := x + 1", "C[x = 2]")],
        );
        assert!(matches!(check_rule_app(&app), Err(LogicError::SchemaMismatch(_))));
    }

    #[test]
    fn weak_discharges_entailments() {
        let app = RuleApp::new(Rule::Weak, t("C[x = 0]", "skip", "C[x in {0, 1}]"), vec![t("C[x = 0]", "skip", "C[x = 0]")]);
        assert!(check_rule_app_in(&app, &u()).is_ok());
        let bad = RuleApp::new(Rule::Weak, t("C[x in {0, 1}]", "skip", "C[x = 0]"), vec![t("C[x = 0]", "skip", "C[x = 0]")]);
        assert!(check_rule_app_in(&bad, &u()).is_err());
    }
}
