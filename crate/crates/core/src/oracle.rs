//! A deliberately naive reference evaluator: every probabilistic choice is
//! expanded into explicit weighted paths over single memories, with no
//! distribution operations until the final tally. Used to cross-check
//! [`crate::interp::exec`].

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use crate::command::{Command, Program};
use crate::config::Config;
use crate::dist::FinDist;
use crate::error::{EvalError, ExecError};
use crate::interp::exec;
use crate::expr::{Expr, Name};
use crate::syntax::parse_program;
use crate::value::{vset, Value};

pub const DEFAULT_PATH_BUDGET: usize = 1_000_000;

#[derive(Clone)]
struct Path {
    weight: BigRational,
    mem: BTreeMap<Name, Value>,
}

struct Walker {
    fuel: u64,
    budget: usize,
    live: usize,
}

/// Final distribution over whole memories (deterministic and random
/// bindings merged), obtained by enumerating execution paths. `fuel`
/// bounds loop iterations along each path separately.
pub fn enumerate_paths(c: &Command, cfg: &Config, fuel: u64, budget: usize) -> Result<FinDist<BTreeMap<Name, Value>>, ExecError> {
    let mut w = Walker { fuel, budget, live: 0 };
    let mut out: BTreeMap<BTreeMap<Name, Value>, BigRational> = BTreeMap::new();
    for (mem, p) in cfg.memories() {
        w.live += 1;
        for path in w.run(c, Path { weight: p.ratio().clone(), mem })? {
            *out.entry(path.mem).or_insert_with(|| BigRational::from_integer(BigInt::from(0))) += path.weight;
        }
    }
    Ok(FinDist::from_weights(out).expect("at least one path"))
}

/// The same view of an interpreter result, for comparison.
pub fn flatten(cfg: &Config) -> FinDist<BTreeMap<Name, Value>> {
    FinDist::from_probs(cfg.memories()).expect("configuration is normalized")
}

/// Runs `program` through both evaluators. `Ok(true)` when they produce
/// the same distribution over memories; an error from either side is
/// returned only if the other side fails too.
pub fn cross_check(program: &Program, fuel: u64, budget: usize) -> Result<bool, ExecError> {
    let init = program.initial_config();
    let fast = exec(program.body(), &init, fuel);
    let slow = enumerate_paths(program.body(), &init, fuel, budget);
    match (fast, slow) {
        (Ok(a), Ok(b)) => Ok(flatten(&a) == b),
        (Err(e), Err(_)) => Err(e),
        _ => Ok(false),
    }
}

/// Source of a small random program: at most four variables over
/// `{0, 1, 2}` (loop counters included), at most two loops, each loop
/// bounded by its own counter.
pub fn random_source(rng: &mut impl Rng) -> String {
    let loops = rng.gen_range(0..=2);
    let data = ["x", "y", "z"][..rng.gen_range(2..=(4 - loops).min(3))].to_vec();
    let mut g = Gen { rng, data, counters: (0..loops).map(|i| format!("l{i}")).collect(), next_loop: 0 };
    let mut body = Vec::new();
    for _ in 0..g.rng.gen_range(2..=4) {
        body.push(g.cmd(2));
    }
    while g.next_loop < g.counters.len() {
        body.push(g.loop_(1));
    }
    let mut src = String::new();
    for v in g.data.iter().map(|d| d.to_string()).chain(g.counters.iter().cloned()) {
        src += &format!("var {v} := 0;\n");
    }
    src + &body.join(";\n")
}

pub fn random_program(rng: &mut impl Rng) -> Program {
    let src = random_source(rng);
    parse_program(&src).unwrap_or_else(|e| panic!("generated program does not parse: {e}\n{src}"))
}

struct Gen<'a, R> {
    rng: &'a mut R,
    data: Vec<&'static str>,
    counters: Vec<String>,
    next_loop: usize,
}

impl<R: Rng> Gen<'_, R> {
    fn var(&mut self) -> &'static str {
        self.data[self.rng.gen_range(0..self.data.len())]
    }

    fn expr(&mut self, depth: u32) -> String {
        match if depth == 0 { self.rng.gen_range(0..2) } else { self.rng.gen_range(0..4) } {
            0 => self.var().to_string(),
            1 => self.rng.gen_range(0..3).to_string(),
            2 => format!("({} + {}) % 3", self.expr(depth - 1), self.expr(depth - 1)),
            _ => format!("({} * {}) % 3", self.expr(depth - 1), self.expr(depth - 1)),
        }
    }

    fn guard(&mut self) -> String {
        let op = ["=", "!=", "<"][self.rng.gen_range(0..3)];
        format!("{} {op} {}", self.expr(1), self.expr(1))
    }

    fn loop_(&mut self, depth: u32) -> String {
        let l = self.counters[self.next_loop].clone();
        self.next_loop += 1;
        let bound = self.rng.gen_range(1..=3);
        let inner = self.cmd(depth.saturating_sub(1));
        format!("{l} := 0;\nwhile {l} < {bound} {{\n{inner};\n{l} := {l} + 1\n}}")
    }

    fn cmd(&mut self, depth: u32) -> String {
        let pick = if depth == 0 { self.rng.gen_range(0..3) } else { self.rng.gen_range(0..6) };
        match pick {
            0 => {
                let x = self.var();
                format!("{x} := {}", self.expr(2))
            }
            1 => {
                let x = self.var();
                let set = match self.rng.gen_range(0..3) {
                    0 => "{0, 1}".to_string(),
                    1 => "{0 .. 2}".to_string(),
                    _ => {
                        let e = self.expr(1);
                        format!("{{{e}, ({e} + 1) % 3}}")
                    }
                };
                format!("{x} :$= {set}")
            }
            2 => "skip".into(),
            3 => format!("if {} {{\n{}\n}} else {{\n{}\n}}", self.guard(), self.cmd(depth - 1), self.cmd(depth - 1)),
            4 if self.next_loop < self.counters.len() => self.loop_(depth),
            _ => format!("{};\n{}", self.cmd(depth - 1), self.cmd(depth - 1)),
        }
    }
}

impl Walker {
    fn grow(&mut self, extra: usize) -> Result<(), ExecError> {
        self.live += extra;
        if self.live > self.budget {
            Err(ExecError::PathExplosion(self.budget))
        } else {
            Ok(())
        }
    }

    fn eval(e: &Expr, mem: &BTreeMap<Name, Value>) -> Result<Value, EvalError> {
        e.eval(mem)
    }

    fn run(&mut self, c: &Command, p: Path) -> Result<Vec<Path>, ExecError> {
        match c {
            Command::Skip => Ok(vec![p]),
            Command::Assign(x, e) => {
                let v = Self::eval(e, &p.mem)?;
                let mut p = p;
                p.mem.insert(x.name.clone(), v);
                Ok(vec![p])
            }
            Command::Sample(x, e) => {
                let choices = vset(&Self::eval(e, &p.mem)?)?;
                let n = BigInt::from(choices.len());
                self.grow(choices.len() - 1)?;
                Ok(choices
                    .into_iter()
                    .map(|v| {
                        let mut q = p.clone();
                        q.weight = &q.weight / &n;
                        q.mem.insert(x.name.clone(), v);
                        q
                    })
                    .collect())
            }
            Command::Seq(a, b) => {
                let mut out = Vec::new();
                for q in self.run(a, p)? {
                    out.extend(self.run(b, q)?);
                }
                Ok(out)
            }
            Command::If(_, b, c1, c2) => {
                if Self::eval(b, &p.mem)? != Value::Bool(false) {
                    self.run(c1, p)
                } else {
                    self.run(c2, p)
                }
            }
            Command::While(_, b, body) => {
                let mut finished = Vec::new();
                let mut pending = vec![(p, 0u64)];
                while let Some((q, n)) = pending.pop() {
                    if Self::eval(b, &q.mem)? == Value::Bool(false) {
                        finished.push(q);
                        continue;
                    }
                    if n >= self.fuel {
                        return Err(ExecError::FuelExhausted(self.fuel));
                    }
                    for r in self.run(body, q)? {
                        pending.push((r, n + 1));
                    }
                }
                Ok(finished)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::MemDist;
    use crate::expr::Var;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_programs_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let src = random_source(&mut rng);
            let p = crate::syntax::parse_program(&src).unwrap();
            assert_eq!(cross_check(&p, 50, DEFAULT_PATH_BUDGET), Ok(true), "{src}");
        }
    }

    #[test]
    fn skip_is_identity() {
        let cfg = Config::new(BTreeMap::from([(Name::from("d"), Value::Int(3))]), MemDist::point(BTreeMap::from([(Name::from("x"), Value::Int(1))])));
        assert_eq!(enumerate_paths(&Command::Skip, &cfg, 1, 10).unwrap(), flatten(&cfg));
    }

    #[test]
    fn agrees_on_nested_sampling() {
        let (x, y) = (Var::rand("x"), Var::rand("y"));
        let c = Command::seq([
            Command::sample(&x, Expr::Const(Value::int_set([1, 2, 3]))),
            Command::sample(&y, Expr::range(Expr::int(1), Expr::var(&x))),
        ]);
        let cfg = Config::new(BTreeMap::new(), MemDist::point(BTreeMap::from([(Name::from("x"), Value::Int(0)), (Name::from("y"), Value::Int(0))])));
        assert_eq!(enumerate_paths(&c, &cfg, 1, 100).unwrap(), flatten(&exec(&c, &cfg, 1).unwrap()));
    }

    #[test]
    fn path_budget_is_enforced() {
        let x = Var::rand("x");
        let c = Command::seq([
            Command::sample(&x, Expr::range(Expr::int(0), Expr::int(9))),
            Command::sample(&x, Expr::range(Expr::int(0), Expr::int(9))),
        ]);
        let cfg = Config::new(BTreeMap::new(), MemDist::point(BTreeMap::from([(Name::from("x"), Value::Int(0))])));
        assert_eq!(enumerate_paths(&c, &cfg, 1, 50), Err(ExecError::PathExplosion(50)));
    }
}
