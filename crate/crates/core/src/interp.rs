//! Exact configuration-transformer semantics.

use crate::command::{Command, Program};
use crate::config::Config;
use crate::dist::{Builder, FinDist, Prob};
use crate::error::{DistError, ExecError};
use crate::expr::{Expr, Kind, Var};
use crate::value::{vset, Value};

pub const DEFAULT_FUEL: u64 = 10_000;

/// Loop-unfolding budget shared by one execution.
#[derive(Clone, Debug)]
pub struct Fuel {
    limit: u64,
    used: u64,
}

impl Fuel {
    pub fn new(limit: u64) -> Fuel {
        Fuel { limit, used: 0 }
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    fn tick(&mut self) -> Result<(), ExecError> {
        if self.used >= self.limit {
            return Err(ExecError::FuelExhausted(self.limit));
        }
        self.used += 1;
        Ok(())
    }
}

/// Runs `c` from `cfg` with a fresh budget of `fuel` unfoldings.
pub fn exec(c: &Command, cfg: &Config, fuel: u64) -> Result<Config, ExecError> {
    exec_with(c, cfg, &mut Fuel::new(fuel))
}

/// Runs a program from its initial configuration.
pub fn run(p: &Program, fuel: u64) -> Result<Config, ExecError> {
    exec(p.body(), &p.initial_config(), fuel)
}

pub fn exec_with(c: &Command, cfg: &Config, fuel: &mut Fuel) -> Result<Config, ExecError> {
    match c {
        Command::Skip => Ok(cfg.clone()),
        Command::Assign(x, e) if x.kind == Kind::Det => {
            let v = cfg.eval_det(e)?;
            let mut out = cfg.clone();
            out.sigma.insert(x.name.clone(), v);
            Ok(out)
        }
        Command::Assign(x, e) => {
            let i = slot(cfg, x)?;
            let mu = cfg.mu.try_map_rows(|row| -> Result<_, ExecError> {
                let v = cfg.eval_row(e, row)?;
                let mut row = row.clone();
                row[i] = v;
                Ok(row)
            })?;
            Ok(Config { sigma: cfg.sigma.clone(), mu })
        }
        Command::Sample(x, e) => {
            let i = slot(cfg, x)?;
            let mu = cfg.mu.try_bind_rows(|row| -> Result<_, ExecError> {
                let choices = vset(&cfg.eval_row(e, row)?)?;
                let rows = choices.into_iter().map(|v| {
                    let mut r = row.clone();
                    r[i] = v;
                    r
                });
                Ok(FinDist::uniform(rows)?)
            })?;
            Ok(Config { sigma: cfg.sigma.clone(), mu })
        }
        Command::Seq(a, b) => exec_with(b, &exec_with(a, cfg, fuel)?, fuel),
        Command::If(Kind::Det, b, c1, c2) => {
            if cfg.eval_det(b)?.is_truthy() {
                exec_with(c1, cfg, fuel)
            } else {
                exec_with(c2, cfg, fuel)
            }
        }
        Command::If(Kind::Rand, b, c1, c2) => {
            let (t, f, p) = split(cfg, b)?;
            let out1 = t.map(|t| exec_with(c1, &t, fuel)).transpose()?;
            let out2 = f.map(|f| exec_with(c2, &f, fuel)).transpose()?;
            let sigma = same_sigma(cfg, out1.as_ref(), out2.as_ref())?;
            let mu = FinDist::convex(out1.as_ref().map(|c| c.mu.rows()), out2.as_ref().map(|c| c.mu.rows()), &p)?;
            Ok(Config { sigma, mu: cfg.mu.with_rows(mu) })
        }
        Command::While(Kind::Det, b, body) => {
            let mut cur = cfg.clone();
            while cur.eval_det(b)?.is_truthy() {
                fuel.tick()?;
                cur = exec_with(body, &cur, fuel)?;
            }
            Ok(cur)
        }
        Command::While(Kind::Rand, b, body) => {
            // Iterated splitting: `mass` is the absolute probability of the
            // part still looping; exited parts accumulate in `done`.
            let mut done = Builder::default();
            let mut mass = Prob::one();
            let mut cur = cfg.clone();
            loop {
                let (t, f, p) = split(&cur, b)?;
                if let Some(f) = f {
                    let w = &mass * &p.complement();
                    for (row, q) in f.mu.rows().iter() {
                        done.add(row.clone(), &(w.ratio() * q));
                    }
                }
                let Some(t) = t else { break };
                fuel.tick()?;
                cur = exec_with(body, &t, fuel)?;
                if cur.sigma != cfg.sigma {
                    return Err(ExecError::IllFormed("random loop body changed a deterministic variable".into()));
                }
                mass = &mass * &p;
            }
            let mu = done.finish().ok_or(DistError::ZeroMassCondition)?;
            Ok(Config { sigma: cfg.sigma.clone(), mu: cfg.mu.with_rows(mu) })
        }
    }
}

fn slot(cfg: &Config, x: &Var) -> Result<usize, ExecError> {
    cfg.mu.position(&x.name).ok_or_else(|| ExecError::IllFormed(format!("random variable `{}` is not in the configuration", x.name)))
}

/// Splits on the guard: conditioned true part, conditioned false part, and
/// the probability of the true part. A side of mass zero is `None`.
fn split(cfg: &Config, b: &Expr) -> Result<(Option<Config>, Option<Config>, Prob), ExecError> {
    let mut truth = std::collections::BTreeMap::new();
    for row in cfg.mu.rows().support() {
        truth.insert(row.clone(), cfg.eval_row(b, row)?.is_truthy());
    }
    let p = cfg.mu.rows().mass(|r| truth[r]);
    let part = |want: bool| -> Result<Option<Config>, DistError> {
        if (want && p.is_zero()) || (!want && p.is_one()) {
            return Ok(None);
        }
        let rows = cfg.mu.rows().condition(|r| truth[r] == want)?;
        Ok(Some(Config { sigma: cfg.sigma.clone(), mu: cfg.mu.with_rows(rows) }))
    };
    Ok((part(true)?, part(false)?, p))
}

fn same_sigma(
    cfg: &Config,
    a: Option<&Config>,
    b: Option<&Config>,
) -> Result<std::collections::BTreeMap<crate::expr::Name, Value>, ExecError> {
    for c in [a, b].into_iter().flatten() {
        if c.sigma != cfg.sigma {
            return Err(ExecError::IllFormed("random conditional branch changed a deterministic variable".into()));
        }
    }
    Ok(cfg.sigma.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::MemDist;
    use crate::expr::{BinOp, Name};
    use std::collections::BTreeMap;

    fn rand_cfg(vars: &[&str]) -> Config {
        let mem: BTreeMap<Name, Value> = vars.iter().map(|v| (Name::from(*v), Value::Int(0))).collect();
        Config::new(BTreeMap::new(), MemDist::point(mem))
    }

    #[test]
    fn skip_is_identity() {
        let cfg = rand_cfg(&["x"]);
        assert_eq!(exec(&Command::Skip, &cfg, 10).unwrap(), cfg);
    }

    #[test]
    fn sample_gives_uniform() {
        let t = Var::rand("t");
        let out = exec(&Command::sample(&t, Expr::range(Expr::int(0), Expr::int(7))), &rand_cfg(&["t"]), 10).unwrap();
        assert!(out.pushforward(&Expr::var(&t)).unwrap().is_uniform_over(&(0..8).map(Value::Int).collect()));
    }

    #[test]
    fn random_conditional_couples_branches() {
        let (b, y) = (Var::rand("b"), Var::rand("y"));
        let c = Command::seq([
            Command::sample(&b, Expr::Const(Value::int_set([0, 1]))),
            Command::if_(Expr::eq(Expr::var(&b), Expr::int(1)), Command::assign(&y, Expr::int(1)), Command::assign(&y, Expr::int(2))),
        ]);
        let out = exec(&c, &rand_cfg(&["b", "y"]), 10).unwrap();
        let half = Prob::new(1, 2);
        let joint = out.pushforward(&Expr::tuple(vec![Expr::var(&b), Expr::var(&y)])).unwrap();
        assert_eq!(joint.len(), 2);
        assert_eq!(joint.prob(&Value::tuple([1.into(), 1.into()])), half);
        assert_eq!(joint.prob(&Value::tuple([0.into(), 2.into()])), half);
    }

    #[test]
    fn random_loop_terminates_on_zero_mass() {
        // Geometric-style loop with bounded support: keep flipping until 1 or
        // three tries. Final tries distribution is 1/2, 1/4, 1/4.
        let (x, k) = (Var::rand("x"), Var::rand("k"));
        let c = Command::while_(
            Expr::and(Expr::eq(Expr::var(&x), Expr::int(0)), Expr::bin(BinOp::Lt, Expr::var(&k), Expr::int(3))),
            Command::seq([
                Command::sample(&x, Expr::Const(Value::int_set([0, 1]))),
                Command::assign(&k, Expr::add(Expr::var(&k), Expr::int(1))),
            ]),
        );
        let out = exec(&c, &rand_cfg(&["k", "x"]), 10).unwrap();
        let dk = out.pushforward(&Expr::var(&k)).unwrap();
        assert_eq!(dk.prob(&1.into()), Prob::new(1, 2));
        assert_eq!(dk.prob(&2.into()), Prob::new(1, 4));
        assert_eq!(dk.prob(&3.into()), Prob::new(1, 4));
    }

    #[test]
    fn fuel_exhaustion_is_an_error() {
        let i = Var::det("i");
        let c = Command::while_(Expr::bool(true), Command::assign(&i, Expr::int(0)));
        let cfg = Config::new(BTreeMap::from([(Name::from("i"), Value::Int(0))]), MemDist::empty());
        assert_eq!(exec(&c, &cfg, 5), Err(ExecError::FuelExhausted(5)));
    }

    #[test]
    fn certain_guard_runs_only_then_branch() {
        // The else branch would divide by zero if it were evaluated.
        let x = Var::rand("x");
        let c = Command::if_(
            Expr::eq(Expr::var(&x), Expr::int(0)),
            Command::assign(&x, Expr::int(5)),
            Command::assign(&x, Expr::bin(BinOp::Div, Expr::int(1), Expr::int(0))),
        );
        let out = exec(&c, &rand_cfg(&["x"]), 1).unwrap();
        assert_eq!(out.pushforward(&Expr::var(&x)).unwrap(), FinDist::unit(Value::Int(5)));
    }
}
