//! Configurations: a deterministic memory paired with a distribution over
//! random memories. Total configurations are what the interpreter runs on;
//! partial ones (smaller domains) are what assertions are evaluated against.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::dist::{FinDist, MemDist};
use crate::error::{DistError, EvalError};
use crate::expr::{EmptyEnv, Expr, Layered, Name, RowEnv};
use crate::value::Value;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Config {
    pub sigma: BTreeMap<Name, Value>,
    pub mu: MemDist,
}

impl Config {
    pub fn new(sigma: BTreeMap<Name, Value>, mu: MemDist) -> Config {
        Config { sigma, mu }
    }

    /// The unit of the resource monoid: empty memory, point mass on the
    /// empty random memory.
    pub fn empty() -> Config {
        Config { sigma: BTreeMap::new(), mu: MemDist::empty() }
    }

    pub fn det_domain(&self) -> BTreeSet<Name> {
        self.sigma.keys().cloned().collect()
    }

    pub fn rand_domain(&self) -> BTreeSet<Name> {
        self.mu.domain()
    }

    /// Whether `name` is bound in either memory.
    pub fn binds(&self, name: &str) -> bool {
        self.sigma.contains_key(name) || self.mu.contains(name)
    }

    pub fn eval_det(&self, e: &Expr) -> Result<Value, EvalError> {
        e.eval(&Layered(&self.sigma, &EmptyEnv))
    }

    /// Evaluates `e` on one row of the random memory.
    pub fn eval_row(&self, e: &Expr, row: &[Value]) -> Result<Value, EvalError> {
        e.eval(&Layered(&self.sigma, &RowEnv { vars: self.mu.vars(), row }))
    }

    /// Distribution of `e` under `mu` (the pushforward).
    pub fn pushforward(&self, e: &Expr) -> Result<FinDist<Value>, EvalError> {
        self.mu.rows().try_map(|row| self.eval_row(e, row))
    }

    /// Restriction of both memories to `names` (names outside the domain
    /// are ignored).
    pub fn restrict(&self, names: &BTreeSet<Name>) -> Config {
        let sigma = self.sigma.iter().filter(|(n, _)| names.contains(*n)).map(|(n, v)| (n.clone(), v.clone())).collect();
        let keep: Vec<&str> = self.mu.vars().iter().filter(|n| names.contains(*n)).map(|n| &**n).collect();
        let mu = self.mu.project(keep).expect("projection onto own domain");
        Config { sigma, mu }
    }

    /// Marginal of the random part on `names`.
    pub fn marginal(&self, names: &[&str]) -> Result<MemDist, DistError> {
        self.mu.project(names.iter().copied())
    }

    /// All bindings of both memories for each support row, with its mass.
    pub fn memories(&self) -> impl Iterator<Item = (BTreeMap<Name, Value>, crate::dist::Prob)> + '_ {
        self.mu.memories().map(|(mut m, p)| {
            m.extend(self.sigma.iter().map(|(n, v)| (n.clone(), v.clone())));
            (m, p)
        })
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("sigma = {")?;
        for (i, (n, v)) in self.sigma.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{n}={v}")?;
        }
        write!(f, "}}, mu = {}", self.mu)
    }
}
