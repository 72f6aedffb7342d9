//! Finite universes that bound the quantifiers of the logic, and the
//! enumeration of partial and total configurations over them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::config::Config;
use crate::dist::{FinDist, MemDist};
use crate::error::AssertError;
use crate::expr::{Kind, Name, Var};
use crate::value::Value;

pub const DEFAULT_BUDGET: u128 = 5_000_000;

/// Candidate values per variable plus a denominator bound: enumerated
/// distributions give every memory a probability that is a multiple of
/// `1/denom`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Universe {
    vars: BTreeMap<Name, (Kind, Vec<Value>)>,
    denom: u32,
    budget: u128,
}

impl Universe {
    pub fn new(denom: u32) -> Universe {
        assert!(denom > 0, "denominator bound must be positive");
        Universe { vars: BTreeMap::new(), denom, budget: DEFAULT_BUDGET }
    }

    /// Adds a variable; its candidate set must be non-empty.
    pub fn var(mut self, name: &str, kind: Kind, values: impl IntoIterator<Item = Value>) -> Universe {
        let vals: BTreeSet<Value> = values.into_iter().collect();
        assert!(!vals.is_empty(), "universe variable `{name}` needs at least one candidate value");
        self.vars.insert(Name::from(name), (kind, vals.into_iter().collect()));
        self
    }

    pub fn with_budget(mut self, budget: u128) -> Universe {
        self.budget = budget;
        self
    }

    pub fn with_denom(mut self, denom: u32) -> Universe {
        assert!(denom > 0, "denominator bound must be positive");
        self.denom = denom;
        self
    }

    pub fn denom(&self) -> u32 {
        self.denom
    }

    pub fn budget(&self) -> u128 {
        self.budget
    }

    pub fn names(&self) -> impl Iterator<Item = &Name> {
        self.vars.keys()
    }

    pub fn kind(&self, name: &str) -> Option<Kind> {
        self.vars.get(name).map(|(k, _)| *k)
    }

    pub fn values(&self, name: &str) -> Option<&[Value]> {
        self.vars.get(name).map(|(_, v)| v.as_slice())
    }

    pub fn lookup(&self, name: &str) -> Option<Var> {
        self.vars.get_key_value(name).map(|(n, (k, _))| Var { name: n.clone(), kind: *k })
    }

    pub fn kinds(&self) -> BTreeMap<Name, Kind> {
        self.vars.iter().map(|(n, (k, _))| (n.clone(), *k)).collect()
    }

    fn names_of(&self, kind: Kind) -> Vec<Name> {
        self.vars.iter().filter(|(_, (k, _))| *k == kind).map(|(n, _)| n.clone()).collect()
    }

    /// Fails with `UniverseTooSmall` if some name has no candidate set.
    pub fn require<'a>(&self, names: impl IntoIterator<Item = &'a Name>) -> Result<(), AssertError> {
        let missing: Vec<&str> = names.into_iter().filter(|n| !self.vars.contains_key(*n)).map(|n| &**n).collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(AssertError::UniverseTooSmall(format!("no candidate values for {}", missing.join(", "))))
        }
    }

    fn check_budget(&self, needed: u128) -> Result<(), AssertError> {
        if needed > self.budget {
            Err(AssertError::EnumerationBudgetExceeded { needed, budget: self.budget })
        } else {
            Ok(())
        }
    }

    fn cells(&self, vars: &[Name]) -> Vec<Vec<Value>> {
        let mut rows = vec![Vec::new()];
        for v in vars {
            let vals = &self.vars[v].1;
            rows = rows.into_iter().flat_map(|r| vals.iter().map(move |x| [r.clone(), vec![x.clone()]].concat())).collect();
        }
        rows
    }

    fn count_distributions(&self, vars: &[Name]) -> u128 {
        let cells: u128 = vars.iter().map(|v| self.vars[v].1.len() as u128).product();
        binomial(self.denom as u128 + cells - 1, cells - 1)
    }

    /// Every distribution over memories on `vars` (sorted) whose
    /// probabilities are multiples of `1/denom`.
    pub(crate) fn distributions(&self, vars: &[Name]) -> Result<Vec<MemDist>, AssertError> {
        self.check_budget(self.count_distributions(vars))?;
        Ok(dists_over(&self.cells(vars), self.denom).into_iter().map(|d| MemDist::from_rows(vars.to_vec(), d)).collect())
    }

    /// Deterministic memories over subsets of `vars` (when `partial`) or
    /// over all of them, with every candidate value.
    pub(crate) fn det_memories(&self, vars: &[Name], partial: bool, fixed: &BTreeMap<Name, Value>) -> Vec<BTreeMap<Name, Value>> {
        let mut out = vec![BTreeMap::new()];
        for v in vars {
            let mut next = Vec::new();
            for m in &out {
                if partial {
                    next.push(m.clone());
                }
                let choices: Vec<&Value> = match fixed.get(v) {
                    Some(x) => vec![x],
                    None => self.vars[v].1.iter().collect(),
                };
                for x in choices {
                    let mut m2 = m.clone();
                    m2.insert(v.clone(), x.clone());
                    next.push(m2);
                }
            }
            out = next;
        }
        out
    }

    /// Visits every partial configuration whose domain is a subset of
    /// `names`, stopping at the first one for which `f` returns true.
    pub(crate) fn find_partial(
        &self,
        names: &BTreeSet<Name>,
        mut f: impl FnMut(&Config) -> Result<bool, AssertError>,
    ) -> Result<Option<Config>, AssertError> {
        self.require(names)?;
        let det: Vec<Name> = names.iter().filter(|n| self.kind(n) == Some(Kind::Det)).cloned().collect();
        let rand: Vec<Name> = names.iter().filter(|n| self.kind(n) == Some(Kind::Rand)).cloned().collect();
        let sigmas = self.det_memories(&det, true, &BTreeMap::new());
        let subsets = subsets(&rand);
        let total: u128 = subsets.iter().map(|s| self.count_distributions(s)).sum::<u128>() * sigmas.len() as u128;
        self.check_budget(total)?;
        for sub in &subsets {
            let dists = self.distributions(sub)?;
            for sigma in &sigmas {
                for mu in &dists {
                    let cfg = Config::new(sigma.clone(), mu.clone());
                    if f(&cfg)? {
                        return Ok(Some(cfg));
                    }
                }
            }
        }
        Ok(None)
    }

    /// Number of total configurations `find_total` would visit.
    pub fn count_total(&self) -> u128 {
        let det = self.names_of(Kind::Det);
        let sigmas: u128 = det.iter().map(|v| self.vars[v].1.len() as u128).product();
        sigmas * self.count_distributions(&self.names_of(Kind::Rand))
    }

    /// Visits every total configuration: all deterministic variables bound,
    /// random part a distribution over every random variable.
    pub fn find_total(&self, mut f: impl FnMut(&Config) -> Result<bool, AssertError>) -> Result<Option<Config>, AssertError> {
        self.check_budget(self.count_total())?;
        let det = self.names_of(Kind::Det);
        let rand = self.names_of(Kind::Rand);
        let dists = self.distributions(&rand)?;
        for sigma in self.det_memories(&det, false, &BTreeMap::new()) {
            for mu in &dists {
                let cfg = Config::new(sigma.clone(), mu.clone());
                if f(&cfg)? {
                    return Ok(Some(cfg));
                }
            }
        }
        Ok(None)
    }

    /// Parses `x:rand={0,1}; d:det={0 .. 2}; denom=4; budget=100000`.
    pub fn parse(src: &str) -> Result<Universe, String> {
        let mut vars = Vec::new();
        let mut denom = None;
        let mut budget = None;
        for part in src.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (lhs, rhs) = part.split_once('=').ok_or_else(|| format!("expected `name:kind=set` or `denom=N`, found `{part}`"))?;
            let lhs = lhs.trim();
            match lhs {
                "denom" => denom = Some(rhs.trim().parse::<u32>().map_err(|e| format!("bad denominator: {e}"))?),
                "budget" => budget = Some(rhs.trim().parse::<u128>().map_err(|e| format!("bad budget: {e}"))?),
                _ => {
                    let (name, kind) = lhs.split_once(':').ok_or_else(|| format!("missing kind in `{lhs}`"))?;
                    let kind = match kind.trim() {
                        "det" => Kind::Det,
                        "rand" => Kind::Rand,
                        other => return Err(format!("unknown kind `{other}`")),
                    };
                    let set = crate::syntax::parse_value(rhs).map_err(|e| e.to_string())?;
                    let vals = set.elements().map_err(|e| format!("candidates of `{name}`: {e}"))?;
                    if vals.is_empty() {
                        return Err(format!("candidate set of `{}` is empty", name.trim()));
                    }
                    vars.push((name.trim().to_string(), kind, vals));
                }
            }
        }
        let mut u = Universe::new(denom.unwrap_or(1));
        if let Some(b) = budget {
            u = u.with_budget(b);
        }
        for (n, k, vals) in vars {
            u = u.var(&n, k, vals);
        }
        if denom == Some(0) {
            return Err("denominator bound must be positive".into());
        }
        Ok(u)
    }
}

impl fmt::Display for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, (k, vals)) in &self.vars {
            write!(f, "{n}:{k}={}; ", Value::Set(vals.iter().cloned().collect()))?;
        }
        write!(f, "denom={}", self.denom)
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}

/// All subsets of `items`, each kept in the original order.
pub(crate) fn subsets<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    (0u32..1 << items.len()).map(|mask| items.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, x)| x.clone()).collect()).collect()
}

/// Weak compositions of `n` into `k` parts, in lexicographically
/// decreasing order of the first part.
pub fn compositions(n: u32, k: usize) -> Vec<Vec<u32>> {
    if k == 0 {
        return if n == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    let mut cur = vec![0; k];
    cur[0] = n;
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k - 1).rev().find(|&i| cur[i] > 0) else { break };
        cur[i] -= 1;
        let t = cur[k - 1];
        cur[k - 1] = 0;
        cur[i + 1] = t + 1;
    }
    out
}

/// Distributions over `cells` with probabilities in multiples of `1/denom`.
pub(crate) fn dists_over<T: Ord + Clone>(cells: &[T], denom: u32) -> Vec<FinDist<T>> {
    let n = BigInt::from(denom);
    compositions(denom, cells.len())
        .into_iter()
        .map(|c| {
            FinDist::from_weights(
                cells.iter().zip(c).filter(|(_, w)| *w > 0).map(|(x, w)| (x.clone(), BigRational::new(BigInt::from(w), n.clone()))),
            )
            .expect("composition has positive total")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_counts_match_binomials() {
        for n in 0..6u32 {
            for k in 1..5usize {
                assert_eq!(compositions(n, k).len() as u128, binomial(n as u128 + k as u128 - 1, k as u128 - 1), "n={n} k={k}");
            }
        }
        assert!(compositions(3, 3).iter().all(|c| c.iter().sum::<u32>() == 3));
    }

    #[test]
    fn parse_round_trip() {
        let u = Universe::parse("x:rand={0,1}; d:det={0 .. 2}; denom=4").unwrap();
        assert_eq!(u.values("d").unwrap().len(), 3);
        assert_eq!(u.kind("x"), Some(Kind::Rand));
        assert_eq!(Universe::parse(&u.to_string()).unwrap(), u);
    }

    #[test]
    fn partial_enumeration_counts() {
        let u = Universe::new(2).var("x", Kind::Rand, [0.into(), 1.into()]).var("d", Kind::Det, [0.into()]);
        let mut n = 0;
        let names: BTreeSet<Name> = u.names().cloned().collect();
        u.find_partial(&names, |_| {
            n += 1;
            Ok(false)
        })
        .unwrap();
        // sigma: absent or d=0; mu: empty, or 3 distributions over x.
        assert_eq!(n, 2 * (1 + 3));
    }

    #[test]
    fn budget_is_enforced() {
        let u = Universe::new(12).var("x", Kind::Rand, (0..9).map(Value::Int)).with_budget(10);
        assert_eq!(u.count_total(), 125970);
        assert!(matches!(u.find_total(|_| Ok(false)), Err(AssertError::EnumerationBudgetExceeded { .. })));
    }
}
