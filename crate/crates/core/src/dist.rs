//! Exact finite probability distributions.
//!
//! Probabilities are arbitrary-precision rationals, so uniformity and
//! independence are decided by exact equality.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::DistError;
use crate::expr::Name;
use crate::value::Value;

/// An exact probability in [0, 1], kept in reduced form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prob(BigRational);

impl Prob {
    pub fn zero() -> Prob {
        Prob(BigRational::zero())
    }

    pub fn one() -> Prob {
        Prob(BigRational::one())
    }

    /// `num / den`; panics if the ratio lies outside [0, 1] or `den` is 0.
    pub fn new(num: i64, den: i64) -> Prob {
        Prob::from_ratio(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_ratio(r: BigRational) -> Prob {
        assert!(!r.is_negative() && r <= BigRational::one(), "probability out of range: {r}");
        Prob(r)
    }

    pub fn ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn complement(&self) -> Prob {
        Prob(BigRational::one() - &self.0)
    }

    pub fn abs_diff(&self, other: &Prob) -> Prob {
        Prob((&self.0 - &other.0).abs())
    }

    pub fn half(&self) -> Prob {
        Prob(&self.0 / BigRational::from_integer(BigInt::from(2)))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Decimal rendering rounded to `places` digits.
    pub fn to_decimal(&self, places: usize) -> String {
        let scale = BigInt::from(10).pow(places as u32);
        let scaled = &self.0 * BigRational::from_integer(scale.clone());
        let rounded = (scaled + BigRational::new(BigInt::one(), BigInt::from(2))).floor().to_integer();
        let int_part = &rounded / &scale;
        let frac = &rounded % &scale;
        if places == 0 {
            return int_part.to_string();
        }
        format!("{int_part}.{:0>width$}", frac.to_string(), width = places)
    }
}

impl fmt::Display for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Add for &Prob {
    type Output = Prob;
    fn add(self, rhs: &Prob) -> Prob {
        Prob::from_ratio(&self.0 + &rhs.0)
    }
}

impl Sub for &Prob {
    type Output = Prob;
    fn sub(self, rhs: &Prob) -> Prob {
        Prob::from_ratio(&self.0 - &rhs.0)
    }
}

impl Mul for &Prob {
    type Output = Prob;
    fn mul(self, rhs: &Prob) -> Prob {
        Prob(&self.0 * &rhs.0)
    }
}

/// A finite distribution: every stored mass is positive and the masses sum
/// to exactly one. Keys are kept in canonical order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FinDist<T: Ord> {
    support: BTreeMap<T, BigRational>,
}

/// Accumulates weighted outcomes; `finish` normalizes into a distribution.
pub struct Builder<T: Ord> {
    weights: BTreeMap<T, BigRational>,
}

impl<T: Ord> Default for Builder<T> {
    fn default() -> Self {
        Builder { weights: BTreeMap::new() }
    }
}

impl<T: Ord> Builder<T> {
    pub fn add(&mut self, x: T, w: &BigRational) {
        if w.is_zero() {
            return;
        }
        match self.weights.get_mut(&x) {
            Some(acc) => *acc += w,
            None => {
                self.weights.insert(x, w.clone());
            }
        }
    }

    pub fn total(&self) -> BigRational {
        self.weights.values().fold(BigRational::zero(), |a, b| a + b)
    }

    /// Normalized distribution, or `None` if no mass was added.
    pub fn finish(self) -> Option<FinDist<T>> {
        let total = self.total();
        if total.is_zero() {
            return None;
        }
        let support = if total.is_one() {
            self.weights
        } else {
            self.weights.into_iter().map(|(k, w)| (k, w / &total)).collect()
        };
        Some(FinDist { support })
    }
}

impl<T: Ord + Clone> FinDist<T> {
    pub fn unit(x: T) -> FinDist<T> {
        FinDist { support: BTreeMap::from([(x, BigRational::one())]) }
    }

    pub fn uniform(items: impl IntoIterator<Item = T>) -> Result<FinDist<T>, DistError> {
        let set: BTreeSet<T> = items.into_iter().collect();
        if set.is_empty() {
            return Err(DistError::EmptySet);
        }
        let w = BigRational::new(BigInt::one(), BigInt::from(set.len()));
        Ok(FinDist { support: set.into_iter().map(|x| (x, w.clone())).collect() })
    }

    /// Builds a distribution from positive weights, normalizing them.
    pub fn from_weights(items: impl IntoIterator<Item = (T, BigRational)>) -> Option<FinDist<T>> {
        let mut b = Builder::default();
        for (x, w) in items {
            assert!(!w.is_negative(), "negative weight");
            b.add(x, &w);
        }
        b.finish()
    }

    /// Builds from exact probabilities that must already sum to one.
    pub fn from_probs(items: impl IntoIterator<Item = (T, Prob)>) -> Result<FinDist<T>, DistError> {
        let mut b = Builder::default();
        for (x, p) in items {
            b.add(x, &p.0);
        }
        if !b.total().is_one() {
            return Err(DistError::DomainMismatch("probabilities do not sum to one".into()));
        }
        Ok(b.finish().expect("positive total"))
    }

    pub fn prob(&self, x: &T) -> Prob {
        self.support.get(x).cloned().map(Prob).unwrap_or_else(Prob::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&T, &BigRational)> {
        self.support.iter()
    }

    pub fn iter_probs(&self) -> impl Iterator<Item = (&T, Prob)> {
        self.support.iter().map(|(k, w)| (k, Prob(w.clone())))
    }

    pub fn support(&self) -> impl Iterator<Item = &T> {
        self.support.keys()
    }

    pub fn support_set(&self) -> BTreeSet<T> {
        self.support.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// The single outcome of a point mass.
    pub fn as_point(&self) -> Option<&T> {
        match self.support.len() {
            1 => self.support.keys().next(),
            _ => None,
        }
    }

    pub fn is_uniform_over(&self, set: &BTreeSet<T>) -> bool {
        if set.len() != self.support.len() {
            return false;
        }
        let w = BigRational::new(BigInt::one(), BigInt::from(set.len()));
        set.iter().all(|x| self.support.get(x) == Some(&w))
    }

    pub fn bind<U: Ord + Clone>(&self, mut f: impl FnMut(&T) -> FinDist<U>) -> FinDist<U> {
        let mut b = Builder::default();
        for (x, w) in &self.support {
            for (y, v) in f(x).support {
                b.add(y, &(w * v));
            }
        }
        b.finish().expect("bind preserves total mass")
    }

    pub fn try_bind<U: Ord + Clone, E>(&self, mut f: impl FnMut(&T) -> Result<FinDist<U>, E>) -> Result<FinDist<U>, E> {
        let mut b = Builder::default();
        for (x, w) in &self.support {
            for (y, v) in f(x)?.support {
                b.add(y, &(w * v));
            }
        }
        Ok(b.finish().expect("bind preserves total mass"))
    }

    pub fn map<U: Ord + Clone>(&self, mut f: impl FnMut(&T) -> U) -> FinDist<U> {
        let mut b = Builder::default();
        for (x, w) in &self.support {
            b.add(f(x), w);
        }
        b.finish().expect("map preserves total mass")
    }

    pub fn try_map<U: Ord + Clone, E>(&self, mut f: impl FnMut(&T) -> Result<U, E>) -> Result<FinDist<U>, E> {
        let mut b = Builder::default();
        for (x, w) in &self.support {
            b.add(f(x)?, w);
        }
        Ok(b.finish().expect("map preserves total mass"))
    }

    pub fn product<U: Ord + Clone>(&self, other: &FinDist<U>) -> FinDist<(T, U)> {
        let mut support = BTreeMap::new();
        for (x, w) in &self.support {
            for (y, v) in &other.support {
                support.insert((x.clone(), y.clone()), w * v);
            }
        }
        FinDist { support }
    }

    pub fn mass(&self, mut pred: impl FnMut(&T) -> bool) -> Prob {
        Prob(self.support.iter().filter(|(x, _)| pred(x)).fold(BigRational::zero(), |a, (_, w)| a + w))
    }

    pub fn condition(&self, mut pred: impl FnMut(&T) -> bool) -> Result<FinDist<T>, DistError> {
        let mut b = Builder::default();
        for (x, w) in &self.support {
            if pred(x) {
                b.add(x.clone(), w);
            }
        }
        b.finish().ok_or(DistError::ZeroMassCondition)
    }

    /// `p * mu1 + (1 - p) * mu2`. The unused side is never inspected when
    /// `p` is 0 or 1, so it may be absent.
    pub fn convex(mu1: Option<&FinDist<T>>, mu2: Option<&FinDist<T>>, p: &Prob) -> Result<FinDist<T>, DistError> {
        let missing = || DistError::DomainMismatch("convex combination is missing a branch with positive weight".into());
        if p.is_one() {
            return mu1.cloned().ok_or_else(missing);
        }
        if p.is_zero() {
            return mu2.cloned().ok_or_else(missing);
        }
        let (mu1, mu2) = (mu1.ok_or_else(missing)?, mu2.ok_or_else(missing)?);
        let q = p.complement();
        let mut b = Builder::default();
        for (x, w) in &mu1.support {
            b.add(x.clone(), &(w * &p.0));
        }
        for (x, w) in &mu2.support {
            b.add(x.clone(), &(w * &q.0));
        }
        Ok(b.finish().expect("positive weights"))
    }

    /// Checks the sum-to-one and positivity invariants.
    pub fn is_normalized(&self) -> bool {
        self.support.values().all(|w| w.is_positive()) && self.support.values().fold(BigRational::zero(), |a, b| a + b).is_one()
    }

    /// Least common denominator of all masses.
    pub fn common_denominator(&self) -> BigInt {
        use num_integer::Integer;
        self.support.values().fold(BigInt::one(), |acc, w| acc.lcm(w.denom()))
    }
}

impl<A: Ord + Clone, B: Ord + Clone> FinDist<(A, B)> {
    pub fn marginal_left(&self) -> FinDist<A> {
        self.map(|(a, _)| a.clone())
    }

    pub fn marginal_right(&self) -> FinDist<B> {
        self.map(|(_, b)| b.clone())
    }
}

impl<T: Ord + fmt::Display> fmt::Display for FinDist<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (x, w)) in self.support.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x} ↦ {w}")?;
        }
        f.write_str("}")
    }
}

/// Total variation distance: half the L1 distance between the mass functions.
pub fn statistical_distance<T: Ord + Clone>(p: &FinDist<T>, q: &FinDist<T>) -> Prob {
    let zero = BigRational::zero();
    let mut total = BigRational::zero();
    let keys: BTreeSet<&T> = p.support.keys().chain(q.support.keys()).collect();
    for k in keys {
        let a = p.support.get(k).unwrap_or(&zero);
        let b = q.support.get(k).unwrap_or(&zero);
        total += (a - b).abs();
    }
    Prob::from_ratio(total / BigRational::from_integer(BigInt::from(2)))
}

/// Returns the common fiber size `k` when `f` maps `s` onto exactly `target`
/// with every fiber of size `k`.
pub fn even_partition<T: Ord, U: Ord>(mut f: impl FnMut(&T) -> U, s: &BTreeSet<T>, target: &BTreeSet<U>) -> Option<usize> {
    let mut fibers: BTreeMap<U, usize> = BTreeMap::new();
    for x in s {
        *fibers.entry(f(x)).or_default() += 1;
    }
    if fibers.len() != target.len() || !fibers.keys().zip(target.iter()).all(|(a, b)| a == b) {
        return None;
    }
    let mut sizes = fibers.values();
    let k = *sizes.next()?;
    sizes.all(|&n| n == k).then_some(k)
}

/// A distribution over memories that all share one domain: a sorted list of
/// variable names plus a distribution over value rows aligned with it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MemDist {
    vars: Vec<Name>,
    dist: FinDist<Vec<Value>>,
}

impl MemDist {
    /// The unit distribution over the empty memory.
    pub fn empty() -> MemDist {
        MemDist { vars: Vec::new(), dist: FinDist::unit(Vec::new()) }
    }

    /// Point mass on a single memory.
    pub fn point(mem: BTreeMap<Name, Value>) -> MemDist {
        let (vars, row): (Vec<Name>, Vec<Value>) = mem.into_iter().unzip();
        MemDist { vars, dist: FinDist::unit(row) }
    }

    /// Wraps a row distribution; `vars` must be sorted and rows aligned.
    pub fn from_rows(vars: Vec<Name>, dist: FinDist<Vec<Value>>) -> MemDist {
        debug_assert!(vars.windows(2).all(|w| w[0] < w[1]), "domain must be sorted and duplicate-free");
        debug_assert!(dist.support().all(|r| r.len() == vars.len()));
        MemDist { vars, dist }
    }

    /// Builds from memories given as maps over a common domain.
    pub fn from_memories(items: impl IntoIterator<Item = (BTreeMap<Name, Value>, BigRational)>) -> Result<MemDist, DistError> {
        let mut vars: Option<Vec<Name>> = None;
        let mut b = Builder::default();
        for (mem, w) in items {
            let (vs, row): (Vec<Name>, Vec<Value>) = mem.into_iter().unzip();
            match &vars {
                Some(existing) if *existing != vs => return Err(DistError::DomainMismatch("memories have different domains".into())),
                Some(_) => {}
                None => vars = Some(vs),
            }
            b.add(row, &w);
        }
        let dist = b.finish().ok_or(DistError::EmptySet)?;
        Ok(MemDist { vars: vars.unwrap_or_default(), dist })
    }

    pub fn vars(&self) -> &[Name] {
        &self.vars
    }

    pub fn domain(&self) -> BTreeSet<Name> {
        self.vars.iter().cloned().collect()
    }

    pub fn rows(&self) -> &FinDist<Vec<Value>> {
        &self.dist
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.vars.binary_search_by(|v| (**v).cmp(name)).ok()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.position(name).is_some()
    }

    /// Memories in the support, as maps.
    pub fn memories(&self) -> impl Iterator<Item = (BTreeMap<Name, Value>, Prob)> + '_ {
        self.dist.iter_probs().map(|(row, p)| (self.vars.iter().cloned().zip(row.iter().cloned()).collect(), p))
    }

    /// Marginal on a subset of the domain.
    pub fn project<'a>(&self, keep: impl IntoIterator<Item = &'a str>) -> Result<MemDist, DistError> {
        let mut idx = Vec::new();
        for name in keep {
            let i = self.position(name).ok_or_else(|| DistError::DomainMismatch(format!("`{name}` is not in the distribution's domain")))?;
            idx.push(i);
        }
        idx.sort_unstable();
        idx.dedup();
        if idx.len() == self.vars.len() {
            return Ok(self.clone());
        }
        let vars = idx.iter().map(|&i| self.vars[i].clone()).collect();
        let dist = self.dist.map(|row| idx.iter().map(|&i| row[i].clone()).collect());
        Ok(MemDist { vars, dist })
    }

    /// Product of distributions over disjoint domains.
    pub fn product(&self, other: &MemDist) -> Result<MemDist, DistError> {
        if self.vars.iter().any(|v| other.contains(v)) {
            return Err(DistError::DomainMismatch("product of distributions with overlapping domains".into()));
        }
        let mut vars: Vec<Name> = self.vars.iter().chain(other.vars.iter()).cloned().collect();
        vars.sort();
        let order: Vec<(bool, usize)> = vars
            .iter()
            .map(|v| match self.position(v) {
                Some(i) => (true, i),
                None => (false, other.position(v).expect("from one side")),
            })
            .collect();
        let dist = self.dist.product(&other.dist).map(|(a, b)| order.iter().map(|&(left, i)| if left { a[i].clone() } else { b[i].clone() }).collect());
        Ok(MemDist { vars, dist })
    }

    /// Whether the marginal on `x ∪ y` is the product of the marginals.
    pub fn is_independent(&self, x: &BTreeSet<Name>, y: &BTreeSet<Name>) -> Result<bool, DistError> {
        if !x.is_disjoint(y) {
            return Err(DistError::DomainMismatch("independence of overlapping variable sets".into()));
        }
        if x.is_empty() || y.is_empty() {
            for v in x.iter().chain(y) {
                if !self.contains(v) {
                    return Err(DistError::DomainMismatch(format!("`{v}` is not in the distribution's domain")));
                }
            }
            return Ok(true);
        }
        let joint = self.project(x.iter().chain(y).map(|n| &**n))?;
        let px = self.project(x.iter().map(|n| &**n))?;
        let py = self.project(y.iter().map(|n| &**n))?;
        // Cheap necessary condition before building the product.
        if joint.dist.len() != px.dist.len() * py.dist.len() {
            return Ok(false);
        }
        Ok(px.product(&py)? == joint)
    }

    /// Applies a row transformation (the domain is unchanged).
    pub fn try_map_rows<E>(&self, f: impl FnMut(&Vec<Value>) -> Result<Vec<Value>, E>) -> Result<MemDist, E> {
        Ok(MemDist { vars: self.vars.clone(), dist: self.dist.try_map(f)? })
    }

    pub fn try_bind_rows<E>(&self, f: impl FnMut(&Vec<Value>) -> Result<FinDist<Vec<Value>>, E>) -> Result<MemDist, E> {
        Ok(MemDist { vars: self.vars.clone(), dist: self.dist.try_bind(f)? })
    }

    pub fn with_rows(&self, dist: FinDist<Vec<Value>>) -> MemDist {
        MemDist { vars: self.vars.clone(), dist }
    }
}

impl fmt::Display for MemDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (row, w)) in self.dist.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str("[")?;
            for (j, (v, x)) in self.vars.iter().zip(row).enumerate() {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{v}={x}")?;
            }
            write!(f, "] ↦ {w}")?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn unit_and_uniform() {
        let u = FinDist::unit(5);
        assert_eq!(u.prob(&5), Prob::one());
        assert_eq!(u.support().collect::<Vec<_>>(), vec![&5]);
        let eight = FinDist::uniform(0..8).unwrap();
        assert!((0..8).all(|i| eight.prob(&i) == Prob::new(1, 8)));
        assert_eq!(FinDist::uniform(["a"]).unwrap(), FinDist::unit("a"));
        assert_eq!(FinDist::<i32>::uniform([]), Err(DistError::EmptySet));
        assert_eq!(FinDist::unit(Vec::<i32>::new()).prob(&vec![]), Prob::one());
    }

    #[test]
    fn bind_examples() {
        let coin = FinDist::uniform([0, 1]).unwrap();
        assert_eq!(coin.bind(|x| FinDist::unit(x + 1)), FinDist::uniform([1, 2]).unwrap());
        assert_eq!(coin.bind(|_| FinDist::uniform([0, 1]).unwrap()), coin);
        let f = |x: &i32| FinDist::uniform([*x, x * 10]).unwrap();
        assert_eq!(FinDist::unit(3).bind(f), f(&3));
    }

    #[test]
    fn product_and_marginals() {
        let p = FinDist::uniform([0, 1]).unwrap();
        let q = FinDist::uniform([5, 6, 7]).unwrap();
        let pq = p.product(&q);
        assert_eq!(pq.len(), 6);
        assert_eq!(pq.prob(&(0, 5)), Prob::new(1, 6));
        assert_eq!(pq.marginal_left(), p);
        assert_eq!(pq.marginal_right(), q);
    }

    #[test]
    fn conditioning() {
        let eight = FinDist::uniform(0..8).unwrap();
        assert_eq!(eight.condition(|x| x % 2 == 0).unwrap(), FinDist::uniform([0, 2, 4, 6]).unwrap());
        assert_eq!(eight.condition(|_| true).unwrap(), eight);
        assert_eq!(FinDist::unit(3).condition(|x| *x < 0), Err(DistError::ZeroMassCondition));
    }

    #[test]
    fn convex_combinations() {
        let half = Prob::new(1, 2);
        let mix = FinDist::convex(Some(&FinDist::unit(0)), Some(&FinDist::unit(1)), &half).unwrap();
        assert_eq!(mix, FinDist::uniform([0, 1]).unwrap());
        let mu = FinDist::uniform([1, 2, 3]).unwrap();
        assert_eq!(FinDist::convex(Some(&mu), None, &Prob::one()).unwrap(), mu);
        assert_eq!(FinDist::convex(None, Some(&mu), &Prob::zero()).unwrap(), mu);
        assert_eq!(FinDist::convex(Some(&mu), Some(&mu), &Prob::new(1, 3)).unwrap(), mu);
    }

    #[test]
    fn statistical_distance_examples() {
        let mu = FinDist::uniform([1, 2, 3]).unwrap();
        assert_eq!(statistical_distance(&mu, &mu), Prob::zero());
        assert_eq!(statistical_distance(&FinDist::unit(0), &FinDist::unit(1)), Prob::one());
        assert_eq!(statistical_distance(&FinDist::uniform([0, 1]).unwrap(), &FinDist::unit(0)), Prob::new(1, 2));
    }

    #[test]
    fn even_partition_examples() {
        let s: BTreeSet<i64> = (1..=16).collect();
        let t: BTreeSet<i64> = (0..8).collect();
        assert_eq!(even_partition(|x| x % 8, &s, &t), Some(2));
        let s9: BTreeSet<i64> = (1..=9).collect();
        assert_eq!(even_partition(|x| x % 8, &s9, &t), None);
        assert_eq!(even_partition(|x| *x, &t, &t), Some(1));
        // Image must be exactly the target set.
        let t9: BTreeSet<i64> = (0..9).collect();
        assert_eq!(even_partition(|x| x % 8, &s, &t9), None);
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(Prob::new(1, 3).to_decimal(6), "0.333333");
        assert_eq!(Prob::new(2, 3).to_decimal(6), "0.666667");
        assert_eq!(Prob::one().to_decimal(6), "1.000000");
        assert_eq!(Prob::new(1, 2).to_decimal(0), "1");
    }

    fn mem(pairs: &[(&str, i64)]) -> BTreeMap<Name, Value> {
        pairs.iter().map(|(n, v)| (Name::from(*n), Value::Int(*v))).collect()
    }

    #[test]
    fn memory_projection_and_independence() {
        let coupled = MemDist::from_memories([(mem(&[("x", 0), ("y", 0)]), r(1, 2)), (mem(&[("x", 1), ("y", 1)]), r(1, 2))]).unwrap();
        let px = coupled.project(["x"]).unwrap();
        assert_eq!(px, MemDist::from_memories([(mem(&[("x", 0)]), r(1, 2)), (mem(&[("x", 1)]), r(1, 2))]).unwrap());
        let x: BTreeSet<Name> = [Name::from("x")].into();
        let y: BTreeSet<Name> = [Name::from("y")].into();
        assert!(!coupled.is_independent(&x, &y).unwrap());
        assert!(coupled.is_independent(&BTreeSet::new(), &y).unwrap());
        let py = coupled.project(["y"]).unwrap();
        let prod = px.product(&py).unwrap();
        assert!(prod.is_independent(&x, &y).unwrap());
        assert!(coupled.project(["z"]).is_err());
        assert!(px.product(&px).is_err());
    }
}
