//! Variables and expressions, with structural evaluation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::EvalError;
use crate::value::Value;

pub type Name = Arc<str>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Det,
    Rand,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Det => "det",
            Kind::Rand => "rand",
        })
    }
}

/// A program variable. Names are unique across kinds within a program.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub name: Name,
    pub kind: Kind,
}

impl Var {
    pub fn new(name: &str, kind: Kind) -> Var {
        Var { name: Arc::from(name), kind }
    }

    pub fn det(name: &str) -> Var {
        Var::new(name, Kind::Det)
    }

    pub fn rand(name: &str) -> Var {
        Var::new(name, Kind::Rand)
    }

    pub fn is_random(&self) -> bool {
        self.kind == Kind::Rand
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Pow,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    In,
    Concat,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Pow => "^",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::In => "in",
            BinOp::Concat => "++",
        }
    }

    /// Binding strength used by the parser and printer.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::In => 3,
            BinOp::Concat => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 6,
            BinOp::Pow => 7,
        }
    }

    pub fn is_right_assoc(self) -> bool {
        self == BinOp::Pow
    }
}

/// Comprehension forms binding one local name over a set or sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Binder {
    Map,
    Filter,
    All,
    Any,
}

impl Binder {
    pub fn keyword(self) -> &'static str {
        match self {
            Binder::Map => "map",
            Binder::Filter => "filter",
            Binder::All => "all",
            Binder::Any => "any",
        }
    }
}

macro_rules! builtins {
    ($($variant:ident => $name:literal / $arity:literal),* $(,)?) => {
        /// Named built-in functions, written `name(args)` in source.
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum Builtin { $($variant),* }

        impl Builtin {
            pub const ALL: &'static [Builtin] = &[$(Builtin::$variant),*];

            pub fn name(self) -> &'static str {
                match self { $(Builtin::$variant => $name),* }
            }

            pub fn arity(self) -> usize {
                match self { $(Builtin::$variant => $arity),* }
            }

            pub fn from_name(name: &str) -> Option<Builtin> {
                match name { $($name => Some(Builtin::$variant),)* _ => None }
            }
        }
    };
}

builtins! {
    Len => "len" / 1,
    Count => "count" / 2,
    Perms => "perms" / 1,
    SetOf => "set" / 1,
    SeqOf => "seq" / 1,
    Union => "union" / 2,
    Inter => "inter" / 2,
    Diff => "diff" / 2,
    Min => "min" / 1,
    Max => "max" / 1,
    Sum => "sum" / 1,
    Take => "take" / 2,
    Slice => "slice" / 3,
    Seqs => "seqs" / 2,
    Ite => "ite" / 3,
    Fst => "fst" / 1,
    Snd => "snd" / 1,
    Find => "find" / 2,
    Place => "place" / 2,
    Sp => "sp" / 2,
    PermOf => "permof" / 1,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Const(Value),
    Var(Var),
    /// A name bound by an enclosing comprehension.
    Local(Name),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Tuple(Vec<Expr>),
    SeqLit(Vec<Expr>),
    SetLit(Vec<Expr>),
    /// Inclusive integer range `{lo .. hi}`.
    Range(Box<Expr>, Box<Expr>),
    Index(Box<Expr>, Box<Expr>),
    /// Functional update `a[i <- v]`.
    Update(Box<Expr>, Box<Expr>, Box<Expr>),
    Call(Builtin, Vec<Expr>),
    Comprehension { binder: Binder, var: Name, source: Box<Expr>, body: Box<Expr> },
    /// `ei(u in S => f, T)`: f evenly partitions S into T.
    EvenPartition { var: Name, source: Box<Expr>, body: Box<Expr>, target: Box<Expr> },
}

/// Variable lookup for evaluation.
pub trait Env {
    fn lookup(&self, name: &str) -> Option<&Value>;
}

impl Env for BTreeMap<Name, Value> {
    fn lookup(&self, name: &str) -> Option<&Value> {
        self.get(name)
    }
}

/// Looks up in the first environment, then the second.
pub struct Layered<'a, A: ?Sized, B: ?Sized>(pub &'a A, pub &'a B);

impl<A: Env + ?Sized, B: Env + ?Sized> Env for Layered<'_, A, B> {
    fn lookup(&self, name: &str) -> Option<&Value> {
        self.0.lookup(name).or_else(|| self.1.lookup(name))
    }
}

pub struct EmptyEnv;

impl Env for EmptyEnv {
    fn lookup(&self, _: &str) -> Option<&Value> {
        None
    }
}

/// A memory row: sorted variable names paired with their values.
pub struct RowEnv<'a> {
    pub vars: &'a [Name],
    pub row: &'a [Value],
}

impl Env for RowEnv<'_> {
    fn lookup(&self, name: &str) -> Option<&Value> {
        self.vars.binary_search_by(|v| (**v).cmp(name)).ok().map(|i| &self.row[i])
    }
}

impl Expr {
    pub fn int(i: i64) -> Expr {
        Expr::Const(Value::Int(i))
    }

    pub fn bool(b: bool) -> Expr {
        Expr::Const(Value::Bool(b))
    }

    pub fn token(s: &str) -> Expr {
        Expr::Const(Value::token(s))
    }

    pub fn var(v: &Var) -> Expr {
        Expr::Var(v.clone())
    }

    pub fn not(e: Expr) -> Expr {
        Expr::Unary(UnOp::Not, Box::new(e))
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn eq(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Eq, a, b)
    }

    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::And, a, b)
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::bin(BinOp::Add, a, b)
    }

    pub fn index(a: Expr, i: Expr) -> Expr {
        Expr::Index(Box::new(a), Box::new(i))
    }

    pub fn update(a: Expr, i: Expr, v: Expr) -> Expr {
        Expr::Update(Box::new(a), Box::new(i), Box::new(v))
    }

    pub fn range(lo: Expr, hi: Expr) -> Expr {
        Expr::Range(Box::new(lo), Box::new(hi))
    }

    pub fn call(f: Builtin, args: Vec<Expr>) -> Expr {
        Expr::Call(f, args)
    }

    /// Tuple literal; folds to a constant when every component is constant.
    pub fn tuple(items: Vec<Expr>) -> Expr {
        match all_consts(&items) {
            Some(vs) => Expr::Const(Value::Tuple(vs)),
            None => Expr::Tuple(items),
        }
    }

    /// Sequence literal; folds to a constant when every item is constant.
    pub fn seq(items: Vec<Expr>) -> Expr {
        match all_consts(&items) {
            Some(vs) => Expr::Const(Value::Seq(vs)),
            None => Expr::SeqLit(items),
        }
    }

    /// Set literal; folds to a constant when every item is constant.
    pub fn set(items: Vec<Expr>) -> Expr {
        match all_consts(&items) {
            Some(vs) => Expr::Const(Value::Set(vs.into_iter().collect())),
            None => Expr::SetLit(items),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            _ => self.for_each_child(|c| c.collect_vars(out)),
        }
    }

    fn for_each_child<'a>(&'a self, mut f: impl FnMut(&'a Expr)) {
        match self {
            Expr::Const(_) | Expr::Var(_) | Expr::Local(_) => {}
            Expr::Unary(_, a) => f(a),
            Expr::Binary(_, a, b) | Expr::Range(a, b) | Expr::Index(a, b) => {
                f(a);
                f(b);
            }
            Expr::Update(a, b, c) => {
                f(a);
                f(b);
                f(c);
            }
            Expr::Tuple(xs) | Expr::SeqLit(xs) | Expr::SetLit(xs) | Expr::Call(_, xs) => xs.iter().for_each(f),
            Expr::Comprehension { source, body, .. } => {
                f(source);
                f(body);
            }
            Expr::EvenPartition { source, body, target, .. } => {
                f(source);
                f(body);
                f(target);
            }
        }
    }

    /// True iff the expression mentions no random variable.
    pub fn is_deterministic(&self) -> bool {
        match self {
            Expr::Var(v) => !v.is_random(),
            _ => {
                let mut det = true;
                self.for_each_child(|c| det = det && c.is_deterministic());
                det
            }
        }
    }

    pub fn mentions(&self, name: &str) -> bool {
        match self {
            Expr::Var(v) => &*v.name == name,
            _ => {
                let mut found = false;
                self.for_each_child(|c| found = found || c.mentions(name));
                found
            }
        }
    }

    /// Rebuilds the expression bottom-up, letting `f` replace variables.
    pub fn map_vars(&self, f: &mut impl FnMut(&Var) -> Expr) -> Expr {
        let mut go = |e: &Expr| Box::new(e.map_vars(f));
        match self {
            Expr::Var(v) => return f(v),
            Expr::Const(_) | Expr::Local(_) => self.clone(),
            Expr::Unary(op, a) => Expr::Unary(*op, go(a)),
            Expr::Binary(op, a, b) => Expr::Binary(*op, go(a), go(b)),
            Expr::Range(a, b) => Expr::Range(go(a), go(b)),
            Expr::Index(a, b) => Expr::Index(go(a), go(b)),
            Expr::Update(a, b, c) => Expr::Update(go(a), go(b), go(c)),
            Expr::Tuple(xs) => Expr::Tuple(xs.iter().map(|x| *go(x)).collect()),
            Expr::SeqLit(xs) => Expr::SeqLit(xs.iter().map(|x| *go(x)).collect()),
            Expr::SetLit(xs) => Expr::SetLit(xs.iter().map(|x| *go(x)).collect()),
            Expr::Call(b, xs) => Expr::Call(*b, xs.iter().map(|x| *go(x)).collect()),
            Expr::Comprehension { binder, var, source, body } => {
                Expr::Comprehension { binder: *binder, var: var.clone(), source: go(source), body: go(body) }
            }
            Expr::EvenPartition { var, source, body, target } => {
                Expr::EvenPartition { var: var.clone(), source: go(source), body: go(body), target: go(target) }
            }
        }
    }

    /// Capture-free substitution of `e` for variable `x`. Comprehension
    /// binders live in a separate namespace, so no renaming is needed.
    pub fn subst(&self, x: &str, e: &Expr) -> Expr {
        self.map_vars(&mut |v| if &*v.name == x { e.clone() } else { Expr::Var(v.clone()) })
    }

    /// Replaces the comprehension-bound name `u` by `e`, respecting
    /// shadowing by inner binders of the same name.
    pub fn subst_local(&self, u: &str, e: &Expr) -> Expr {
        let go = |x: &Expr| Box::new(x.subst_local(u, e));
        match self {
            Expr::Local(n) if &**n == u => e.clone(),
            Expr::Const(_) | Expr::Var(_) | Expr::Local(_) => self.clone(),
            Expr::Unary(op, a) => Expr::Unary(*op, go(a)),
            Expr::Binary(op, a, b) => Expr::Binary(*op, go(a), go(b)),
            Expr::Range(a, b) => Expr::Range(go(a), go(b)),
            Expr::Index(a, b) => Expr::Index(go(a), go(b)),
            Expr::Update(a, b, c) => Expr::Update(go(a), go(b), go(c)),
            Expr::Tuple(xs) => Expr::Tuple(xs.iter().map(|x| *go(x)).collect()),
            Expr::SeqLit(xs) => Expr::SeqLit(xs.iter().map(|x| *go(x)).collect()),
            Expr::SetLit(xs) => Expr::SetLit(xs.iter().map(|x| *go(x)).collect()),
            Expr::Call(b, xs) => Expr::Call(*b, xs.iter().map(|x| *go(x)).collect()),
            Expr::Comprehension { binder, var, source, body } => Expr::Comprehension {
                binder: *binder,
                var: var.clone(),
                source: go(source),
                body: if &**var == u { body.clone() } else { go(body) },
            },
            Expr::EvenPartition { var, source, body, target } => Expr::EvenPartition {
                var: var.clone(),
                source: go(source),
                body: if &**var == u { body.clone() } else { go(body) },
                target: go(target),
            },
        }
    }

    pub fn eval(&self, env: &dyn Env) -> Result<Value, EvalError> {
        let mut locals = Vec::new();
        self.eval_in(env, &mut locals)
    }

    fn eval_in(&self, env: &dyn Env, locals: &mut Vec<(Name, Value)>) -> Result<Value, EvalError> {
        match self {
            Expr::Const(v) => Ok(v.clone()),
            Expr::Var(v) => env.lookup(&v.name).cloned().ok_or_else(|| EvalError::UnboundVariable(v.name.to_string())),
            Expr::Local(n) => locals
                .iter()
                .rev()
                .find(|(m, _)| m == n)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| EvalError::UnboundVariable(n.to_string())),
            Expr::Unary(op, a) => {
                let a = a.eval_in(env, locals)?;
                match op {
                    UnOp::Not => Ok(Value::Bool(!a.as_bool()?)),
                    UnOp::Neg => a.as_int()?.checked_neg().map(Value::Int).ok_or(EvalError::Overflow),
                }
            }
            Expr::Binary(BinOp::And, a, b) => {
                if !a.eval_in(env, locals)?.as_bool()? {
                    return Ok(Value::Bool(false));
                }
                Ok(Value::Bool(b.eval_in(env, locals)?.as_bool()?))
            }
            Expr::Binary(BinOp::Or, a, b) => {
                if a.eval_in(env, locals)?.as_bool()? {
                    return Ok(Value::Bool(true));
                }
                Ok(Value::Bool(b.eval_in(env, locals)?.as_bool()?))
            }
            Expr::Binary(op, a, b) => {
                let a = a.eval_in(env, locals)?;
                let b = b.eval_in(env, locals)?;
                binary(*op, a, b)
            }
            Expr::Tuple(xs) => Ok(Value::Tuple(eval_all(xs, env, locals)?)),
            Expr::SeqLit(xs) => Ok(Value::Seq(eval_all(xs, env, locals)?)),
            Expr::SetLit(xs) => Ok(Value::Set(eval_all(xs, env, locals)?.into_iter().collect())),
            Expr::Range(lo, hi) => {
                let lo = lo.eval_in(env, locals)?.as_int()?;
                let hi = hi.eval_in(env, locals)?.as_int()?;
                Ok(Value::int_set(lo..=hi))
            }
            Expr::Index(a, i) => {
                let a = a.eval_in(env, locals)?;
                let i = i.eval_in(env, locals)?.as_int()?;
                index(&a, i).cloned()
            }
            Expr::Update(a, i, v) => {
                let a = a.eval_in(env, locals)?;
                let i = i.eval_in(env, locals)?.as_int()?;
                let v = v.eval_in(env, locals)?;
                update(a, i, v)
            }
            Expr::Call(Builtin::Ite, args) => {
                if args[0].eval_in(env, locals)?.is_truthy() {
                    args[1].eval_in(env, locals)
                } else {
                    args[2].eval_in(env, locals)
                }
            }
            Expr::Call(f, args) => {
                let vals = eval_all(args, env, locals)?;
                crate::builtins::apply(*f, vals)
            }
            Expr::Comprehension { binder, var, source, body } => {
                let src = source.eval_in(env, locals)?;
                let is_set = matches!(src, Value::Set(_));
                let items = src.elements()?;
                let mut out = Vec::new();
                for item in items {
                    locals.push((var.clone(), item.clone()));
                    let r = body.eval_in(env, locals);
                    locals.pop();
                    let r = r?;
                    match binder {
                        Binder::Map => out.push(r),
                        Binder::Filter => {
                            if r.as_bool()? {
                                out.push(item)
                            }
                        }
                        Binder::All => {
                            if !r.as_bool()? {
                                return Ok(Value::Bool(false));
                            }
                        }
                        Binder::Any => {
                            if r.as_bool()? {
                                return Ok(Value::Bool(true));
                            }
                        }
                    }
                }
                Ok(match binder {
                    Binder::All => Value::Bool(true),
                    Binder::Any => Value::Bool(false),
                    _ if is_set => Value::Set(out.into_iter().collect()),
                    _ => Value::Seq(out),
                })
            }
            Expr::EvenPartition { var, source, body, target } => {
                let src: BTreeSet<Value> = source.eval_in(env, locals)?.elements()?.into_iter().collect();
                let target: BTreeSet<Value> = target.eval_in(env, locals)?.elements()?.into_iter().collect();
                let mut images = Vec::with_capacity(src.len());
                for item in &src {
                    locals.push((var.clone(), item.clone()));
                    let r = body.eval_in(env, locals);
                    locals.pop();
                    images.push(r?);
                }
                let mut it = images.into_iter();
                let k = crate::dist::even_partition(|_| it.next().expect("one image per element"), &src, &target);
                Ok(Value::Bool(k.is_some()))
            }
        }
    }
}

fn all_consts(items: &[Expr]) -> Option<Vec<Value>> {
    items
        .iter()
        .map(|e| match e {
            Expr::Const(v) => Some(v.clone()),
            _ => None,
        })
        .collect()
}

fn eval_all(xs: &[Expr], env: &dyn Env, locals: &mut Vec<(Name, Value)>) -> Result<Vec<Value>, EvalError> {
    xs.iter().map(|x| x.eval_in(env, locals)).collect()
}

pub(crate) fn index(a: &Value, i: i64) -> Result<&Value, EvalError> {
    let items = match a {
        Value::Seq(s) | Value::Tuple(s) => s,
        other => return Err(EvalError::type_mismatch("sequence or tuple", other)),
    };
    usize::try_from(i).ok().and_then(|u| items.get(u)).ok_or(EvalError::IndexOutOfRange { index: i, len: items.len() })
}

fn update(a: Value, i: i64, v: Value) -> Result<Value, EvalError> {
    let (mut items, is_seq) = match a {
        Value::Seq(s) => (s, true),
        Value::Tuple(s) => (s, false),
        other => return Err(EvalError::type_mismatch("sequence or tuple", &other)),
    };
    let len = items.len();
    let slot = usize::try_from(i).ok().and_then(|u| items.get_mut(u)).ok_or(EvalError::IndexOutOfRange { index: i, len })?;
    *slot = v;
    Ok(if is_seq { Value::Seq(items) } else { Value::Tuple(items) })
}

fn int_op(a: &Value, b: &Value, f: impl FnOnce(i64, i64) -> Result<i64, EvalError>) -> Result<Value, EvalError> {
    Ok(Value::Int(f(a.as_int()?, b.as_int()?)?))
}

fn binary(op: BinOp, a: Value, b: Value) -> Result<Value, EvalError> {
    use BinOp::*;
    match op {
        Add => match a {
            Value::Seq(mut s) => {
                s.push(b);
                Ok(Value::Seq(s))
            }
            _ => int_op(&a, &b, |x, y| x.checked_add(y).ok_or(EvalError::Overflow)),
        },
        Sub => match (a, b) {
            (Value::Set(x), Value::Set(y)) => Ok(Value::Set(x.difference(&y).cloned().collect())),
            (a, b) => int_op(&a, &b, |x, y| x.checked_sub(y).ok_or(EvalError::Overflow)),
        },
        Mul => int_op(&a, &b, |x, y| x.checked_mul(y).ok_or(EvalError::Overflow)),
        Div => int_op(&a, &b, |x, y| {
            if y == 0 {
                Err(EvalError::DivisionByZero)
            } else {
                x.checked_div_euclid(y).ok_or(EvalError::Overflow)
            }
        }),
        Mod => int_op(&a, &b, |x, y| {
            if y == 0 {
                Err(EvalError::DivisionByZero)
            } else {
                x.checked_rem_euclid(y).ok_or(EvalError::Overflow)
            }
        }),
        Pow => int_op(&a, &b, |x, y| {
            let y = u32::try_from(y).map_err(|_| EvalError::invalid("^", "negative or huge exponent"))?;
            x.checked_pow(y).ok_or(EvalError::Overflow)
        }),
        Eq => Ok(Value::Bool(a == b)),
        Ne => Ok(Value::Bool(a != b)),
        Lt => Ok(Value::Bool(a.as_int()? < b.as_int()?)),
        Le => Ok(Value::Bool(a.as_int()? <= b.as_int()?)),
        Gt => Ok(Value::Bool(a.as_int()? > b.as_int()?)),
        Ge => Ok(Value::Bool(a.as_int()? >= b.as_int()?)),
        In => match &b {
            Value::Set(s) => Ok(Value::Bool(s.contains(&a))),
            Value::Seq(s) => Ok(Value::Bool(s.contains(&a))),
            other => Err(EvalError::type_mismatch("set or sequence", other)),
        },
        Concat => match (a, b) {
            (Value::Seq(mut x), Value::Seq(y)) => {
                x.extend(y);
                Ok(Value::Seq(x))
            }
            (Value::Seq(_), other) | (other, _) => Err(EvalError::type_mismatch("sequence", &other)),
        },
        And | Or => unreachable!("short-circuit operators are evaluated lazily"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, Value)]) -> BTreeMap<Name, Value> {
        pairs.iter().map(|(n, v)| (Name::from(*n), v.clone())).collect()
    }

    #[test]
    fn arithmetic_on_det_var() {
        let i = Var::det("i");
        let e = Expr::add(Expr::var(&i), Expr::int(1));
        assert_eq!(e.eval(&env(&[("i", Value::Int(1))])).unwrap(), Value::Int(2));
    }

    #[test]
    fn indexing_is_zero_based() {
        let a = Var::rand("A");
        let e = Expr::index(Expr::var(&a), Expr::int(0));
        assert_eq!(e.eval(&env(&[("A", Value::int_seq([3, 5]))])).unwrap(), Value::Int(3));
    }

    #[test]
    fn perms_of_pair() {
        let e = Expr::call(Builtin::Perms, vec![Expr::Const(Value::int_seq([1, 2]))]);
        let expect = Value::Set([Value::int_seq([1, 2]), Value::int_seq([2, 1])].into_iter().collect());
        assert_eq!(e.eval(&EmptyEnv).unwrap(), expect);
    }

    #[test]
    fn euclidean_division_and_modulo() {
        let d = Expr::bin(BinOp::Div, Expr::int(-7), Expr::int(2));
        let m = Expr::bin(BinOp::Mod, Expr::int(-7), Expr::int(2));
        assert_eq!(d.eval(&EmptyEnv).unwrap(), Value::Int(-4));
        assert_eq!(m.eval(&EmptyEnv).unwrap(), Value::Int(1));
        let z = Expr::bin(BinOp::Mod, Expr::int(1), Expr::int(0));
        assert_eq!(z.eval(&EmptyEnv), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn evaluation_errors() {
        let x = Var::det("x");
        assert_eq!(Expr::var(&x).eval(&EmptyEnv), Err(EvalError::UnboundVariable("x".into())));
        let e = Expr::index(Expr::int(3), Expr::int(0));
        assert!(matches!(e.eval(&EmptyEnv), Err(EvalError::TypeMismatch { .. })));
        let e = Expr::index(Expr::Const(Value::int_seq([1])), Expr::int(1));
        assert_eq!(e.eval(&EmptyEnv), Err(EvalError::IndexOutOfRange { index: 1, len: 1 }));
    }

    #[test]
    fn seq_plus_appends_and_concat_joins() {
        let s = Expr::Const(Value::int_seq([1]));
        assert_eq!(Expr::add(s.clone(), Expr::int(2)).eval(&EmptyEnv).unwrap(), Value::int_seq([1, 2]));
        let c = Expr::bin(BinOp::Concat, s.clone(), s);
        assert_eq!(c.eval(&EmptyEnv).unwrap(), Value::int_seq([1, 1]));
    }

    #[test]
    fn comprehensions_bind_locals() {
        let src = Expr::range(Expr::int(1), Expr::int(4));
        let u = Name::from("u");
        let body = Expr::bin(BinOp::Mod, Expr::Local(u.clone()), Expr::int(2));
        let map = Expr::Comprehension { binder: Binder::Map, var: u.clone(), source: Box::new(src.clone()), body: Box::new(body.clone()) };
        assert_eq!(map.eval(&EmptyEnv).unwrap(), Value::int_set([0, 1]));
        let ei = Expr::EvenPartition {
            var: u,
            source: Box::new(src),
            body: Box::new(body),
            target: Box::new(Expr::Const(Value::int_set([0, 1]))),
        };
        assert_eq!(ei.eval(&EmptyEnv).unwrap(), Value::Bool(true));
    }

    #[test]
    fn literal_constructors_fold_constants() {
        assert_eq!(Expr::seq(vec![Expr::int(1), Expr::int(2)]), Expr::Const(Value::int_seq([1, 2])));
        let x = Var::det("x");
        assert!(matches!(Expr::seq(vec![Expr::var(&x)]), Expr::SeqLit(_)));
    }

    #[test]
    fn free_vars_and_determinism() {
        let x = Var::det("x");
        let y = Var::rand("y");
        let e = Expr::add(Expr::var(&x), Expr::var(&y));
        assert_eq!(e.free_vars(), BTreeSet::from([x.clone(), y.clone()]));
        assert!(!e.is_deterministic());
        assert!(Expr::var(&x).is_deterministic());
        assert!(Expr::int(5).free_vars().is_empty());
    }

    #[test]
    fn substitution_replaces_only_target() {
        let x = Var::rand("x");
        let y = Var::rand("y");
        let e = Expr::add(Expr::var(&x), Expr::var(&y));
        let s = e.subst("x", &Expr::int(3));
        assert_eq!(s, Expr::add(Expr::int(3), Expr::var(&y)));
    }
}
