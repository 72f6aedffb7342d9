use std::collections::BTreeMap;
use std::sync::Arc;

use super::lexer::{lex, Tok, Token};
use super::{SourceError, SyntaxError};
use crate::assertion::Assertion;
use crate::command::{Command, Decl};
use crate::expr::{BinOp, Binder, Builtin, Expr, Kind, Name, UnOp, Var};
use crate::value::Value;

pub(super) struct Parser<'k> {
    toks: Vec<Token>,
    pos: usize,
    /// `None` while reading a program: every name is provisionally
    /// deterministic until classification.
    kinds: Option<&'k BTreeMap<Name, Kind>>,
    locals: Vec<Name>,
}

type PResult<T> = Result<T, SyntaxError>;

const COMPARISONS: &[(&str, BinOp)] =
    &[("=", BinOp::Eq), ("==", BinOp::Eq), ("!=", BinOp::Ne), ("<", BinOp::Lt), ("<=", BinOp::Le), (">", BinOp::Gt), (">=", BinOp::Ge)];

impl<'k> Parser<'k> {
    pub(super) fn new(src: &str, kinds: Option<&'k BTreeMap<Name, Kind>>) -> PResult<Parser<'k>> {
        Ok(Parser { toks: lex(src)?, pos: 0, kinds, locals: Vec::new() })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let t = &self.toks[self.pos];
        Err(SyntaxError::at(t.line, t.col, msg))
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.is_sym(s) || self.is_kw(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> PResult<()> {
        if self.eat(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", self.peek()))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => self.err(format!("expected an identifier, found {other}")),
        }
    }

    pub(super) fn whole<T>(mut self, f: impl FnOnce(&mut Self) -> PResult<T>) -> PResult<T> {
        let out = f(&mut self)?;
        if *self.peek() != Tok::Eof {
            return self.err(format!("unexpected {} after the end", self.peek()));
        }
        Ok(out)
    }

    pub(super) fn whole_assertion(mut self) -> Result<Assertion, SourceError> {
        let a = self.assertion()?;
        if *self.peek() != Tok::Eof {
            return Err(self.err::<()>(format!("unexpected {} after the end", self.peek())).unwrap_err().into());
        }
        Ok(a)
    }

    fn var(&self, name: &str) -> PResult<Expr> {
        let kind = match self.kinds {
            None => Kind::Det,
            Some(k) => match k.get(name) {
                Some(k) => *k,
                None => return self.err(format!("unknown variable `{name}`")),
            },
        };
        Ok(Expr::Var(Var::new(name, kind)))
    }

    // Programs and commands.

    pub(super) fn program(mut self) -> PResult<(Vec<Decl>, Command)> {
        let mut decls = Vec::new();
        let mut env: BTreeMap<Name, Value> = BTreeMap::new();
        loop {
            let kind = if self.is_kw("det") && matches!(self.peek_at(1), Tok::Ident(s) if s == "var") {
                Some(Kind::Det)
            } else if self.is_kw("rand") && matches!(self.peek_at(1), Tok::Ident(s) if s == "var") {
                Some(Kind::Rand)
            } else if self.is_kw("var") {
                None
            } else {
                break;
            };
            if kind.is_some() {
                self.bump();
            }
            self.bump();
            let name = self.ident()?;
            self.expect(":=")?;
            let e = self.expr()?;
            let v = e.eval(&env).or_else(|err| self.err(format!("initial value of `{name}`: {err}")))?;
            self.expect(";")?;
            env.insert(Arc::from(name.as_str()), v.clone());
            decls.push(Decl::new(&name, kind, v));
        }
        let body = self.block_body()?;
        if *self.peek() != Tok::Eof {
            return self.err(format!("unexpected {}", self.peek()));
        }
        Ok((decls, body))
    }

    /// Commands separated by `;` up to `}` or the end; empty means `skip`.
    pub(super) fn block_body(&mut self) -> PResult<Command> {
        let mut cmds = Vec::new();
        while !self.is_sym("}") && *self.peek() != Tok::Eof {
            let (c, braced) = self.command()?;
            cmds.push(c);
            if !self.eat(";") && !braced && !self.is_sym("}") && *self.peek() != Tok::Eof {
                return self.err(format!("expected `;`, found {}", self.peek()));
            }
        }
        Ok(Command::seq(cmds))
    }

    fn block(&mut self) -> PResult<Command> {
        self.expect("{")?;
        let c = self.block_body()?;
        self.expect("}")?;
        Ok(c)
    }

    /// One command; the flag says whether it ended with a block.
    fn command(&mut self) -> PResult<(Command, bool)> {
        if self.eat("skip") {
            return Ok((Command::Skip, false));
        }
        if self.eat("if") {
            let b = self.expr()?;
            let c = self.block()?;
            let c2 = if self.eat("else") {
                if self.is_kw("if") {
                    self.command()?.0
                } else {
                    self.block()?
                }
            } else {
                Command::Skip
            };
            return Ok((Command::if_(b, c, c2), true));
        }
        if self.eat("while") {
            let b = self.expr()?;
            let c = self.block()?;
            return Ok((Command::while_(b, c), true));
        }
        let name = self.ident()?;
        let Expr::Var(x) = self.var(&name)? else { unreachable!() };
        if self.eat("[") {
            // `a[i] := e` abbreviates `a := a[i <- e]`.
            let i = self.expr()?;
            self.expect("]")?;
            self.expect(":=")?;
            let e = self.expr()?;
            return Ok((Command::Assign(x.clone(), Expr::update(Expr::Var(x), i, e)), false));
        }
        if self.eat(":=") {
            Ok((Command::Assign(x, self.expr()?), false))
        } else if self.eat(":$=") {
            Ok((Command::Sample(x, self.expr()?), false))
        } else {
            self.err(format!("expected `:=` or `:$=`, found {}", self.peek()))
        }
    }

    // Expressions.

    pub(super) fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binop(&self) -> Option<BinOp> {
        match self.peek() {
            Tok::Sym(s) => Some(match *s {
                "||" => BinOp::Or,
                "&&" => BinOp::And,
                "++" => BinOp::Concat,
                "+" => BinOp::Add,
                "-" => BinOp::Sub,
                "*" => BinOp::Mul,
                "/" => BinOp::Div,
                "%" => BinOp::Mod,
                "^" => BinOp::Pow,
                s => return COMPARISONS.iter().find(|(t, _)| *t == s).map(|(_, op)| *op),
            }),
            Tok::Ident(s) if s == "in" => Some(BinOp::In),
            _ => None,
        }
    }

    fn binary(&mut self, min: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        let mut last_cmp = false;
        while let Some(op) = self.binop() {
            let prec = op.precedence();
            if prec < min {
                break;
            }
            if prec == 3 && last_cmp {
                return self.err("comparisons do not chain; add parentheses");
            }
            self.bump();
            let rhs = self.binary(if op.is_right_assoc() { prec } else { prec + 1 })?;
            lhs = Expr::bin(op, lhs, rhs);
            last_cmp = prec == 3;
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat("!") {
            return Ok(Expr::Unary(UnOp::Not, Box::new(self.unary()?)));
        }
        if self.is_sym("-") {
            self.bump();
            if let Tok::Int(n) = *self.peek() {
                self.bump();
                return self.postfix(Expr::int(-n));
            }
            return Ok(Expr::Unary(UnOp::Neg, Box::new(self.unary()?)));
        }
        let e = self.primary()?;
        self.postfix(e)
    }

    fn postfix(&mut self, mut e: Expr) -> PResult<Expr> {
        while self.eat("[") {
            let i = self.expr()?;
            if self.eat("<-") {
                let v = self.expr()?;
                self.expect("]")?;
                e = Expr::update(e, i, v);
            } else {
                self.expect("]")?;
                e = Expr::index(e, i);
            }
        }
        Ok(e)
    }

    fn list(&mut self, close: &str) -> PResult<Vec<Expr>> {
        let mut items = Vec::new();
        while !self.is_sym(close) {
            items.push(self.expr()?);
            if !self.eat(",") {
                break;
            }
        }
        self.expect(close)?;
        Ok(items)
    }

    fn primary(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::int(n))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::token(&s))
            }
            Tok::Sym("(") => {
                self.bump();
                if self.eat(")") {
                    return Ok(Expr::tuple(vec![]));
                }
                let first = self.expr()?;
                if self.eat(")") {
                    return Ok(first);
                }
                self.expect(",")?;
                let mut items = vec![first];
                items.extend(self.list(")")?);
                Ok(Expr::tuple(items))
            }
            Tok::Sym("[") => {
                self.bump();
                let items = self.list("]")?;
                Ok(Expr::seq(items))
            }
            Tok::Sym("{") => {
                self.bump();
                if self.eat("}") {
                    return Ok(Expr::set(vec![]));
                }
                let first = self.expr()?;
                if self.eat("..") {
                    let hi = self.expr()?;
                    self.expect("}")?;
                    return Ok(Expr::range(first, hi));
                }
                let mut items = vec![first];
                if self.eat(",") {
                    items.extend(self.list("}")?);
                } else {
                    self.expect("}")?;
                }
                Ok(Expr::set(items))
            }
            Tok::Ident(name) => {
                self.bump();
                if self.locals.iter().rev().any(|l| **l == *name) {
                    return Ok(Expr::Local(Arc::from(name.as_str())));
                }
                match name.as_str() {
                    "true" => return Ok(Expr::bool(true)),
                    "false" => return Ok(Expr::bool(false)),
                    _ => {}
                }
                if self.is_sym("(") {
                    if let Some(b) = binder(&name) {
                        return self.comprehension(Some(b));
                    }
                    if name == "ei" {
                        return self.comprehension(None);
                    }
                    if let Some(f) = Builtin::from_name(&name) {
                        self.bump();
                        let args = self.list(")")?;
                        if args.len() != f.arity() {
                            return self.err(format!("`{name}` takes {} arguments, got {}", f.arity(), args.len()));
                        }
                        return Ok(Expr::call(f, args));
                    }
                }
                self.var(&name)
            }
            other => self.err(format!("expected an expression, found {other}")),
        }
    }

    /// `map(u in S => body)` and friends; `None` reads `ei(u in S => f, T)`.
    fn comprehension(&mut self, binder: Option<Binder>) -> PResult<Expr> {
        self.expect("(")?;
        let u: Name = Arc::from(self.ident()?.as_str());
        self.expect("in")?;
        let source = self.expr()?;
        self.expect("=>")?;
        self.locals.push(u.clone());
        let body = self.expr();
        self.locals.pop();
        let body = body?;
        let e = match binder {
            Some(binder) => Expr::Comprehension { binder, var: u, source: Box::new(source), body: Box::new(body) },
            None => {
                self.expect(",")?;
                let target = self.expr()?;
                Expr::EvenPartition { var: u, source: Box::new(source), body: Box::new(body), target: Box::new(target) }
            }
        };
        self.expect(")")?;
        Ok(e)
    }

    // Assertions, loosest first: `->`, `-*`, `\/`, `/\`, `*`.

    pub(super) fn assertion(&mut self) -> Result<Assertion, SourceError> {
        let a = self.wand()?;
        if self.eat("->") {
            return Ok(Assertion::implies(a, self.assertion()?));
        }
        Ok(a)
    }

    fn wand(&mut self) -> Result<Assertion, SourceError> {
        let a = self.disj()?;
        if self.eat("-*") {
            return Ok(Assertion::wand(a, self.wand()?));
        }
        Ok(a)
    }

    fn disj(&mut self) -> Result<Assertion, SourceError> {
        let mut a = self.conj()?;
        while self.eat("\\/") {
            a = Assertion::or(a, self.conj()?);
        }
        Ok(a)
    }

    fn conj(&mut self) -> Result<Assertion, SourceError> {
        let mut a = self.star()?;
        while self.eat("/\\") {
            a = Assertion::and(a, self.star()?);
        }
        Ok(a)
    }

    fn star(&mut self) -> Result<Assertion, SourceError> {
        let mut a = self.atom()?;
        while self.eat("*") {
            a = Assertion::star(a, self.atom()?);
        }
        Ok(a)
    }

    fn atom(&mut self) -> Result<Assertion, SourceError> {
        if self.eat("(") {
            let a = self.assertion()?;
            self.expect(")")?;
            return Ok(a);
        }
        if self.eat("top") {
            return Ok(Assertion::Top);
        }
        if self.eat("bot") {
            return Ok(Assertion::Bot);
        }
        let head = match self.peek() {
            Tok::Ident(s) if matches!(s.as_str(), "C" | "U" | "D") && matches!(self.peek_at(1), Tok::Sym("[")) => s.clone(),
            other => return Err(self.err::<()>(format!("expected an assertion, found {other}")).unwrap_err().into()),
        };
        self.bump();
        self.bump();
        let e = self.expr()?;
        let a = match head.as_str() {
            "C" => Assertion::certain(e),
            "D" => Assertion::defined(e),
            _ => {
                self.expect(",")?;
                let r = self.expr()?;
                Assertion::uniform(e, r)?
            }
        };
        self.expect("]")?;
        Ok(a)
    }
}

fn binder(name: &str) -> Option<Binder> {
    [Binder::Map, Binder::Filter, Binder::All, Binder::Any].into_iter().find(|b| b.keyword() == name)
}
