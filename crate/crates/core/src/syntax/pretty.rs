//! Printing in the concrete syntax. Parentheses are inserted only where the
//! grammar needs them, so printing then parsing gives back the same tree.

use std::fmt::Write;

use crate::assertion::Assertion;
use crate::command::{Command, Program};
use crate::expr::{BinOp, Expr, Kind, UnOp};
use crate::value::Value;

const UNARY: u8 = 8;
const POSTFIX: u8 = 9;

pub fn expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, 0);
    s
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Binary(op, ..) => op.precedence(),
        Expr::Unary(..) => UNARY,
        // A negative literal reads as a unary minus.
        Expr::Const(Value::Int(i)) if *i < 0 => UNARY,
        _ => POSTFIX,
    }
}

fn write_list(out: &mut String, items: &[Expr]) {
    for (i, e) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(out, e, 0);
    }
}

fn write_expr(out: &mut String, e: &Expr, min: u8) {
    if prec(e) < min {
        out.push('(');
        write_expr(out, e, 0);
        out.push(')');
        return;
    }
    match e {
        Expr::Const(v) => write_value(out, v),
        Expr::Var(v) => out.push_str(&v.name),
        Expr::Local(n) => out.push_str(n),
        Expr::Unary(op, a) => {
            out.push(match op {
                UnOp::Not => '!',
                UnOp::Neg => '-',
            });
            let mut inner = String::new();
            write_expr(&mut inner, a, UNARY);
            // `-3` would fold into a literal, and `--` is not a token pair
            // the reader expects.
            if *op == UnOp::Neg && inner.starts_with(|c: char| c.is_ascii_digit() || c == '-') {
                let _ = write!(out, "({inner})");
            } else {
                out.push_str(&inner);
            }
        }
        Expr::Binary(op, a, b) => {
            let p = op.precedence();
            let (lmin, rmin) = if p == 3 {
                (p + 1, p + 1)
            } else if op.is_right_assoc() {
                (p + 1, p)
            } else {
                (p, p + 1)
            };
            write_expr(out, a, lmin);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, b, rmin);
        }
        Expr::Tuple(items) => {
            out.push('(');
            write_list(out, items);
            if items.len() == 1 {
                out.push(',');
            }
            out.push(')');
        }
        Expr::SeqLit(items) => {
            out.push('[');
            write_list(out, items);
            out.push(']');
        }
        Expr::SetLit(items) => {
            out.push('{');
            write_list(out, items);
            out.push('}');
        }
        Expr::Range(lo, hi) => {
            out.push('{');
            write_expr(out, lo, 0);
            out.push_str(" .. ");
            write_expr(out, hi, 0);
            out.push('}');
        }
        Expr::Index(a, i) => {
            write_expr(out, a, POSTFIX);
            out.push('[');
            write_expr(out, i, 0);
            out.push(']');
        }
        Expr::Update(a, i, v) => {
            write_expr(out, a, POSTFIX);
            out.push('[');
            write_expr(out, i, 0);
            out.push_str(" <- ");
            write_expr(out, v, 0);
            out.push(']');
        }
        Expr::Call(f, args) => {
            out.push_str(f.name());
            out.push('(');
            write_list(out, args);
            out.push(')');
        }
        Expr::Comprehension { binder, var, source, body } => {
            let _ = write!(out, "{}({var} in ", binder.keyword());
            write_expr(out, source, 4);
            out.push_str(" => ");
            write_expr(out, body, 0);
            out.push(')');
        }
        Expr::EvenPartition { var, source, body, target } => {
            let _ = write!(out, "ei({var} in ");
            write_expr(out, source, 4);
            out.push_str(" => ");
            write_expr(out, body, 0);
            out.push_str(", ");
            write_expr(out, target, 0);
            out.push(')');
        }
    }
}

/// Values print as literals the parser folds back to the same constant.
fn write_value(out: &mut String, v: &Value) {
    match v {
        Value::Tuple(items) => {
            out.push('(');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_value(out, x);
            }
            if items.len() == 1 {
                out.push(',');
            }
            out.push(')');
        }
        Value::Seq(items) => {
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_value(out, x);
            }
            out.push(']');
        }
        Value::Set(items) => {
            out.push('{');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_value(out, x);
            }
            out.push('}');
        }
        Value::Token(t) => {
            out.push('"');
            for c in t.chars() {
                match c {
                    '"' | '\\' => {
                        out.push('\\');
                        out.push(c);
                    }
                    '\n' => out.push_str("\\n"),
                    '\t' => out.push_str("\\t"),
                    c => out.push(c),
                }
            }
            out.push('"');
        }
        other => {
            let _ = write!(out, "{other}");
        }
    }
}

pub fn command(c: &Command) -> String {
    let mut s = String::new();
    write_cmd(&mut s, c, 0);
    s
}

fn flatten<'a>(c: &'a Command, out: &mut Vec<&'a Command>) {
    match c {
        Command::Seq(a, b) => {
            flatten(a, out);
            flatten(b, out);
        }
        c => out.push(c),
    }
}

fn write_cmd(out: &mut String, c: &Command, indent: usize) {
    let mut parts = Vec::new();
    flatten(c, &mut parts);
    for (i, c) in parts.iter().enumerate() {
        if i > 0 {
            out.push_str(";\n");
        }
        out.push_str(&"    ".repeat(indent));
        write_simple(out, c, indent);
    }
}

fn write_block(out: &mut String, c: &Command, indent: usize) {
    out.push_str("{\n");
    write_cmd(out, c, indent + 1);
    out.push('\n');
    out.push_str(&"    ".repeat(indent));
    out.push('}');
}

fn write_simple(out: &mut String, c: &Command, indent: usize) {
    match c {
        Command::Skip => out.push_str("skip"),
        Command::Assign(x, e) => {
            let _ = write!(out, "{} := {}", x.name, expr(e));
        }
        Command::Sample(x, e) => {
            let _ = write!(out, "{} :$= {}", x.name, expr(e));
        }
        Command::Seq(..) => write_cmd(out, c, indent),
        Command::If(_, b, t, f) => {
            let _ = write!(out, "if {} ", expr(b));
            write_block(out, t, indent);
            if **f != Command::Skip {
                out.push_str(" else ");
                write_block(out, f, indent);
            }
        }
        Command::While(_, b, body) => {
            let _ = write!(out, "while {} ", expr(b));
            write_block(out, body, indent);
        }
    }
}

/// Declarations with their kinds, then the body.
pub fn program(p: &Program) -> String {
    let mut out = String::new();
    for (n, v) in p.init() {
        let kind = match p.kind_of(n) {
            Some(Kind::Rand) => "rand ",
            _ => "det ",
        };
        let mut val = String::new();
        write_value(&mut val, v);
        let _ = writeln!(out, "{kind}var {n} := {val};");
    }
    out.push_str(&command(p.body()));
    out.push('\n');
    out
}

fn assertion_prec(a: &Assertion) -> u8 {
    match a {
        Assertion::Implies(..) => 1,
        Assertion::Wand(..) => 2,
        Assertion::Or(..) => 3,
        Assertion::And(..) => 4,
        Assertion::Star(..) => 5,
        _ => 6,
    }
}

pub fn assertion(a: &Assertion) -> String {
    let mut s = String::new();
    write_assertion(&mut s, a, 0);
    s
}

fn write_assertion(out: &mut String, a: &Assertion, min: u8) {
    let p = assertion_prec(a);
    if p < min {
        out.push('(');
        write_assertion(out, a, 0);
        out.push(')');
        return;
    }
    let mut bin = |sym: &str, l: &Assertion, r: &Assertion, right: bool| {
        write_assertion(out, l, if right { p + 1 } else { p });
        let _ = write!(out, " {sym} ");
        write_assertion(out, r, if right { p } else { p + 1 });
    };
    match a {
        Assertion::Top => out.push_str("top"),
        Assertion::Bot => out.push_str("bot"),
        Assertion::Certain(Expr::Binary(BinOp::Eq, l, r)) if l == r => {
            let _ = write!(out, "D[{}]", expr(l));
        }
        Assertion::Certain(e) => {
            let _ = write!(out, "C[{}]", expr(e));
        }
        Assertion::Uniform(s, e) => {
            let _ = write!(out, "U[{}, {}]", expr(s.expr()), expr(e));
        }
        Assertion::Implies(l, r) => bin("->", l, r, true),
        Assertion::Wand(l, r) => bin("-*", l, r, true),
        Assertion::Or(l, r) => bin("\\/", l, r, false),
        Assertion::And(l, r) => bin("/\\", l, r, false),
        Assertion::Star(l, r) => bin("*", l, r, false),
    }
}
