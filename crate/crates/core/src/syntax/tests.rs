use std::collections::BTreeMap;

use proptest::prelude::*;

use super::*;
use crate::expr::{BinOp, Binder, Builtin, UnOp, Var};

fn kinds() -> BTreeMap<Name, Kind> {
    [("x", Kind::Rand), ("y", Kind::Rand), ("d", Kind::Det), ("S", Kind::Det)].into_iter().map(|(n, k)| (Name::from(n), k)).collect()
}

fn e(src: &str) -> Expr {
    parse_expr(src, &kinds()).unwrap()
}

#[test]
fn precedence_and_associativity() {
    let x = || Expr::var(&Var::rand("x"));
    let d = || Expr::var(&Var::det("d"));
    assert_eq!(e("x + d * 2"), Expr::add(x(), Expr::bin(BinOp::Mul, d(), Expr::int(2))));
    assert_eq!(e("x - d - 1"), Expr::bin(BinOp::Sub, Expr::bin(BinOp::Sub, x(), d()), Expr::int(1)));
    assert_eq!(e("2 ^ 3 ^ d"), Expr::bin(BinOp::Pow, Expr::int(2), Expr::bin(BinOp::Pow, Expr::int(3), d())));
    assert_eq!(e("x == 1 || d != 2 && true"), e("(x = 1) || ((d != 2) && true)"));
    assert_eq!(e("-3"), Expr::int(-3));
    assert_eq!(e("-d"), Expr::Unary(UnOp::Neg, Box::new(d())));
    assert!(parse_expr("x = 1 = 2", &kinds()).is_err());
}

#[test]
fn literals_fold_and_postfix_chains() {
    assert_eq!(e("{3, 1}"), Expr::Const(Value::int_set([1, 3])));
    assert_eq!(e("(1,)"), Expr::Const(Value::tuple([Value::Int(1)])));
    assert_eq!(e("[\"read\", 2]"), Expr::Const(Value::Seq(vec![Value::token("read"), Value::Int(2)])));
    let s = Expr::var(&Var::det("S"));
    assert_eq!(e("S[d][0 <- 1]"), Expr::update(Expr::index(s, Expr::var(&Var::det("d"))), Expr::int(0), Expr::int(1)));
    assert!(matches!(e("{1 .. d}"), Expr::Range(..)));
}

#[test]
fn comprehensions_bind_locals() {
    let m = e("map(u in S => u + x)");
    let Expr::Comprehension { binder: Binder::Map, body, .. } = &m else { panic!("{m:?}") };
    assert_eq!(**body, Expr::add(Expr::Local("u".into()), Expr::var(&Var::rand("x"))));
    assert!(matches!(e("ei(v in {0, 1} => v + 1, {1, 2})"), Expr::EvenPartition { .. }));
    assert!(matches!(e("len(S)"), Expr::Call(Builtin::Len, _)));
    assert!(parse_expr("len(S, S)", &kinds()).is_err());
    assert!(parse_expr("u", &kinds()).is_err());
}

#[test]
fn programs_classify_and_round_trip() {
    let src = "var b := 0; var n := 3; var k := 0;\n\
               b :$= {0, 1};\n\
               if b = 1 { k := k + 1 } else { skip };\n\
               while n > 0 { n := n - 1 }";
    let p = parse_program(src).unwrap();
    assert_eq!(p.kind_of("b"), Some(Kind::Rand));
    assert_eq!(p.kind_of("k"), Some(Kind::Rand));
    assert_eq!(p.kind_of("n"), Some(Kind::Det));
    let printed = pretty::program(&p);
    assert_eq!(parse_program(&printed).unwrap(), p);
}

#[test]
fn program_errors_carry_positions() {
    let err = parse_program("var x := 0;\nx := ;").unwrap_err();
    let SourceError::Syntax(s) = err else { panic!("{err:?}") };
    assert_eq!((s.line, s.col), (2, 6));
    assert!(matches!(parse_program("det var x := 0; x :$= {0, 1}"), Err(SourceError::Kind(KindError::MustBeRandom { .. }))));
    assert!(matches!(parse_program("x := 1"), Err(SourceError::Kind(KindError::Undeclared(_)))));
}

#[test]
fn assertion_connectives() {
    let k = kinds();
    let a = parse_assertion("C[x = 1] * U[{0 .. 3}, y] /\\ D[d] -> top -* bot", &k).unwrap();
    let Assertion::Implies(l, r) = &a else { panic!() };
    assert!(matches!(**l, Assertion::And(..)));
    assert!(matches!(**r, Assertion::Wand(..)));
    assert_eq!(parse_assertion(&a.to_string(), &k).unwrap(), a);
    assert!(matches!(parse_assertion("U[x, y]", &k), Err(SourceError::Assert(_))));
}

fn arb_value() -> impl Strategy<Value = Value> {
    let leaf = prop_oneof![any::<bool>().prop_map(Value::Bool), (-20i64..20).prop_map(Value::Int), "[a-z]{1,3}".prop_map(|s| Value::token(&s)),];
    leaf.prop_recursive(2, 8, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..3).prop_map(Value::Tuple),
            prop::collection::vec(inner.clone(), 0..3).prop_map(Value::Seq),
            prop::collection::btree_set(inner, 0..3).prop_map(Value::Set),
        ]
    })
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        arb_value().prop_map(Expr::Const),
        prop_oneof![Just(Var::rand("x")), Just(Var::rand("y")), Just(Var::det("d")), Just(Var::det("S"))].prop_map(Expr::Var),
    ];
    let ops = [
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Div,
        BinOp::Mod,
        BinOp::Pow,
        BinOp::Eq,
        BinOp::Ne,
        BinOp::Lt,
        BinOp::Le,
        BinOp::Gt,
        BinOp::Ge,
        BinOp::And,
        BinOp::Or,
        BinOp::In,
        BinOp::Concat,
    ];
    leaf.prop_recursive(4, 24, 3, move |inner| {
        prop_oneof![
            (prop::sample::select(ops.to_vec()), inner.clone(), inner.clone()).prop_map(|(op, a, b)| Expr::bin(op, a, b)),
            (prop_oneof![Just(UnOp::Not), Just(UnOp::Neg)], inner.clone()).prop_map(|(op, a)| Expr::Unary(op, Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, i)| Expr::index(a, i)),
            (inner.clone(), inner.clone(), inner.clone()).prop_map(|(a, i, v)| Expr::update(a, i, v)),
            prop::collection::vec(inner.clone(), 0..3).prop_map(Expr::seq),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::range(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(s, b)| Expr::Comprehension {
                binder: Binder::Filter,
                var: "u".into(),
                source: Box::new(s),
                body: Box::new(Expr::bin(BinOp::Lt, Expr::Local("u".into()), b)),
            }),
            (inner.clone(), inner.clone(), inner).prop_map(|(a, b, c)| Expr::call(Builtin::Ite, vec![a, b, c])),
        ]
    })
}

proptest! {
    #[test]
    fn expressions_round_trip(ex in arb_expr()) {
        let printed = pretty::expr(&ex);
        let back = parse_expr(&printed, &kinds()).map_err(|err| TestCaseError::fail(format!("{printed}: {err}")))?;
        prop_assert_eq!(back, ex, "{}", printed);
    }

    #[test]
    fn values_round_trip(v in arb_value()) {
        let printed = pretty::expr(&Expr::Const(v.clone()));
        prop_assert_eq!(parse_value(&printed).unwrap(), v);
    }
}
