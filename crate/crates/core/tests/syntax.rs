use std::collections::BTreeSet;

use xc_core::stdlib::{corpus, Builtin, PRELUDE};
use xc_core::syntax::{alpha_eq, desugar, free_vars, parse, pretty_print, DesugarMode, ExprKind, SurfKind};
use xc_core::Literal;

fn core(src: &str) -> xc_core::syntax::Expr {
    desugar(&parse("t", src).unwrap(), DesugarMode::Harness).unwrap().expr
}

#[test]
fn val_maps_to_val() {
    let p = parse("t", "val x = 1; x").unwrap();
    let SurfKind::Val(x, bound, body) = &p.main.unwrap().kind else { panic!() };
    assert_eq!(x, "x");
    assert_eq!(bound.kind, SurfKind::Num(1.0));
    assert_eq!(body.kind, SurfKind::Ident("x".into()));
}

#[test]
fn distance_estimate_body() {
    let e = core("nfold(min, n + senseDist, Infinity)");
    let ExprKind::App(f, args) = &e.kind else { panic!() };
    let builtin = |e: &xc_core::syntax::Expr| match &e.kind {
        ExprKind::Lit(Literal::Builtin(b)) => Some(*b),
        _ => None,
    };
    assert_eq!(builtin(f), Some(Builtin::Nfold));
    assert_eq!(builtin(&args[0]), Some(Builtin::Min));
    let ExprKind::App(plus, xs) = &args[1].kind else { panic!() };
    assert_eq!(builtin(plus), Some(Builtin::Add));
    assert!(matches!((&xs[0].kind, &xs[1].kind), (ExprKind::Var(n), ExprKind::Var(s)) if &**n == "n" && &**s == "senseDist"));
    assert!(matches!(args[2].kind, ExprKind::Lit(Literal::Num(x)) if x == f64::INFINITY));
}

#[test]
fn definition_and_call() {
    let p = parse("t", "def f(x){x} f(2)").unwrap();
    assert_eq!(p.defs.len(), 1);
    let SurfKind::Call(f, args) = &p.main.unwrap().kind else { panic!() };
    assert_eq!(f.kind, SurfKind::Ident("f".into()));
    assert_eq!(args[0].kind, SurfKind::Num(2.0));
}

#[test]
fn free_variables_of_core_forms() {
    let fv = |s: &str| free_vars(&core(s)).into_iter().map(|n| n.to_string()).collect::<BTreeSet<_>>();
    let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
    assert_eq!(fv("x"), set(&["x"]));
    assert_eq!(fv("1"), set(&[]));
    assert_eq!(fv("fun f(a) { f(a, b) }"), set(&["b"]));
    assert_eq!(fv("g(y, 2)"), set(&["g", "y"]));
    assert_eq!(fv("val x = x; x + z"), set(&["x", "z"]));
}

#[test]
fn function_names_are_unique() {
    for p in corpus() {
        let e = core(&format!("{PRELUDE}\n{}", p.source));
        let taus = e.taus();
        let distinct: BTreeSet<_> = taus.iter().collect();
        assert_eq!(distinct.len(), taus.len(), "{}", p.name);
    }
    // Identical lambdas at two positions get distinct names.
    let taus = core("pair((x) => x, (x) => x)").taus();
    assert_eq!(taus.len(), 2);
    assert_ne!(taus[0], taus[1]);
}

#[test]
fn corpus_round_trips_through_the_printer() {
    for p in corpus() {
        let e = core(&format!("{PRELUDE}\n{}", p.source));
        let text = pretty_print(&e);
        let again = core(&text);
        assert!(alpha_eq(&e, &again), "{}:\n{text}", p.name);
    }
}

#[test]
fn diagnostics_carry_positions() {
    let e = parse("f.xc", "val x = ;").unwrap_err();
    assert_eq!((e.span.line, e.span.col), (1, 9));
    let e = parse("f.xc", "1 $ 2").unwrap_err();
    assert_eq!(e.span.col, 3);
}
