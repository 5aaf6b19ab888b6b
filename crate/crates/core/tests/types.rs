use xc_core::types::{unify, Type, TypeErrorKind};
use xc_core::{CompileError, Program};

fn type_of(src: &str) -> String {
    Program::compile("t", src).unwrap_or_else(|e| panic!("{src}: {e}")).main_type().to_string()
}

fn error_of(src: &str) -> TypeErrorKind {
    match Program::compile("t", src) {
        Err(CompileError::Type(e)) => e.kind,
        other => panic!("{src}: expected a type error, got {other:?}"),
    }
}

#[test]
fn corpus_listing_types() {
    for p in xc_core::stdlib::corpus() {
        let prog = Program::compile(p.name, p.source).unwrap();
        let (_, scheme) = prog.typed.defs.iter().find(|(n, _)| &**n == p.entry).unwrap();
        assert_eq!(scheme.ty.to_string(), p.expected_type, "{}", p.name);
    }
}

#[test]
fn identity_is_polymorphic() {
    assert_eq!(type_of("val id = fun id(x) { x }; pair(id(1), id(True))"), "PAIR[num, bool]");
    assert_eq!(type_of("fun id(x) { x }"), "(A) -> A");
}

#[test]
fn functions_are_not_comparable() {
    assert!(matches!(error_of("1 == (fun f(x) { x })"), TypeErrorKind::NotComparable(_)));
    assert!(matches!(error_of("(+) <= (+)"), TypeErrorKind::NotComparable(_)));
}

#[test]
fn literals_promote_to_fields() {
    assert_eq!(type_of("senseDist + 1"), "field[num]");
    assert_eq!(type_of("nfold(+, 1, 1)"), "num");
    assert_eq!(type_of("senseDist <= 2"), "field[bool]");
    assert_eq!(type_of("((x) => x + 1)(senseDist)"), "field[num]");
}

#[test]
fn ill_typed_programs() {
    assert!(matches!(error_of("1 + True"), TypeErrorKind::Mismatch { .. }));
    // A field cannot stand where a local is required.
    assert!(matches!(error_of("nfold(+, senseDist, senseDist)"), TypeErrorKind::Mismatch { .. }));
    assert!(matches!(error_of("exchange(senseDist, (o, n) => retsend n)"), TypeErrorKind::NestedField(_)));
    assert!(matches!(error_of("1(2)"), TypeErrorKind::NotAFunction(_)));
    assert!(matches!(error_of("fun f(x) { x(x) }"), TypeErrorKind::Occurs { .. }));
}

#[test]
fn unification_examples() {
    let a = Type::Var(xc_core::types::TyVar(0));
    let u = unify(&a, &Type::num()).unwrap();
    assert_eq!(u.subst.get(&xc_core::types::TyVar(0)), Some(&Type::num()));

    let u = unify(&Type::field(Type::num()), &Type::num()).unwrap();
    assert_eq!(u.lifts.len(), 1);

    let b = Type::Var(xc_core::types::TyVar(1));
    let nested = unify(&Type::field(a), &Type::field(Type::field(b))).unwrap_err();
    assert!(matches!(nested.kind, TypeErrorKind::NestedField(_)));
}

#[test]
fn inference_is_repeatable() {
    for p in xc_core::stdlib::corpus() {
        let a = Program::compile(p.name, p.source).unwrap();
        let b = Program::compile(p.name, p.source).unwrap();
        assert_eq!(a.main_type().to_string(), b.main_type().to_string());
    }
}
