use xc_core::eval::{apply_function, eval, ExchangeEvent, Observer};
use xc_core::stdlib::{corpus_program, Builtin};
use xc_core::syntax::{desugar, parse, DesugarMode};
use xc_core::value::FunName;
use xc_core::{Budget, DeviceId, EvalError, Literal, NValue, Program, SensorState, VTEnv, ValueTree};

fn d(i: u32) -> DeviceId {
    DeviceId(i)
}

fn nv(text: &str) -> NValue {
    text.parse().unwrap()
}

fn corpus(name: &str) -> Program {
    let p = corpus_program(name).unwrap();
    Program::compile(p.name, p.source).unwrap()
}

fn round(p: &Program, me: u32, theta: &VTEnv, sigma: &SensorState) -> (NValue, ValueTree) {
    p.round(d(me), theta, sigma, Budget::default(), &mut ()).unwrap()
}

/// Runs `rounds` rounds on one device, each seeing only its own previous
/// tree.
fn alone(p: &Program, me: u32, sigma: &SensorState, rounds: usize) -> Vec<String> {
    let mut theta = VTEnv::new();
    let mut out = Vec::new();
    for _ in 0..rounds {
        let (w, t) = round(p, me, &theta, sigma);
        out.push(w.to_string());
        theta = VTEnv::from_entries([(d(me), t)]);
    }
    out
}

#[test]
fn arithmetic_round() {
    let p = Program::compile("t", "1 + 2").unwrap();
    let (w, t) = round(&p, 0, &VTEnv::new(), &SensorState::new());
    assert_eq!(w, nv("3[]"));
    let leaf = ValueTree::branch(vec![]);
    let expected = ValueTree::payload(NValue::lift(Literal::Builtin(Builtin::Add)), vec![leaf.clone(); 4]);
    assert_eq!(t, expected);
}

#[test]
fn conditional_records_taken_branch() {
    let p = Program::compile("t", "if (True) { 1 } else { 2 }").unwrap();
    let (w, t) = round(&p, 0, &VTEnv::new(), &SensorState::new());
    assert_eq!(w, nv("1[]"));
    let taus = p.expr().taus();
    let applied = t.root().unwrap().default().fun_name();
    assert_eq!(applied, Some(FunName::Tau(taus[0])));

    let q = Program::compile("t", "if (False) { 1 } else { 2 }").unwrap();
    let (w, t) = round(&q, 0, &VTEnv::new(), &SensorState::new());
    assert_eq!(w, nv("2[]"));
    assert_eq!(t.root().unwrap().default().fun_name(), Some(FunName::Tau(q.expr().taus()[1])));
}

#[test]
fn ping_pong_two_rounds() {
    let p = corpus("ping-pong");
    let sigma = SensorState::new();
    let (w1, t1) = round(&p, 1, &VTEnv::new(), &sigma);
    assert_eq!(w1, nv("1[]"));
    let (w2, _) = round(&p, 2, &VTEnv::from_entries([(d(1), t1)]), &sigma);
    assert_eq!(w2, nv("1[1->2]"));
}

#[test]
fn exchange_step_by_hand() {
    // The handler `(o, n) => retsend n + 1` as a function value.
    let handler = Program::compile("t", "(o, n) => retsend n + 1").unwrap();
    let (h, _) = round(&handler, 1, &VTEnv::new(), &SensorState::new());
    let theta = VTEnv::from_entries([(d(2), ValueTree::payload(nv("0[1->4]"), vec![]))]);
    let (w, t) = apply_function(
        d(1),
        &theta,
        &SensorState::new(),
        &Literal::Builtin(Builtin::Exchange),
        &[nv("0[]"), h],
        Budget::default(),
    )
    .unwrap();
    assert_eq!(w, nv("1[2->5]"));
    assert_eq!(t.root(), Some(&nv("1[2->5]")));
}

#[test]
fn self_uid_and_fold_rules() {
    let sigma = SensorState::new();
    let at = |me: u32, b: Builtin, args: &[NValue]| {
        apply_function(d(me), &VTEnv::new(), &sigma, &Literal::Builtin(b), args, Budget::default()).unwrap().0
    };
    assert_eq!(at(3, Builtin::SelfB, &[nv("0[3->7]")]), nv("7[]"));
    assert_eq!(at(3, Builtin::Uid, &[]), nv("3[]"));
    let min = NValue::lift(Literal::Builtin(Builtin::Min));
    assert_eq!(at(3, Builtin::Nfold, &[min, nv("5[1->2]"), nv("Infinity[]")]), nv("Infinity[]"));
}

#[test]
fn fold_uses_aligned_devices_only() {
    let p = Program::compile("t", "nfold(+, w, 10)").unwrap();
    let sigma = SensorState::new().with("w", nv("0[1->1, 2->2]"));
    let (_, t) = round(&p, 1, &VTEnv::new(), &sigma);
    let theta = VTEnv::from_entries([(d(1), t.clone()), (d(3), t)]);
    let (w, _) = round(&p, 2, &theta, &sigma);
    assert_eq!(w, nv("11[]"));
}

#[test]
fn distance_estimate_without_neighbours() {
    let p = corpus("distanceEstimate");
    let sigma = SensorState::new().with("n", nv("0[]")).with("senseDist", nv("Infinity[0->0]"));
    let (w, _) = round(&p, 0, &VTEnv::new(), &sigma);
    assert_eq!(w, nv("Infinity[]"));
}

#[test]
fn distance_to_alone() {
    let p = corpus("distanceTo");
    let dist = nv("Infinity[4->0]");
    let source = SensorState::new().with("src", nv("True[]")).with("senseDist", dist.clone());
    assert_eq!(alone(&p, 4, &source, 3), vec!["0[]"; 3]);
    let other = SensorState::new().with("src", nv("False[]")).with("senseDist", dist);
    assert_eq!(alone(&p, 4, &other, 3), vec!["Infinity[]"; 3]);
}

#[test]
fn self_message_carries_state() {
    assert_eq!(alone(&corpus("counter"), 0, &SensorState::new(), 3), vec!["1[]", "2[]", "3[]"]);
    assert_eq!(alone(&corpus("uniconn"), 0, &SensorState::new(), 3), vec!["0[]"; 3]);
}

#[test]
fn uniconn_counts_inbound_rounds() {
    let p = corpus("uniconn");
    let sigma = SensorState::new();
    let (_, ta) = round(&p, 0, &VTEnv::new(), &sigma);
    let mut tb: Option<ValueTree> = None;
    for k in 1..=4 {
        let mut entries = vec![(d(0), ta.clone())];
        entries.extend(tb.clone().map(|t| (d(1), t)));
        let (w, t) = round(&p, 1, &VTEnv::from_entries(entries), &sigma);
        assert_eq!(w.lookup(d(0)), &Literal::Num(k as f64));
        tb = Some(t);
    }
    // Device 0 is gone: only the self-message remains.
    let (w, _) = round(&p, 1, &VTEnv::from_entries([(d(1), tb.unwrap())]), &sigma);
    assert_eq!(w, nv("0[]"));
}

#[derive(Default)]
struct Log(Vec<ExchangeEvent>);

impl Observer for Log {
    fn exchange(&mut self, e: &ExchangeEvent) {
        self.0.push(e.clone());
    }
}

#[test]
fn nested_exchange_in_handler_aligns() {
    let p = Program::compile("t", "exchange(0, (o, n) => retsend n + exchange(1, (p, q) => retsend q))").unwrap();
    let sigma = SensorState::new();
    let (wa, ta) = round(&p, 0, &VTEnv::new(), &sigma);
    assert_eq!(wa, nv("1[]"));
    let mut log = Log::default();
    let (wb, _) = p.round(d(1), &VTEnv::from_entries([(d(0), ta)]), &sigma, Budget::default(), &mut log).unwrap();
    assert_eq!(wb, nv("1[0->2]"));
    // `retsend e` evaluates `e` twice, so the inner exchange runs at two positions.
    assert_eq!(log.0.len(), 3);
    for e in &log.0 {
        assert_eq!(e.aligned, vec![d(0)]);
    }
}

#[test]
fn branches_do_not_align() {
    let p = Program::compile("t", "if (c) { nbr(0, 1) } else { nbr(0, 2) }").unwrap();
    let yes = SensorState::new().with("c", nv("True[]"));
    let no = SensorState::new().with("c", nv("False[]"));
    let (_, ta) = round(&p, 0, &VTEnv::new(), &yes);
    let theta = VTEnv::from_entries([(d(0), ta)]);
    assert_eq!(round(&p, 1, &theta, &yes).0, nv("0[0->1]"));
    assert_eq!(round(&p, 1, &theta, &no).0, nv("0[]"));
}

#[test]
fn repeated_calls_align_by_position() {
    let src = "def f(x) { nbr(0, x) } f(1) + f(10)";
    let p = Program::compile("t", src).unwrap();
    let sigma = SensorState::new();
    let (_, ta) = round(&p, 0, &VTEnv::new(), &sigma);
    let (w, _) = round(&p, 1, &VTEnv::from_entries([(d(0), ta)]), &sigma);
    assert_eq!(w, nv("0[0->11]"));
}

#[test]
fn divergence_hits_the_budget() {
    let p = Program::compile("t", "fun loop(x) { loop(x) }(1)").unwrap();
    let e = p.round(d(0), &VTEnv::new(), &SensorState::new(), Budget::default(), &mut ()).unwrap_err();
    assert!(e.is_budget(), "{e}");
    let q = Program::compile("t", "nfold(fun g(a, b) { g(a, b) }, 1, 1)").unwrap();
    let tight = Budget { steps: 5_000, depth: 100_000 };
    // Alone, device 1 folds over nobody and terminates.
    let (_, t1) = round(&q, 1, &VTEnv::new(), &SensorState::new());
    let theta = VTEnv::from_entries([(d(1), t1)]);
    let r = q.round(d(0), &theta, &SensorState::new(), tight, &mut ());
    assert!(matches!(r, Err(EvalError::Budget(_))), "{r:?}");
}

#[test]
fn missing_input_is_reported() {
    let p = Program::compile("t", "x + 1").unwrap();
    let e = p.round(d(0), &VTEnv::new(), &SensorState::new(), Budget::default(), &mut ()).unwrap_err();
    assert_eq!(e, EvalError::MissingSensor("x".into()));
}

#[test]
fn evaluation_is_deterministic() {
    let p = corpus("closestFire");
    let sigma = SensorState::new()
        .with("temperature", nv("70[]"))
        .with("smoke", nv("20[]"))
        .with("senseDist", nv("Infinity[0->0, 1->1.5]"));
    let (_, t0) = round(&p, 0, &VTEnv::new(), &sigma);
    let theta = VTEnv::from_entries([(d(0), t0)]);
    let (w1, t1) = round(&p, 1, &theta, &sigma);
    let (w2, t2) = round(&p, 1, &theta, &sigma);
    assert!(w1.same(&w2));
    assert_eq!(t1.encode(), t2.encode());
    assert_eq!(w1, nv("0[]"));
}

#[test]
fn tree_encoding_round_trips_through_program() {
    let p = corpus("distanceTo");
    let sigma = SensorState::new().with("src", nv("False[]")).with("senseDist", nv("Infinity[0->0]"));
    let (_, t) = round(&p, 0, &VTEnv::new(), &sigma);
    let back = p.decode_tree(&t.encode()).unwrap();
    assert!(back.same(&t));
    // A decoded tree aligns like the original.
    let (w, _) = round(&p, 0, &VTEnv::from_entries([(d(0), back)]), &sigma);
    assert_eq!(w, nv("Infinity[]"));
}

#[test]
fn open_expressions_read_the_sensor_state() {
    let d0 = desugar(&parse("t", "x").unwrap(), DesugarMode::Harness).unwrap();
    let sigma = SensorState::new().with("x", nv("1[2->3]"));
    let (w, _) = eval(d(0), &VTEnv::new(), &sigma, &d0.expr, Budget::default(), &mut ()).unwrap();
    assert_eq!(w, nv("1[2->3]"));
}
