use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use xc_core::{gen, Budget, CompileError, DeviceId, EvalError, NValue, Program, SensorState, VTEnv, ValueTree};

fn sensors(me: u32, round: u32) -> SensorState {
    let num = |x: f64| NValue::lift(xc_core::Literal::Num(x));
    let dist: NValue = format!("Infinity[0->{}, 1->1, 2->2]", me).parse().unwrap();
    SensorState::new()
        .with("time", num(round as f64))
        .with("temperature", num(20.0 + me as f64))
        .with("gps", NValue::lift(xc_core::Literal::pair(xc_core::Literal::Num(me as f64), xc_core::Literal::Num(0.0))))
        .with("senseDist", dist)
}

/// Five rounds on three fully connected devices. Returns the number of
/// aborted rounds.
fn run(p: &Program) -> Result<usize, EvalError> {
    let budget = Budget { steps: 50_000, depth: 2_000 };
    let mut trees: Vec<Option<ValueTree>> = vec![None; 3];
    let mut aborts = 0;
    for round in 0..5 {
        let theta = VTEnv::from_entries(trees.iter().enumerate().filter_map(|(i, t)| t.clone().map(|t| (DeviceId(i as u32), t))));
        for me in 0..3u32 {
            match p.round(DeviceId(me), &theta, &sensors(me, round), budget, &mut ()) {
                Ok((_, t)) => trees[me as usize] = Some(t),
                Err(EvalError::Budget(_)) => aborts += 1,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(aborts)
}

#[test]
fn well_typed_programs_do_not_get_stuck() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 1_500 {
        let src = gen::program(&mut rng, 6);
        let p = match Program::compile("gen", &src) {
            Ok(p) => p,
            Err(CompileError::Type(_)) => continue,
            Err(e) => panic!("{e}\n{src}"),
        };
        if let Err(e) = run(&p) {
            panic!("{e}\n{src}");
        }
        checked += 1;
    }
}

#[test]
fn generator_is_deterministic() {
    let a = gen::program(&mut ChaCha8Rng::seed_from_u64(3), 6);
    let b = gen::program(&mut ChaCha8Rng::seed_from_u64(3), 6);
    assert_eq!(a, b);
}
