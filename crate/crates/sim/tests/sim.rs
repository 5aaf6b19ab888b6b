use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use xc_core::{DeviceId, Program};
use xc_sim::{run, run_observed, stabilisation, validate_trace, EventId, EventRecord, NetworkConfig, SimObserver, Simulation};

fn corpus(name: &str) -> Program {
    let path = format!("{}/../../corpus/{name}.xc", env!("CARGO_MANIFEST_DIR"));
    Program::compile(name, &std::fs::read_to_string(path).unwrap()).unwrap()
}

fn config(devices: &str, extra: &str) -> NetworkConfig {
    NetworkConfig::from_json(&format!(
        r#"{{"devices": {devices}, "radius": 1.5, "period": 1, "ttl": 2, "end": 10, "program": "p.xc" {extra}}}"#
    ))
    .unwrap()
}

fn pair() -> &'static str {
    r#"{"positions": [[0, 0], [1, 0]]}"#
}

fn grid(n: u32) -> String {
    format!(r#"{{"grid": {{"cols": {n}, "rows": {n}, "spacing": 1}}}}"#)
}

fn results(events: &[EventRecord], d: u32) -> Vec<String> {
    events.iter().filter(|e| e.id.device == d).map(|e| e.result.clone()).collect()
}

/// Shortest paths from `sources` over the unit-disc graph, by repeated
/// relaxation until nothing changes.
fn shortest_paths(pos: &[[f64; 2]], radius: f64, sources: &[usize]) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; pos.len()];
    for &s in sources {
        dist[s] = 0.0;
    }
    loop {
        let mut changed = false;
        for i in 0..pos.len() {
            for j in 0..pos.len() {
                let d = ((pos[i][0] - pos[j][0]).powi(2) + (pos[i][1] - pos[j][1]).powi(2)).sqrt();
                if i != j && d <= radius && dist[j] + d < dist[i] {
                    dist[i] = dist[j] + d;
                    changed = true;
                }
            }
        }
        if !changed {
            return dist;
        }
    }
}

#[test]
fn zero_jitter_fires_together_in_device_order() {
    let p = corpus("counter");
    let mut sim = Simulation::new(&config(pair(), ""), &p).unwrap();
    let a = sim.step(&mut ()).unwrap().unwrap();
    let b = sim.step(&mut ()).unwrap().unwrap();
    assert_eq!((a.id, a.time), (EventId { device: 0, round: 1 }, 1.0));
    assert_eq!((b.id, b.time), (EventId { device: 1, round: 1 }, 1.0));
}

#[test]
fn same_seed_same_start() {
    let p = corpus("counter");
    let c = config(r#"{"random": {"count": 20, "width": 5, "height": 5}}"#, r#", "jitter": 0.3, "seed": 42"#);
    let a = Simulation::new(&c, &p).unwrap();
    let b = Simulation::new(&c, &p).unwrap();
    assert_eq!(a.positions(), b.positions());
    assert_eq!(a.next_time(), b.next_time());
    let other = NetworkConfig { seed: 43, ..c };
    assert_ne!(Simulation::new(&other, &p).unwrap().positions(), a.positions());
}

#[test]
fn isolated_device_has_no_distance() {
    let c = config(r#"{"positions": [[0, 0]]}"#, r#", "sensors": {"all": {"src": false}}"#);
    let t = run(&c, &corpus("distanceTo")).unwrap();
    assert_eq!(t.events.len(), 10);
    assert!(t.events.iter().all(|e| e.result == "Infinity[]"));
}

#[test]
fn total_loss_leaves_devices_alone() {
    let c = config(&grid(3), r#", "drop": 1.0, "sensors": {"all": {"src": false}}"#);
    let t = run(&c, &corpus("distanceTo")).unwrap();
    assert!(!t.events.is_empty());
    assert_eq!(t.cross_device_links(), 0);
}

#[test]
fn nothing_happens_before_the_first_round() {
    let c = NetworkConfig { end: 0.0, ..config(pair(), "") };
    assert!(run(&c, &corpus("counter")).unwrap().events.is_empty());
}

#[test]
fn identical_configs_give_identical_files() {
    let c = config(&grid(4), r#", "jitter": 0.3, "drop": 0.3, "seed": 5, "sensors": {"all": {"src": false}, "devices": {"0": {"src": true}}}"#);
    let p = corpus("distanceTo");
    let bytes = || {
        let mut out = Vec::new();
        run(&c, &p).unwrap().write_csv(&mut out).unwrap();
        out
    };
    let a = bytes();
    assert_eq!(a, bytes());
    let mut other = Vec::new();
    run(&NetworkConfig { seed: 6, ..c.clone() }, &p).unwrap().write_csv(&mut other).unwrap();
    assert_ne!(a, other);
}

#[test]
fn gradient_matches_shortest_paths() {
    let c = NetworkConfig { end: 20.0, ..config(&grid(6), r#", "sensors": {"all": {"src": false}, "devices": {"0": {"src": true}}}"#) };
    let t = run(&c, &corpus("distanceTo")).unwrap();
    let expect = shortest_paths(&t.meta.positions, 1.5, &[0]);
    for (d, e) in t.snapshot(20.0) {
        let got = e.value.as_ref().unwrap().default().as_num().unwrap();
        assert!((got - expect[d.0 as usize]).abs() < 1e-9, "device {d}: {got} vs {}", expect[d.0 as usize]);
    }
}

#[test]
fn lockstep_snapshot_holds_round_k() {
    let t = run(&config(pair(), ""), &corpus("counter")).unwrap();
    for k in 1..=10u64 {
        let snap = t.snapshot(k as f64);
        assert_eq!(snap.len(), 2);
        assert!(snap.values().all(|e| e.id.round == k && e.result == format!("{k}[]")));
    }
}

#[test]
fn own_state_expires_like_any_message() {
    // A lifetime shorter than the period forgets the previous round.
    let c = NetworkConfig { ttl: 0.5, ..config(r#"{"positions": [[0, 0]]}"#, "") };
    let t = run(&c, &corpus("counter")).unwrap();
    assert!(t.events.iter().all(|e| e.result == "1[]" && e.precursors.is_empty()));
}

#[test]
fn reboot_clears_the_buffer() {
    let c = config(r#"{"positions": [[0, 0]]}"#, r#", "reboots": [{"device": 0, "time": 4.5}]"#);
    let t = run(&c, &corpus("counter")).unwrap();
    assert_eq!(results(&t.events, 0), ["1[]", "2[]", "3[]", "4[]", "1[]", "2[]", "3[]", "4[]", "5[]", "6[]"]);
}

#[test]
fn only_the_latest_message_per_sender_is_kept() {
    // Device 1 fires twice between rounds of device 0, which must see one
    // precursor from it: the later one.
    let c = NetworkConfig::from_json(
        r#"{"devices": {"positions": [[0, 0], [1, 0]]}, "radius": 1.5, "period": 1, "ttl": 5, "end": 4, "program": "p.xc",
            "failures": []}"#,
    )
    .unwrap();
    let p = corpus("ping-pong");
    let t = run(&c, &p).unwrap();
    for (i, e) in t.events.iter().enumerate() {
        let from: Vec<u32> = e.precursors.iter().map(|p| p.device).collect();
        let distinct: BTreeSet<u32> = from.iter().copied().collect();
        assert_eq!(from.len(), distinct.len());
        for q in &e.precursors {
            let latest = t.events[..i].iter().rfind(|x| x.id.device == q.device);
            assert_eq!(Some(*q), latest.map(|x| x.id));
        }
    }
}

#[test]
fn moving_out_of_range_cuts_the_link() {
    let c = config(pair(), r#", "mobility": [{"device": 1, "time": 4.5, "position": [10, 0]}]"#);
    let t = run(&c, &corpus("ping-pong")).unwrap();
    // Device 0 fires first in each round, so it hears device 1 from round 2
    // on. The last message from device 1 expires two periods after the move.
    for e in t.events.iter().filter(|e| e.id.device == 0) {
        let hears = e.precursors.iter().any(|p| p.device == 1);
        assert_eq!(hears, (2.0..=6.0).contains(&e.time), "at {}", e.time);
    }
}

#[test]
fn failed_devices_stop() {
    let c = config(pair(), r#", "failures": [{"device": 1, "time": 3.5}]"#);
    let t = run(&c, &corpus("counter")).unwrap();
    assert_eq!(results(&t.events, 1).len(), 3);
    assert_eq!(results(&t.events, 0).len(), 10);
}

#[test]
fn budget_exhaustion_aborts_silently() {
    let p = Program::compile("loop", "def f(x) { f(x + 1) } def g() { pair(nbr(0, uid()), f(0)) }").unwrap();
    let c = NetworkConfig { max_steps: 2_000, ..config(pair(), "") };
    let t = run(&c, &p).unwrap();
    assert!(t.events.iter().all(|e| e.aborted && e.result.is_empty()));
    assert_eq!(t.cross_device_links(), 0);
    assert!(t.snapshot(10.0).is_empty());
}

#[test]
fn gradient_settles() {
    let c = NetworkConfig { end: 40.0, ttl: 10.0, ..config(&grid(5), r#", "jitter": 0.2, "drop": 0.1, "seed": 3, "sensors": {"all": {"src": false}, "devices": {"0": {"src": true}}}"#) };
    let t = run(&c, &corpus("distanceTo")).unwrap();
    let at = stabilisation(&t.events, 1.0, 40.0, 3).expect("never settled");
    assert!(at < 30.0);
}

#[derive(Default)]
struct Log {
    begun: Vec<EventId>,
    fired: Vec<EventId>,
    exchanges: BTreeMap<EventId, usize>,
    current: Option<EventId>,
}

impl xc_core::eval::Observer for Log {
    fn exchange(&mut self, _: &xc_core::eval::ExchangeEvent) {
        *self.exchanges.entry(self.current.unwrap()).or_default() += 1;
    }
}

impl SimObserver for Log {
    fn begin(&mut self, event: EventId, _time: f64, _theta: &xc_core::VTEnv) {
        self.begun.push(event);
        self.current = Some(event);
    }
    fn fired(&mut self, record: &EventRecord) {
        self.fired.push(record.id);
    }
}

#[test]
fn observer_sees_every_round() {
    let mut log = Log::default();
    let t = run_observed(&config(pair(), ""), &corpus("ping-pong"), &mut log).unwrap();
    let ids: Vec<EventId> = t.events.iter().map(|e| e.id).collect();
    assert_eq!(log.begun, ids);
    assert_eq!(log.fired, ids);
    assert!(log.exchanges.values().all(|&n| n == 1));
}

#[test]
fn sense_dist_uses_sender_positions() {
    let p = Program::compile("d", "def g() { nfold(min, senseDist, Infinity) }").unwrap();
    let c = config(r#"{"positions": [[0, 0], [0.6, 0.8], [5, 5]]}"#, "");
    let t = run(&c, &p).unwrap();
    let last = t.snapshot(10.0);
    assert_eq!(last[&DeviceId(0)].result, "1[]");
    assert_eq!(last[&DeviceId(2)].result, "Infinity[]");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn simulated_traces_satisfy_the_axioms(
        seed in 0u64..1000, count in 1u32..12, drop in 0.0f64..0.9, jitter in 0.0f64..0.9, ttl in 0.2f64..4.0,
    ) {
        let c = NetworkConfig::from_json(&format!(
            r#"{{"devices": {{"random": {{"count": {count}, "width": 4, "height": 4}}}}, "radius": 1.5, "period": 1,
                "jitter": {jitter}, "drop": {drop}, "ttl": {ttl}, "end": 15, "seed": {seed}, "program": "p.xc",
                "sensors": {{"all": {{"src": false}}, "devices": {{"0": {{"src": true}}}}}},
                "reboots": [{{"device": 0, "time": 5}}], "mobility": [{{"device": 0, "time": 7, "position": [3, 3]}}]}}"#
        )).unwrap();
        let t = run(&c, &corpus("distanceTo")).unwrap();
        prop_assert!(validate_trace(&t.events).is_empty());
        for e in &t.events {
            prop_assert!(e.precursors.iter().all(|p| p.device == e.id.device || t.events.iter().any(|x| x.id == *p && x.time >= e.time - ttl)));
        }
    }
}
