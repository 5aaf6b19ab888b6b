use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use xc_core::eval::Observer;
use xc_core::{Budget, DeviceId, Literal, NValue, Program, SensorState, VTEnv, ValueTree};

use crate::config::NetworkConfig;
use crate::trace::{EventId, EventRecord, EventTrace, TraceMeta};
use crate::SimError;

/// Instrumentation for a whole run. `begin` is called before each round's
/// evaluation and `fired` after it, so the evaluation hooks in between
/// belong to that round.
pub trait SimObserver: Observer {
    fn begin(&mut self, _event: EventId, _time: f64, _theta: &VTEnv) {}
    fn fired(&mut self, _record: &EventRecord) {}
}

impl SimObserver for () {}

/// A buffered message.
#[derive(Clone, Debug)]
struct Message {
    tree: ValueTree,
    received: f64,
    sender_pos: [f64; 2],
    event: EventId,
}

#[derive(Clone, Debug)]
struct Device {
    pos: [f64; 2],
    round: u64,
    alive: bool,
    buffer: BTreeMap<DeviceId, Message>,
    sensors: Vec<(String, NValue)>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Pending {
    time: f64,
    device: DeviceId,
}

impl Eq for Pending {}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time.total_cmp(&other.time).then(self.device.cmp(&other.device))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A simulation in progress.
pub struct Simulation<'p> {
    config: NetworkConfig,
    program: &'p Program,
    rng: ChaCha8Rng,
    initial: Vec<[f64; 2]>,
    devices: Vec<Device>,
    queue: BinaryHeap<Reverse<Pending>>,
    /// Waypoints, reboots and failures in application order, with a cursor
    /// each.
    moves: Vec<(f64, DeviceId, [f64; 2])>,
    reboots: Vec<(f64, DeviceId)>,
    failures: Vec<(f64, DeviceId)>,
    cursors: [usize; 3],
}

fn by_time(xs: &[crate::config::DeviceTime]) -> Vec<(f64, DeviceId)> {
    let mut v: Vec<(f64, DeviceId)> = xs.iter().map(|x| (x.time, DeviceId(x.device))).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    v
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

impl<'p> Simulation<'p> {
    /// Places the devices and draws their first fire times.
    pub fn new(config: &NetworkConfig, program: &'p Program) -> Result<Simulation<'p>, SimError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let initial = config.initial_positions(&mut rng);
        let mut devices = Vec::with_capacity(initial.len());
        for (i, p) in initial.iter().enumerate() {
            let sensors = config.sensor_overrides(DeviceId(i as u32))?;
            devices.push(Device { pos: *p, round: 0, alive: true, buffer: BTreeMap::new(), sensors });
        }
        let mut sim = Simulation {
            config: config.clone(),
            program,
            rng,
            initial,
            devices,
            queue: BinaryHeap::new(),
            moves: config.waypoints().into_iter().map(|w| (w.time, DeviceId(w.device), w.position)).collect(),
            reboots: by_time(&config.reboots),
            failures: by_time(&config.failures),
            cursors: [0; 3],
        };
        for i in 0..sim.devices.len() {
            let t = sim.interval();
            sim.queue.push(Reverse(Pending { time: t, device: DeviceId(i as u32) }));
        }
        Ok(sim)
    }

    fn interval(&mut self) -> f64 {
        let j = self.config.jitter;
        if j > 0.0 {
            self.config.period + self.rng.gen_range(-j..=j)
        } else {
            self.config.period
        }
    }

    pub fn initial_positions(&self) -> &[[f64; 2]] {
        &self.initial
    }

    /// Current positions.
    pub fn positions(&self) -> Vec<[f64; 2]> {
        self.devices.iter().map(|d| d.pos).collect()
    }

    /// The time of the next round, if one remains before the end.
    pub fn next_time(&self) -> Option<f64> {
        self.queue.peek().map(|p| p.0.time).filter(|t| *t <= self.config.end)
    }

    /// Applies scheduled moves, reboots and failures up to `t`.
    fn apply_schedule(&mut self, t: f64) {
        while let Some(&(at, d, p)) = self.moves.get(self.cursors[0]) {
            if at > t {
                break;
            }
            self.devices[d.0 as usize].pos = p;
            self.cursors[0] += 1;
        }
        while let Some(&(at, d)) = self.reboots.get(self.cursors[1]) {
            if at > t {
                break;
            }
            self.devices[d.0 as usize].buffer.clear();
            self.cursors[1] += 1;
        }
        while let Some(&(at, d)) = self.failures.get(self.cursors[2]) {
            if at > t {
                break;
            }
            self.devices[d.0 as usize].alive = false;
            self.cursors[2] += 1;
        }
    }

    /// Runs the next round. Returns `None` once the end time is reached.
    pub fn step(&mut self, observer: &mut dyn SimObserver) -> Result<Option<EventRecord>, SimError> {
        loop {
            let Some(Reverse(next)) = self.queue.peek().copied() else { return Ok(None) };
            if next.time > self.config.end {
                return Ok(None);
            }
            self.queue.pop();
            self.apply_schedule(next.time);
            if self.devices[next.device.0 as usize].alive {
                return self.fire(next.device, next.time, observer).map(Some);
            }
        }
    }

    fn fire(&mut self, me: DeviceId, t: f64, observer: &mut dyn SimObserver) -> Result<EventRecord, SimError> {
        let ttl = self.config.ttl;
        let dev = &mut self.devices[me.0 as usize];
        dev.round += 1;
        let id = EventId { device: me.0, round: dev.round };
        dev.buffer.retain(|_, m| t - m.received <= ttl);

        let theta = VTEnv::from_entries(dev.buffer.iter().map(|(d, m)| (*d, m.tree.clone())));
        let precursors: Vec<EventId> = dev.buffer.values().map(|m| m.event).collect();
        let sigma = self.sensors(me, t);
        let digest = sensor_digest(&sigma);

        observer.begin(id, t, &theta);
        let budget = Budget { steps: self.config.max_steps, ..Budget::default() };
        let outcome = self.program.round(me, &theta, &sigma, budget, observer);
        let (result, aborted) = match outcome {
            Ok((w, tree)) => {
                self.broadcast(me, t, id, tree);
                (Some(w), false)
            }
            Err(e) if e.is_budget() => (None, true),
            Err(error) => return Err(SimError::Eval { device: me.0, time: t, error }),
        };
        let record = EventRecord {
            id,
            time: t,
            precursors,
            aborted,
            result: result.as_ref().map(|w| w.to_string()).unwrap_or_default(),
            value: result,
            sensor_digest: Some(digest),
        };
        observer.fired(&record);

        let next = t + self.interval();
        self.queue.push(Reverse(Pending { time: next, device: me }));
        Ok(record)
    }

    fn sensors(&self, me: DeviceId, t: f64) -> SensorState {
        let dev = &self.devices[me.0 as usize];
        let mut sigma = SensorState::new();
        sigma.set("time", NValue::lift(Literal::Num(t)));
        sigma.set("gps", NValue::lift(Literal::pair(Literal::Num(dev.pos[0]), Literal::Num(dev.pos[1]))));
        let dists = dev.buffer.iter().map(|(d, m)| {
            let x = if *d == me { 0.0 } else { distance(dev.pos, m.sender_pos) };
            (*d, Literal::Num(x))
        });
        let sense = NValue::from_entries(Literal::Num(f64::INFINITY), dists).update_self(me, Literal::Num(0.0));
        sigma.set(xc_core::stdlib::SENSE_DIST, sense);
        for (k, v) in &dev.sensors {
            sigma.set(k.clone(), v.clone());
        }
        sigma
    }

    /// Stores `tree` at the sender and at every live device in range that
    /// does not lose it.
    fn broadcast(&mut self, me: DeviceId, t: f64, event: EventId, tree: ValueTree) {
        let pos = self.devices[me.0 as usize].pos;
        let msg = Message { tree, received: t, sender_pos: pos, event };
        let (radius, drop) = (self.config.radius, self.config.drop);
        for i in 0..self.devices.len() {
            let d = DeviceId(i as u32);
            if d == me || !self.devices[i].alive || distance(pos, self.devices[i].pos) > radius {
                continue;
            }
            // One draw per recipient keeps the stream aligned across drop
            // rates.
            if self.rng.gen::<f64>() >= drop {
                self.devices[i].buffer.insert(me, msg.clone());
            }
        }
        self.devices[me.0 as usize].buffer.insert(me, msg);
    }
}

fn sensor_digest(sigma: &SensorState) -> String {
    let mut names: Vec<&str> = sigma.names().collect();
    names.sort_unstable();
    let mut h = Sha256::new();
    for n in names {
        h.update(n.as_bytes());
        h.update(b"=");
        h.update(sigma.get(n).map(|w| w.to_string()).unwrap_or_default().as_bytes());
        h.update(b"\n");
    }
    let out = h.finalize();
    out[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs a whole simulation.
pub fn run(config: &NetworkConfig, program: &Program) -> Result<EventTrace, SimError> {
    run_observed(config, program, &mut ())
}

pub fn run_observed(
    config: &NetworkConfig,
    program: &Program,
    observer: &mut dyn SimObserver,
) -> Result<EventTrace, SimError> {
    let mut sim = Simulation::new(config, program)?;
    let mut events = Vec::new();
    while let Some(e) = sim.step(observer)? {
        events.push(e);
    }
    Ok(EventTrace { meta: TraceMeta::new(config, program, sim.initial_positions()), events })
}
