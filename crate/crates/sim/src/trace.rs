use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use xc_core::{DeviceId, NValue, Program};

use crate::config::NetworkConfig;
use crate::SimError;

/// An event: the `round`-th firing of `device`, counting from 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventId {
    pub device: u32,
    pub round: u64,
}

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.device, self.round)
    }
}

impl FromStr for EventId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (d, r) = s.split_once(':').ok_or_else(|| format!("bad event id `{s}`"))?;
        Ok(EventId {
            device: d.trim().parse().map_err(|_| format!("bad device in event id `{s}`"))?,
            round: r.trim().parse().map_err(|_| format!("bad round in event id `{s}`"))?,
        })
    }
}

#[derive(Clone, Debug)]
pub struct EventRecord {
    pub id: EventId,
    pub time: f64,
    /// Events whose messages this round consumed, in device order.
    pub precursors: Vec<EventId>,
    /// The round ran out of budget: it produced nothing and sent nothing.
    pub aborted: bool,
    /// Canonical text of the result, empty when aborted.
    pub result: String,
    /// The result itself. Not available for traces read back from CSV.
    pub value: Option<NValue>,
    /// Hash of the sensor state the round saw. Kept in memory only.
    pub sensor_digest: Option<String>,
}

impl EventRecord {
    pub fn device(&self) -> DeviceId {
        DeviceId(self.id.device)
    }
}

/// Run metadata written next to the trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub config: NetworkConfig,
    /// SHA-256 of the program source, hex.
    pub program_digest: String,
    /// Positions before any waypoint applies.
    pub positions: Vec<[f64; 2]>,
}

impl TraceMeta {
    pub fn new(config: &NetworkConfig, program: &Program, positions: &[[f64; 2]]) -> TraceMeta {
        let digest = Sha256::digest(program.source.as_bytes());
        TraceMeta {
            config: config.clone(),
            program_digest: digest.iter().map(|b| format!("{b:02x}")).collect(),
            positions: positions.to_vec(),
        }
    }

    pub fn positions_at(&self, time: f64) -> Vec<[f64; 2]> {
        self.config.positions_at(&self.positions, time)
    }
}

#[derive(Clone, Debug)]
pub struct EventTrace {
    pub meta: TraceMeta,
    pub events: Vec<EventRecord>,
}

#[derive(Serialize, Deserialize)]
struct Row {
    event_id: String,
    device: u32,
    time: f64,
    round: u64,
    precursors: String,
    aborted: bool,
    result: String,
}

impl EventTrace {
    pub fn write_csv(&self, out: impl Write) -> Result<(), SimError> {
        let mut w = csv::Writer::from_writer(out);
        for e in &self.events {
            let precursors: Vec<String> = e.precursors.iter().map(|p| p.to_string()).collect();
            w.serialize(Row {
                event_id: e.id.to_string(),
                device: e.id.device,
                time: e.time,
                round: e.id.round,
                precursors: precursors.join(";"),
                aborted: e.aborted,
                result: e.result.clone(),
            })
            .map_err(|e| SimError::Trace(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_meta(&self, out: impl Write) -> Result<(), SimError> {
        serde_json::to_writer_pretty(out, &self.meta).map_err(|e| SimError::Trace(e.to_string()))
    }

    /// Writes `PREFIX.trace.csv`, `PREFIX.meta.json` and, for the end time,
    /// `PREFIX.snapshot.csv`.
    pub fn write_files(&self, prefix: &Path) -> Result<(), SimError> {
        let with = |ext: &str| {
            let mut p = prefix.as_os_str().to_owned();
            p.push(ext);
            std::path::PathBuf::from(p)
        };
        self.write_csv(std::fs::File::create(with(".trace.csv"))?)?;
        let mut meta = std::fs::File::create(with(".meta.json"))?;
        self.write_meta(&mut meta)?;
        meta.write_all(b"\n")?;
        let end = self.meta.config.end;
        write_snapshot_csv(std::fs::File::create(with(".snapshot.csv"))?, &self.snapshot(end), &self.meta.positions_at(end))
    }

    pub fn snapshot(&self, time: f64) -> BTreeMap<DeviceId, &EventRecord> {
        snapshot(&self.events, time)
    }

    pub fn aborted(&self) -> usize {
        self.events.iter().filter(|e| e.aborted).count()
    }

    /// Precursor links between different devices.
    pub fn cross_device_links(&self) -> usize {
        self.events.iter().map(|e| e.precursors.iter().filter(|p| p.device != e.id.device).count()).sum()
    }

    /// Results at `time` by device, as canonical text.
    pub fn values_at(&self, time: f64) -> BTreeMap<DeviceId, String> {
        self.snapshot(time).into_iter().map(|(d, e)| (d, e.result.clone())).collect()
    }
}

/// The latest completed result of each device at or before `time`.
pub fn snapshot(events: &[EventRecord], time: f64) -> BTreeMap<DeviceId, &EventRecord> {
    let mut out = BTreeMap::new();
    for e in events {
        if e.time <= time && !e.aborted {
            out.insert(e.device(), e);
        }
    }
    out
}

pub fn write_snapshot_csv(
    out: impl Write,
    snap: &BTreeMap<DeviceId, &EventRecord>,
    positions: &[[f64; 2]],
) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["device", "x", "y", "value"]).map_err(|e| SimError::Trace(e.to_string()))?;
    for (d, e) in snap {
        let p = positions.get(d.0 as usize).copied().unwrap_or([f64::NAN, f64::NAN]);
        w.write_record([d.0.to_string(), p[0].to_string(), p[1].to_string(), e.result.clone()])
            .map_err(|e| SimError::Trace(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace_csv(input: impl Read) -> Result<Vec<EventRecord>, SimError> {
    let mut r = csv::Reader::from_reader(input);
    let want = ["event_id", "device", "time", "round", "precursors", "aborted", "result"];
    let header = r.headers().map_err(|e| SimError::Trace(e.to_string()))?;
    if header.iter().ne(want) {
        return Err(SimError::Trace(format!("expected header `{}`", want.join(","))));
    }
    let mut out = Vec::new();
    for row in r.deserialize::<Row>() {
        let row = row.map_err(|e| SimError::Trace(e.to_string()))?;
        let id: EventId = row.event_id.parse().map_err(SimError::Trace)?;
        if id.device != row.device || id.round != row.round {
            return Err(SimError::Trace(format!("event {id} disagrees with its device or round column")));
        }
        let precursors = row
            .precursors
            .split(';')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.parse().map_err(SimError::Trace))
            .collect::<Result<_, _>>()?;
        out.push(EventRecord {
            id,
            time: row.time,
            precursors,
            aborted: row.aborted,
            result: row.result,
            value: None,
            sensor_digest: None,
        });
    }
    Ok(out)
}

/// The structural properties every execution must have.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axiom {
    /// No two precursors of an event are on the same device.
    DistinctDevices,
    /// The messaging relation has no cycles.
    Acyclicity,
    /// Every event has a finite, known past: all precursors exist.
    LocalFiniteness,
    /// Event ids are unique.
    UniqueEvents,
    /// A device's rounds advance in time, and precursors are not later than
    /// the events they feed.
    MonotoneTime,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axiom::DistinctDevices => "distinct-devices",
            Axiom::Acyclicity => "acyclicity",
            Axiom::LocalFiniteness => "local-finiteness",
            Axiom::UniqueEvents => "unique-events",
            Axiom::MonotoneTime => "monotone-time",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub axiom: Axiom,
    pub event: EventId,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated at {}: {}", self.axiom, self.event, self.detail)
    }
}

pub fn validate_trace(events: &[EventRecord]) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut index: HashMap<EventId, usize> = HashMap::new();
    for (i, e) in events.iter().enumerate() {
        if index.insert(e.id, i).is_some() {
            out.push(Violation { axiom: Axiom::UniqueEvents, event: e.id, detail: "event id appears twice".into() });
        }
    }

    let mut last: HashMap<u32, (u64, f64)> = HashMap::new();
    for e in events {
        let mut seen: HashMap<u32, EventId> = HashMap::new();
        for p in &e.precursors {
            if let Some(q) = seen.insert(p.device, *p) {
                out.push(Violation {
                    axiom: Axiom::DistinctDevices,
                    event: e.id,
                    detail: format!("precursors {q} and {p} are both on device {}", p.device),
                });
            }
            match index.get(p) {
                None => out.push(Violation {
                    axiom: Axiom::LocalFiniteness,
                    event: e.id,
                    detail: format!("precursor {p} is not in the trace"),
                }),
                Some(&j) if events[j].time > e.time => out.push(Violation {
                    axiom: Axiom::MonotoneTime,
                    event: e.id,
                    detail: format!("precursor {p} happens later, at {}", events[j].time),
                }),
                Some(_) => {}
            }
        }
        if let Some(&(round, time)) = last.get(&e.id.device) {
            if e.id.round <= round || e.time <= time {
                out.push(Violation {
                    axiom: Axiom::MonotoneTime,
                    event: e.id,
                    detail: format!("follows round {round} at time {time} on the same device"),
                });
            }
        }
        last.insert(e.id.device, (e.id.round, e.time));
    }

    // Depth-first search for cycles, reporting each at the event that
    // closes it.
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let mut mark = vec![Mark::New; events.len()];
    for start in 0..events.len() {
        if mark[start] != Mark::New {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        mark[start] = Mark::Open;
        while let Some((i, k)) = stack.last_mut() {
            let i = *i;
            let Some(p) = events[i].precursors.get(*k) else {
                mark[i] = Mark::Done;
                stack.pop();
                continue;
            };
            *k += 1;
            let Some(&j) = index.get(p) else { continue };
            match mark[j] {
                Mark::New => {
                    mark[j] = Mark::Open;
                    stack.push((j, 0));
                }
                Mark::Open => out.push(Violation {
                    axiom: Axiom::Acyclicity,
                    event: events[i].id,
                    detail: format!("precursor {p} leads back to this event"),
                }),
                Mark::Done => {}
            }
        }
    }
    out
}

/// The earliest sample time after which every periodic snapshot is the same,
/// provided at least `min_samples` equal samples follow. Samples are taken
/// at multiples of `period` up to `end`.
pub fn stabilisation(events: &[EventRecord], period: f64, end: f64, min_samples: usize) -> Option<f64> {
    let mut samples: Vec<(f64, BTreeMap<DeviceId, &str>)> = Vec::new();
    let mut k = 1u64;
    while k as f64 * period <= end {
        let t = k as f64 * period;
        samples.push((t, snapshot(events, t).into_iter().map(|(d, e)| (d, e.result.as_str())).collect()));
        k += 1;
    }
    let last = samples.last()?;
    let mut first = samples.len() - 1;
    while first > 0 && samples[first - 1].1 == last.1 {
        first -= 1;
    }
    (samples.len() - first >= min_samples && !last.1.is_empty()).then(|| samples[first].0)
}
