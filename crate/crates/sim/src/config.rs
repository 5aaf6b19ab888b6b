use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use xc_core::{DeviceId, Literal, NValue};

use crate::SimError;

/// Everything a simulation run depends on. Read from JSON; unknown keys are
/// rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub devices: Placement,
    /// Unit-disc communication range, in meters.
    pub radius: f64,
    /// Mean time between a device's rounds, in seconds.
    pub period: f64,
    /// Each round is scheduled `period` plus a uniform draw from
    /// `[-jitter, jitter]` after the previous one.
    #[serde(default)]
    pub jitter: f64,
    /// Probability that one message to one recipient is lost.
    #[serde(default)]
    pub drop: f64,
    /// Messages older than this, in seconds, are discarded.
    pub ttl: f64,
    /// Rounds scheduled after this time do not happen.
    pub end: f64,
    #[serde(default)]
    pub seed: u64,
    /// Program file, relative to the config file.
    pub program: String,
    #[serde(default)]
    pub sensors: SensorConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mobility: Vec<Waypoint>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reboots: Vec<DeviceTime>,
    /// Devices that stop for good: they neither fire nor receive afterwards.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<DeviceTime>,
    /// Evaluation steps allowed per round.
    #[serde(default = "default_steps")]
    pub max_steps: u64,
}

fn default_steps() -> u64 {
    xc_core::Budget::default().steps
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum Placement {
    /// Device `k` at `(k mod cols, k div cols) * spacing`.
    Grid { cols: u32, rows: u32, spacing: f64 },
    /// `count` devices drawn uniformly in `[0, width] x [0, height]`.
    Random { count: u32, width: f64, height: f64 },
    Positions(Vec<[f64; 2]>),
}

/// Sensor values by name, as JSON booleans, numbers or literal text such as
/// `"Pair(1, 2)"`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorConfig {
    /// Values for every device.
    #[serde(default)]
    pub all: BTreeMap<String, serde_json::Value>,
    /// Per-device values, overriding `all`.
    #[serde(default)]
    pub devices: BTreeMap<u32, BTreeMap<String, serde_json::Value>>,
}

/// Device `device` jumps to `position` at `time`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waypoint {
    pub device: u32,
    pub time: f64,
    pub position: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceTime {
    pub device: u32,
    pub time: f64,
}

impl NetworkConfig {
    pub fn from_json(text: &str) -> Result<NetworkConfig, SimError> {
        let c: NetworkConfig = serde_json::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<NetworkConfig, SimError> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
        NetworkConfig::from_json(&text)
    }

    /// The program path resolved against the directory of `config_path`.
    pub fn program_path(&self, config_path: &Path) -> PathBuf {
        config_path.parent().unwrap_or(Path::new(".")).join(&self.program)
    }

    pub fn device_count(&self) -> usize {
        match &self.devices {
            Placement::Grid { cols, rows, .. } => (*cols as usize) * (*rows as usize),
            Placement::Random { count, .. } => *count as usize,
            Placement::Positions(ps) => ps.len(),
        }
    }

    // Negated comparisons also reject NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Config(m));
        if !(self.radius > 0.0) {
            return bad(format!("radius must be positive, got {}", self.radius));
        }
        if !(self.period > 0.0) {
            return bad(format!("period must be positive, got {}", self.period));
        }
        if !(self.jitter >= 0.0 && self.jitter < self.period) {
            return bad(format!("jitter must be in [0, period), got {}", self.jitter));
        }
        if !(self.drop >= 0.0 && self.drop <= 1.0) {
            return bad(format!("drop must be in [0, 1], got {}", self.drop));
        }
        if !(self.ttl > 0.0) {
            return bad(format!("ttl must be positive, got {}", self.ttl));
        }
        if !(self.end >= 0.0) {
            return bad(format!("end must not be negative, got {}", self.end));
        }
        let n = self.device_count();
        if n == 0 {
            return bad("the network has no devices".into());
        }
        let known = |d: u32, what: &str| {
            if (d as usize) < n {
                Ok(())
            } else {
                Err(SimError::Config(format!("{what} names device {d}, but there are only {n}")))
            }
        };
        for w in &self.mobility {
            known(w.device, "a waypoint")?;
        }
        for r in &self.reboots {
            known(r.device, "a reboot")?;
        }
        for f in &self.failures {
            known(f.device, "a failure")?;
        }
        for d in self.sensors.devices.keys() {
            known(*d, "a sensor override")?;
        }
        self.sensor_overrides(DeviceId(0))?;
        for d in self.sensors.devices.keys() {
            self.sensor_overrides(DeviceId(*d))?;
        }
        Ok(())
    }

    /// Initial positions. Random placement draws from `rng` before anything
    /// else does.
    pub(crate) fn initial_positions(&self, rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
        match &self.devices {
            Placement::Grid { cols, rows, spacing } => (0..cols * rows)
                .map(|k| [(k % cols) as f64 * spacing, (k / cols) as f64 * spacing])
                .collect(),
            Placement::Random { count, width, height } => {
                (0..*count).map(|_| [rng.gen::<f64>() * width, rng.gen::<f64>() * height]).collect()
            }
            Placement::Positions(ps) => ps.clone(),
        }
    }

    /// Positions at `time`, given the initial ones: the latest waypoint at or
    /// before `time` wins.
    pub fn positions_at(&self, initial: &[[f64; 2]], time: f64) -> Vec<[f64; 2]> {
        let mut out = initial.to_vec();
        for w in self.waypoints() {
            if w.time <= time {
                out[w.device as usize] = w.position;
            }
        }
        out
    }

    /// Waypoints in application order.
    pub(crate) fn waypoints(&self) -> Vec<&Waypoint> {
        let mut ws: Vec<&Waypoint> = self.mobility.iter().collect();
        ws.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.device.cmp(&b.device)));
        ws
    }

    /// The configured sensor values for one device.
    pub fn sensor_overrides(&self, d: DeviceId) -> Result<Vec<(String, NValue)>, SimError> {
        let mut merged = self.sensors.all.clone();
        if let Some(own) = self.sensors.devices.get(&d.0) {
            merged.extend(own.iter().map(|(k, v)| (k.clone(), v.clone())));
        }
        merged.into_iter().map(|(k, v)| Ok((k.clone(), NValue::lift(json_literal(&k, &v)?)))).collect()
    }
}

fn json_literal(name: &str, v: &serde_json::Value) -> Result<Literal, SimError> {
    match v {
        serde_json::Value::Bool(b) => Ok(Literal::Bool(*b)),
        serde_json::Value::Number(n) => n
            .as_f64()
            .map(Literal::Num)
            .ok_or_else(|| SimError::Config(format!("sensor `{name}`: {n} is not a number"))),
        serde_json::Value::String(s) => {
            xc_core::syntax::parse_literal(s).map_err(|e| SimError::Config(format!("sensor `{name}`: {e}")))
        }
        other => Err(SimError::Config(format!("sensor `{name}`: unsupported value {other}"))),
    }
}
