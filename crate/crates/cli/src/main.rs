//! `xc`: type-check XC programs, run device rounds, simulate networks and
//! inspect traces.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use xc_core::{Budget, DeviceId, Literal, NValue, Program, SensorState, VTEnv, ValueTree};
use xc_sim::{NetworkConfig, SimError};

#[derive(Parser)]
#[command(name = "xc", version, about = "Type-check, run and simulate eXchange Calculus programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the type of every definition in a program.
    Typecheck { file: PathBuf },
    /// Run rounds of one device, each seeing the previous round's own message.
    Run {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        rounds: u32,
        /// Identifier of the running device.
        #[arg(long, default_value_t = 0)]
        device: u32,
        /// Sensor or input value, as `name=literal`.
        #[arg(long = "sensor", value_name = "NAME=LITERAL")]
        sensors: Vec<String>,
        /// A neighbour's value tree, as `device=file`, delivered every round.
        #[arg(long = "neighbour-tree", value_name = "DEVICE=FILE")]
        neighbour_trees: Vec<String>,
        /// Write the last round's value tree here.
        #[arg(long, value_name = "FILE")]
        save_tree: Option<PathBuf>,
    },
    /// Simulate a network described by a JSON config.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Write PREFIX.trace.csv, PREFIX.meta.json and PREFIX.snapshot.csv.
        #[arg(long, value_name = "PREFIX")]
        out: Option<PathBuf>,
    },
    /// Check a trace against the event structure axioms.
    TraceCheck { trace: PathBuf },
    /// Print the latest result of every device at a given time, as CSV.
    Snapshot {
        trace: PathBuf,
        #[arg(long)]
        time: f64,
        /// Metadata with device positions. Defaults to the trace's sibling
        /// `.meta.json`.
        #[arg(long)]
        meta: Option<PathBuf>,
    },
}

/// Domain failures exit with 1, malformed input with 2.
enum Failure {
    Domain(anyhow::Error),
    Usage(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Domain(e)
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Typecheck { file } => typecheck(&file),
        Command::Run { file, rounds, device, sensors, neighbour_trees, save_tree } => {
            run(&file, rounds, DeviceId(device), &sensors, &neighbour_trees, save_tree.as_deref())
        }
        Command::Simulate { config, seed, out } => simulate(&config, seed, out.as_deref()),
        Command::TraceCheck { trace } => trace_check(&trace),
        Command::Snapshot { trace, time, meta } => snapshot(&trace, time, meta.as_deref()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())).map_err(Failure::Usage)
}

fn compile(path: &Path) -> Result<Program, Failure> {
    let src = read(path)?;
    Ok(Program::compile(&path.display().to_string(), &src).map_err(|e| anyhow!("{e}"))?)
}

fn typecheck(file: &Path) -> Outcome {
    let p = compile(file)?;
    for name in &p.own_defs {
        if let Some((_, scheme)) = p.typed.defs.iter().find(|(n, _)| n == name) {
            println!("{name} : {}", scheme.ty);
        }
    }
    if p.surface.main.is_some() {
        println!("main : {}", p.main_type());
    }
    Ok(())
}

fn split_assignment<'a>(s: &'a str, what: &str) -> Result<(&'a str, &'a str), Failure> {
    s.split_once('=').ok_or_else(|| Failure::Usage(anyhow!("{what} `{s}` is not of the form key=value")))
}

fn run(
    file: &Path,
    rounds: u32,
    me: DeviceId,
    sensors: &[String],
    trees: &[String],
    save_tree: Option<&Path>,
) -> Outcome {
    let p = compile(file)?;
    let mut neighbours: Vec<(DeviceId, ValueTree)> = Vec::new();
    for t in trees {
        let (d, path) = split_assignment(t, "neighbour tree")?;
        let d: u32 = d.parse().map_err(|_| Failure::Usage(anyhow!("`{d}` is not a device id")))?;
        let bytes = std::fs::read(path).with_context(|| format!("cannot read {path}")).map_err(Failure::Usage)?;
        let tree = p.decode_tree(&bytes).map_err(|e| anyhow!("{path}: {e}"))?;
        neighbours.push((DeviceId(d), tree));
    }
    let mut overrides = Vec::new();
    for s in sensors {
        let (k, v) = split_assignment(s, "sensor")?;
        // A plain literal is the same on every device; nvalue text is also
        // accepted.
        let w = match xc_core::syntax::parse_literal(v) {
            Ok(l) => NValue::lift(l),
            Err(_) => p.parse_nvalue(v).map_err(|e| Failure::Usage(anyhow!("sensor `{k}`: {e}")))?,
        };
        overrides.push((k.to_string(), w));
    }

    let mut own: Option<ValueTree> = None;
    for round in 1..=rounds {
        let mut entries = neighbours.clone();
        entries.retain(|(d, _)| *d != me);
        if let Some(t) = &own {
            entries.push((me, t.clone()));
        }
        entries.sort_by_key(|(d, _)| *d);
        let theta = VTEnv::from_entries(entries);

        let mut sigma = SensorState::new();
        sigma.set("time", NValue::lift(Literal::Num(round as f64)));
        sigma.set("gps", NValue::lift(Literal::pair(Literal::Num(0.0), Literal::Num(0.0))));
        // Injected neighbours are one unit away.
        let dist = neighbours.iter().map(|(d, _)| (*d, Literal::Num(1.0)));
        let sense = NValue::from_entries(Literal::Num(f64::INFINITY), dist).update_self(me, Literal::Num(0.0));
        sigma.set(xc_core::stdlib::SENSE_DIST, sense);
        for (k, w) in &overrides {
            sigma.set(k.clone(), w.clone());
        }

        let (w, tree) = p.round(me, &theta, &sigma, Budget::default(), &mut ()).map_err(|e| anyhow!("round {round}: {e}"))?;
        println!("{w}");
        own = Some(tree);
    }
    if let (Some(path), Some(tree)) = (save_tree, &own) {
        std::fs::write(path, tree.encode()).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

fn sim_error(e: SimError) -> Failure {
    Failure::Domain(anyhow!("{e}"))
}

fn simulate(config_path: &Path, seed: Option<u64>, out: Option<&Path>) -> Outcome {
    let mut config = NetworkConfig::from_json(&read(config_path)?).map_err(sim_error)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    let program = compile(&config.program_path(config_path))?;
    let trace = xc_sim::run(&config, &program).map_err(sim_error)?;
    if let Some(prefix) = out {
        trace.write_files(prefix).map_err(sim_error)?;
    }
    println!("events: {}", trace.events.len());
    println!("aborted: {}", trace.aborted());
    println!("cross-device precursors: {}", trace.cross_device_links());
    match xc_sim::stabilisation(&trace.events, config.period, config.end, 3) {
        Some(t) => println!("stabilised at: {t}"),
        None => println!("stabilised at: not detected"),
    }
    Ok(())
}

fn load_trace(path: &Path) -> Result<Vec<xc_sim::EventRecord>, Failure> {
    let file = std::fs::File::open(path).with_context(|| format!("cannot read {}", path.display())).map_err(Failure::Usage)?;
    xc_sim::read_trace_csv(file).map_err(|e| Failure::Usage(anyhow!("{}: {e}", path.display())))
}

fn trace_check(path: &Path) -> Outcome {
    let events = load_trace(path)?;
    let violations = xc_sim::validate_trace(&events);
    for v in &violations {
        println!("{v}");
    }
    if !violations.is_empty() {
        return Err(anyhow!("{} violation(s) in {} events", violations.len(), events.len()).into());
    }
    println!("ok: {} events, no violations", events.len());
    Ok(())
}

fn snapshot(path: &Path, time: f64, meta: Option<&Path>) -> Outcome {
    let events = load_trace(path)?;
    let meta_path = match meta {
        Some(m) => m.to_path_buf(),
        None => {
            let s = path.to_string_lossy();
            PathBuf::from(format!("{}.meta.json", s.strip_suffix(".trace.csv").unwrap_or(&s)))
        }
    };
    let meta: xc_sim::TraceMeta = serde_json::from_str(&read(&meta_path)?)
        .map_err(|e| Failure::Usage(anyhow!("{}: {e}", meta_path.display())))?;
    let snap = xc_sim::snapshot(&events, time);
    xc_sim::write_snapshot_csv(std::io::stdout().lock(), &snap, &meta.positions_at(time)).map_err(sim_error)?;
    Ok(())
}
