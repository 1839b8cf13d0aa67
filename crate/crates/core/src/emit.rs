//! Run outputs: metrics and contact CSVs, the canonical scenario, an
//! optional message log, and a flat key=value manifest for reproduction.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::contact::ContactLedger;
use crate::preset::Report;
use crate::scenario::{Scenario, ScenarioError};
use crate::sim::{run, SimError, World};
use crate::time::SimDuration;

pub const METRICS_FILE: &str = "metrics.csv";
pub const CONTACTS_FILE: &str = "contacts.csv";
pub const SCENARIO_FILE: &str = "scenario.scn";
pub const MESSAGES_FILE: &str = "messages.bin";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const CONTACTS_HEADER: &str = "tick,a,b,kind,variety";

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("manifest line {line}: {msg}")]
    Manifest { line: usize, msg: String },
    #[error("scenario digest mismatch: manifest has {expected}, file hashes to {actual}")]
    DigestMismatch { expected: String, actual: String },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// One row per contact event, the tick being the one the contact started in.
pub fn contacts_csv(ledger: &ContactLedger, tick: SimDuration) -> String {
    let mut s = String::from(CONTACTS_HEADER);
    s.push('\n');
    let step = tick.as_micros().max(1);
    for e in ledger.events() {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            e.started_at.as_micros() / step,
            e.a.0,
            e.b.0,
            e.kind,
            e.variety
        );
    }
    s
}

/// Ordered key=value pairs; lines starting with `#` are comments.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Manifest {
    pub entries: IndexMap<String, String>,
}

impl Manifest {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, EmitError> {
        let mut m = Manifest::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| EmitError::Manifest {
                line: i + 1,
                msg: format!("expected key=value, got `{line}`"),
            })?;
            let k = k.trim();
            if k.is_empty() {
                return Err(EmitError::Manifest {
                    line: i + 1,
                    msg: "empty key".into(),
                });
            }
            if m.entries
                .insert(k.to_string(), v.trim().to_string())
                .is_some()
            {
                return Err(EmitError::Manifest {
                    line: i + 1,
                    msg: format!("duplicate key `{k}`"),
                });
            }
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self, EmitError> {
        Self::parse(&read(path)?)
    }
}

fn read(path: &Path) -> Result<String, EmitError> {
    fs::read_to_string(path).map_err(|source| EmitError::Read {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), EmitError> {
    fs::write(path, bytes).map_err(|source| EmitError::Write {
        path: path.display().to_string(),
        source,
    })
}

fn ensure_dir(dir: &Path) -> Result<(), EmitError> {
    fs::create_dir_all(dir).map_err(|source| EmitError::Write {
        path: dir.display().to_string(),
        source,
    })
}

/// Writes every output of a finished run into `dir` and returns the manifest.
pub fn write_run(world: &World, dir: &Path) -> Result<Manifest, EmitError> {
    ensure_dir(dir)?;
    let scenario = world.scenario();
    let metrics = world.metrics().csv();
    let contacts = contacts_csv(world.contacts(), scenario.tick);
    let scenario_text = scenario.to_text();

    write(&dir.join(METRICS_FILE), metrics.as_bytes())?;
    write(&dir.join(CONTACTS_FILE), contacts.as_bytes())?;
    write(&dir.join(SCENARIO_FILE), scenario_text.as_bytes())?;

    let mut m = Manifest::default();
    m.set("tool", "caosr");
    m.set("version", env!("CARGO_PKG_VERSION"));
    m.set("kind", "run");
    m.set("scenario_name", &scenario.name);
    m.set("scenario_file", SCENARIO_FILE);
    m.set("scenario_digest", sha256_hex(scenario_text.as_bytes()));
    m.set("seed", scenario.seed);
    m.set("strict", scenario.protocol.strict);
    m.set("nodes", world.nodes().len());
    m.set("duration", scenario.duration);
    m.set("metrics_file", METRICS_FILE);
    m.set("metrics_digest", sha256_hex(metrics.as_bytes()));
    m.set("contacts_file", CONTACTS_FILE);
    m.set("contacts_digest", sha256_hex(contacts.as_bytes()));
    if let Some(buf) = world.messages() {
        write(&dir.join(MESSAGES_FILE), buf)?;
        m.set("messages_file", MESSAGES_FILE);
        m.set("messages_digest", sha256_hex(buf));
    }
    write(&dir.join(MANIFEST_FILE), m.to_text().as_bytes())?;
    Ok(m)
}

/// Re-runs the scenario a manifest points at, after checking its digest.
pub fn replay(manifest_path: &Path) -> Result<(Manifest, World), EmitError> {
    let m = Manifest::load(manifest_path)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let file = m.get("scenario_file").ok_or_else(|| EmitError::Manifest {
        line: 0,
        msg: "missing key `scenario_file`".into(),
    })?;
    let text = read(&dir.join(file))?;
    let actual = sha256_hex(text.as_bytes());
    let expected = m.get("scenario_digest").unwrap_or_default().to_string();
    if actual != expected {
        return Err(EmitError::DigestMismatch { expected, actual });
    }
    let scenario: Scenario = text.parse()?;
    let mut world = World::new(scenario);
    if m.get("messages_file").is_some() {
        world.record_messages();
    }
    world.run()?;
    Ok((m, world))
}

/// Writes a preset report as `<figure>.csv` plus a manifest.
pub fn write_report(
    report: &Report,
    base: &Scenario,
    seeds: &[u64],
    dir: &Path,
) -> Result<(PathBuf, Manifest), EmitError> {
    ensure_dir(dir)?;
    let csv = report.to_csv();
    let name = format!("{}.csv", report.figure);
    let path = dir.join(&name);
    write(&path, csv.as_bytes())?;
    let base_text = base.to_text();
    write(&dir.join(SCENARIO_FILE), base_text.as_bytes())?;

    let mut m = Manifest::default();
    m.set("tool", "caosr");
    m.set("version", env!("CARGO_PKG_VERSION"));
    m.set("kind", "preset");
    m.set("preset", report.figure);
    m.set("title", report.figure.title());
    m.set("scenario_file", SCENARIO_FILE);
    m.set("scenario_digest", sha256_hex(base_text.as_bytes()));
    m.set("seed", seeds.first().copied().unwrap_or_default());
    m.set("replicates", seeds.len());
    m.set(
        "seeds",
        seeds
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(" "),
    );
    m.set("report_file", &name);
    m.set("report_digest", sha256_hex(csv.as_bytes()));
    write(&dir.join(MANIFEST_FILE), m.to_text().as_bytes())?;
    Ok((path, m))
}

/// Runs a scenario and writes its outputs.
pub fn run_to_dir(
    scenario: Scenario,
    dir: &Path,
    record_messages: bool,
) -> Result<Manifest, EmitError> {
    if !record_messages {
        let world = run(scenario)?;
        return write_run(&world, dir);
    }
    let mut world = World::new(scenario);
    world.record_messages();
    world.run()?;
    write_run(&world, dir)
}
