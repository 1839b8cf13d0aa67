//! Scenario description, its text format and validation.
//!
//! A scenario file is a list of `[section]` headers followed by `key = value`
//! lines. `#` starts a comment. Tables are written one named row per line:
//!
//! ```text
//! [cognitive.likelihood_ob.mobility]
//! patron  = 0.6 0.3 0.1
//! casual  = 0.3 0.4 0.3
//! ```
//!
//! Sections and keys that are left out keep their default values; the
//! population is exactly the `[class.*]` and `[placed.*]` sections present.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use indexmap::IndexMap;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bob::{BehaviorKind, BeliefClass, CognitiveConfig, Family, ObservationId, ParameterId};
use crate::exchange::LinkDelayModel;
use crate::metrics::StageCostModel;
use crate::mobility::{Area, MobilityConfig, Vec2};
use crate::node::{NodeClass, ResourceSet, ResourceType};
use crate::time::SimDuration;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn parse_err(line: usize, msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Parse {
        line,
        msg: msg.into(),
    }
}

fn invalid(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArrivalProcess {
    /// Evenly spaced over the warm-up window.
    Ramp,
    /// Exponential inter-arrival times with mean warm-up / arrivals.
    Poisson,
}

impl ArrivalProcess {
    fn name(self) -> &'static str {
        match self {
            ArrivalProcess::Ramp => "ramp",
            ArrivalProcess::Poisson => "poisson",
        }
    }
}

/// Static nodes are present from t = 0; mobile nodes enter over the warm-up.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArrivalConfig {
    pub warmup: SimDuration,
    pub process: ArrivalProcess,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProtocolConfig {
    pub link: LinkDelayModel,
    pub timeout: SimDuration,
    pub retries: u8,
    /// Availability below which a held type is in demand.
    pub demand_threshold: f64,
    /// Availability a type needs before it is offered.
    pub offer_threshold: f64,
    /// Availability a borrowed type is restored to after a successful exchange.
    pub replenish_to: f64,
    /// Ticks out of range before a contact is considered over.
    pub contact_grace_ticks: u32,
    pub strict: bool,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            link: LinkDelayModel::default(),
            timeout: SimDuration::from_millis(500),
            retries: 1,
            demand_threshold: 0.2,
            offer_threshold: 0.2,
            replenish_to: 0.0,
            contact_grace_ticks: 2,
            strict: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassSpec {
    pub class: NodeClass,
    pub count: usize,
    /// Communication range in meters, drawn uniformly per node.
    pub range: (f64, f64),
    /// Waypoint speed in m/s; ignored for static classes.
    pub speed: (f64, f64),
    pub resources: ResourceSet,
    /// Initial share of nominal capacity, drawn per resource.
    pub fill: (f64, f64),
    /// Share of nominal capacity drained per second, drawn per resource.
    pub drain: (f64, f64),
    pub predictability: f64,
}

impl ClassSpec {
    pub fn new(class: NodeClass, count: usize) -> Self {
        Self {
            class,
            count,
            range: (60.0, 60.0),
            speed: (0.0, 0.0),
            resources: ResourceSet::EMPTY,
            fill: (1.0, 1.0),
            drain: (0.0, 0.0),
            predictability: if class.is_mobile() { 0.5 } else { 1.0 },
        }
    }
}

/// A hand-placed node with fixed parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct PlacedNode {
    pub label: String,
    pub class: NodeClass,
    pub position: Vec2,
    pub range: f64,
    /// First waypoint and speed of a mobile node.
    pub waypoint: Option<(Vec2, f64)>,
    pub resources: ResourceSet,
    pub fill: f64,
    pub drain: f64,
    pub predictability: f64,
    pub valid: bool,
    pub arrive: SimDuration,
}

impl PlacedNode {
    pub fn new(label: &str, class: NodeClass, position: Vec2) -> Self {
        Self {
            label: label.to_string(),
            class,
            position,
            range: 60.0,
            waypoint: None,
            resources: ResourceSet::EMPTY,
            fill: 1.0,
            drain: 0.0,
            predictability: if class.is_mobile() { 0.5 } else { 1.0 },
            valid: true,
            arrive: SimDuration::ZERO,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub duration: SimDuration,
    pub tick: SimDuration,
    pub sampling_interval: SimDuration,
    pub trace: bool,
    pub area: Area,
    pub arrival: ArrivalConfig,
    pub pause: (SimDuration, SimDuration),
    /// Share of arriving devices that fail allow-list validation.
    pub invalid_fraction: f64,
    pub protocol: ProtocolConfig,
    pub costs: StageCostModel,
    pub classes: Vec<ClassSpec>,
    pub placed: Vec<PlacedNode>,
    pub cognitive: CognitiveConfig,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "unnamed".into(),
            seed: 0,
            duration: SimDuration::from_secs(120),
            tick: SimDuration::from_millis(50),
            sampling_interval: SimDuration::from_secs(1),
            trace: false,
            area: Area {
                width: 600.0,
                height: 600.0,
            },
            arrival: ArrivalConfig {
                warmup: SimDuration::from_secs(60),
                process: ArrivalProcess::Ramp,
            },
            pause: (SimDuration::ZERO, SimDuration::from_millis(150)),
            invalid_fraction: 0.0,
            protocol: ProtocolConfig::default(),
            costs: StageCostModel::default(),
            classes: Vec::new(),
            placed: Vec::new(),
            cognitive: CognitiveConfig::default(),
        }
    }
}

pub const DEFAULT_SCENARIO: &str = include_str!("../../../scenarios/default.scn");

impl Scenario {
    /// The shipped 200-node disaster-area scenario.
    pub fn default_scenario() -> Self {
        Self::from_str(DEFAULT_SCENARIO).expect("shipped scenario is valid")
    }

    pub fn node_count(&self) -> usize {
        self.classes.iter().map(|c| c.count).sum::<usize>() + self.placed.len()
    }

    pub fn class(&self, class: NodeClass) -> Option<&ClassSpec> {
        self.classes.iter().find(|c| c.class == class)
    }

    pub fn class_mut(&mut self, class: NodeClass) -> Option<&mut ClassSpec> {
        self.classes.iter_mut().find(|c| c.class == class)
    }

    pub fn mobility(&self) -> MobilityConfig {
        let mut speeds = [(0.0, 0.0); NodeClass::COUNT];
        for c in &self.classes {
            speeds[c.class.index()] = c.speed;
        }
        for p in &self.placed {
            if let Some((_, s)) = p.waypoint {
                let e = &mut speeds[p.class.index()];
                if e.1 == 0.0 {
                    *e = (s, s);
                }
            }
        }
        MobilityConfig {
            area: self.area,
            speeds,
            pause: self.pause,
            tick: self.tick,
        }
    }

    /// Hex SHA-256 of the canonical text form.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        text.parse()
    }

    /// Checks every invariant and renormalizes near-stochastic table rows.
    pub fn validate(mut self) -> Result<Self, ScenarioError> {
        if self.tick.is_zero() {
            return Err(invalid("tick must be positive"));
        }
        if self.sampling_interval.is_zero()
            || self.sampling_interval.as_micros() % self.tick.as_micros() != 0
        {
            return Err(invalid(
                "sampling_interval must be a positive multiple of tick",
            ));
        }
        if !(self.area.width > 0.0 && self.area.height > 0.0)
            || !self.area.width.is_finite()
            || !self.area.height.is_finite()
        {
            return Err(invalid("area must have positive finite width and height"));
        }
        if self.pause.0 > self.pause.1 {
            return Err(invalid("pause_min exceeds pause_max"));
        }
        if !(0.0..=1.0).contains(&self.invalid_fraction) {
            return Err(invalid("invalid_fraction must lie in [0, 1]"));
        }
        let p = &self.protocol;
        if p.timeout.is_zero() {
            return Err(invalid("protocol timeout must be positive"));
        }
        for (name, v) in [
            ("demand_threshold", p.demand_threshold),
            ("offer_threshold", p.offer_threshold),
            ("replenish_to", p.replenish_to),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(format!("protocol {name} must lie in [0, 1]")));
            }
        }
        if p.offer_threshold < p.demand_threshold {
            return Err(invalid(
                "offer_threshold must not be below demand_threshold",
            ));
        }
        for (i, c) in self.classes.iter().enumerate() {
            if self.classes[..i].iter().any(|o| o.class == c.class) {
                return Err(invalid(format!("class {} defined twice", c.class)));
            }
            let what = format!("class.{}", c.class);
            check_range(&what, "range", c.range, 0.0, f64::INFINITY, true)?;
            check_range(&what, "fill", c.fill, 0.0, 1.0, false)?;
            check_range(&what, "drain", c.drain, 0.0, 1.0, false)?;
            check_range(&what, "speed", c.speed, 0.0, f64::INFINITY, false)?;
            if c.class.is_mobile() && c.count > 0 && !(c.speed.1 > 0.0) {
                return Err(invalid(format!(
                    "{what}: mobile class needs a positive speed"
                )));
            }
            if !(0.0..=1.0).contains(&c.predictability) {
                return Err(invalid(format!(
                    "{what}: predictability must lie in [0, 1]"
                )));
            }
        }
        for n in &self.placed {
            let what = format!("placed.{}", n.label);
            if !self.area.contains(n.position) {
                return Err(invalid(format!("{what}: position outside the area")));
            }
            if !(n.range > 0.0) {
                return Err(invalid(format!("{what}: range must be positive")));
            }
            if !(0.0..=1.0).contains(&n.fill) || !(0.0..=1.0).contains(&n.drain) {
                return Err(invalid(format!(
                    "{what}: fill and drain must lie in [0, 1]"
                )));
            }
            if !(0.0..=1.0).contains(&n.predictability) {
                return Err(invalid(format!(
                    "{what}: predictability must lie in [0, 1]"
                )));
            }
            if let Some((w, s)) = n.waypoint {
                if !n.class.is_mobile() {
                    return Err(invalid(format!(
                        "{what}: static class cannot have a waypoint"
                    )));
                }
                if !self.area.contains(w) || !(s > 0.0) {
                    return Err(invalid(format!(
                        "{what}: waypoint outside the area or speed not positive"
                    )));
                }
            }
        }
        let authorities = self
            .class(NodeClass::NavigationController)
            .map_or(0, |c| c.count)
            + self
                .placed
                .iter()
                .filter(|n| n.class == NodeClass::NavigationController)
                .count();
        if self.node_count() > 0 && authorities == 0 {
            return Err(invalid(
                "population needs at least one navigation_controller",
            ));
        }
        if self.node_count() > u32::MAX as usize {
            return Err(invalid("population too large"));
        }
        self.cognitive = self
            .cognitive
            .normalized()
            .map_err(|e| invalid(e.to_string()))?;
        Ok(self)
    }

    /// Canonical text form; parsing it yields an equal scenario.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let w = &mut s;
        let _ = writeln!(w, "[run]");
        let _ = writeln!(w, "name = {}", self.name);
        let _ = writeln!(w, "seed = {}", self.seed);
        let _ = writeln!(w, "duration = {}", self.duration);
        let _ = writeln!(w, "tick = {}", self.tick);
        let _ = writeln!(w, "sampling_interval = {}", self.sampling_interval);
        let _ = writeln!(w, "trace = {}", self.trace);
        let _ = writeln!(
            w,
            "\n[area]\nwidth = {}\nheight = {}",
            self.area.width, self.area.height
        );
        let _ = writeln!(
            w,
            "\n[arrival]\nwarmup = {}\nprocess = {}",
            self.arrival.warmup,
            self.arrival.process.name()
        );
        let _ = writeln!(
            w,
            "\n[mobility]\npause_min = {}\npause_max = {}",
            self.pause.0, self.pause.1
        );
        let _ = writeln!(
            w,
            "\n[registration]\ninvalid_fraction = {}",
            self.invalid_fraction
        );
        let p = &self.protocol;
        let _ = writeln!(w, "\n[protocol]");
        let _ = writeln!(w, "data_rate_bps = {}", p.link.data_rate_bps);
        let _ = writeln!(w, "processing = {}", p.link.processing);
        let _ = writeln!(w, "request_bytes = {}", p.link.request_bytes);
        let _ = writeln!(w, "reply_bytes = {}", p.link.reply_bytes);
        let _ = writeln!(w, "timeout = {}", p.timeout);
        let _ = writeln!(w, "retries = {}", p.retries);
        let _ = writeln!(w, "demand_threshold = {}", p.demand_threshold);
        let _ = writeln!(w, "offer_threshold = {}", p.offer_threshold);
        let _ = writeln!(w, "replenish_to = {}", p.replenish_to);
        let _ = writeln!(w, "contact_grace_ticks = {}", p.contact_grace_ticks);
        let _ = writeln!(w, "strict = {}", p.strict);
        let c = &self.costs;
        let _ = writeln!(
            w,
            "\n[costs]\ncapture = {}\nper_behavior = {}\nper_observation = {}\ntrace_per_entry = {}",
            c.capture, c.per_behavior, c.per_observation, c.trace_per_entry
        );
        for c in &self.classes {
            let _ = writeln!(w, "\n[class.{}]", c.class);
            let _ = writeln!(w, "count = {}", c.count);
            let _ = writeln!(w, "range = {} {}", c.range.0, c.range.1);
            let _ = writeln!(w, "speed = {} {}", c.speed.0, c.speed.1);
            let _ = writeln!(w, "resources = {}", set_text(c.resources));
            let _ = writeln!(w, "fill = {} {}", c.fill.0, c.fill.1);
            let _ = writeln!(w, "drain = {} {}", c.drain.0, c.drain.1);
            let _ = writeln!(w, "predictability = {}", c.predictability);
        }
        for n in &self.placed {
            let _ = writeln!(w, "\n[placed.{}]", n.label);
            let _ = writeln!(w, "class = {}", n.class);
            let _ = writeln!(w, "position = {} {}", n.position.x, n.position.y);
            let _ = writeln!(w, "range = {}", n.range);
            if let Some((t, sp)) = n.waypoint {
                let _ = writeln!(w, "waypoint = {} {}", t.x, t.y);
                let _ = writeln!(w, "speed = {sp}");
            }
            let _ = writeln!(w, "resources = {}", set_text(n.resources));
            let _ = writeln!(w, "fill = {}", n.fill);
            let _ = writeln!(w, "drain = {}", n.drain);
            let _ = writeln!(w, "predictability = {}", n.predictability);
            let _ = writeln!(w, "valid = {}", n.valid);
            let _ = writeln!(w, "arrive = {}", n.arrive);
        }
        write_cognitive(w, &self.cognitive);
        s
    }
}

fn check_range(
    what: &str,
    key: &str,
    (lo, hi): (f64, f64),
    min: f64,
    max: f64,
    positive: bool,
) -> Result<(), ScenarioError> {
    let ok = lo.is_finite()
        && hi.is_finite()
        && lo <= hi
        && lo >= min
        && hi <= max
        && (!positive || lo > 0.0);
    if ok {
        Ok(())
    } else {
        Err(invalid(format!(
            "{what}: {key} must be an ordered pair within [{min}, {max}]"
        )))
    }
}

fn set_text(s: ResourceSet) -> String {
    if s.is_empty() {
        return "none".into();
    }
    s.iter().map(|t| t.name()).collect::<Vec<_>>().join(" ")
}

fn row_text(row: &[f64]) -> String {
    row.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn write_cognitive(w: &mut String, c: &CognitiveConfig) {
    let _ = writeln!(w, "\n[cognitive]");
    let _ = writeln!(w, "favorability = {}", c.favorability);
    let _ = writeln!(w, "log_refresh = {}", c.log_refresh);
    let _ = writeln!(w, "record_refresh = {}", c.record_refresh);
    let _ = writeln!(w, "session_period = {}", c.session_period);
    let _ = writeln!(w, "min_samples = {}", c.min_samples);
    let _ = writeln!(w, "\n[cognitive.behavior_parameters]");
    for b in BehaviorKind::ALL {
        let names: Vec<&str> = c.behavior_parameters[b.index()]
            .iter()
            .map(|p| p.name())
            .collect();
        let _ = writeln!(w, "{b} = {}", names.join(" "));
    }
    let _ = writeln!(w, "\n[cognitive.thresholds]");
    for b in BehaviorKind::ALL {
        let (lo, hi) = c.thresholds[b.index()];
        let _ = writeln!(w, "{b} = {lo} {hi}");
    }
    let _ = writeln!(w, "\n[cognitive.max_values]");
    for p in ParameterId::ALL {
        let _ = writeln!(w, "{p} = {}", c.max_values[p.index()]);
    }
    let _ = writeln!(w, "\n[cognitive.behavior_priors]");
    for b in BehaviorKind::ALL {
        let _ = writeln!(w, "{b} = {}", row_text(&c.behavior_priors[b.index()]));
    }
    for b in BehaviorKind::ALL {
        let _ = writeln!(w, "\n[cognitive.likelihood_bo.{b}]");
        for ob in ObservationId::ALL {
            let _ = writeln!(
                w,
                "{ob} = {}",
                row_text(&c.likelihood_bo[b.index()][ob.index()])
            );
        }
    }
    for fam in Family::ALL {
        let _ = writeln!(w, "\n[cognitive.likelihood_ob.{fam}]");
        for bl in BeliefClass::ALL {
            let _ = writeln!(
                w,
                "{bl} = {}",
                row_text(&c.likelihood_ob[bl.index()][fam.index()])
            );
        }
    }
    let _ = writeln!(w, "\n[cognitive.belief_priors]");
    let _ = writeln!(w, "prior = {}", row_text(&c.belief_priors));
}

struct Section {
    name: String,
    line: usize,
    entries: IndexMap<String, (String, usize)>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.shift_remove(key)
    }

    fn get<T, F>(&mut self, key: &str, parse: F, slot: &mut T) -> Result<(), ScenarioError>
    where
        F: Fn(&str) -> Result<T, String>,
    {
        if let Some((v, line)) = self.take(key) {
            *slot =
                parse(&v).map_err(|m| parse_err(line, format!("[{}] {key}: {m}", self.name)))?;
        }
        Ok(())
    }

    fn finish(self) -> Result<(), ScenarioError> {
        match self.entries.into_iter().next() {
            Some((k, (_, line))) => Err(parse_err(
                line,
                format!("unknown key `{k}` in [{}]", self.name),
            )),
            None => Ok(()),
        }
    }
}

fn lex(text: &str) -> Result<Vec<Section>, ScenarioError> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .map(str::trim)
                .filter(|n| !n.is_empty())
                .ok_or_else(|| parse_err(line, format!("malformed section header `{content}`")))?;
            if sections.iter().any(|s| s.name == name) {
                return Err(parse_err(line, format!("duplicate section [{name}]")));
            }
            sections.push(Section {
                name: name.to_string(),
                line,
                entries: IndexMap::new(),
            });
            continue;
        }
        let (k, v) = content
            .split_once('=')
            .ok_or_else(|| parse_err(line, format!("expected `key = value`, got `{content}`")))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(parse_err(line, "missing key"));
        }
        let sec = sections
            .last_mut()
            .ok_or_else(|| parse_err(line, "key outside of any section"))?;
        if sec
            .entries
            .insert(k.to_string(), (v.to_string(), line))
            .is_some()
        {
            return Err(parse_err(
                line,
                format!("duplicate key `{k}` in [{}]", sec.name),
            ));
        }
    }
    if sections.is_empty() {
        return Err(parse_err(1, "empty scenario"));
    }
    Ok(sections)
}

fn p_dur(s: &str) -> Result<SimDuration, String> {
    s.parse()
        .map_err(|e: crate::time::ParseDurationError| e.to_string())
}

fn p_num<T: FromStr>(s: &str) -> Result<T, String> {
    s.parse().map_err(|_| format!("invalid number `{s}`"))
}

fn p_f64(s: &str) -> Result<f64, String> {
    let v: f64 = p_num(s)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("non-finite number `{s}`"))
    }
}

fn p_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("expected true or false, got `{s}`")),
    }
}

fn p_floats<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let v: Vec<f64> = s.split_whitespace().map(p_f64).collect::<Result<_, _>>()?;
    v.try_into()
        .map_err(|v: Vec<f64>| format!("expected {N} numbers, got {}", v.len()))
}

/// One number means a fixed value.
fn p_pair(s: &str) -> Result<(f64, f64), String> {
    let v: Vec<f64> = s.split_whitespace().map(p_f64).collect::<Result<_, _>>()?;
    match v[..] {
        [x] => Ok((x, x)),
        [a, b] => Ok((a, b)),
        _ => Err(format!("expected one or two numbers, got {}", v.len())),
    }
}

fn p_set(s: &str) -> Result<ResourceSet, String> {
    if s == "none" {
        return Ok(ResourceSet::EMPTY);
    }
    s.split_whitespace()
        .map(|n| ResourceType::from_name(n).ok_or_else(|| format!("unknown resource type `{n}`")))
        .collect()
}

fn p_point(s: &str) -> Result<Vec2, String> {
    let [x, y] = p_floats::<2>(s)?;
    Ok(Vec2::new(x, y))
}

fn p_class(s: &str) -> Result<NodeClass, String> {
    NodeClass::from_name(s).ok_or_else(|| format!("unknown node class `{s}`"))
}

fn p_label(s: &str) -> Result<String, String> {
    if !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
    {
        Ok(s.to_string())
    } else {
        Err(format!(
            "names use letters, digits, `_` and `-` only, got `{s}`"
        ))
    }
}

fn p_process(s: &str) -> Result<ArrivalProcess, String> {
    match s {
        "ramp" => Ok(ArrivalProcess::Ramp),
        "poisson" => Ok(ArrivalProcess::Poisson),
        _ => Err(format!("unknown arrival process `{s}`")),
    }
}

impl FromStr for Scenario {
    type Err = ScenarioError;

    /// Parses and validates.
    fn from_str(text: &str) -> Result<Self, ScenarioError> {
        let mut sc = Scenario::default();
        for mut sec in lex(text)? {
            let name = sec.name.clone();
            match name.as_str() {
                "run" => {
                    sec.get("name", p_label, &mut sc.name)?;
                    sec.get("seed", p_num, &mut sc.seed)?;
                    sec.get("duration", p_dur, &mut sc.duration)?;
                    sec.get("tick", p_dur, &mut sc.tick)?;
                    sec.get("sampling_interval", p_dur, &mut sc.sampling_interval)?;
                    sec.get("trace", p_bool, &mut sc.trace)?;
                }
                "area" => {
                    sec.get("width", p_f64, &mut sc.area.width)?;
                    sec.get("height", p_f64, &mut sc.area.height)?;
                }
                "arrival" => {
                    sec.get("warmup", p_dur, &mut sc.arrival.warmup)?;
                    sec.get("process", p_process, &mut sc.arrival.process)?;
                }
                "mobility" => {
                    sec.get("pause_min", p_dur, &mut sc.pause.0)?;
                    sec.get("pause_max", p_dur, &mut sc.pause.1)?;
                }
                "registration" => sec.get("invalid_fraction", p_f64, &mut sc.invalid_fraction)?,
                "protocol" => {
                    let p = &mut sc.protocol;
                    sec.get("data_rate_bps", p_num, &mut p.link.data_rate_bps)?;
                    sec.get("processing", p_dur, &mut p.link.processing)?;
                    sec.get("request_bytes", p_num, &mut p.link.request_bytes)?;
                    sec.get("reply_bytes", p_num, &mut p.link.reply_bytes)?;
                    sec.get("timeout", p_dur, &mut p.timeout)?;
                    sec.get("retries", p_num, &mut p.retries)?;
                    sec.get("demand_threshold", p_f64, &mut p.demand_threshold)?;
                    sec.get("offer_threshold", p_f64, &mut p.offer_threshold)?;
                    sec.get("replenish_to", p_f64, &mut p.replenish_to)?;
                    sec.get("contact_grace_ticks", p_num, &mut p.contact_grace_ticks)?;
                    sec.get("strict", p_bool, &mut p.strict)?;
                }
                "costs" => {
                    let c = &mut sc.costs;
                    sec.get("capture", p_dur, &mut c.capture)?;
                    sec.get("per_behavior", p_dur, &mut c.per_behavior)?;
                    sec.get("per_observation", p_dur, &mut c.per_observation)?;
                    sec.get("trace_per_entry", p_dur, &mut c.trace_per_entry)?;
                }
                "cognitive" => {
                    let c = &mut sc.cognitive;
                    sec.get("favorability", p_f64, &mut c.favorability)?;
                    sec.get("log_refresh", p_dur, &mut c.log_refresh)?;
                    sec.get("record_refresh", p_dur, &mut c.record_refresh)?;
                    sec.get("session_period", p_dur, &mut c.session_period)?;
                    sec.get("min_samples", p_num, &mut c.min_samples)?;
                }
                "cognitive.behavior_parameters" => {
                    for b in BehaviorKind::ALL {
                        sec.get(
                            b.name(),
                            |s| {
                                s.split_whitespace()
                                    .map(|n| {
                                        ParameterId::from_name(n)
                                            .ok_or_else(|| format!("unknown parameter `{n}`"))
                                    })
                                    .collect()
                            },
                            &mut sc.cognitive.behavior_parameters[b.index()],
                        )?;
                    }
                }
                "cognitive.thresholds" => {
                    for b in BehaviorKind::ALL {
                        let mut t = [
                            sc.cognitive.thresholds[b.index()].0,
                            sc.cognitive.thresholds[b.index()].1,
                        ];
                        sec.get(b.name(), p_floats::<2>, &mut t)?;
                        sc.cognitive.thresholds[b.index()] = (t[0], t[1]);
                    }
                }
                "cognitive.max_values" => {
                    for p in ParameterId::ALL {
                        sec.get(p.name(), p_f64, &mut sc.cognitive.max_values[p.index()])?;
                    }
                }
                "cognitive.behavior_priors" => {
                    for b in BehaviorKind::ALL {
                        sec.get(
                            b.name(),
                            p_floats::<3>,
                            &mut sc.cognitive.behavior_priors[b.index()],
                        )?;
                    }
                }
                "cognitive.belief_priors" => {
                    sec.get("prior", p_floats::<4>, &mut sc.cognitive.belief_priors)?
                }
                _ => {
                    if let Some(b) = name.strip_prefix("cognitive.likelihood_bo.") {
                        let b = BehaviorKind::from_name(b).ok_or_else(|| {
                            parse_err(sec.line, format!("unknown behavior `{b}`"))
                        })?;
                        for ob in ObservationId::ALL {
                            sec.get(
                                ob.name(),
                                p_floats::<3>,
                                &mut sc.cognitive.likelihood_bo[b.index()][ob.index()],
                            )?;
                        }
                    } else if let Some(f) = name.strip_prefix("cognitive.likelihood_ob.") {
                        let f = Family::from_name(f).ok_or_else(|| {
                            parse_err(sec.line, format!("unknown observation family `{f}`"))
                        })?;
                        for bl in BeliefClass::ALL {
                            sec.get(
                                bl.name(),
                                p_floats::<3>,
                                &mut sc.cognitive.likelihood_ob[bl.index()][f.index()],
                            )?;
                        }
                    } else if let Some(c) = name.strip_prefix("class.") {
                        let class = NodeClass::from_name(c).ok_or_else(|| {
                            parse_err(sec.line, format!("unknown node class `{c}`"))
                        })?;
                        let mut spec = ClassSpec::new(class, 0);
                        sec.get("count", p_num, &mut spec.count)?;
                        sec.get("range", p_pair, &mut spec.range)?;
                        sec.get("speed", p_pair, &mut spec.speed)?;
                        sec.get("resources", p_set, &mut spec.resources)?;
                        sec.get("fill", p_pair, &mut spec.fill)?;
                        sec.get("drain", p_pair, &mut spec.drain)?;
                        sec.get("predictability", p_f64, &mut spec.predictability)?;
                        sc.classes.push(spec);
                    } else if let Some(label) = name.strip_prefix("placed.") {
                        let label = p_label(label).map_err(|m| parse_err(sec.line, m))?;
                        let (class, line) = sec.take("class").ok_or_else(|| {
                            parse_err(sec.line, format!("[{name}] needs a class"))
                        })?;
                        let class = p_class(&class).map_err(|m| parse_err(line, m))?;
                        let mut n = PlacedNode::new(&label, class, Vec2::default());
                        sec.get("position", p_point, &mut n.position)?;
                        sec.get("range", p_f64, &mut n.range)?;
                        let mut target = None;
                        sec.get("waypoint", |s| p_point(s).map(Some), &mut target)?;
                        let mut speed = None;
                        sec.get("speed", |s| p_f64(s).map(Some), &mut speed)?;
                        n.waypoint = match (target, speed) {
                            (Some(t), Some(s)) => Some((t, s)),
                            (None, None) => None,
                            _ => {
                                return Err(parse_err(
                                    sec.line,
                                    format!("[{name}] waypoint and speed go together"),
                                ))
                            }
                        };
                        sec.get("resources", p_set, &mut n.resources)?;
                        sec.get("fill", p_f64, &mut n.fill)?;
                        sec.get("drain", p_f64, &mut n.drain)?;
                        sec.get("predictability", p_f64, &mut n.predictability)?;
                        sec.get("valid", p_bool, &mut n.valid)?;
                        sec.get("arrive", p_dur, &mut n.arrive)?;
                        sc.placed.push(n);
                    } else {
                        return Err(parse_err(sec.line, format!("unknown section [{name}]")));
                    }
                }
            }
            sec.finish()?;
        }
        sc.classes.sort_by_key(|c| c.class);
        sc.validate()
    }
}
