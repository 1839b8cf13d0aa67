//! Browser bindings: a belief explorer, a steppable simulation and the
//! pause-time convergence curve. Every call returns a JSON string.

use caosr_core::bob::{
    belief_posteriors, family_posteriors, favorable_observations, generate_belief, quantize,
    Behavior, BehaviorKind, BeliefClass, CognitiveConfig, Family,
};
use caosr_core::metrics::convergence_rate;
use caosr_core::preset::with_population;
use caosr_core::scenario::Scenario;
use caosr_core::sim::World;
use caosr_core::{NodeId, SimDuration, SimTime};
use serde_json::{json, Map, Value};
use wasm_bindgen::prelude::*;

/// Classifies one node from per-behavior value ratios.
///
/// `ratios` is a JSON object mapping behavior names to ratios in `[0, 1]`;
/// missing behaviors are treated as not observed.
pub fn explore(ratios: &str) -> Result<String, String> {
    let input: Map<String, Value> = serde_json::from_str(ratios).map_err(|e| e.to_string())?;
    let cfg = CognitiveConfig::default();
    let mut behaviors = Vec::new();
    for (name, v) in &input {
        let kind =
            BehaviorKind::from_name(name).ok_or_else(|| format!("unknown behavior `{name}`"))?;
        let r = v
            .as_f64()
            .filter(|r| (0.0..=1.0).contains(r))
            .ok_or_else(|| format!("`{name}` needs a ratio in [0, 1]"))?;
        behaviors.push(Behavior {
            kind,
            level: quantize(r, cfg.thresholds[kind.index()]),
            probability: r,
            contributing: Vec::new(),
        });
    }

    let levels: Map<String, Value> = behaviors
        .iter()
        .map(|b| (b.kind.name().to_string(), json!(b.level_name())))
        .collect();
    let mut families = Map::new();
    for family in Family::ALL {
        let row = match family_posteriors(&behaviors, family, &cfg) {
            Ok(p) => family
                .members()
                .iter()
                .zip(p)
                .map(|(o, p)| (o.name().to_string(), json!(p)))
                .collect::<Map<_, _>>()
                .into(),
            Err(_) => Value::Null,
        };
        families.insert(family.name().to_string(), row);
    }
    let favorable = favorable_observations(&behaviors, &cfg);
    let (posterior, class) = match generate_belief(&favorable, &cfg, SimTime::ZERO) {
        Ok(b) => {
            let p = belief_posteriors(&favorable, &cfg).map_err(|e| e.to_string())?;
            let row: Map<String, Value> = BeliefClass::ALL
                .iter()
                .zip(p)
                .map(|(c, p)| (c.name().to_string(), json!(p)))
                .collect();
            (Value::Object(row), json!(b.class.name()))
        }
        Err(_) => (Value::Null, Value::Null),
    };
    Ok(json!({
        "levels": levels,
        "observations": families,
        "favorable": favorable.iter().map(|o| o.id.name()).collect::<Vec<_>>(),
        "beliefs": posterior,
        "class": class,
    })
    .to_string())
}

/// ξ_RA in nodes per millisecond for each pause in `0..=max_pause_ms`.
pub fn convergence(n_d: usize, tick_ms: u64, max_pause_ms: u64, step_ms: u64) -> String {
    let tick = SimDuration::from_millis(tick_ms.max(1));
    let points: Vec<Value> = (0..=max_pause_ms)
        .step_by(step_ms.max(1) as usize)
        .map(|p| json!([p, convergence_rate(n_d, SimDuration::from_millis(p), tick)]))
        .collect();
    Value::Array(points).to_string()
}

/// The shipped scenario scaled to `nodes` with a fixed pause.
pub fn demo_scenario(nodes: usize, seed: u64, pause_ms: u64) -> Scenario {
    let mut s = with_population(&Scenario::default_scenario(), nodes.max(1));
    s.seed = seed;
    let pause = SimDuration::from_millis(pause_ms);
    s.pause = (pause, pause);
    s
}

#[wasm_bindgen]
pub struct Simulation {
    world: World,
}

#[wasm_bindgen]
impl Simulation {
    #[wasm_bindgen(constructor)]
    pub fn new(nodes: u32, seed: u32, pause_ms: u32) -> Simulation {
        Simulation {
            world: World::new(demo_scenario(nodes as usize, seed.into(), pause_ms.into())),
        }
    }

    /// Advances up to `ticks` ticks; returns false once the run is over.
    pub fn step(&mut self, ticks: u32) -> Result<bool, String> {
        for _ in 0..ticks {
            if self.world.finished() {
                return Ok(false);
            }
            self.world.step().map_err(|e| e.to_string())?;
        }
        Ok(!self.world.finished())
    }

    /// Area, node positions, classes and beliefs, and open contacts.
    pub fn state(&self) -> String {
        let area = self.world.scenario().area;
        let nodes: Vec<Value> = self
            .world
            .nodes()
            .iter()
            .map(|n| {
                json!({
                    "x": n.position.x,
                    "y": n.position.y,
                    "class": n.class.name(),
                    "registered": n.registered,
                    "range": n.comm_range,
                    "belief": self.world.self_belief(n.id).map(|b| b.class.name()),
                })
            })
            .collect();
        let contacts: Vec<[u32; 2]> = self
            .world
            .open_contacts()
            .map(|(a, b)| [a.0, b.0])
            .collect();
        json!({
            "t": self.world.now().as_secs_f64(),
            "width": area.width,
            "height": area.height,
            "nodes": nodes,
            "contacts": contacts,
        })
        .to_string()
    }

    /// Running contact counts and timing means.
    pub fn metrics(&self) -> String {
        let m = self.world.metrics();
        let row = m.snapshot(self.world.now(), SimTime::ZERO, self.world.nodes().len());
        json!({
            "t": row.t.as_secs_f64(),
            "N_DC": row.counts.n_dc,
            "N_OC": row.counts.n_oc,
            "N_hom": row.counts.n_hom,
            "N_het": row.counts.n_het,
            "P_OC": row.p_oc,
            "xi_RA": row.xi_ra,
            "mean_T_bf": row.mean_t_bf,
            "mean_T_tot": row.mean_t_tot,
            "failure_pct": row.failure_pct,
            "beliefs": m.belief_fractions(),
        })
        .to_string()
    }

    /// Belief record rows of one node.
    pub fn record(&self, node: u32) -> String {
        let rows: Vec<Value> = self
            .world
            .belief_rows(NodeId(node))
            .into_iter()
            .map(|(k, v)| json!([k, v]))
            .collect();
        Value::Array(rows).to_string()
    }
}

#[wasm_bindgen(js_name = explore)]
pub fn explore_js(ratios: &str) -> Result<String, String> {
    explore(ratios)
}

#[wasm_bindgen(js_name = convergence)]
pub fn convergence_js(n_d: usize, tick_ms: u32, max_pause_ms: u32, step_ms: u32) -> String {
    convergence(n_d, tick_ms.into(), max_pause_ms.into(), step_ms.into())
}
