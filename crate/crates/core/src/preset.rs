//! Experiment presets: parameter sweeps over the default scenario and the
//! report columns each figure needs.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use thiserror::Error;

use crate::metrics::{convergence_rate, failure_rate, reliability};
use crate::node::NodeClass;
use crate::rng::mix64;
use crate::scenario::Scenario;
use crate::sim::{run, SimError, World};
use crate::time::SimDuration;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Figure {
    Fig10,
    Fig11,
    Fig12,
    Fig13,
    Fig14,
    Fig15,
    Fig16,
}

impl Figure {
    pub const ALL: [Figure; 7] = [
        Figure::Fig10,
        Figure::Fig11,
        Figure::Fig12,
        Figure::Fig13,
        Figure::Fig14,
        Figure::Fig15,
        Figure::Fig16,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig10 => "fig10",
            Figure::Fig11 => "fig11",
            Figure::Fig12 => "fig12",
            Figure::Fig13 => "fig13",
            Figure::Fig14 => "fig14",
            Figure::Fig15 => "fig15",
            Figure::Fig16 => "fig16",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Figure::Fig10 => "registered nodes vs time",
            Figure::Fig11 => "contact kinds vs node count",
            Figure::Fig12 => "reliability vs total contacts",
            Figure::Fig13 => "resource availability vs opportunistic contacts",
            Figure::Fig14 => "belief classes vs node density",
            Figure::Fig15 => "convergence rate vs pause time",
            Figure::Fig16 => "failure rate vs time",
        }
    }

    /// Report columns, first one being the sweep or time axis.
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Figure::Fig10 => &["t", "n_nodes"],
            Figure::Fig11 => &["n_nodes", "N_DC", "N_OC", "N_hom", "N_het", "N_tc"],
            Figure::Fig12 => &["rich_share", "N_tc", "N_Roc", "P_OC"],
            Figure::Fig13 => &[
                "n_nodes",
                "opportunistic_contacts",
                "resource_availability_pct",
            ],
            Figure::Fig14 => &["n_nodes", "patron", "casual", "slack", "vagrant"],
            Figure::Fig15 => &["pause_ms", "n_nodes", "xi_RA", "discovery_latency_ms"],
            Figure::Fig16 => &["t", "failure_pct"],
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown preset `{0}`; valid presets: fig10, fig11, fig12, fig13, fig14, fig15, fig16")]
pub struct UnknownPreset(pub String);

impl FromStr for Figure {
    type Err = UnknownPreset;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| UnknownPreset(s.to_string()))
    }
}

pub const DENSITY_SWEEP: [usize; 4] = [50, 100, 150, 200];
pub const PAUSE_SWEEP_MS: [u64; 6] = [0, 30, 60, 90, 120, 150];
pub const RICH_SWEEP: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Classes whose nodes carry vehicle or infrastructure grade resources.
pub fn is_resource_rich(class: NodeClass) -> bool {
    matches!(
        class,
        NodeClass::RescueVehicle | NodeClass::VehicleController | NodeClass::SurvivedInfrastructure
    )
}

#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub x: f64,
    pub scenario: Scenario,
}

#[derive(Clone, Debug)]
pub struct Preset {
    pub figure: Figure,
    pub points: Vec<SweepPoint>,
}

impl Preset {
    pub fn new(figure: Figure, base: &Scenario) -> Self {
        let one = |x: f64, s: Scenario| vec![SweepPoint { x, scenario: s }];
        let named = |mut s: Scenario, suffix: String| {
            s.name = format!("{}-{suffix}", figure.name());
            s
        };
        let points = match figure {
            Figure::Fig10 | Figure::Fig16 => one(0.0, named(base.clone(), "base".into())),
            Figure::Fig11 | Figure::Fig13 | Figure::Fig14 => DENSITY_SWEEP
                .iter()
                .map(|&n| SweepPoint {
                    x: n as f64,
                    scenario: named(with_population(base, n), format!("n{n}")),
                })
                .collect(),
            Figure::Fig12 => RICH_SWEEP
                .iter()
                .map(|&r| SweepPoint {
                    x: r,
                    scenario: named(with_rich_share(base, r), format!("rich{:.0}", r * 100.0)),
                })
                .collect(),
            Figure::Fig15 => PAUSE_SWEEP_MS
                .iter()
                .map(|&p| {
                    let mut s = base.clone();
                    let pause = SimDuration::from_millis(p);
                    s.pause = (pause, pause);
                    // fine enough that the zero-pause clamp stays below every other point
                    s.tick = s.tick.min(SimDuration::from_millis(25));
                    SweepPoint {
                        x: p as f64,
                        scenario: named(s, format!("pause{p}")),
                    }
                })
                .collect(),
        };
        Self { figure, points }
    }

    /// Scenario seeds for `replicates` runs derived from `seed`; the first is `seed` itself.
    pub fn seeds(seed: u64, replicates: usize) -> Vec<u64> {
        (0..replicates as u64)
            .map(|i| if i == 0 { seed } else { mix64(seed ^ mix64(i)) })
            .collect()
    }

    /// Runs every point under every seed, in parallel, and averages per point.
    pub fn run(&self, seeds: &[u64]) -> Result<Report, SimError> {
        let jobs: Vec<(usize, u64)> = (0..self.points.len())
            .flat_map(|p| seeds.iter().map(move |&s| (p, s)))
            .collect();
        #[cfg(feature = "parallel")]
        let jobs_iter = jobs.par_iter();
        #[cfg(not(feature = "parallel"))]
        let jobs_iter = jobs.iter();
        let rows: Vec<(usize, Vec<Vec<f64>>)> = jobs_iter
            .map(|&(p, seed)| {
                let point = &self.points[p];
                let mut s = point.scenario.clone();
                s.seed = seed;
                let world = run(s)?;
                Ok((p, extract(self.figure, point.x, &world)))
            })
            .collect::<Result<_, SimError>>()?;

        let mut out = Vec::new();
        for p in 0..self.points.len() {
            let runs: Vec<&Vec<Vec<f64>>> = rows
                .iter()
                .filter(|(i, _)| *i == p)
                .map(|(_, r)| r)
                .collect();
            out.extend(average(&runs));
        }
        Ok(Report {
            figure: self.figure,
            rows: out,
        })
    }
}

/// Rows of one run; NaN marks an undefined value.
fn extract(figure: Figure, x: f64, world: &World) -> Vec<Vec<f64>> {
    let m = world.metrics();
    let c = m.contacts;
    let or_nan = |v: Option<f64>| v.unwrap_or(f64::NAN);
    let n = world.nodes().len() as f64;
    match figure {
        Figure::Fig10 => m
            .rows
            .iter()
            .map(|r| vec![r.t.as_secs_f64(), r.n_nodes as f64])
            .collect(),
        Figure::Fig11 => vec![vec![
            n,
            c.n_dc as f64,
            c.n_oc as f64,
            c.n_hom as f64,
            c.n_het as f64,
            c.n_tc() as f64,
        ]],
        Figure::Fig12 => vec![vec![
            x,
            c.n_tc() as f64,
            c.n_roc() as f64,
            or_nan(reliability(&c)),
        ]],
        Figure::Fig13 => vec![vec![
            n,
            (c.n_oc + c.n_roc()) as f64,
            or_nan(m.resource_availability().map(|a| 100.0 * a)),
        ]],
        Figure::Fig14 => {
            let f = m.belief_fractions().unwrap_or([f64::NAN; 4]);
            vec![vec![n, f[0], f[1], f[2], f[3]]]
        }
        Figure::Fig15 => {
            let s = world.scenario();
            vec![vec![
                x,
                n,
                convergence_rate(world.nodes().len(), s.pause.0, s.tick),
                or_nan(m.mean_discovery_latency()),
            ]]
        }
        Figure::Fig16 => failure_rate(m, FAILURE_BUCKET)
            .into_iter()
            .map(|(t, p)| vec![t.as_secs_f64(), p])
            .collect(),
    }
}

pub const FAILURE_BUCKET: SimDuration = SimDuration::from_secs(10);

/// Averages rows keyed by their first column, skipping undefined values.
fn average(runs: &[&Vec<Vec<f64>>]) -> Vec<Vec<f64>> {
    let mut acc: BTreeMap<u64, (Vec<f64>, Vec<u32>)> = BTreeMap::new();
    for rows in runs {
        for row in rows.iter() {
            let key = row[0].to_bits();
            let (sum, cnt) = acc
                .entry(key)
                .or_insert_with(|| (vec![0.0; row.len()], vec![0; row.len()]));
            for (i, v) in row.iter().enumerate() {
                if !v.is_nan() {
                    sum[i] += v;
                    cnt[i] += 1;
                }
            }
        }
    }
    let mut out: Vec<Vec<f64>> = acc
        .into_values()
        .map(|(sum, cnt)| {
            sum.iter()
                .zip(&cnt)
                .map(|(s, &k)| if k == 0 { f64::NAN } else { s / k as f64 })
                .collect()
        })
        .collect();
    out.sort_by(|a, b| a[0].total_cmp(&b[0]));
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub figure: Figure,
    pub rows: Vec<Vec<f64>>,
}

impl Report {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.figure.columns().iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// CSV with six-decimal floats; undefined values are left empty.
    pub fn to_csv(&self) -> String {
        let mut s = self.figure.columns().join(",");
        s.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                if !v.is_nan() {
                    let _ = write!(s, "{v:.6}");
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Rescales generated class counts to `total` nodes with largest remainder
/// rounding; every class present in the base keeps at least one node.
pub fn with_population(base: &Scenario, total: usize) -> Scenario {
    let mut s = base.clone();
    let target = total.saturating_sub(s.placed.len());
    let weights: Vec<f64> = s.classes.iter().map(|c| c.count as f64).collect();
    let mut counts = apportion(&weights, target);
    for i in 0..counts.len() {
        if counts[i] == 0 && s.classes[i].count > 0 {
            if let Some(j) = (0..counts.len()).max_by_key(|&j| (counts[j], std::cmp::Reverse(j))) {
                if counts[j] > 1 {
                    counts[j] -= 1;
                    counts[i] = 1;
                }
            }
        }
    }
    for (c, n) in s.classes.iter_mut().zip(counts) {
        c.count = n;
    }
    s
}

/// Keeps the population size but splits the non-authority nodes so that
/// `share` of them belong to resource-rich classes.
pub fn with_rich_share(base: &Scenario, share: f64) -> Scenario {
    let mut s = base.clone();
    let idx: Vec<usize> = (0..s.classes.len())
        .filter(|&i| s.classes[i].class != NodeClass::NavigationController)
        .collect();
    let total: usize = idx.iter().map(|&i| s.classes[i].count).sum();
    let rich_n = (share * total as f64).round() as usize;
    for (want, pick) in [(rich_n, true), (total - rich_n, false)] {
        let group: Vec<usize> = idx
            .iter()
            .copied()
            .filter(|&i| is_resource_rich(s.classes[i].class) == pick)
            .collect();
        let weights: Vec<f64> = group
            .iter()
            .map(|&i| s.classes[i].count.max(1) as f64)
            .collect();
        for (k, n) in apportion(&weights, want).into_iter().enumerate() {
            s.classes[group[k]].count = n;
        }
    }
    for c in s
        .classes
        .iter_mut()
        .filter(|c| c.class != NodeClass::NavigationController)
    {
        c.fill = if is_resource_rich(c.class) {
            RICH_FILL
        } else {
            POOR_FILL
        };
    }
    s
}

/// Endowments used by the rich-share sweep: rich nodes hold partly used
/// stock, the rest start starved.
pub const RICH_FILL: (f64, f64) = (0.0, 1.0);
pub const POOR_FILL: (f64, f64) = (0.0, 0.2);

/// Splits `total` proportionally to `weights`, largest remainder first;
/// ties go to the earlier entry.
fn apportion(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() {
        return Vec::new();
    }
    if sum <= 0.0 {
        let mut out = vec![0; weights.len()];
        out[0] = total;
        return out;
    }
    let exact: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut out: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut left = total - out.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        (exact[b] - exact[b].floor())
            .total_cmp(&(exact[a] - exact[a].floor()))
            .then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        out[i] += 1;
        left -= 1;
    }
    out
}
