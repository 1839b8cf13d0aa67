#![allow(dead_code)]

use caosr_core::bob::BeliefClass;
use caosr_core::contact::{ContactKind, Variety};
use caosr_core::scenario::Scenario;
use caosr_core::sim::{TraceKind, World};
use caosr_core::{NodeId, SimDuration};

pub const TWO_NODE: &str = include_str!("../../../../scenarios/two_node.scn");

pub fn two_node() -> Scenario {
    TWO_NODE.parse().unwrap()
}

pub fn kinds(w: &World) -> Vec<(u64, TraceKind)> {
    w.trace()
        .iter()
        .map(|e| (e.at.as_micros(), e.kind.clone()))
        .collect()
}

// walker starts 140.25 m left of the controller and moves 0.5 m per tick
// from the first tick on; range is min(60, 30) = 30 m.
// in range from x = 120.25, first reached at tick 221 (x = 120.5)
pub const START: u64 = 221 * 50_000;
// last in range at x = 180 (tick 340), closed after two missed ticks
pub const LAST_SEEN: u64 = 340 * 50_000;
pub const CLOSED: u64 = 342 * 50_000;
// request: 32 bytes at 2 Mbit/s = 128 us, plus 1 ms processing
pub const T_REQ: u64 = 1_256;
// the controller has four parameters captured once each, four behaviors
// and two observations: 4*4*1ms + 4*4*0.5ms + 2*4*0.5ms = 28 ms
pub const T_BF: u64 = 28_000;
// reply: 42 bytes = 168 us, plus 1 ms processing
pub const REPLY_DELAY: u64 = 2_024;
// one record entry scanned at 10 us
pub const T_TRA: u64 = 10;

pub fn two_node_trace() -> Vec<(u64, TraceKind)> {
    let (nav, walker) = (NodeId(0), NodeId(1));
    let delivered = START + T_REQ;
    let reply_sent = delivered + T_BF;
    vec![
        (0, TraceKind::Bootstrap { node: nav }),
        (
            0,
            TraceKind::Registered {
                node: walker,
                authority: nav,
            },
        ),
        (
            START,
            TraceKind::ContactStart {
                a: nav,
                b: walker,
                kind: ContactKind::OpportunisticResourceful,
                variety: Variety::Heterogeneous,
            },
        ),
        (
            START,
            TraceKind::RequestSent {
                req_id: 0,
                from: walker,
                to: nav,
            },
        ),
        (delivered, TraceKind::RequestDelivered { req_id: 0 }),
        (
            delivered,
            TraceKind::Formed {
                node: nav,
                class: BeliefClass::Patron,
            },
        ),
        (
            reply_sent,
            TraceKind::ReplySent {
                req_id: 0,
                formed_before: false,
            },
        ),
        (
            reply_sent + REPLY_DELAY,
            TraceKind::ReplyReceived { req_id: 0 },
        ),
        (
            16_000_000,
            TraceKind::Formed {
                node: nav,
                class: BeliefClass::Patron,
            },
        ),
        (
            16_000_000,
            TraceKind::Formed {
                node: walker,
                class: BeliefClass::Patron,
            },
        ),
        (CLOSED, TraceKind::ContactEnd { a: nav, b: walker }),
    ]
}

/// Compares a finished two-node run against the hand-computed log.
pub fn check_two_node(w: &World) -> Result<(), String> {
    let (nav, walker) = (NodeId(0), NodeId(1));
    let got = kinds(w);
    let want = two_node_trace();
    if got != want {
        return Err(format!("trace\n  got  {got:?}\n  want {want:?}"));
    }
    let ev = w.contacts().events();
    if ev.len() != 1
        || ev[0].started_at.as_micros() != START
        || ev[0].ended_at.as_micros() != LAST_SEEN
    {
        return Err(format!("contacts {ev:?}"));
    }
    let x = &w.metrics().exchanges;
    if x.len() != 1 {
        return Err(format!("{} exchanges", x.len()));
    }
    let t_rep = T_BF + REPLY_DELAY;
    let expect = (
        SimDuration::from_micros(T_REQ),
        SimDuration::from_micros(t_rep),
        // the walker has no belief of its own yet, so t_tot = t_bx
        SimDuration::from_micros(T_REQ + T_TRA + T_REQ + t_rep),
    );
    let got = (x[0].timing.t_req, x[0].timing.t_rep, x[0].t_con);
    if got != expect {
        return Err(format!("timing {got:?}, want {expect:?}"));
    }
    let rows = w.belief_rows(walker);
    let want_rows = vec![
        ("Host".to_string(), "Patron"),
        ("ID (neighbor 0)".to_string(), "Patron"),
    ];
    if rows != want_rows {
        return Err(format!("walker record {rows:?}"));
    }
    if w.belief_rows(nav) != vec![("Host".to_string(), "Patron")] {
        return Err(format!("controller record {:?}", w.belief_rows(nav)));
    }
    Ok(())
}
/// Brute-force evidence table: joint[ob][j] for every (observation, behavior) pair,
/// then marginalized over behaviors and normalized over the family.
pub fn oracle_observation(
    levels: &[(usize, usize, f64)],
    priors: &[[f64; 3]],
    lik: &[Vec<[f64; 3]>],
    members: &[usize],
) -> Option<Vec<f64>> {
    let mut joint = vec![vec![0.0; levels.len()]; members.len()];
    for (i, &ob) in members.iter().enumerate() {
        for (j, &(kind, level, p)) in levels.iter().enumerate() {
            joint[i][j] = priors[kind][level] * lik[kind][ob][level] * p;
        }
    }
    let marg: Vec<f64> = joint.iter().map(|row| row.iter().sum()).collect();
    let z: f64 = marg.iter().sum();
    (z > 0.0).then(|| marg.iter().map(|m| m / z).collect())
}

/// Full joint over (belief, o_1 .. o_k) with every observation slot free,
/// then conditioned on the observed assignment.
pub fn oracle_belief(
    prior: &[f64; 4],
    lik: &[[[f64; 3]; 2]; 4],
    observed: &[(usize, usize)],
) -> Option<[f64; 4]> {
    let k = observed.len();
    let mut post = [0.0; 4];
    let combos = 3usize.pow(k as u32);
    for bl in 0..4 {
        for code in 0..combos {
            let mut assign = Vec::with_capacity(k);
            let mut c = code;
            for _ in 0..k {
                assign.push(c % 3);
                c /= 3;
            }
            let mut p = prior[bl];
            for (slot, &(family, _)) in observed.iter().enumerate() {
                p *= lik[bl][family][assign[slot]];
            }
            if assign.iter().zip(observed).all(|(a, (_, o))| a == o) {
                post[bl] += p;
            }
        }
    }
    let z: f64 = post.iter().sum();
    (z > 0.0).then(|| post.map(|p| p / z))
}
