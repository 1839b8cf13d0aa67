//! The discrete-event engine.
//!
//! Time advances in fixed ticks. Each tick runs, in order: mobility and
//! resource drain, contact detection and classification, arrivals and
//! registration, parameter capture, scheduled self-belief formation, exchange
//! initiation and metrics sampling. Messages travel through the event queue
//! and are handled at their own timestamps before the next tick.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use thiserror::Error;

use crate::bob::{BehaviorParameterSample, CaptureSource, ParameterId};
use crate::contact::{classify_contact, ContactEvent, ContactKind, ContactLedger, Variety};
use crate::exchange::{
    complete_exchange, encode_reply, encode_request, initiate_exchange, serve_request, BeliefReply,
    ExchangeError, ExchangeTracker,
};
use crate::ids::NodeId;
use crate::metrics::{
    convergence_time, Attempt, AttemptKind, ExchangeRecord, FormationRecord, MetricsLedger,
};
use crate::mobility::{detect_contacts, step_node, MobilityConfig, Vec2, Waypoint};
use crate::node::{
    demand_scan, register_device, Node, NodeClass, Resource, ResourceSet, ResourceType,
};
use crate::queue::EventQueue;
use crate::rng::Streams;
use crate::scenario::{ArrivalProcess, Scenario};
use crate::time::{SimDuration, SimTime};

/// Nominal capacity of every attached resource.
const NOMINAL_CAPACITY: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("protocol violation at {at}: {what}")]
    Protocol { at: SimTime, what: String },
}

/// Observable engine events, recorded when the scenario enables tracing.
#[derive(Clone, Debug, PartialEq)]
pub enum TraceKind {
    Bootstrap {
        node: NodeId,
    },
    Registered {
        node: NodeId,
        authority: NodeId,
    },
    Denied {
        node: NodeId,
    },
    ContactStart {
        a: NodeId,
        b: NodeId,
        kind: ContactKind,
        variety: Variety,
    },
    ContactEnd {
        a: NodeId,
        b: NodeId,
    },
    Formed {
        node: NodeId,
        class: crate::bob::BeliefClass,
    },
    FormationFailed {
        node: NodeId,
        reason: crate::bob::BobError,
    },
    RequestSent {
        req_id: u64,
        from: NodeId,
        to: NodeId,
    },
    RequestDelivered {
        req_id: u64,
    },
    ReplySent {
        req_id: u64,
        formed_before: bool,
    },
    Refused {
        req_id: u64,
    },
    ReplyReceived {
        req_id: u64,
    },
    TimedOut {
        req_id: u64,
    },
    ReplyDropped {
        req_id: u64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceEvent {
    pub at: SimTime,
    pub kind: TraceKind,
}

#[derive(Clone, Debug, PartialEq)]
enum Event {
    Deliver {
        req_id: u64,
    },
    Reply {
        reply: BeliefReply,
        formed_before: bool,
    },
    Timeout {
        req_id: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct OpenContact {
    ledger_index: usize,
    started_at: SimTime,
    last_seen: SimTime,
    missed: u32,
}

/// Contact pair key, lower id first.
fn key(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Arrival {
    at: SimTime,
    node: NodeId,
}

/// A new contact whose captures and exchanges are still to run this tick.
#[derive(Clone, Copy, Debug)]
struct Fresh {
    a: NodeId,
    b: NodeId,
    a_initiates: bool,
    b_initiates: bool,
}

/// Counters for the registration conservation check.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RegistrationCounts {
    pub arrivals: u64,
    pub validated: u64,
    pub denied: u64,
}

pub struct World {
    scenario: Scenario,
    mobility: MobilityConfig,
    nodes: Vec<Node>,
    valid: Vec<bool>,
    authorities: Vec<NodeId>,
    arrivals: Vec<Arrival>,
    next_arrival: usize,
    streams: Streams,
    now: SimTime,
    ticks_done: u64,
    open: BTreeMap<(NodeId, NodeId), OpenContact>,
    last_contact_end: Vec<Option<SimTime>>,
    pending_direct: BTreeSet<(NodeId, NodeId)>,
    discovered: Vec<bool>,
    demand_at_start: Vec<ResourceSet>,
    met: Vec<ResourceSet>,
    seen_offers: Vec<(SimTime, ResourceSet)>,
    tracker: ExchangeTracker,
    queue: EventQueue<Event>,
    contacts: ContactLedger,
    metrics: MetricsLedger,
    registration: RegistrationCounts,
    trace: Vec<TraceEvent>,
    messages: Option<Vec<u8>>,
    last_sample: SimTime,
}

impl World {
    /// Builds the initial world. The scenario must already be validated.
    pub fn new(scenario: Scenario) -> Self {
        let mut streams = Streams::with_nodes(scenario.seed, scenario.node_count());
        let mobility = scenario.mobility();
        let mut nodes = Vec::with_capacity(scenario.node_count());
        let mut valid = Vec::with_capacity(scenario.node_count());
        let mut arrive_at: Vec<Option<SimTime>> = Vec::new();
        let mut resource_id = 0u32;
        let mut attach = |node: &mut Node, set: ResourceSet, fill: f64, drain: f64| {
            for t in set.iter() {
                let mut r = Resource::new(resource_id, t, NOMINAL_CAPACITY);
                r.capacity = NOMINAL_CAPACITY * fill;
                r.drain_rate = drain;
                resource_id += 1;
                // ids are fresh, so attaching cannot collide
                let _ = node.resources.attach_resource(r);
            }
        };
        for spec in &scenario.classes {
            for _ in 0..spec.count {
                let id = NodeId(nodes.len() as u32);
                let position = scenario.area.sample(&mut streams.placement);
                let range = uniform(&mut streams.placement, spec.range);
                let mut n = Node::new(id, spec.class, range, position);
                n.predictability = spec.predictability;
                for t in spec.resources.iter() {
                    let fill = uniform(&mut streams.resources, spec.fill);
                    let drain = uniform(&mut streams.resources, spec.drain);
                    attach(&mut n, ResourceSet::from_iter([t]), fill, drain);
                }
                let ok = !(streams.registration.gen::<f64>() < scenario.invalid_fraction);
                nodes.push(n);
                valid.push(ok);
                arrive_at.push(None);
            }
        }
        for p in &scenario.placed {
            let id = NodeId(nodes.len() as u32);
            let mut n = Node::new(id, p.class, p.range, p.position);
            n.predictability = p.predictability;
            attach(&mut n, p.resources, p.fill, p.drain);
            if let Some((target, speed)) = p.waypoint {
                n.motion = Some(Waypoint {
                    target,
                    speed,
                    pause_left: 0.0,
                });
            }
            nodes.push(n);
            valid.push(p.valid);
            arrive_at.push(Some(SimTime::ZERO + p.arrive));
        }

        // static generated nodes come up at t = 0, mobile ones over the warm-up
        let mut mobile: Vec<NodeId> = nodes
            .iter()
            .zip(&arrive_at)
            .filter(|(n, a)| n.mobile && a.is_none())
            .map(|(n, _)| n.id)
            .collect();
        for i in (1..mobile.len()).rev() {
            let j = streams.arrival.gen_range(0..=i);
            mobile.swap(i, j);
        }
        let warm = scenario.arrival.warmup.as_micros();
        let n_mobile = mobile.len() as u64;
        let mut clock = 0.0f64;
        for (i, id) in mobile.iter().enumerate() {
            let at = match scenario.arrival.process {
                ArrivalProcess::Ramp => warm * i as u64 / n_mobile.max(1),
                ArrivalProcess::Poisson => {
                    let u: f64 = streams.arrival.gen();
                    let t = clock;
                    clock += -(1.0 - u).ln() * warm as f64 / n_mobile.max(1) as f64;
                    (t as u64).min(warm)
                }
            };
            arrive_at[id.index()] = Some(SimTime::from_micros(at));
        }
        let mut arrivals: Vec<Arrival> = arrive_at
            .iter()
            .enumerate()
            .map(|(i, a)| Arrival {
                at: a.unwrap_or(SimTime::ZERO),
                node: NodeId(i as u32),
            })
            .collect();
        // authorities first among equal times so others can register with them
        arrivals.sort_by_key(|a| {
            let auth = nodes[a.node.index()].class == NodeClass::NavigationController;
            (a.at, !auth, a.node)
        });
        let authorities = nodes
            .iter()
            .filter(|n| n.class == NodeClass::NavigationController)
            .map(|n| n.id)
            .collect();

        let n = nodes.len();
        let metrics = MetricsLedger::new(mean_pause(&scenario), scenario.tick);
        Self {
            mobility,
            valid,
            authorities,
            arrivals,
            next_arrival: 0,
            streams,
            now: SimTime::ZERO,
            ticks_done: 0,
            open: BTreeMap::new(),
            last_contact_end: vec![None; n],
            pending_direct: BTreeSet::new(),
            discovered: vec![false; n],
            demand_at_start: vec![ResourceSet::EMPTY; n],
            met: vec![ResourceSet::EMPTY; n],
            seen_offers: vec![(SimTime::ZERO, ResourceSet::EMPTY); n],
            tracker: ExchangeTracker::new(),
            queue: EventQueue::new(),
            contacts: ContactLedger::new(),
            metrics,
            registration: RegistrationCounts::default(),
            trace: Vec::new(),
            messages: None,
            last_sample: SimTime::ZERO,
            nodes,
            scenario,
        }
    }

    /// Keeps a binary log of every request and reply sent.
    pub fn record_messages(&mut self) {
        self.messages.get_or_insert_with(Vec::new);
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn contacts(&self) -> &ContactLedger {
        &self.contacts
    }

    pub fn metrics(&self) -> &MetricsLedger {
        &self.metrics
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    pub fn messages(&self) -> Option<&[u8]> {
        self.messages.as_deref()
    }

    pub fn registration(&self) -> RegistrationCounts {
        self.registration
    }

    /// Pairs currently in range.
    pub fn open_contacts(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.open
            .iter()
            .filter(|(_, c)| c.missed == 0)
            .map(|(k, _)| *k)
    }

    pub fn total_ticks(&self) -> u64 {
        if self.scenario.duration.is_zero() {
            0
        } else {
            self.scenario.duration.as_micros() / self.scenario.tick.as_micros() + 1
        }
    }

    pub fn finished(&self) -> bool {
        self.ticks_done >= self.total_ticks()
    }

    /// Runs every remaining tick, then drains messages due by the end.
    pub fn run(&mut self) -> Result<(), SimError> {
        while !self.finished() {
            self.step()?;
        }
        let end = SimTime::ZERO + self.scenario.duration;
        self.drain_events(end)
    }

    /// Advances one tick. Does nothing once the run is over.
    pub fn step(&mut self) -> Result<(), SimError> {
        if self.finished() {
            return Ok(());
        }
        let t = SimTime::from_micros(self.ticks_done * self.scenario.tick.as_micros());
        self.drain_events(t)?;
        self.now = t;
        if self.ticks_done > 0 {
            self.move_and_drain(self.scenario.tick);
        }
        let fresh = self.detect(t);
        self.arrive(t);
        self.capture_fresh(&fresh, t);
        let session = self.scenario.cognitive.session_period.as_micros();
        if t > SimTime::ZERO && t.as_micros() % session == 0 {
            self.capture_neighborhoods(t);
            self.form_all(t);
        }
        for f in &fresh {
            if f.a_initiates {
                self.send(f.a, f.b, t, 0);
            }
            if f.b_initiates {
                self.send(f.b, f.a, t, 0);
            }
        }
        let interval = self.scenario.sampling_interval.as_micros();
        if t > SimTime::ZERO && t.as_micros() % interval == 0 {
            self.sample(t);
        }
        self.ticks_done += 1;
        Ok(())
    }

    fn log(&mut self, at: SimTime, kind: TraceKind) {
        if self.scenario.trace {
            self.trace.push(TraceEvent { at, kind });
        }
    }

    fn move_and_drain(&mut self, dt: SimDuration) {
        let mut registered = 0usize;
        for n in &mut self.nodes {
            if n.registered {
                registered += 1;
                step_node(
                    n,
                    &self.mobility,
                    dt,
                    &mut self.streams.mobility[n.id.index()],
                );
                n.resources.drain(dt);
            }
        }
        self.metrics.node_seconds += registered as f64 * dt.as_secs_f64();
    }

    fn in_range(&self, a: NodeId, b: NodeId) -> bool {
        self.open.get(&key(a, b)).is_some_and(|c| c.missed == 0)
    }

    fn detect(&mut self, t: SimTime) -> Vec<Fresh> {
        let pairs = detect_contacts(&self.nodes);
        let live: BTreeSet<(NodeId, NodeId)> = pairs.iter().copied().collect();
        let grace = self.scenario.protocol.contact_grace_ticks.max(1);
        let mut closed = Vec::new();
        for (k, c) in self.open.iter_mut() {
            if !live.contains(k) {
                c.missed += 1;
                if c.missed >= grace {
                    closed.push(*k);
                }
            }
        }
        for k in closed {
            let c = self.open.remove(&k).expect("closing an open contact");
            self.contacts.close(c.ledger_index, c.last_seen);
            let period = c.last_seen.since(c.started_at).as_secs_f64();
            for n in [k.0, k.1] {
                self.capture(n, ParameterId::ContactPeriod, period, t);
                self.last_contact_end[n.index()] = Some(c.last_seen);
            }
            self.log(t, TraceKind::ContactEnd { a: k.0, b: k.1 });
        }

        let threshold = self.scenario.protocol.offer_threshold;
        let demand_threshold = self.scenario.protocol.demand_threshold;
        let mut fresh = Vec::new();
        for (a, b) in pairs {
            if let Some(c) = self.open.get_mut(&(a, b)) {
                c.last_seen = t;
                c.missed = 0;
                continue;
            }
            let (na, nb) = (&self.nodes[a.index()], &self.nodes[b.index()]);
            let direct_ab = self.pending_direct.contains(&(a, b));
            let direct_ba = self.pending_direct.contains(&(b, a));
            let class = classify_contact(
                na,
                nb,
                demand_scan(na, demand_threshold),
                demand_scan(nb, demand_threshold),
                direct_ab || direct_ba,
                threshold,
            );
            let idx = self.contacts.record_contact(ContactEvent {
                a,
                b,
                kind: class.kind,
                variety: class.variety,
                started_at: t,
                ended_at: t,
            });
            self.open.insert(
                (a, b),
                OpenContact {
                    ledger_index: idx,
                    started_at: t,
                    last_seen: t,
                    missed: 0,
                },
            );
            let (a_init, b_init) = match class.kind {
                ContactKind::Direct => {
                    self.pending_direct.remove(&(a, b));
                    self.pending_direct.remove(&(b, a));
                    (
                        direct_ab || !class.a_wants_from_b.is_empty(),
                        direct_ba || !class.b_wants_from_a.is_empty(),
                    )
                }
                ContactKind::OpportunisticResourceful => (
                    !class.a_wants_from_b.is_empty(),
                    !class.b_wants_from_a.is_empty(),
                ),
                ContactKind::OpportunisticResourceless => (false, false),
            };
            self.log(
                t,
                TraceKind::ContactStart {
                    a,
                    b,
                    kind: class.kind,
                    variety: class.variety,
                },
            );
            fresh.push(Fresh {
                a,
                b,
                a_initiates: a_init,
                b_initiates: b_init,
            });
        }
        self.metrics.contacts = self.contacts.counts();
        fresh
    }

    fn arrive(&mut self, t: SimTime) {
        while let Some(&Arrival { at, node }) = self.arrivals.get(self.next_arrival) {
            if at > t {
                break;
            }
            self.next_arrival += 1;
            self.registration.arrivals += 1;
            let i = node.index();
            if self.nodes[i].mobile && self.nodes[i].motion.is_none() {
                let class = self.nodes[i].class;
                self.nodes[i].motion = Some(
                    self.mobility
                        .initial_leg(class, &mut self.streams.mobility[i]),
                );
            }
            if self.nodes[i].class == NodeClass::NavigationController && self.valid[i] {
                let _ = self.nodes[i].bootstrap_authority(&self.scenario.cognitive, t);
                self.registration.validated += 1;
                self.after_install(node, t);
                self.log(t, TraceKind::Bootstrap { node });
                continue;
            }
            let Some(authority) = self.pick_authority(node) else {
                self.registration.denied += 1;
                self.log(t, TraceKind::Denied { node });
                continue;
            };
            let auth = self.nodes[authority.index()].clone();
            let valid = self.valid[i];
            let session = register_device(
                &mut self.nodes[i],
                &auth,
                valid,
                &self.scenario.cognitive,
                t,
            );
            if self.nodes[i].registered && session.is_ok() {
                self.registration.validated += 1;
                self.after_install(node, t);
                self.log(t, TraceKind::Registered { node, authority });
            } else {
                self.registration.denied += 1;
                self.log(t, TraceKind::Denied { node });
            }
        }
    }

    fn after_install(&mut self, node: NodeId, _t: SimTime) {
        let d = demand_scan(
            &self.nodes[node.index()],
            self.scenario.protocol.demand_threshold,
        );
        self.demand_at_start[node.index()] = d;
    }

    /// Registered navigation controllers share the registrations round-robin.
    fn pick_authority(&self, node: NodeId) -> Option<NodeId> {
        let live: Vec<NodeId> = self
            .authorities
            .iter()
            .copied()
            .filter(|a| self.nodes[a.index()].registered)
            .collect();
        (!live.is_empty()).then(|| live[node.index() % live.len()])
    }

    fn capture(&mut self, node: NodeId, p: ParameterId, value: f64, t: SimTime) {
        let max = self.scenario.cognitive.max_value(p);
        let Some(mca) = self.nodes[node.index()].mca.as_mut() else {
            return;
        };
        if let Ok(s) = BehaviorParameterSample::clamped(p, value, max, CaptureSource::External, t) {
            if mca.parameter_log.record(s).is_ok() {
                self.metrics.captures[p.index()] += 1;
            }
        }
    }

    /// Resource types offered by the node itself or by any peer it was in
    /// range of since the current log window opened, as a share of all types.
    fn resource_history(&mut self, node: NodeId, t: SimTime) -> f64 {
        let threshold = self.scenario.protocol.offer_threshold;
        let window = self.scenario.cognitive.log_refresh;
        let mut set = self.nodes[node.index()].resources.offers(threshold);
        for (&(a, b), c) in &self.open {
            if c.missed > 0 {
                continue;
            }
            let peer = if a == node {
                b
            } else if b == node {
                a
            } else {
                continue;
            };
            set = set.union(self.nodes[peer.index()].resources.offers(threshold));
        }
        let seen = &mut self.seen_offers[node.index()];
        if t.since(seen.0) >= window {
            *seen = (t, ResourceSet::EMPTY);
        }
        seen.1 = seen.1.union(set);
        seen.1.len() as f64 / ResourceType::COUNT as f64
    }

    fn capture_fresh(&mut self, fresh: &[Fresh], t: SimTime) {
        let mut touched = BTreeSet::new();
        for f in fresh {
            for n in [f.a, f.b] {
                let node = &self.nodes[n.index()];
                let Some(mca) = node.mca.as_ref() else {
                    continue;
                };
                let speed = node.speed();
                let predictability = node.predictability;
                let since = self.last_contact_end[n.index()].unwrap_or(mca.installed_at);
                let gap = t.since(since).as_secs_f64();
                let history = self.resource_history(n, t);
                self.capture(n, ParameterId::Velocity, speed, t);
                self.capture(n, ParameterId::InterfacePeriod, gap, t);
                self.capture(n, ParameterId::MobilityPattern, predictability, t);
                self.capture(n, ParameterId::ResourceHistory, history, t);
                touched.insert(n);
            }
        }
        let cfg = &self.scenario.cognitive;
        for n in touched {
            if let Some(mca) = self.nodes[n.index()].mca.as_mut() {
                mca.observe(cfg);
            }
        }
    }

    /// Session-end sampling of every ongoing contact: the longest one so far
    /// and the resources pooled across all of them.
    fn capture_neighborhoods(&mut self, t: SimTime) {
        let mut longest: BTreeMap<NodeId, SimDuration> = BTreeMap::new();
        for (&(a, b), c) in &self.open {
            if c.missed > 0 {
                continue;
            }
            let d = t.since(c.started_at);
            for n in [a, b] {
                let e = longest.entry(n).or_default();
                *e = (*e).max(d);
            }
        }
        for (n, d) in longest {
            let history = self.resource_history(n, t);
            self.capture(n, ParameterId::ContactPeriod, d.as_secs_f64(), t);
            self.capture(n, ParameterId::ResourceHistory, history, t);
            if let Some(mca) = self.nodes[n.index()].mca.as_mut() {
                mca.observe(&self.scenario.cognitive);
            }
        }
    }

    fn form_all(&mut self, t: SimTime) {
        for i in 0..self.nodes.len() {
            let id = NodeId(i as u32);
            let cfg = &self.scenario.cognitive;
            let costs = &self.scenario.costs;
            let Some(mca) = self.nodes[i].mca.as_mut() else {
                continue;
            };
            mca.belief_record.refresh(t);
            let result = mca.form_self_belief(id, t, cfg, costs);
            let failed = result.is_err();
            self.metrics.attempts.push(Attempt {
                at: t,
                kind: AttemptKind::Formation,
                failed,
            });
            match result {
                Ok(f) => {
                    self.metrics.formations.push(FormationRecord {
                        node: id,
                        at: t,
                        class: f.belief.class,
                        timing: f.timing,
                    });
                    self.log(
                        t,
                        TraceKind::Formed {
                            node: id,
                            class: f.belief.class,
                        },
                    );
                }
                Err(reason) => self.log(t, TraceKind::FormationFailed { node: id, reason }),
            }
        }
    }

    fn send(&mut self, from: NodeId, to: NodeId, t: SimTime, attempt: u8) {
        let link = self.scenario.protocol.link;
        let (req, deliver_at) = initiate_exchange(&mut self.tracker, from, to, t, attempt, &link);
        if !self.discovered[from.index()] {
            // first peer found holding something this node is short of
            self.discovered[from.index()] = true;
            let installed = self.nodes[from.index()]
                .mca
                .as_ref()
                .map_or(t, |m| m.installed_at);
            self.metrics.discovery_latencies.push(t.since(installed));
        }
        if let Some(buf) = self.messages.as_mut() {
            buf.push(1);
            encode_request(&req, buf);
        }
        self.queue
            .push(deliver_at, Event::Deliver { req_id: req.req_id });
        self.queue.push(
            t + self.scenario.protocol.timeout,
            Event::Timeout { req_id: req.req_id },
        );
        self.log(
            t,
            TraceKind::RequestSent {
                req_id: req.req_id,
                from,
                to,
            },
        );
    }

    fn drain_events(&mut self, until: SimTime) -> Result<(), SimError> {
        while let Some((at, ev)) = self.queue.pop_due(until) {
            match ev {
                Event::Deliver { req_id } => self.on_deliver(req_id, at),
                Event::Reply {
                    reply,
                    formed_before,
                } => self.on_reply(reply, formed_before, at)?,
                Event::Timeout { req_id } => self.on_timeout(req_id, at),
            }
        }
        Ok(())
    }

    fn fail_exchange(&mut self, from: NodeId, to: NodeId, at: SimTime) {
        self.metrics.attempts.push(Attempt {
            at,
            kind: AttemptKind::Exchange,
            failed: true,
        });
        self.pending_direct.insert((from, to));
    }

    fn on_deliver(&mut self, req_id: u64, at: SimTime) {
        let Some(out) = self.tracker.get(req_id).copied() else {
            return;
        };
        let req = out.request;
        if !self.in_range(req.from, req.to) {
            return;
        }
        let threshold = self.scenario.protocol.offer_threshold;
        let peer = &mut self.nodes[req.to.index()];
        let offers = peer.resources.offers(threshold);
        let Some(mca) = peer.mca.as_mut() else {
            return;
        };
        let served = serve_request(
            mca,
            offers,
            &req,
            at,
            &self.scenario.protocol.link,
            &self.scenario.cognitive,
            &self.scenario.costs,
        );
        self.log(at, TraceKind::RequestDelivered { req_id });
        match served {
            Ok(s) => {
                if let Some(f) = &s.formation {
                    self.metrics.formations.push(FormationRecord {
                        node: req.to,
                        at,
                        class: f.belief.class,
                        timing: f.timing,
                    });
                    self.metrics.attempts.push(Attempt {
                        at,
                        kind: AttemptKind::Formation,
                        failed: false,
                    });
                    self.log(
                        at,
                        TraceKind::Formed {
                            node: req.to,
                            class: f.belief.class,
                        },
                    );
                }
                if let Some(o) = self.tracker.get_mut(req_id) {
                    o.delivered_at = Some(at);
                    o.peer_formed_before_request = s.peer_formed_before_request;
                }
                if let Some(buf) = self.messages.as_mut() {
                    buf.push(2);
                    encode_reply(&s.reply, buf);
                }
                self.log(
                    s.reply.sent_at,
                    TraceKind::ReplySent {
                        req_id,
                        formed_before: s.peer_formed_before_request,
                    },
                );
                self.queue.push(
                    s.reply.received_at,
                    Event::Reply {
                        reply: s.reply,
                        formed_before: s.peer_formed_before_request,
                    },
                );
            }
            Err(_) => {
                self.tracker.retire(req_id);
                self.log(at, TraceKind::Refused { req_id });
                self.fail_exchange(req.from, req.to, at);
            }
        }
    }

    fn on_reply(
        &mut self,
        reply: BeliefReply,
        formed_before: bool,
        at: SimTime,
    ) -> Result<(), SimError> {
        let Some(out) = self.tracker.get(reply.req_id).copied() else {
            return match self.tracker.take(reply.req_id) {
                Err(ExchangeError::OrphanReply(id)) if self.scenario.protocol.strict => {
                    Err(SimError::Protocol {
                        at,
                        what: format!("orphan reply {id}"),
                    })
                }
                _ => {
                    self.metrics.dropped_replies += 1;
                    self.log(
                        at,
                        TraceKind::ReplyDropped {
                            req_id: reply.req_id,
                        },
                    );
                    Ok(())
                }
            };
        };
        let req = out.request;
        if !self.in_range(req.from, req.to) {
            // lost with the contact; the timeout settles the request
            return Ok(());
        }
        self.tracker
            .take(reply.req_id)
            .expect("outstanding request");
        let delivered_at = out.delivered_at.ok_or_else(|| SimError::Protocol {
            at,
            what: format!("reply {} before its request was delivered", reply.req_id),
        })?;
        let session = self.scenario.cognitive.session_period;
        let demand_threshold = self.scenario.protocol.demand_threshold;
        let replenish = self.scenario.protocol.replenish_to;
        let trace_cost = self.scenario.costs;
        let node = &mut self.nodes[req.from.index()];
        let Some(mca) = node.mca.as_mut() else {
            return Ok(());
        };
        let timing =
            complete_exchange(mca, &req, delivered_at, &reply, formed_before).map_err(|e| {
                SimError::Protocol {
                    at,
                    what: e.to_string(),
                }
            })?;
        let t_bf = mca
            .fresh_formation(at, session)
            .map_or(SimDuration::ZERO, |f| f.timing.total());
        let scanned = mca.belief_record.scan_position(req.to).map_or(0, |p| p + 1);
        let t_tot = t_bf + timing.t_bx;
        let t_tra = trace_cost.trace_time(scanned);
        let record = ExchangeRecord {
            requester: req.from,
            peer: req.to,
            completed_at: at,
            timing,
            t_bf,
            t_tot,
            t_tra,
            t_con: convergence_time(timing.t_req, t_tra, t_tot),
        };
        let got = node
            .resources
            .in_demand(demand_threshold)
            .intersection(reply.resource_summary);
        if !got.is_empty() {
            node.resources.replenish(got, replenish);
        }
        self.met[req.from.index()] = self.met[req.from.index()].union(got);
        self.metrics.exchanges.push(record);
        self.metrics.attempts.push(Attempt {
            at,
            kind: AttemptKind::Exchange,
            failed: false,
        });
        self.log(
            at,
            TraceKind::ReplyReceived {
                req_id: reply.req_id,
            },
        );
        Ok(())
    }

    fn on_timeout(&mut self, req_id: u64, at: SimTime) {
        let Some(out) = self.tracker.retire(req_id) else {
            return;
        };
        let req = out.request;
        self.log(at, TraceKind::TimedOut { req_id });
        if out.attempt < self.scenario.protocol.retries && self.in_range(req.from, req.to) {
            self.send(req.from, req.to, at, out.attempt + 1);
        } else {
            self.fail_exchange(req.from, req.to, at);
        }
    }

    fn sample(&mut self, t: SimTime) {
        let threshold = self.scenario.protocol.demand_threshold;
        for i in 0..self.nodes.len() {
            if !self.nodes[i].registered {
                continue;
            }
            let start = self.demand_at_start[i];
            self.metrics.demand_entries += start.len() as u64;
            self.metrics.demand_satisfied += start.intersection(self.met[i]).len() as u64;
            self.demand_at_start[i] = demand_scan(&self.nodes[i], threshold);
            self.met[i] = ResourceSet::EMPTY;
        }
        let registered = self.nodes.iter().filter(|n| n.registered).count();
        self.metrics.density_samples.push((t, registered));
        let row = self.metrics.snapshot(t, self.last_sample, registered);
        self.metrics.rows.push(row);
        self.last_sample = t;
    }

    /// Belief record of one node as display rows.
    pub fn belief_rows(&self, node: NodeId) -> Vec<(String, &'static str)> {
        self.nodes
            .get(node.index())
            .and_then(|n| n.mca.as_ref())
            .map(|m| m.belief_record.rows())
            .unwrap_or_default()
    }

    pub fn self_belief(&self, node: NodeId) -> Option<crate::bob::Belief> {
        let m = self.nodes.get(node.index())?.mca.as_ref()?;
        m.belief_record.host().map(|e| e.belief)
    }

    pub fn position(&self, node: NodeId) -> Vec2 {
        self.nodes[node.index()].position
    }
}

fn uniform<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    lo + rng.gen::<f64>() * (hi - lo)
}

/// Pause time reported as t_p: the mean of the configured pause range.
fn mean_pause(s: &Scenario) -> SimDuration {
    SimDuration::from_micros((s.pause.0.as_micros() + s.pause.1.as_micros()) / 2)
}

/// Runs a scenario to completion.
pub fn run(scenario: Scenario) -> Result<World, SimError> {
    let mut w = World::new(scenario);
    w.run()?;
    Ok(w)
}
