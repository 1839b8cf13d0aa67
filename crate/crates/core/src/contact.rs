//! Contact taxonomy and the contact ledger.

use std::fmt;

use crate::ids::NodeId;
use crate::node::{Node, ResourceSet};
use crate::time::SimTime;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ContactKind {
    /// Encounter that carries a transfer already addressed to this pair.
    Direct,
    OpportunisticResourceless,
    OpportunisticResourceful,
}

impl ContactKind {
    pub fn name(self) -> &'static str {
        match self {
            ContactKind::Direct => "direct",
            ContactKind::OpportunisticResourceless => "opportunistic_resourceless",
            ContactKind::OpportunisticResourceful => "opportunistic_resourceful",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variety {
    Homogeneous,
    Heterogeneous,
    NotApplicable,
}

impl Variety {
    pub fn name(self) -> &'static str {
        match self {
            Variety::Homogeneous => "homogeneous",
            Variety::Heterogeneous => "heterogeneous",
            Variety::NotApplicable => "not_applicable",
        }
    }
}

impl fmt::Display for ContactKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for Variety {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactEvent {
    pub a: NodeId,
    pub b: NodeId,
    pub kind: ContactKind,
    pub variety: Variety,
    pub started_at: SimTime,
    pub ended_at: SimTime,
}

/// Outcome of classifying an encounter, including which side can serve which.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classification {
    pub kind: ContactKind,
    pub variety: Variety,
    /// Types `a` wants that `b` can lend.
    pub a_wants_from_b: ResourceSet,
    /// Types `b` wants that `a` can lend.
    pub b_wants_from_a: ResourceSet,
}

pub fn classify_contact(
    a: &Node,
    b: &Node,
    demand_a: ResourceSet,
    demand_b: ResourceSet,
    pending_destination: bool,
    threshold: f64,
) -> Classification {
    let a_wants_from_b = demand_a.intersection(b.resources.offers(threshold));
    let b_wants_from_a = demand_b.intersection(a.resources.offers(threshold));
    let (kind, variety) = if pending_destination {
        (ContactKind::Direct, Variety::NotApplicable)
    } else if !a_wants_from_b.is_empty() || !b_wants_from_a.is_empty() {
        let v = if a.class == b.class {
            Variety::Homogeneous
        } else {
            Variety::Heterogeneous
        };
        (ContactKind::OpportunisticResourceful, v)
    } else {
        (
            ContactKind::OpportunisticResourceless,
            Variety::NotApplicable,
        )
    };
    Classification {
        kind,
        variety,
        a_wants_from_b,
        b_wants_from_a,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ContactCounts {
    pub n_dc: u64,
    pub n_oc: u64,
    pub n_hom: u64,
    pub n_het: u64,
}

impl ContactCounts {
    pub fn n_roc(&self) -> u64 {
        self.n_hom + self.n_het
    }

    pub fn n_tc(&self) -> u64 {
        self.n_dc + self.n_oc + self.n_roc()
    }

    fn count(&mut self, kind: ContactKind, variety: Variety) {
        match (kind, variety) {
            (ContactKind::Direct, _) => self.n_dc += 1,
            (ContactKind::OpportunisticResourceless, _) => self.n_oc += 1,
            (ContactKind::OpportunisticResourceful, Variety::Homogeneous) => self.n_hom += 1,
            (ContactKind::OpportunisticResourceful, _) => self.n_het += 1,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ContactLedger {
    events: Vec<ContactEvent>,
    counts: ContactCounts,
}

impl ContactLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends an event and bumps exactly one counter. Returns the event index.
    pub fn record_contact(&mut self, event: ContactEvent) -> usize {
        debug_assert!(
            (event.variety != Variety::NotApplicable)
                == (event.kind == ContactKind::OpportunisticResourceful)
        );
        self.counts.count(event.kind, event.variety);
        self.events.push(event);
        self.events.len() - 1
    }

    /// Sets the end time of an open event.
    pub fn close(&mut self, index: usize, ended_at: SimTime) {
        let e = &mut self.events[index];
        e.ended_at = ended_at.max(e.started_at);
    }

    pub fn counts(&self) -> ContactCounts {
        self.counts
    }

    pub fn events(&self) -> &[ContactEvent] {
        &self.events
    }

    /// Counters rebuilt from the event list.
    pub fn recount(&self) -> ContactCounts {
        let mut c = ContactCounts::default();
        for e in &self.events {
            c.count(e.kind, e.variety);
        }
        c
    }
}
