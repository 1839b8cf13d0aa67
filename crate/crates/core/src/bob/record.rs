use indexmap::IndexMap;

use super::Belief;
use crate::ids::NodeId;
use crate::time::{SimDuration, SimTime};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RecordKey {
    Host,
    Peer(NodeId),
}

/// Which formation produced a belief: the forming node and its formation counter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Provenance {
    pub origin: NodeId,
    pub seq: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecordEntry {
    pub belief: Belief,
    pub updated_at: SimTime,
    pub provenance: Provenance,
}

/// ⟨node id, belief⟩ table: the host's self-belief plus the latest belief
/// received from each neighbor, in first-seen order.
#[derive(Clone, Debug, PartialEq)]
pub struct BeliefRecord {
    host: Option<RecordEntry>,
    peers: IndexMap<NodeId, RecordEntry>,
    refresh_period: SimDuration,
}

impl BeliefRecord {
    pub fn new(refresh_period: SimDuration) -> Self {
        Self {
            host: None,
            peers: IndexMap::new(),
            refresh_period,
        }
    }

    /// Inserts or overwrites the entry for `key`.
    pub fn update(&mut self, key: RecordKey, belief: Belief, now: SimTime, provenance: Provenance) {
        let entry = RecordEntry {
            belief,
            updated_at: now,
            provenance,
        };
        match key {
            RecordKey::Host => self.host = Some(entry),
            RecordKey::Peer(id) => {
                self.peers.insert(id, entry);
            }
        }
    }

    /// Drops neighbor entries older than the refresh period. The self entry is kept.
    pub fn refresh(&mut self, now: SimTime) -> usize {
        let before = self.peers.len();
        let period = self.refresh_period;
        self.peers.retain(|_, e| now.since(e.updated_at) <= period);
        before - self.peers.len()
    }

    pub fn host(&self) -> Option<&RecordEntry> {
        self.host.as_ref()
    }

    pub fn peer(&self, id: NodeId) -> Option<&RecordEntry> {
        self.peers.get(&id)
    }

    pub fn peers(&self) -> impl Iterator<Item = (NodeId, &RecordEntry)> {
        self.peers.iter().map(|(k, v)| (*k, v))
    }

    /// Position of a neighbor in scan order (host first, then neighbors).
    pub fn scan_position(&self, id: NodeId) -> Option<usize> {
        self.peers
            .get_index_of(&id)
            .map(|i| i + usize::from(self.host.is_some()))
    }

    /// Number of entries including the self entry.
    pub fn len(&self) -> usize {
        self.peers.len() + usize::from(self.host.is_some())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn refresh_period(&self) -> SimDuration {
        self.refresh_period
    }

    /// Rows as `(label, belief label)`, the host row first.
    pub fn rows(&self) -> Vec<(String, &'static str)> {
        let mut rows = Vec::with_capacity(self.len());
        if let Some(h) = &self.host {
            rows.push(("Host".to_string(), h.belief.class.label()));
        }
        for (id, e) in &self.peers {
            rows.push((format!("ID (neighbor {})", id.0), e.belief.class.label()));
        }
        rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bob::BeliefClass;

    fn belief(class: BeliefClass) -> Belief {
        Belief {
            class,
            posterior: 0.9,
            generated_at: SimTime::ZERO,
        }
    }

    fn prov(n: u32) -> Provenance {
        Provenance {
            origin: NodeId(n),
            seq: 0,
        }
    }

    #[test]
    fn builds_the_reference_table() {
        let mut r = BeliefRecord::new(SimDuration::from_secs(10));
        let t = SimTime::ZERO;
        r.update(RecordKey::Host, belief(BeliefClass::Slack), t, prov(0));
        r.update(
            RecordKey::Peer(NodeId(2)),
            belief(BeliefClass::Casual),
            t,
            prov(2),
        );
        r.update(
            RecordKey::Peer(NodeId(6)),
            belief(BeliefClass::Patron),
            t,
            prov(6),
        );
        r.update(
            RecordKey::Peer(NodeId(3)),
            belief(BeliefClass::Casual),
            t,
            prov(3),
        );
        let expect = [
            ("Host", "Slack"),
            ("ID (neighbor 2)", "Casual"),
            ("ID (neighbor 6)", "Patron"),
            ("ID (neighbor 3)", "Casual"),
        ];
        let rows = r.rows();
        assert_eq!(rows.len(), expect.len());
        for ((label, class), (el, ec)) in rows.iter().zip(expect) {
            assert_eq!((label.as_str(), *class), (el, ec));
        }
    }

    #[test]
    fn overwrite_keeps_one_entry() {
        let mut r = BeliefRecord::new(SimDuration::from_secs(10));
        r.update(
            RecordKey::Peer(NodeId(4)),
            belief(BeliefClass::Vagrant),
            SimTime::ZERO,
            prov(4),
        );
        r.update(
            RecordKey::Peer(NodeId(4)),
            belief(BeliefClass::Patron),
            SimTime::from_secs(1),
            prov(4),
        );
        assert_eq!(r.len(), 1);
        assert_eq!(r.peer(NodeId(4)).unwrap().belief.class, BeliefClass::Patron);
    }

    #[test]
    fn refresh_purges_neighbors_only() {
        let mut r = BeliefRecord::new(SimDuration::from_secs(10));
        r.update(
            RecordKey::Host,
            belief(BeliefClass::Slack),
            SimTime::ZERO,
            prov(0),
        );
        r.update(
            RecordKey::Peer(NodeId(1)),
            belief(BeliefClass::Casual),
            SimTime::ZERO,
            prov(1),
        );
        r.update(
            RecordKey::Peer(NodeId(2)),
            belief(BeliefClass::Casual),
            SimTime::from_secs(5),
            prov(2),
        );
        let now = SimTime::from_secs(11);
        assert_eq!(r.refresh(now), 1);
        assert!(r.host().is_some());
        assert!(r
            .peers()
            .all(|(_, e)| now.since(e.updated_at) <= r.refresh_period()));
        assert_eq!(r.refresh(SimTime::from_secs(30)), 1);
        assert_eq!(r.len(), 1);
    }
}
