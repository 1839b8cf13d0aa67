//! REQ/REP belief exchange between agents in contact.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::bob::{Belief, BeliefClass, CognitiveConfig, Provenance, RecordKey};
use crate::ids::NodeId;
use crate::metrics::StageCostModel;
use crate::node::{Formation, McaState, ResourceSet};
use crate::time::{SimDuration, SimTime};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExchangeError {
    #[error("reply {0} matches no request ever issued")]
    OrphanReply(u64),
    #[error("reply {0} arrived after its request was retired")]
    LateReply(u64),
    #[error("{peer} refused request {req_id}: no belief can be formed")]
    Refused { req_id: u64, peer: NodeId },
    #[error("reply {0} does not match the request it completes")]
    Mismatch(u64),
    #[error("timestamps of exchange {0} are out of order")]
    Unordered(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("expected {expected} bytes, got {got}")]
    Length { expected: usize, got: usize },
    #[error("unknown belief class tag {0}")]
    BadClass(u8),
}

/// Per-message delay: serialization at the link rate plus fixed processing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LinkDelayModel {
    pub data_rate_bps: u64,
    pub processing: SimDuration,
    pub request_bytes: u32,
    pub reply_bytes: u32,
}

impl Default for LinkDelayModel {
    fn default() -> Self {
        Self {
            data_rate_bps: 2_000_000,
            processing: SimDuration::from_millis(1),
            request_bytes: 64,
            reply_bytes: 256,
        }
    }
}

impl LinkDelayModel {
    /// A link that delivers instantly.
    pub const ZERO: LinkDelayModel = LinkDelayModel {
        data_rate_bps: 0,
        processing: SimDuration::ZERO,
        request_bytes: 0,
        reply_bytes: 0,
    };

    pub fn message_delay(&self, bytes: u32) -> SimDuration {
        if bytes == 0 || self.data_rate_bps == 0 {
            return self.processing;
        }
        let bits_us = u64::from(bytes) * 8 * 1_000_000;
        SimDuration::from_micros(bits_us.div_ceil(self.data_rate_bps)) + self.processing
    }

    pub fn request_delay(&self) -> SimDuration {
        self.message_delay(self.request_bytes)
    }

    pub fn reply_delay(&self) -> SimDuration {
        self.message_delay(self.reply_bytes)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BeliefRequest {
    pub req_id: u64,
    pub from: NodeId,
    pub to: NodeId,
    pub sent_at: SimTime,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeliefReply {
    pub req_id: u64,
    pub belief: Belief,
    pub resource_summary: ResourceSet,
    pub sent_at: SimTime,
    pub received_at: SimTime,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExchangeTiming {
    pub t_req: SimDuration,
    pub t_rep: SimDuration,
    pub t_bx: SimDuration,
    pub peer_formed_before_request: bool,
}

impl ExchangeTiming {
    pub fn new(t_req: SimDuration, t_rep: SimDuration, peer_formed_before_request: bool) -> Self {
        Self {
            t_req,
            t_rep,
            t_bx: t_req + t_rep,
            peer_formed_before_request,
        }
    }
}

/// A request the requester is still waiting on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Outstanding {
    pub request: BeliefRequest,
    /// 0 for the first try, 1 for the retry.
    pub attempt: u8,
    pub delivered_at: Option<SimTime>,
    pub peer_formed_before_request: bool,
}

/// Issues request ids and tracks which are still outstanding.
///
/// Ids are handed out sequentially, so any id below the next one that is not
/// outstanding has been retired.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExchangeTracker {
    next_id: u64,
    outstanding: BTreeMap<u64, Outstanding>,
}

impl ExchangeTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn issued(&self) -> u64 {
        self.next_id
    }

    pub fn get(&self, req_id: u64) -> Option<&Outstanding> {
        self.outstanding.get(&req_id)
    }

    pub fn get_mut(&mut self, req_id: u64) -> Option<&mut Outstanding> {
        self.outstanding.get_mut(&req_id)
    }

    pub fn outstanding(&self) -> impl Iterator<Item = &Outstanding> {
        self.outstanding.values()
    }

    /// Removes a request that will not be answered.
    pub fn retire(&mut self, req_id: u64) -> Option<Outstanding> {
        self.outstanding.remove(&req_id)
    }

    /// Claims the request a reply answers.
    pub fn take(&mut self, req_id: u64) -> Result<Outstanding, ExchangeError> {
        match self.outstanding.remove(&req_id) {
            Some(o) => Ok(o),
            None if req_id < self.next_id => Err(ExchangeError::LateReply(req_id)),
            None => Err(ExchangeError::OrphanReply(req_id)),
        }
    }

    fn issue(&mut self, from: NodeId, to: NodeId, now: SimTime, attempt: u8) -> BeliefRequest {
        let request = BeliefRequest {
            req_id: self.next_id,
            from,
            to,
            sent_at: now,
        };
        self.next_id += 1;
        self.outstanding.insert(
            request.req_id,
            Outstanding {
                request,
                attempt,
                delivered_at: None,
                peer_formed_before_request: false,
            },
        );
        request
    }
}

/// Sends a request from `from` to `to`. Returns it with its delivery time.
pub fn initiate_exchange(
    tracker: &mut ExchangeTracker,
    from: NodeId,
    to: NodeId,
    now: SimTime,
    attempt: u8,
    link: &LinkDelayModel,
) -> (BeliefRequest, SimTime) {
    let r = tracker.issue(from, to, now, attempt);
    (r, now + link.request_delay())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Served {
    pub reply: BeliefReply,
    pub peer_formed_before_request: bool,
    /// Set when the peer had to form its self-belief to answer.
    pub formation: Option<Formation>,
}

/// Answers a delivered request, forming the peer's self-belief first if the
/// current one is stale.
pub fn serve_request(
    peer_mca: &mut McaState,
    offers: ResourceSet,
    request: &BeliefRequest,
    now: SimTime,
    link: &LinkDelayModel,
    config: &CognitiveConfig,
    costs: &StageCostModel,
) -> Result<Served, ExchangeError> {
    let (belief, formed_before, formation) = match peer_mca.current_self_belief(now) {
        Some(entry) => (entry.belief, true, None),
        None => {
            let f = peer_mca
                .form_self_belief(request.to, now, config, costs)
                .map_err(|_| ExchangeError::Refused {
                    req_id: request.req_id,
                    peer: request.to,
                })?;
            (f.belief, false, Some(f))
        }
    };
    let wait = formation
        .as_ref()
        .map_or(SimDuration::ZERO, |f| f.timing.total());
    let sent_at = now + wait;
    Ok(Served {
        reply: BeliefReply {
            req_id: request.req_id,
            belief,
            resource_summary: offers,
            sent_at,
            received_at: sent_at + link.reply_delay(),
        },
        peer_formed_before_request: formed_before,
        formation,
    })
}

/// Stores the peer's belief and returns the exchange timing.
pub fn complete_exchange(
    requester: &mut McaState,
    request: &BeliefRequest,
    delivered_at: SimTime,
    reply: &BeliefReply,
    peer_formed_before_request: bool,
) -> Result<ExchangeTiming, ExchangeError> {
    if reply.req_id != request.req_id {
        return Err(ExchangeError::Mismatch(reply.req_id));
    }
    if !(request.sent_at <= delivered_at
        && delivered_at <= reply.sent_at
        && reply.sent_at <= reply.received_at)
    {
        return Err(ExchangeError::Unordered(reply.req_id));
    }
    requester.belief_record.update(
        RecordKey::Peer(request.to),
        reply.belief,
        reply.received_at,
        Provenance {
            origin: request.to,
            seq: reply.req_id,
        },
    );
    Ok(ExchangeTiming::new(
        delivered_at.since(request.sent_at),
        reply.received_at.since(delivered_at),
        peer_formed_before_request,
    ))
}

pub const REQUEST_WIRE_LEN: usize = 32;
pub const REPLY_WIRE_LEN: usize = 42;

/// `req_id | from | to | sent_at`, little-endian u64 each.
pub fn encode_request(r: &BeliefRequest, out: &mut Vec<u8>) {
    out.extend_from_slice(&r.req_id.to_le_bytes());
    out.extend_from_slice(&u64::from(r.from.0).to_le_bytes());
    out.extend_from_slice(&u64::from(r.to.0).to_le_bytes());
    out.extend_from_slice(&r.sent_at.as_micros().to_le_bytes());
}

/// `req_id | class u8 | posterior f64 | generated_at | resource mask u8 | sent_at | received_at`.
pub fn encode_reply(r: &BeliefReply, out: &mut Vec<u8>) {
    out.extend_from_slice(&r.req_id.to_le_bytes());
    out.push(r.belief.class.index() as u8);
    out.extend_from_slice(&r.belief.posterior.to_bits().to_le_bytes());
    out.extend_from_slice(&r.belief.generated_at.as_micros().to_le_bytes());
    out.push(r.resource_summary.bits());
    out.extend_from_slice(&r.sent_at.as_micros().to_le_bytes());
    out.extend_from_slice(&r.received_at.as_micros().to_le_bytes());
}

fn u64_at(b: &[u8], at: usize) -> u64 {
    let mut a = [0u8; 8];
    a.copy_from_slice(&b[at..at + 8]);
    u64::from_le_bytes(a)
}

fn check_len(b: &[u8], expected: usize) -> Result<(), WireError> {
    if b.len() == expected {
        Ok(())
    } else {
        Err(WireError::Length {
            expected,
            got: b.len(),
        })
    }
}

pub fn decode_request(b: &[u8]) -> Result<BeliefRequest, WireError> {
    check_len(b, REQUEST_WIRE_LEN)?;
    Ok(BeliefRequest {
        req_id: u64_at(b, 0),
        from: NodeId(u64_at(b, 8) as u32),
        to: NodeId(u64_at(b, 16) as u32),
        sent_at: SimTime::from_micros(u64_at(b, 24)),
    })
}

pub fn decode_reply(b: &[u8]) -> Result<BeliefReply, WireError> {
    check_len(b, REPLY_WIRE_LEN)?;
    let class = BeliefClass::from_index(usize::from(b[8])).ok_or(WireError::BadClass(b[8]))?;
    Ok(BeliefReply {
        req_id: u64_at(b, 0),
        belief: Belief {
            class,
            posterior: f64::from_bits(u64_at(b, 9)),
            generated_at: SimTime::from_micros(u64_at(b, 17)),
        },
        resource_summary: ResourceSet::from_bits(b[25]),
        sent_at: SimTime::from_micros(u64_at(b, 26)),
        received_at: SimTime::from_micros(u64_at(b, 34)),
    })
}
