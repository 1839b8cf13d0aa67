//! Behavior → observation → belief pipeline.
//!
//! Every function here is pure: a [`ParameterLog`] and a [`CognitiveConfig`]
//! fully determine the behaviors, observations and belief produced from them.
//! The only mutable containers are the log itself, the [`ObservationStorage`]
//! and the [`BeliefRecord`], each owned by a single agent.

mod behavior;
mod belief;
mod config;
mod observation;
mod params;
mod record;

pub use behavior::{identify_behaviors, quantize, Behavior, BehaviorKind, Level};
pub use belief::{belief_posteriors, generate_belief, Belief, BeliefClass};
pub use config::CognitiveConfig;
pub use observation::{
    family_posteriors, favorable_observations, observation_posterior, summarize_observations,
    Family, Observation, ObservationId, ObservationStorage,
};
pub use params::{
    behavior_probability, compute_parameter_weight, BehaviorParameterSample, CaptureSource,
    ParameterId, ParameterLog, ParameterWeights,
};
pub use record::{BeliefRecord, Provenance, RecordEntry, RecordKey};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BobError {
    #[error("parameter log is empty")]
    EmptyLog,
    #[error("maximum value of {0} is not positive")]
    DegenerateMaximum(ParameterId),
    #[error("sample of {parameter} out of range: value {value}, max {max_value}")]
    InvalidSample {
        parameter: ParameterId,
        value: f64,
        max_value: f64,
    },
    #[error("sample captured at {at} precedes the last sample at {last}")]
    OutOfOrder { at: u64, last: u64 },
    #[error("no observation or belief is supported by the evidence")]
    UnsupportedEvidence,
    #[error("invalid cognitive configuration: {0}")]
    InvalidConfig(String),
}
