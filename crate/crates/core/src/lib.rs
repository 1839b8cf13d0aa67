//! Cognitive-agent resource discovery in mobile ad hoc networks: a
//! deterministic discrete-event simulator.

pub mod bob;
pub mod contact;
pub mod emit;
pub mod exchange;
pub mod ids;
pub mod metrics;
pub mod mobility;
pub mod node;
pub mod preset;
pub mod queue;
pub mod rng;
pub mod scenario;
pub mod sim;
pub mod time;

pub use ids::NodeId;
pub use time::{SimDuration, SimTime};
