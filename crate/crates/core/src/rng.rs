//! Seed derivation. Every subsystem draws from its own stream so adding draws
//! in one never shifts another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Placement = 1,
    Resources = 2,
    Arrival = 3,
    Mobility = 4,
    Registration = 5,
}

pub fn stream(seed: u64, which: Stream) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix64(seed ^ mix64(which as u64)))
}

#[derive(Clone, Debug)]
pub struct Streams {
    pub placement: ChaCha8Rng,
    pub resources: ChaCha8Rng,
    pub arrival: ChaCha8Rng,
    /// One mobility stream per node, so each node's legs do not depend on
    /// when other nodes reach their waypoints.
    pub mobility: Vec<ChaCha8Rng>,
    pub registration: ChaCha8Rng,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Self {
            placement: stream(seed, Stream::Placement),
            resources: stream(seed, Stream::Resources),
            arrival: stream(seed, Stream::Arrival),
            mobility: Vec::new(),
            registration: stream(seed, Stream::Registration),
        }
    }

    pub fn with_nodes(seed: u64, n: usize) -> Self {
        let base = mix64(seed ^ mix64(Stream::Mobility as u64));
        let mut s = Self::new(seed);
        s.mobility = (0..n as u64)
            .map(|i| ChaCha8Rng::seed_from_u64(mix64(base ^ mix64(i + 1))))
            .collect();
        s
    }
}
