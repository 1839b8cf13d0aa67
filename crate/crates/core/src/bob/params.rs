use std::fmt;

use super::BobError;
use crate::time::{SimDuration, SimTime};

/// A behavior parameter the agent can capture.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ParameterId {
    /// Node speed in m/s.
    Velocity,
    /// Duration of the last contact, seconds.
    ContactPeriod,
    /// Gap between consecutive contacts, seconds.
    InterfacePeriod,
    /// Predictability of the movement pattern in [0, 1].
    MobilityPattern,
    /// Pooled resource availability in [0, 1].
    ResourceHistory,
}

impl ParameterId {
    pub const COUNT: usize = 5;
    pub const ALL: [ParameterId; 5] = [
        ParameterId::Velocity,
        ParameterId::ContactPeriod,
        ParameterId::InterfacePeriod,
        ParameterId::MobilityPattern,
        ParameterId::ResourceHistory,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ParameterId::Velocity => "velocity",
            ParameterId::ContactPeriod => "contact_period",
            ParameterId::InterfacePeriod => "interface_period",
            ParameterId::MobilityPattern => "mobility_pattern",
            ParameterId::ResourceHistory => "resource_history",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }
}

impl fmt::Display for ParameterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaptureSource {
    External,
    Log,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BehaviorParameterSample {
    pub parameter: ParameterId,
    pub value: f64,
    pub max_value: f64,
    pub source: CaptureSource,
    pub captured_at: SimTime,
}

impl BehaviorParameterSample {
    pub fn new(
        parameter: ParameterId,
        value: f64,
        max_value: f64,
        source: CaptureSource,
        captured_at: SimTime,
    ) -> Result<Self, BobError> {
        if !(max_value > 0.0) {
            return Err(BobError::DegenerateMaximum(parameter));
        }
        if !(0.0..=max_value).contains(&value) {
            return Err(BobError::InvalidSample {
                parameter,
                value,
                max_value,
            });
        }
        Ok(Self {
            parameter,
            value,
            max_value,
            source,
            captured_at,
        })
    }

    /// Like [`new`](Self::new) but clamps `value` into `[0, max_value]`.
    pub fn clamped(
        parameter: ParameterId,
        value: f64,
        max_value: f64,
        source: CaptureSource,
        captured_at: SimTime,
    ) -> Result<Self, BobError> {
        let v = if value.is_nan() {
            0.0
        } else {
            value.clamp(0.0, max_value.max(0.0))
        };
        Self::new(parameter, v, max_value, source, captured_at)
    }

    pub fn ratio(&self) -> f64 {
        self.value / self.max_value
    }
}

/// Time-ordered capture log of one agent, with per-parameter capture counts
/// since the last refresh.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterLog {
    samples: Vec<BehaviorParameterSample>,
    counts: [u32; ParameterId::COUNT],
    refresh_period: SimDuration,
    last_refresh: SimTime,
}

impl ParameterLog {
    pub fn new(refresh_period: SimDuration) -> Self {
        Self {
            samples: Vec::new(),
            counts: [0; ParameterId::COUNT],
            refresh_period,
            last_refresh: SimTime::ZERO,
        }
    }

    /// Starts the refresh clock at `now` (used when an agent is installed mid-run).
    pub fn starting_at(refresh_period: SimDuration, now: SimTime) -> Self {
        Self {
            last_refresh: now,
            ..Self::new(refresh_period)
        }
    }

    pub fn record(&mut self, sample: BehaviorParameterSample) -> Result<(), BobError> {
        if let Some(last) = self.samples.last() {
            if sample.captured_at < last.captured_at {
                return Err(BobError::OutOfOrder {
                    at: sample.captured_at.as_micros(),
                    last: last.captured_at.as_micros(),
                });
            }
        }
        self.counts[sample.parameter.index()] += 1;
        self.samples.push(sample);
        Ok(())
    }

    pub fn samples(&self) -> &[BehaviorParameterSample] {
        &self.samples
    }

    pub fn capture_count(&self, parameter: ParameterId) -> u32 {
        self.counts[parameter.index()]
    }

    pub fn capture_counts(&self) -> [u32; ParameterId::COUNT] {
        self.counts
    }

    pub fn total_captures(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn refresh_period(&self) -> SimDuration {
        self.refresh_period
    }

    /// Drops all samples and capture counts.
    pub fn refresh(&mut self, now: SimTime) {
        self.samples.clear();
        self.counts = [0; ParameterId::COUNT];
        self.last_refresh = now;
    }

    /// Refreshes when a full period has elapsed since the last refresh.
    pub fn refresh_if_due(&mut self, now: SimTime) -> bool {
        if now.since(self.last_refresh) >= self.refresh_period {
            self.refresh(now);
            true
        } else {
            false
        }
    }
}

/// Capture-count share of `parameter` among everything captured since the last refresh.
pub fn compute_parameter_weight(
    log: &ParameterLog,
    parameter: ParameterId,
) -> Result<f64, BobError> {
    let total = log.total_captures();
    if total == 0 {
        return Err(BobError::EmptyLog);
    }
    Ok(f64::from(log.capture_count(parameter)) / f64::from(total))
}

/// Weight α of every parameter for one log.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParameterWeights(pub [f64; ParameterId::COUNT]);

impl ParameterWeights {
    pub fn from_log(log: &ParameterLog) -> Result<Self, BobError> {
        let mut w = [0.0; ParameterId::COUNT];
        for p in ParameterId::ALL {
            w[p.index()] = compute_parameter_weight(log, p)?;
        }
        Ok(Self(w))
    }

    pub fn get(&self, parameter: ParameterId) -> f64 {
        self.0[parameter.index()]
    }
}

/// Weighted sum of value ratios over the parameters present in `samples`.
///
/// Repeated captures of one parameter contribute their mean ratio. Weights are
/// renormalized over the parameters actually present; if those weights are all
/// zero the parameters are weighted equally.
pub fn behavior_probability(
    samples: &[BehaviorParameterSample],
    weights: &ParameterWeights,
) -> Result<f64, BobError> {
    let mut sum_ratio = [0.0; ParameterId::COUNT];
    let mut n = [0u32; ParameterId::COUNT];
    for s in samples {
        if !(s.max_value > 0.0) {
            return Err(BobError::DegenerateMaximum(s.parameter));
        }
        sum_ratio[s.parameter.index()] += s.ratio();
        n[s.parameter.index()] += 1;
    }
    let present: Vec<usize> = (0..ParameterId::COUNT).filter(|&i| n[i] > 0).collect();
    if present.is_empty() {
        return Ok(0.0);
    }
    let wsum: f64 = present.iter().map(|&i| weights.0[i]).sum();
    let p: f64 = present
        .iter()
        .map(|&i| {
            let w = if wsum > 0.0 {
                weights.0[i] / wsum
            } else {
                1.0 / present.len() as f64
            };
            w * (sum_ratio[i] / f64::from(n[i]))
        })
        .sum();
    Ok(p.clamp(0.0, 1.0))
}
