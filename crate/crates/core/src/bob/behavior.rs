use std::fmt;

use super::{
    behavior_probability, BehaviorParameterSample, CognitiveConfig, ParameterId, ParameterLog,
    ParameterWeights,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BehaviorKind {
    VelocityLevel,
    NodeAvailability,
    InterCommunication,
    LocationTracing,
    ResourceMappingHistory,
}

impl BehaviorKind {
    pub const COUNT: usize = 5;
    pub const ALL: [BehaviorKind; 5] = [
        BehaviorKind::VelocityLevel,
        BehaviorKind::NodeAvailability,
        BehaviorKind::InterCommunication,
        BehaviorKind::LocationTracing,
        BehaviorKind::ResourceMappingHistory,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            BehaviorKind::VelocityLevel => "velocity_level",
            BehaviorKind::NodeAvailability => "node_availability",
            BehaviorKind::InterCommunication => "inter_communication",
            BehaviorKind::LocationTracing => "location_tracing",
            BehaviorKind::ResourceMappingHistory => "resource_mapping_history",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.name() == s)
    }

    /// Level names in ascending order of value ratio.
    pub fn level_names(self) -> [&'static str; 3] {
        match self {
            BehaviorKind::VelocityLevel => ["low", "medium", "high"],
            BehaviorKind::NodeAvailability => ["sparse", "moderate", "available"],
            // a long gap between contacts is sparse communication
            BehaviorKind::InterCommunication => ["dense", "moderate", "sparse"],
            BehaviorKind::LocationTracing => ["random", "semi_deterministic", "deterministic"],
            BehaviorKind::ResourceMappingHistory => ["poor", "moderate", "rich"],
        }
    }
}

impl fmt::Display for BehaviorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Ordinal level of a behavior; its name depends on the behavior kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    Low,
    Medium,
    High,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Low, Level::Medium, Level::High];

    pub fn index(self) -> usize {
        self as usize
    }
}

pub fn quantize(ratio: f64, (lo, hi): (f64, f64)) -> Level {
    if ratio < lo {
        Level::Low
    } else if ratio < hi {
        Level::Medium
    } else {
        Level::High
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Behavior {
    pub kind: BehaviorKind,
    pub level: Level,
    pub probability: f64,
    pub contributing: Vec<ParameterId>,
}

impl Behavior {
    pub fn level_name(&self) -> &'static str {
        self.kind.level_names()[self.level.index()]
    }
}

/// Produces one behavior per kind that has at least one contributing sample in the log.
pub fn identify_behaviors(log: &ParameterLog, config: &CognitiveConfig) -> Vec<Behavior> {
    let Ok(weights) = ParameterWeights::from_log(log) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for kind in BehaviorKind::ALL {
        let wanted = &config.behavior_parameters[kind.index()];
        let samples: Vec<BehaviorParameterSample> = log
            .samples()
            .iter()
            .filter(|s| wanted.contains(&s.parameter))
            .cloned()
            .collect();
        if samples.is_empty() {
            continue;
        }
        let mut contributing: Vec<ParameterId> = samples.iter().map(|s| s.parameter).collect();
        contributing.sort();
        contributing.dedup();
        // samples are validated on capture, so max_value > 0 here
        let probability = behavior_probability(&samples, &weights).unwrap_or(0.0);
        out.push(Behavior {
            kind,
            level: quantize(probability, config.thresholds[kind.index()]),
            probability,
            contributing,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bob::CaptureSource;
    use crate::time::{SimDuration, SimTime};

    fn log_of(samples: &[(ParameterId, f64)]) -> ParameterLog {
        let cfg = CognitiveConfig::default();
        let mut log = ParameterLog::new(SimDuration::from_secs(10));
        for &(p, v) in samples {
            log.record(
                BehaviorParameterSample::new(
                    p,
                    v,
                    cfg.max_value(p),
                    CaptureSource::External,
                    SimTime::ZERO,
                )
                .unwrap(),
            )
            .unwrap();
        }
        log
    }

    #[test]
    fn high_velocity_is_quantized_high() {
        let cfg = CognitiveConfig::default();
        let log = log_of(&[(ParameterId::Velocity, 0.9 * 15.0)]);
        let bp = identify_behaviors(&log, &cfg);
        assert_eq!(bp.len(), 1);
        assert_eq!(bp[0].kind, BehaviorKind::VelocityLevel);
        assert_eq!(bp[0].level, Level::High);
        assert!((bp[0].probability - 0.9).abs() < 1e-12);
    }

    #[test]
    fn absent_parameter_emits_nothing() {
        let cfg = CognitiveConfig::default();
        let log = log_of(&[
            (ParameterId::Velocity, 3.0),
            (ParameterId::ContactPeriod, 4.0),
        ]);
        let kinds: Vec<_> = identify_behaviors(&log, &cfg)
            .into_iter()
            .map(|b| b.kind)
            .collect();
        assert!(!kinds.contains(&BehaviorKind::ResourceMappingHistory));
        assert_eq!(kinds.len(), 2);
    }

    #[test]
    fn everything_at_max_gives_five_certain_behaviors() {
        let cfg = CognitiveConfig::default();
        let all: Vec<_> = ParameterId::ALL
            .iter()
            .map(|&p| (p, cfg.max_value(p)))
            .collect();
        let bp = identify_behaviors(&log_of(&all), &cfg);
        assert_eq!(bp.len(), 5);
        assert!(bp
            .iter()
            .all(|b| b.probability == 1.0 && b.level == Level::High));
    }

    #[test]
    fn empty_log_gives_empty_set() {
        let cfg = CognitiveConfig::default();
        assert!(identify_behaviors(&ParameterLog::new(SimDuration::from_secs(1)), &cfg).is_empty());
    }

    #[test]
    fn quantize_boundaries() {
        let t = (1.0 / 3.0, 2.0 / 3.0);
        assert_eq!(quantize(0.0, t), Level::Low);
        assert_eq!(quantize(1.0 / 3.0, t), Level::Medium);
        assert_eq!(quantize(0.66, t), Level::Medium);
        assert_eq!(quantize(1.0, t), Level::High);
    }
}
