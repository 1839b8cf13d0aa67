use std::fmt;

use super::{Behavior, BobError, CognitiveConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    Mobility,
    Profile,
}

impl Family {
    pub const ALL: [Family; 2] = [Family::Mobility, Family::Profile];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Mobility => "mobility",
            Family::Profile => "profile",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }

    pub fn members(self) -> [ObservationId; 3] {
        match self {
            Family::Mobility => [
                ObservationId::Static,
                ObservationId::Dynamic,
                ObservationId::HighlyDynamic,
            ],
            Family::Profile => [
                ObservationId::HighProfile,
                ObservationId::MediumProfile,
                ObservationId::LowProfile,
            ],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Observation labels, in tie-break order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ObservationId {
    Static,
    Dynamic,
    HighlyDynamic,
    HighProfile,
    MediumProfile,
    LowProfile,
}

impl ObservationId {
    pub const COUNT: usize = 6;
    pub const ALL: [ObservationId; 6] = [
        ObservationId::Static,
        ObservationId::Dynamic,
        ObservationId::HighlyDynamic,
        ObservationId::HighProfile,
        ObservationId::MediumProfile,
        ObservationId::LowProfile,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn family(self) -> Family {
        if self.index() < 3 {
            Family::Mobility
        } else {
            Family::Profile
        }
    }

    /// Position inside its family.
    pub fn slot(self) -> usize {
        self.index() % 3
    }

    pub fn name(self) -> &'static str {
        match self {
            ObservationId::Static => "static",
            ObservationId::Dynamic => "dynamic",
            ObservationId::HighlyDynamic => "highly_dynamic",
            ObservationId::HighProfile => "high_profile",
            ObservationId::MediumProfile => "medium_profile",
            ObservationId::LowProfile => "low_profile",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.name() == s)
    }
}

impl fmt::Display for ObservationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub id: ObservationId,
    pub posterior: f64,
    pub support_count: u32,
}

/// Unnormalized evidence for each member of `family`.
fn family_scores(behaviors: &[Behavior], family: Family, config: &CognitiveConfig) -> [f64; 3] {
    let mut scores = [0.0; 3];
    for (slot, ob) in family.members().into_iter().enumerate() {
        scores[slot] = behaviors
            .iter()
            .map(|b| {
                let k = b.kind.index();
                let l = b.level.index();
                config.behavior_priors[k][l]
                    * config.likelihood_bo[k][ob.index()][l]
                    * b.probability
            })
            .sum();
    }
    scores
}

/// Posterior of every member of `family` given the behavior set.
pub fn family_posteriors(
    behaviors: &[Behavior],
    family: Family,
    config: &CognitiveConfig,
) -> Result<[f64; 3], BobError> {
    let scores = family_scores(behaviors, family, config);
    let total: f64 = scores.iter().sum();
    if !(total > 0.0) {
        return Err(BobError::UnsupportedEvidence);
    }
    Ok(scores.map(|s| s / total))
}

pub fn observation_posterior(
    behaviors: &[Behavior],
    observation: ObservationId,
    config: &CognitiveConfig,
) -> Result<f64, BobError> {
    let post = family_posteriors(behaviors, observation.family(), config)?;
    Ok(post[observation.slot()])
}

/// Per family, the most probable observation if its posterior reaches the
/// favorability threshold.
pub fn favorable_observations(
    behaviors: &[Behavior],
    config: &CognitiveConfig,
) -> Vec<Observation> {
    let mut out = Vec::new();
    for family in Family::ALL {
        let Ok(post) = family_posteriors(behaviors, family, config) else {
            continue;
        };
        let mut best = 0;
        for slot in 1..3 {
            if post[slot] > post[best] {
                best = slot;
            }
        }
        if post[best] >= config.favorability {
            out.push(Observation {
                id: family.members()[best],
                posterior: post[best],
                support_count: 1,
            });
        }
    }
    out
}

/// Per family, the observation that won most often; ties go to the earlier label.
pub fn summarize_observations(history: &[ObservationId]) -> Vec<Observation> {
    let mut counts = [0u32; ObservationId::COUNT];
    for ob in history {
        counts[ob.index()] += 1;
    }
    let mut out = Vec::new();
    for family in Family::ALL {
        let members = family.members();
        let total: u32 = members.iter().map(|m| counts[m.index()]).sum();
        if total == 0 {
            continue;
        }
        let mut best = members[0];
        for &m in &members[1..] {
            if counts[m.index()] > counts[best.index()] {
                best = m;
            }
        }
        out.push(Observation {
            id: best,
            posterior: f64::from(counts[best.index()]) / f64::from(total),
            support_count: counts[best.index()],
        });
    }
    out
}

/// Per-session history of favorable observation winners.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ObservationStorage {
    history: Vec<ObservationId>,
}

impl ObservationStorage {
    pub fn push(&mut self, ob: ObservationId) {
        self.history.push(ob);
    }

    pub fn history(&self) -> &[ObservationId] {
        &self.history
    }

    pub fn summarize(&self) -> Vec<Observation> {
        summarize_observations(&self.history)
    }

    pub fn clear(&mut self) {
        self.history.clear();
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bob::{BehaviorKind, Level, ParameterId};

    fn behavior(kind: BehaviorKind, level: Level, probability: f64) -> Behavior {
        Behavior {
            kind,
            level,
            probability,
            contributing: vec![ParameterId::Velocity],
        }
    }

    #[test]
    fn identity_likelihood_gives_certainty() {
        let mut cfg = CognitiveConfig::default();
        // velocity levels map one-to-one onto mobility observations
        cfg.likelihood_bo[0][0] = [1.0, 0.0, 0.0];
        cfg.likelihood_bo[0][1] = [0.0, 1.0, 0.0];
        cfg.likelihood_bo[0][2] = [0.0, 0.0, 1.0];
        let bp = [behavior(BehaviorKind::VelocityLevel, Level::Medium, 0.5)];
        assert_eq!(
            observation_posterior(&bp, ObservationId::Dynamic, &cfg).unwrap(),
            1.0
        );
        assert_eq!(
            observation_posterior(&bp, ObservationId::Static, &cfg).unwrap(),
            0.0
        );
        assert_eq!(
            observation_posterior(&bp, ObservationId::HighlyDynamic, &cfg).unwrap(),
            0.0
        );
    }

    #[test]
    fn symmetric_table_splits_evenly() {
        let mut cfg = CognitiveConfig::default();
        // two behaviors, each pointing at one of two observations with mirrored strength
        cfg.likelihood_bo[0][0] = [0.8, 0.1, 0.1];
        cfg.likelihood_bo[0][1] = [0.2, 0.4, 0.4];
        cfg.likelihood_bo[0][2] = [0.0, 0.5, 0.5];
        cfg.likelihood_bo[3][0] = [0.2, 0.4, 0.4];
        cfg.likelihood_bo[3][1] = [0.8, 0.1, 0.1];
        cfg.likelihood_bo[3][2] = [0.0, 0.5, 0.5];
        let bp = [
            behavior(BehaviorKind::VelocityLevel, Level::Low, 0.3),
            behavior(BehaviorKind::LocationTracing, Level::Low, 0.3),
        ];
        let s = observation_posterior(&bp, ObservationId::Static, &cfg).unwrap();
        let d = observation_posterior(&bp, ObservationId::Dynamic, &cfg).unwrap();
        assert!((s - 0.5).abs() < 1e-15 && (d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_evidence_is_unsupported() {
        let cfg = CognitiveConfig::default();
        let bp = [behavior(BehaviorKind::VelocityLevel, Level::Low, 0.0)];
        assert_eq!(
            observation_posterior(&bp, ObservationId::Static, &cfg),
            Err(BobError::UnsupportedEvidence)
        );
        assert_eq!(
            observation_posterior(&[], ObservationId::Static, &cfg),
            Err(BobError::UnsupportedEvidence)
        );
    }

    #[test]
    fn summary_majority_and_tie() {
        use ObservationId::*;
        let s = summarize_observations(&[Dynamic, Dynamic, Static]);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].id, Dynamic);
        assert_eq!(s[0].support_count, 2);
        assert_eq!(summarize_observations(&[Static, Dynamic])[0].id, Static);
        assert_eq!(summarize_observations(&[Dynamic, Static])[0].id, Static);
        let both = summarize_observations(&[
            HighlyDynamic,
            LowProfile,
            HighlyDynamic,
            HighProfile,
            LowProfile,
        ]);
        assert_eq!(
            both.iter().map(|o| o.id).collect::<Vec<_>>(),
            vec![HighlyDynamic, LowProfile]
        );
        assert!(summarize_observations(&[]).is_empty());
    }

    #[test]
    fn static_node_is_observed_static() {
        let cfg = CognitiveConfig::default();
        let bp = [
            behavior(BehaviorKind::VelocityLevel, Level::Low, 0.0),
            behavior(BehaviorKind::LocationTracing, Level::High, 1.0),
        ];
        let obs = favorable_observations(&bp, &cfg);
        assert_eq!(obs[0].id, ObservationId::Static);
        assert!(obs[0].posterior >= cfg.favorability);
    }
}
