use std::fmt;

use super::{BobError, CognitiveConfig, Observation};
use crate::time::SimTime;

/// Resource-collaboration disposition of a node, in tie-break order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BeliefClass {
    /// Actively donates resources.
    Patron,
    /// Uncertain donor.
    Casual,
    /// Mostly consumes its own resources.
    Slack,
    /// Cannot support others.
    Vagrant,
}

impl BeliefClass {
    pub const COUNT: usize = 4;
    pub const ALL: [BeliefClass; 4] = [
        BeliefClass::Patron,
        BeliefClass::Casual,
        BeliefClass::Slack,
        BeliefClass::Vagrant,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            BeliefClass::Patron => "patron",
            BeliefClass::Casual => "casual",
            BeliefClass::Slack => "slack",
            BeliefClass::Vagrant => "vagrant",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.name() == s)
    }

    pub fn label(self) -> &'static str {
        match self {
            BeliefClass::Patron => "Patron",
            BeliefClass::Casual => "Casual",
            BeliefClass::Slack => "Slack",
            BeliefClass::Vagrant => "Vagrant",
        }
    }
}

impl fmt::Display for BeliefClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Belief {
    pub class: BeliefClass,
    pub posterior: f64,
    pub generated_at: SimTime,
}

/// Normalized posterior over the four classes: prior × Π P(observation | class).
pub fn belief_posteriors(
    observations: &[Observation],
    config: &CognitiveConfig,
) -> Result<[f64; BeliefClass::COUNT], BobError> {
    if observations.is_empty() {
        return Err(BobError::UnsupportedEvidence);
    }
    let mut scores = config.belief_priors;
    for bl in BeliefClass::ALL {
        for ob in observations {
            scores[bl.index()] *=
                config.likelihood_ob[bl.index()][ob.id.family().index()][ob.id.slot()];
        }
    }
    let total: f64 = scores.iter().sum();
    if !(total > 0.0) {
        return Err(BobError::UnsupportedEvidence);
    }
    Ok(scores.map(|s| s / total))
}

/// Most probable belief class for the summarized observations.
pub fn generate_belief(
    observations: &[Observation],
    config: &CognitiveConfig,
    now: SimTime,
) -> Result<Belief, BobError> {
    let post = belief_posteriors(observations, config)?;
    let mut best = 0;
    for i in 1..BeliefClass::COUNT {
        if post[i] > post[best] {
            best = i;
        }
    }
    Ok(Belief {
        class: BeliefClass::ALL[best],
        posterior: post[best],
        generated_at: now,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bob::ObservationId;

    fn ob(id: ObservationId) -> Observation {
        Observation {
            id,
            posterior: 1.0,
            support_count: 1,
        }
    }

    #[test]
    fn static_high_profile_is_patron() {
        // hand evaluation with the default tables and uniform priors:
        // patron .60*.75=.45, casual .30*.30=.09, slack .25*.10=.025, vagrant .10*.05=.005
        let cfg = CognitiveConfig::default();
        let obs = [ob(ObservationId::Static), ob(ObservationId::HighProfile)];
        let b = generate_belief(&obs, &cfg, SimTime::ZERO).unwrap();
        assert_eq!(b.class, BeliefClass::Patron);
        assert!((b.posterior - 0.45 / 0.57).abs() < 1e-12);
    }

    #[test]
    fn highly_dynamic_low_profile_is_vagrant() {
        let cfg = CognitiveConfig::default();
        let obs = [
            ob(ObservationId::HighlyDynamic),
            ob(ObservationId::LowProfile),
        ];
        assert_eq!(
            generate_belief(&obs, &cfg, SimTime::ZERO).unwrap().class,
            BeliefClass::Vagrant
        );
    }

    #[test]
    fn uniform_tables_tie_to_patron() {
        let mut cfg = CognitiveConfig::default();
        cfg.likelihood_ob = [[[1.0 / 3.0; 3]; 2]; 4];
        let obs = [ob(ObservationId::Dynamic), ob(ObservationId::MediumProfile)];
        let post = belief_posteriors(&obs, &cfg).unwrap();
        assert!(post.iter().all(|p| (p - 0.25).abs() < 1e-15));
        assert_eq!(
            generate_belief(&obs, &cfg, SimTime::ZERO).unwrap().class,
            BeliefClass::Patron
        );
    }

    #[test]
    fn no_observations_is_unsupported() {
        let cfg = CognitiveConfig::default();
        assert_eq!(
            generate_belief(&[], &cfg, SimTime::ZERO),
            Err(BobError::UnsupportedEvidence)
        );
    }
}
