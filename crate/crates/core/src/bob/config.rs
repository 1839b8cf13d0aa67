use super::{BehaviorKind, BeliefClass, BobError, Family, ObservationId, ParameterId};
use crate::time::SimDuration;

/// Rows that miss unit mass by less than this are renormalized at load; rows
/// further off are rejected.
pub(crate) const ROW_REPAIR_TOLERANCE: f64 = 1e-6;

const THIRD: f64 = 1.0 / 3.0;
const UNIFORM: [f64; 3] = [THIRD, THIRD, THIRD];

/// Tables and thresholds driving the belief pipeline.
///
/// Indexing conventions:
/// * `likelihood_bo[behavior][observation][level]` = P(level of behavior | observation);
///   each `[observation]` row sums to 1 over the three levels.
/// * `likelihood_ob[belief][family][observation-in-family]` = P(observation | belief);
///   each `[family]` row sums to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct CognitiveConfig {
    /// Parameters feeding each behavior kind.
    pub behavior_parameters: [Vec<ParameterId>; BehaviorKind::COUNT],
    /// Cut points `(low/medium, medium/high)` on the behavior's value ratio.
    pub thresholds: [(f64, f64); BehaviorKind::COUNT],
    /// Maximum possible value of each parameter, in its native unit.
    pub max_values: [f64; ParameterId::COUNT],
    pub behavior_priors: [[f64; 3]; BehaviorKind::COUNT],
    pub likelihood_bo: [[[f64; 3]; ObservationId::COUNT]; BehaviorKind::COUNT],
    pub likelihood_ob: [[[f64; 3]; 2]; BeliefClass::COUNT],
    pub belief_priors: [f64; BeliefClass::COUNT],
    /// Minimum posterior for an observation to count as favorable evidence.
    pub favorability: f64,
    pub log_refresh: SimDuration,
    pub record_refresh: SimDuration,
    /// Length of one belief-formation session.
    pub session_period: SimDuration,
    /// Samples needed before a self-belief can be formed.
    pub min_samples: usize,
}

impl Default for CognitiveConfig {
    fn default() -> Self {
        use ParameterId::*;

        // Affinity of each behavior level for the six observations
        // (static, dynamic, highly_dynamic, high, medium, low profile).
        let velocity = [
            [0.90, 0.08, 0.02],
            [0.10, 0.80, 0.10],
            [0.02, 0.08, 0.90],
            UNIFORM,
            UNIFORM,
            UNIFORM,
        ];
        let availability = [
            [0.20, 0.30, 0.50],
            [0.30, 0.40, 0.30],
            [0.50, 0.30, 0.20],
            [0.20, 0.30, 0.50],
            [0.30, 0.40, 0.30],
            [0.50, 0.30, 0.20],
        ];
        // Levels ordered by gap ratio: dense, moderate, sparse.
        let inter_communication = [
            UNIFORM,
            UNIFORM,
            UNIFORM,
            [0.50, 0.30, 0.20],
            [0.30, 0.40, 0.30],
            [0.20, 0.30, 0.50],
        ];
        let location = [
            [0.05, 0.15, 0.80],
            [0.15, 0.70, 0.15],
            [0.80, 0.15, 0.05],
            UNIFORM,
            UNIFORM,
            UNIFORM,
        ];
        let history = [
            UNIFORM,
            UNIFORM,
            UNIFORM,
            [0.02, 0.08, 0.90],
            [0.10, 0.80, 0.10],
            [0.90, 0.08, 0.02],
        ];

        Self {
            behavior_parameters: [
                vec![Velocity],
                vec![ContactPeriod],
                vec![InterfacePeriod],
                vec![MobilityPattern],
                vec![ResourceHistory],
            ],
            thresholds: [(THIRD, 2.0 * THIRD); BehaviorKind::COUNT],
            max_values: [15.0, 30.0, 60.0, 1.0, 1.0],
            behavior_priors: [UNIFORM; BehaviorKind::COUNT],
            likelihood_bo: [
                velocity,
                availability,
                inter_communication,
                location,
                history,
            ],
            likelihood_ob: [
                // patron
                [[0.60, 0.30, 0.10], [0.75, 0.20, 0.05]],
                // casual
                [[0.30, 0.40, 0.30], [0.30, 0.40, 0.30]],
                // slack
                [[0.25, 0.45, 0.30], [0.10, 0.65, 0.25]],
                // vagrant
                [[0.10, 0.30, 0.60], [0.05, 0.25, 0.70]],
            ],
            belief_priors: [0.25; BeliefClass::COUNT],
            favorability: 0.5,
            log_refresh: SimDuration::from_secs(10),
            record_refresh: SimDuration::from_secs(10),
            session_period: SimDuration::from_secs(2),
            min_samples: 1,
        }
    }
}

fn check_row(row: &mut [f64], what: impl Fn() -> String) -> Result<(), BobError> {
    if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(BobError::InvalidConfig(format!(
            "{} has a negative or non-finite entry",
            what()
        )));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > ROW_REPAIR_TOLERANCE {
        return Err(BobError::InvalidConfig(format!(
            "{} sums to {sum}, not 1",
            what()
        )));
    }
    // rows already stochastic up to float rounding are left bit-identical
    if (sum - 1.0).abs() > 1e-12 {
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    Ok(())
}

impl CognitiveConfig {
    /// Validates every table and renormalizes rows that are within rounding
    /// distance of a distribution.
    pub fn normalized(mut self) -> Result<Self, BobError> {
        for b in BehaviorKind::ALL {
            let params = &self.behavior_parameters[b.index()];
            if params.is_empty() {
                return Err(BobError::InvalidConfig(format!(
                    "behavior {b} has no parameters"
                )));
            }
            let (lo, hi) = self.thresholds[b.index()];
            if !(0.0..=1.0).contains(&lo) || !(lo..=1.0).contains(&hi) {
                return Err(BobError::InvalidConfig(format!(
                    "thresholds of {b} must satisfy 0 <= low <= high <= 1"
                )));
            }
            check_row(&mut self.behavior_priors[b.index()], || {
                format!("behavior_priors row `{b}`")
            })?;
            for ob in ObservationId::ALL {
                check_row(&mut self.likelihood_bo[b.index()][ob.index()], || {
                    format!("likelihood_bo.{b} row `{ob}`")
                })?;
            }
        }
        for p in ParameterId::ALL {
            let m = self.max_values[p.index()];
            if !(m > 0.0) || !m.is_finite() {
                return Err(BobError::DegenerateMaximum(p));
            }
        }
        for bl in BeliefClass::ALL {
            for fam in Family::ALL {
                check_row(&mut self.likelihood_ob[bl.index()][fam.index()], || {
                    format!("likelihood_ob.{fam} row `{bl}`")
                })?;
            }
        }
        check_row(&mut self.belief_priors, || "belief_priors".to_string())?;
        if !(self.favorability > 0.0 && self.favorability <= 1.0) {
            return Err(BobError::InvalidConfig(
                "favorability must lie in (0, 1]".into(),
            ));
        }
        if self.session_period.is_zero()
            || self.log_refresh.is_zero()
            || self.record_refresh.is_zero()
        {
            return Err(BobError::InvalidConfig(
                "refresh and session periods must be positive".into(),
            ));
        }
        Ok(self)
    }

    pub fn max_value(&self, p: ParameterId) -> f64 {
        self.max_values[p.index()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        let c = CognitiveConfig::default();
        assert_eq!(c.clone().normalized().unwrap().favorability, c.favorability);
    }

    #[test]
    fn bad_row_is_named() {
        let mut c = CognitiveConfig::default();
        c.likelihood_bo[0][0] = [0.5, 0.5, 0.2];
        let err = c.normalized().unwrap_err().to_string();
        assert!(
            err.contains("likelihood_bo.velocity_level row `static`"),
            "{err}"
        );
        assert!(err.contains("1.2"), "{err}");
    }

    #[test]
    fn near_rows_are_repaired() {
        let mut c = CognitiveConfig::default();
        c.belief_priors = [0.25, 0.25, 0.25, 0.2500001];
        let c = c.normalized().unwrap();
        assert!((c.belief_priors.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_maximum_rejected() {
        let mut c = CognitiveConfig::default();
        c.max_values[2] = 0.0;
        assert_eq!(
            c.normalized(),
            Err(BobError::DegenerateMaximum(ParameterId::InterfacePeriod))
        );
    }
}
