//! Belief pipeline checked against straight-line reference evaluators that
//! share no code with the library.

use caosr_core::bob::{
    behavior_probability, belief_posteriors, compute_parameter_weight, family_posteriors,
    generate_belief, observation_posterior, Behavior, BehaviorKind, BehaviorParameterSample,
    BeliefClass, CaptureSource, CognitiveConfig, Family, Level, Observation, ObservationId,
    ParameterId, ParameterLog, ParameterWeights,
};
use caosr_core::{SimDuration, SimTime};
use proptest::prelude::*;

mod common;
use common::{oracle_belief, oracle_observation};

fn row3(raw: [f64; 3]) -> [f64; 3] {
    let s: f64 = raw.iter().sum();
    raw.map(|x| x / s)
}

fn row4(raw: [f64; 4]) -> [f64; 4] {
    let s: f64 = raw.iter().sum();
    raw.map(|x| x / s)
}

fn arb_row3() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(0.01f64..1.0).prop_map(row3)
}

fn arb_config() -> impl Strategy<Value = CognitiveConfig> {
    (
        prop::array::uniform5(arb_row3()),
        prop::array::uniform5(prop::array::uniform6(arb_row3())),
        prop::array::uniform4(prop::array::uniform2(arb_row3())),
        prop::array::uniform4(0.01f64..1.0).prop_map(row4),
    )
        .prop_map(|(bp, bo, ob, prior)| {
            let mut c = CognitiveConfig::default();
            c.behavior_priors = bp;
            c.likelihood_bo = bo;
            c.likelihood_ob = ob;
            c.belief_priors = prior;
            c
        })
}

fn arb_behaviors() -> impl Strategy<Value = Vec<Behavior>> {
    prop::sample::subsequence(BehaviorKind::ALL.to_vec(), 1..=4).prop_flat_map(|kinds| {
        let n = kinds.len();
        (
            Just(kinds),
            prop::collection::vec((0usize..3, 0.0f64..=1.0), n),
        )
            .prop_map(|(kinds, draws)| {
                kinds
                    .into_iter()
                    .zip(draws)
                    .map(|(kind, (l, p))| Behavior {
                        kind,
                        level: [Level::Low, Level::Medium, Level::High][l],
                        probability: p,
                        contributing: Vec::new(),
                    })
                    .collect()
            })
    })
}

fn arb_observations() -> impl Strategy<Value = Vec<Observation>> {
    prop::collection::vec(0usize..6, 1..=3).prop_map(|ids| {
        ids.into_iter()
            .map(|i| Observation {
                id: ObservationId::ALL[i],
                posterior: 1.0,
                support_count: 1,
            })
            .collect()
    })
}

fn check_observation(behaviors: &[Behavior], cfg: &CognitiveConfig) {
    let levels: Vec<(usize, usize, f64)> = behaviors
        .iter()
        .map(|b| (b.kind.index(), b.level.index(), b.probability))
        .collect();
    let priors = cfg.behavior_priors.to_vec();
    let lik: Vec<Vec<[f64; 3]>> = cfg.likelihood_bo.iter().map(|k| k.to_vec()).collect();
    for family in [Family::Mobility, Family::Profile] {
        let members: Vec<usize> = family.members().iter().map(|o| o.index()).collect();
        let expect = oracle_observation(&levels, &priors, &lik, &members);
        match (family_posteriors(behaviors, family, cfg), expect) {
            (Ok(got), Some(want)) => {
                for (slot, ob) in family.members().into_iter().enumerate() {
                    assert!((got[slot] - want[slot]).abs() <= 1e-12);
                    let single = observation_posterior(behaviors, ob, cfg).unwrap();
                    assert!((single - want[slot]).abs() <= 1e-12);
                }
            }
            (Err(_), None) => {}
            (got, want) => panic!("library {got:?} vs oracle {want:?}"),
        }
    }
}

fn check_belief(observations: &[Observation], cfg: &CognitiveConfig) {
    let observed: Vec<(usize, usize)> = observations
        .iter()
        .map(|o| (o.id.family().index(), o.id.slot()))
        .collect();
    let want = oracle_belief(&cfg.belief_priors, &cfg.likelihood_ob, &observed).unwrap();
    let got = belief_posteriors(observations, cfg).unwrap();
    for i in 0..4 {
        assert!((got[i] - want[i]).abs() <= 1e-12, "{got:?} vs {want:?}");
    }
    let b = generate_belief(observations, cfg, SimTime::ZERO).unwrap();
    let best = (0..4).fold(0, |best, i| if want[i] > want[best] { i } else { best });
    assert_eq!(b.class, BeliefClass::ALL[best]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn observation_matches_enumeration(cfg in arb_config(), behaviors in arb_behaviors()) {
        check_observation(&behaviors, &cfg);
    }

    #[test]
    fn belief_matches_enumeration(cfg in arb_config(), obs in arb_observations()) {
        check_belief(&obs, &cfg);
    }

    #[test]
    fn argmax_ignores_scale(cfg in arb_config(), obs in arb_observations(), c in 0.001f64..1000.0) {
        let mut scaled = cfg.clone();
        scaled.belief_priors = cfg.belief_priors.map(|p| p * c);
        let a = generate_belief(&obs, &cfg, SimTime::ZERO).unwrap();
        let b = generate_belief(&obs, &scaled, SimTime::ZERO).unwrap();
        prop_assert_eq!(a.class, b.class);
    }

    #[test]
    fn weights_sum_to_one(counts in prop::collection::vec(0u32..6, 5)) {
        prop_assume!(counts.iter().any(|&c| c > 0));
        let log = log_with(&counts);
        let total: f64 = ParameterId::ALL.iter().map(|&p| compute_parameter_weight(&log, p).unwrap()).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn behavior_probability_is_weighted_ratio(
        ratios in prop::collection::vec(0.0f64..=1.0, 5),
        counts in prop::collection::vec(1u32..4, 5),
        take in prop::sample::subsequence((0..5usize).collect::<Vec<_>>(), 1..=5),
    ) {
        let log = log_with(&counts);
        let w = ParameterWeights::from_log(&log).unwrap();
        let samples: Vec<_> = take
            .iter()
            .map(|&i| BehaviorParameterSample::new(ParameterId::ALL[i], ratios[i] * 8.0, 8.0, CaptureSource::External, SimTime::ZERO).unwrap())
            .collect();
        let wsum: f64 = take.iter().map(|&i| w.0[i]).sum();
        let mut want = 0.0;
        for &i in &take {
            want += w.0[i] / wsum * ratios[i];
        }
        let got = behavior_probability(&samples, &w).unwrap();
        prop_assert!((got - want.clamp(0.0, 1.0)).abs() <= 1e-12);
    }
}

fn log_with(counts: &[u32]) -> ParameterLog {
    let mut log = ParameterLog::new(SimDuration::from_secs(10));
    let mut t = 0;
    for (i, &c) in counts.iter().enumerate() {
        for _ in 0..c {
            let s = BehaviorParameterSample::new(
                ParameterId::ALL[i],
                1.0,
                2.0,
                CaptureSource::External,
                SimTime::from_micros(t),
            )
            .unwrap();
            log.record(s).unwrap();
            t += 1;
        }
    }
    log
}

#[test]
fn hand_set_three_by_three() {
    // uniform priors and three hand-picked medium-level rows; evidence for each
    // mobility observation is 1/3 * sum(row[medium] * p):
    //   static:  .2*.5 + .1*1 + .3*.2 = .26
    //   dynamic: .6*.5 + .8*1 + .4*.2 = 1.18
    //   highly:  .2*.5 + .1*1 + .3*.2 = .26
    let mut cfg = CognitiveConfig::default();
    cfg.behavior_priors = [[1.0 / 3.0; 3]; 5];
    let rows = [[0.4, 0.2, 0.4], [0.2, 0.6, 0.2], [0.4, 0.2, 0.4]];
    let others = [[0.45, 0.1, 0.45], [0.1, 0.8, 0.1], [0.45, 0.1, 0.45]];
    let third = [[0.35, 0.3, 0.35], [0.3, 0.4, 0.3], [0.35, 0.3, 0.35]];
    for (k, table) in [(0, rows), (1, others), (2, third)] {
        for ob in 0..3 {
            cfg.likelihood_bo[k][ob] = table[ob];
        }
    }
    let b = |kind, p| Behavior {
        kind,
        level: Level::Medium,
        probability: p,
        contributing: Vec::new(),
    };
    let behaviors = vec![
        b(BehaviorKind::ALL[0], 0.5),
        b(BehaviorKind::ALL[1], 1.0),
        b(BehaviorKind::ALL[2], 0.2),
    ];
    let got = family_posteriors(&behaviors, Family::Mobility, &cfg).unwrap();
    let z = 0.26 + 1.18 + 0.26;
    assert!((got[0] - 0.26 / z).abs() < 1e-12);
    assert!((got[1] - 1.18 / z).abs() < 1e-12);
    assert!((got[2] - 0.26 / z).abs() < 1e-12);
    check_observation(&behaviors, &cfg);
}

#[test]
fn identity_tables_pick_the_mapped_observation() {
    let mut cfg = CognitiveConfig::default();
    for k in 0..5 {
        for ob in 0..6 {
            cfg.likelihood_bo[k][ob] = [0.0; 3];
            cfg.likelihood_bo[k][ob][ob % 3] = 1.0;
        }
    }
    let behaviors = vec![Behavior {
        kind: BehaviorKind::VelocityLevel,
        level: Level::High,
        probability: 0.7,
        contributing: Vec::new(),
    }];
    let post = family_posteriors(&behaviors, Family::Mobility, &cfg).unwrap();
    assert_eq!(post, [0.0, 0.0, 1.0]);
}

#[test]
fn uniform_tables_tie_to_patron() {
    let mut cfg = CognitiveConfig::default();
    cfg.likelihood_ob = [[[1.0 / 3.0; 3]; 2]; 4];
    let obs = vec![Observation {
        id: ObservationId::Dynamic,
        posterior: 1.0,
        support_count: 1,
    }];
    let post = belief_posteriors(&obs, &cfg).unwrap();
    for p in post {
        assert!((p - 0.25).abs() < 1e-15);
    }
    assert_eq!(
        generate_belief(&obs, &cfg, SimTime::ZERO).unwrap().class,
        BeliefClass::Patron
    );
}
