//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line
//! with its measured values and wall time against its budget.

use std::io::Write;
use std::time::{Duration, Instant};

use caosr_core::bob::{
    belief_posteriors, compute_parameter_weight, family_posteriors, generate_belief,
    observation_posterior, Behavior, BehaviorKind, BehaviorParameterSample, CaptureSource,
    CognitiveConfig, Family, Level, Observation, ObservationId, ParameterId, ParameterLog,
};
use caosr_core::contact::ContactKind;
use caosr_core::emit::write_report;
use caosr_core::metrics::StageCostModel;
use caosr_core::preset::{with_population, with_rich_share, Figure, Preset};
use caosr_core::scenario::{ArrivalProcess, Scenario};
use caosr_core::sim::run;
use caosr_core::{SimDuration, SimTime};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;

const SEED: u64 = 42;
const TREND_SEEDS: usize = 5;
const FIG15_REPLICATES: usize = 50;
const ORACLE_TOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-9;

type Check = Result<String, String>;

fn ok_if(pass: bool, detail: String) -> Check {
    if pass {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion(id: u32, name: &str, budget_s: u64, f: impl FnOnce() -> Check) -> bool {
    let t0 = Instant::now();
    let out = f();
    let wall = t0.elapsed();
    let in_time = wall <= Duration::from_secs(budget_s);
    let (pass, detail) = match out {
        Ok(d) => (in_time, d),
        Err(d) => (false, d),
    };
    // straight to the stderr handle so the line survives libtest output capture
    let _ = writeln!(
        std::io::stderr(),
        "[{}] {id:>2} {name}: {detail} ({:.1}s of {budget_s}s)",
        if pass { "PASS" } else { "FAIL" },
        wall.as_secs_f64()
    );
    pass
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Pearson correlation of average ranks.
fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..rx.len() {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx).powi(2);
        syy += (ry[i] - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

fn non_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] >= w[0])
}

fn non_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0])
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", parts.join(" "))
}

fn random_row3(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let raw: [f64; 3] = [
        rng.gen_range(0.01..1.0),
        rng.gen_range(0.01..1.0),
        rng.gen_range(0.01..1.0),
    ];
    let s: f64 = raw.iter().sum();
    raw.map(|x| x / s)
}

fn random_config(rng: &mut ChaCha8Rng) -> CognitiveConfig {
    let mut c = CognitiveConfig::default();
    for k in 0..BehaviorKind::COUNT {
        c.behavior_priors[k] = random_row3(rng);
        for ob in 0..ObservationId::COUNT {
            c.likelihood_bo[k][ob] = random_row3(rng);
        }
    }
    for bl in 0..4 {
        for f in 0..2 {
            c.likelihood_ob[bl][f] = random_row3(rng);
        }
        c.belief_priors[bl] = rng.gen_range(0.01..1.0);
    }
    let s: f64 = c.belief_priors.iter().sum();
    c.belief_priors = c.belief_priors.map(|p| p / s);
    c
}

fn random_behaviors(rng: &mut ChaCha8Rng, max: usize) -> Vec<Behavior> {
    let n = rng.gen_range(1..=max);
    BehaviorKind::ALL
        .choose_multiple(rng, n)
        .map(|&kind| Behavior {
            kind,
            level: Level::ALL[rng.gen_range(0..3)],
            probability: rng.gen_range(0.0..=1.0),
            contributing: Vec::new(),
        })
        .collect()
}

fn random_observations(rng: &mut ChaCha8Rng, max: usize) -> Vec<Observation> {
    (0..rng.gen_range(1..=max))
        .map(|_| Observation {
            id: ObservationId::ALL[rng.gen_range(0..6)],
            posterior: 1.0,
            support_count: 1,
        })
        .collect()
}

fn random_scenario(rng: &mut ChaCha8Rng) -> Scenario {
    let base = Scenario::default_scenario();
    let mut s = with_population(&base, rng.gen_range(4..=80));
    if rng.gen_bool(0.5) {
        s = with_rich_share(&s, rng.gen_range(0.1..0.9));
    }
    s.seed = rng.gen();
    s.duration = SimDuration::from_secs(60);
    s.arrival.warmup = SimDuration::from_secs(rng.gen_range(0..=30));
    s.arrival.process = if rng.gen_bool(0.5) {
        ArrivalProcess::Ramp
    } else {
        ArrivalProcess::Poisson
    };
    let lo = rng.gen_range(0..=150);
    s.pause = (
        SimDuration::from_millis(lo),
        SimDuration::from_millis(lo + rng.gen_range(0..=1000)),
    );
    s.invalid_fraction = rng.gen_range(0.0..0.3);
    s.area.width = rng.gen_range(200.0..1500.0);
    s.area.height = rng.gen_range(200.0..1500.0);
    s.protocol.timeout = SimDuration::from_millis(rng.gen_range(50..=2000));
    s
}

fn counter_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut total = 0u64;
    for i in 0..100 {
        let s = random_scenario(&mut rng);
        let w = run(s).map_err(|e| format!("scenario {i}: {e}"))?;
        let c = w.contacts().counts();
        let ev = w.contacts().events();
        let resourceful = ev
            .iter()
            .filter(|e| e.kind == ContactKind::OpportunisticResourceful)
            .count() as u64;
        let holds = c.n_tc() == ev.len() as u64
            && ev.len() as u64 == c.n_oc + c.n_dc + c.n_roc()
            && resourceful == c.n_roc()
            && c.n_roc() == c.n_hom + c.n_het
            && w.metrics().contacts == c;
        if !holds {
            return Err(format!("scenario {i}: counts {c:?} vs {} events", ev.len()));
        }
        total += c.n_tc();
    }
    Ok(format!(
        "100 scenarios, {total} contacts, all identities exact"
    ))
}

fn oracle_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for case in 0..1000 {
        let cfg = random_config(&mut rng);
        let behaviors = random_behaviors(&mut rng, 4);
        let levels: Vec<(usize, usize, f64)> = behaviors
            .iter()
            .map(|b| (b.kind.index(), b.level.index(), b.probability))
            .collect();
        let lik: Vec<Vec<[f64; 3]>> = cfg.likelihood_bo.iter().map(|k| k.to_vec()).collect();
        for family in Family::ALL {
            let members: Vec<usize> = family.members().iter().map(|o| o.index()).collect();
            let want = common::oracle_observation(&levels, &cfg.behavior_priors, &lik, &members);
            for (slot, ob) in family.members().into_iter().enumerate() {
                match (observation_posterior(&behaviors, ob, &cfg), &want) {
                    (Ok(got), Some(w)) => worst = worst.max((got - w[slot]).abs()),
                    (Err(_), None) => {}
                    (got, w) => return Err(format!("case {case}: {got:?} vs {w:?}")),
                }
            }
        }
        let obs = random_observations(&mut rng, 3);
        let observed: Vec<(usize, usize)> = obs
            .iter()
            .map(|o| (o.id.family().index(), o.id.slot()))
            .collect();
        let want = common::oracle_belief(&cfg.belief_priors, &cfg.likelihood_ob, &observed)
            .ok_or_else(|| format!("case {case}: oracle has no support"))?;
        let b =
            generate_belief(&obs, &cfg, SimTime::ZERO).map_err(|e| format!("case {case}: {e}"))?;
        let best = (0..4).fold(0, |best, i| if want[i] > want[best] { i } else { best });
        if b.class.index() != best {
            return Err(format!(
                "case {case}: class {:?}, oracle picks {best}",
                b.class
            ));
        }
        worst = worst.max((b.posterior - want[best]).abs());
    }
    ok_if(
        worst <= ORACLE_TOL,
        format!("1000 table sets, max |diff| {worst:.2e} (tol {ORACLE_TOL:.0e})"),
    )
}

fn normalization() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 1);
    let mut worst = 0.0f64;
    for case in 0..10_000 {
        let mut log = ParameterLog::new(SimDuration::from_secs(10));
        let n = rng.gen_range(1..=40);
        let mut kinds: Vec<ParameterId> = (0..n)
            .map(|_| ParameterId::ALL[rng.gen_range(0..5)])
            .collect();
        kinds.sort_by_key(|p| p.index());
        for (t, p) in kinds.into_iter().enumerate() {
            let max = rng.gen_range(0.5..100.0);
            let s = BehaviorParameterSample::new(
                p,
                rng.gen_range(0.0..=max),
                max,
                CaptureSource::Log,
                SimTime::from_micros(t as u64),
            )
            .map_err(|e| format!("case {case}: {e}"))?;
            log.record(s).map_err(|e| format!("case {case}: {e}"))?;
        }
        let w: f64 = ParameterId::ALL
            .iter()
            .map(|&p| compute_parameter_weight(&log, p).unwrap())
            .sum();
        worst = worst.max((w - 1.0).abs());

        let cfg = random_config(&mut rng);
        let behaviors = random_behaviors(&mut rng, 5);
        for family in Family::ALL {
            if let Ok(p) = family_posteriors(&behaviors, family, &cfg) {
                worst = worst.max((p.iter().sum::<f64>() - 1.0).abs());
            }
        }
        let obs = random_observations(&mut rng, 6);
        let p = belief_posteriors(&obs, &cfg).map_err(|e| format!("case {case}: {e}"))?;
        worst = worst.max((p.iter().sum::<f64>() - 1.0).abs());
    }
    ok_if(
        worst <= NORM_TOL,
        format!("10000 cases, max |sum - 1| {worst:.2e} (tol {NORM_TOL:.0e})"),
    )
}

fn timing_identities() -> Check {
    let w = run(Scenario::default_scenario()).map_err(|e| e.to_string())?;
    let x = &w.metrics().exchanges;
    let bad = x
        .iter()
        .filter(|e| {
            e.timing.t_bx != e.timing.t_req + e.timing.t_rep || e.t_tot != e.t_bf + e.timing.t_bx
        })
        .count();
    ok_if(
        !x.is_empty() && bad == 0,
        format!("{} exchanges, {bad} violations", x.len()),
    )
}

fn trend(figure: Figure, seeds: &[u64]) -> Result<caosr_core::preset::Report, String> {
    Preset::new(figure, &Scenario::default_scenario())
        .run(seeds)
        .map_err(|e| e.to_string())
}

fn fig12_trend() -> Check {
    let r = trend(Figure::Fig12, &Preset::seeds(SEED, TREND_SEEDS))?;
    let x = r.column("rich_share").unwrap();
    let p = r.column("P_OC").unwrap();
    let rho = spearman(&x, &p);
    ok_if(
        non_decreasing(&p) && rho >= 0.9,
        format!("P_OC {} spearman {rho:.3}", fmt(&p)),
    )
}

fn fig15_trend() -> Check {
    let r = trend(Figure::Fig15, &Preset::seeds(SEED, FIG15_REPLICATES))?;
    let xi = r.column("xi_RA").unwrap();
    let lat = r.column("discovery_latency_ms").unwrap();
    let strict = xi.windows(2).all(|w| w[1] < w[0]);
    ok_if(
        strict && non_decreasing(&lat),
        format!(
            "xi_RA {} latency_ms {} ({FIG15_REPLICATES} replicates)",
            fmt(&xi),
            fmt(&lat)
        ),
    )
}

fn fig14_trend() -> Check {
    let r = trend(Figure::Fig14, &Preset::seeds(SEED, TREND_SEEDS))?;
    let n = r.column("n_nodes").unwrap();
    let patron = r.column("patron").unwrap();
    let slack = r.column("slack").unwrap();
    let (rp, rs) = (spearman(&n, &patron), spearman(&n, &slack));
    ok_if(
        non_decreasing(&patron) && non_increasing(&slack) && rp >= 0.8 && rs <= -0.8,
        format!(
            "patron {} (rho {rp:.2}) slack {} (rho {rs:.2})",
            fmt(&patron),
            fmt(&slack)
        ),
    )
}

fn fig16_trend() -> Check {
    let base = Scenario::default_scenario();
    let r = trend(Figure::Fig16, &Preset::seeds(SEED, TREND_SEEDS))?;
    let quarter = base.duration.as_secs_f64() / 4.0;
    let mean_where = |keep: &dyn Fn(f64) -> bool| {
        let v: Vec<f64> = r
            .rows
            .iter()
            .filter(|row| keep(row[0]))
            .map(|row| row[1])
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let first = mean_where(&|t| t < quarter);
    let last = mean_where(&|t| t >= 3.0 * quarter);
    ok_if(
        first > last,
        format!("first quarter {first:.2}% vs last quarter {last:.2}%"),
    )
}

fn complexity() -> Check {
    let costs = StageCostModel::default();
    let t_bf = |n: usize| {
        costs
            .self_belief_time(&vec![1; n], n, 2)
            .total()
            .as_micros() as f64
    };
    let ratios: Vec<f64> = [8, 16, 32].iter().map(|&n| t_bf(2 * n) / t_bf(n)).collect();
    ok_if(
        ratios.iter().all(|&r| r <= 4.5),
        format!("T_bf(2n)/T_bf(n) for n=8,16,32: {}", fmt(&ratios)),
    )
}

fn determinism() -> Check {
    let base = Scenario::default_scenario();
    let seeds = [SEED];
    let mut digests = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let r = Preset::new(Figure::Fig12, &base)
            .run(&seeds)
            .map_err(|e| e.to_string())?;
        let (_, m) = write_report(&r, &base, &seeds, dir.path()).map_err(|e| e.to_string())?;
        digests.push(m.get("report_digest").unwrap_or_default().to_string());
    }
    ok_if(
        !digests[0].is_empty() && digests[0] == digests[1],
        format!("digests {} / {}", &digests[0][..12], &digests[1][..12]),
    )
}

fn hand_trace() -> Check {
    let w = run(common::two_node()).map_err(|e| e.to_string())?;
    common::check_two_node(&w)?;
    Ok(format!(
        "{} events, record size {}",
        w.trace().len(),
        w.belief_rows(caosr_core::NodeId(1)).len()
    ))
}

#[test]
fn acceptance() {
    let results = [
        criterion(1, "contact counter identities", 60, counter_identities),
        criterion(2, "Bayes oracle equivalence", 60, oracle_equivalence),
        criterion(3, "normalization", 60, normalization),
        criterion(4, "exchange timing identities", 60, timing_identities),
        criterion(5, "P_OC rises with rich share", 180, fig12_trend),
        criterion(6, "pause-time sweep", 180, fig15_trend),
        criterion(7, "belief mix across density", 300, fig14_trend),
        criterion(8, "early failures dominate", 120, fig16_trend),
        criterion(9, "formation cost growth", 60, complexity),
        criterion(10, "preset determinism", 180, determinism),
        criterion(11, "two-node hand trace", 60, hand_trace),
    ];
    let failed: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, &p)| !p)
        .map(|(i, _)| i + 1)
        .collect();
    let _ = writeln!(
        std::io::stderr(),
        "acceptance: {}/{} passed",
        results.len() - failed.len(),
        results.len()
    );
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
