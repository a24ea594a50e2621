use proptest::prelude::*;

use super::*;
use crate::exact::active_pmf;
use crate::model::{PolicyParams, SlotFeedback};

fn config(slots: u64, warmup: u64, seed: u64, init: Init) -> SimConfig {
    SimConfig::new(slots, seed).warmup(warmup).init(init)
}

fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / 2.0
}

#[test]
fn single_source_always_succeeds() {
    let r = simulate(
        PolicyKind::threshold(1, 1.0),
        1,
        1000,
        Some(10),
        3,
        Init::AllActive,
    )
    .unwrap();
    assert_eq!(r.network_avg_aoi, 1.0);
    assert_eq!(r.throughput, 1.0);
    assert_eq!(r.success_count, 1000);
}

#[test]
fn two_certain_attempters_always_collide() {
    let cfg = config(100, 0, 1, Init::AllActive);
    let mut sim = Simulator::new(PolicyKind::threshold(3, 1.0), 2, &cfg).unwrap();
    for t in 0..50 {
        assert_eq!(sim.step(), SlotFeedback::Collision(2));
        assert_eq!(sim.state().dest_age, vec![3 + t + 1; 2]);
    }
}

#[test]
fn empirical_pmf_matches_closed_form_small_network() {
    let exact = active_pmf(&PolicyParams::new(2, 4, 0.5)).unwrap();
    // 3/11, 6/11, 2/11
    let r = simulate(
        PolicyKind::threshold(4, 0.5),
        2,
        1_000_000,
        Some(1000),
        11,
        Init::RandomDistinct,
    )
    .unwrap();
    let tv = total_variation(&exact.probabilities(), &r.active_fraction_pmf);
    assert!(tv <= 0.02, "tv = {tv}");
    assert!((r.active_fraction_pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn empirical_pmf_matches_closed_form_moderate_network() {
    let params = PolicyParams::new(20, 44, 4.69 / 20.0);
    let exact = active_pmf(&params).unwrap();
    let r = simulate(
        PolicyKind::threshold(44, params.tau),
        20,
        2_000_000,
        None,
        5,
        Init::RandomDistinct,
    )
    .unwrap();
    let tv = total_variation(&exact.probabilities(), &r.active_fraction_pmf);
    assert!(tv <= 0.02, "tv = {tv}");
}

#[test]
fn throughput_matches_closed_form() {
    let params = PolicyParams::new(10, 30, 0.2);
    let pmf = active_pmf(&params).unwrap();
    let exact: f64 = pmf
        .probabilities()
        .iter()
        .enumerate()
        .map(|(m, p)| p * m as f64 * 0.2 * 0.8f64.powi(m as i32 - 1))
        .sum();
    let r = simulate(
        PolicyKind::threshold(30, 0.2),
        10,
        2_000_000,
        None,
        2,
        Init::RandomDistinct,
    )
    .unwrap();
    assert!(
        (r.throughput / exact - 1.0).abs() < 0.01,
        "{} vs {exact}",
        r.throughput
    );
    // one delivery per renewal cycle, so the AoI is at least (E[Y] + 1) / 2
    let cycle = 10.0 / exact;
    assert!(r.network_avg_aoi >= 0.99 * (cycle + 1.0) / 2.0);
}

#[test]
fn slotted_equals_threshold_one() {
    let cfg = config(20_000, 100, 9, Init::RandomDistinct);
    let mut a = Simulator::new(PolicyKind::slotted(0.1), 8, &cfg).unwrap();
    let mut b = Simulator::new(PolicyKind::threshold(1, 0.1), 8, &cfg).unwrap();
    for _ in 0..5_000 {
        assert_eq!(a.step(), b.step());
    }
    let (mut ra, rb) = (a.run(), b.run());
    ra.policy = rb.policy;
    assert_eq!(ra, rb);
}

#[test]
fn reports_are_deterministic() {
    let policy = PolicyKind::threshold(12, 0.3).with_arrivals(0.4);
    let a = simulate(policy, 5, 50_000, Some(500), 77, Init::RandomDistinct).unwrap();
    let b = simulate(policy, 5, 50_000, Some(500), 77, Init::RandomDistinct).unwrap();
    assert_eq!(a, b);
    let c = simulate(policy, 5, 50_000, Some(500), 78, Init::RandomDistinct).unwrap();
    assert_ne!(a.network_avg_aoi, c.network_avg_aoi);
}

#[test]
fn success_accounting() {
    let r = simulate(
        PolicyKind::threshold(9, 0.3),
        6,
        100_000,
        Some(50),
        4,
        Init::AllActive,
    )
    .unwrap();
    assert_eq!(r.success_count, r.successes_per_source.iter().sum::<u64>());
    assert_eq!(
        (r.throughput * r.slots_simulated as f64).round() as u64,
        r.success_count
    );
    assert_eq!(r.tx_events_per_slot, r.rx_events_per_slot);
    assert!(r.throughput <= r.tx_events_per_slot);
    assert_eq!(
        r.active_count_histogram.iter().sum::<u64>(),
        r.slots_simulated
    );
}

#[test]
fn stabilized_listens_on_every_slot() {
    let r = simulate(
        PolicyKind::stabilized(20, EstimatorParams::default()),
        10,
        20_000,
        Some(100),
        1,
        Init::RandomDistinct,
    )
    .unwrap();
    assert_eq!(r.rx_events_per_slot, 10.0);
}

#[test]
fn full_arrival_rate_adds_exactly_one() {
    let r = simulate_arrivals(
        PolicyKind::threshold(8, 0.3).with_arrivals(1.0),
        4,
        100_000,
        Some(100),
        3,
    )
    .unwrap();
    let a = r.arrivals.unwrap();
    assert!(
        (a.source_age_offset - 1.0).abs() < 1e-9,
        "{}",
        a.source_age_offset
    );
}

#[test]
fn arrival_offset_is_mean_interarrival() {
    let r = simulate_arrivals(
        PolicyKind::threshold(8, 0.3).with_arrivals(0.25),
        4,
        2_000_000,
        Some(1000),
        3,
    )
    .unwrap();
    let a = r.arrivals.unwrap();
    assert!(
        (a.source_age_offset - 4.0).abs() < 0.1,
        "{}",
        a.source_age_offset
    );
}

#[test]
fn arrivals_run_requires_rate() {
    assert!(simulate_arrivals(PolicyKind::threshold(8, 0.3), 4, 1000, Some(10), 3).is_err());
}

#[test]
fn guards() {
    let p = PolicyKind::threshold(4, 0.5);
    assert!(matches!(
        Simulator::new(p, 2, &config(10, 10, 0, Init::AllActive)),
        Err(crate::Error::InvalidParameter { .. })
    ));
    let mut cfg = config(1000, 0, 0, Init::AllActive);
    cfg.budget = 1999;
    assert!(matches!(
        Simulator::new(p, 2, &cfg),
        Err(crate::Error::BudgetExceeded {
            requested: 2000,
            ..
        })
    ));
    assert!(Simulator::new(p, 0, &config(10, 0, 0, Init::AllActive)).is_err());
}

#[test]
fn default_warmup_floor() {
    assert_eq!(default_warmup(5), 100_000);
    assert_eq!(default_warmup(20_000), 200_000);
}

#[test]
fn random_distinct_init() {
    let cfg = config(10, 0, 123, Init::RandomDistinct);
    let mut sim = Simulator::new(PolicyKind::threshold(50, 0.1), 30, &cfg).unwrap();
    let mut ages = sim.state().dest_age;
    assert!(ages.iter().all(|&a| (1..=50).contains(&a)));
    ages.sort_unstable();
    ages.dedup();
    assert_eq!(ages.len(), 30);

    // gamma below n+1: values come from 1..=n+1 and are clamped
    let mut sim = Simulator::new(PolicyKind::threshold(5, 0.1), 30, &cfg).unwrap();
    let ages = sim.state().dest_age;
    assert!(ages.iter().all(|&a| (1..=5).contains(&a)));
    assert!(ages.iter().filter(|&&a| a == 5).count() >= 26);
}

#[test]
fn below_threshold_ages_stay_distinct() {
    let gamma = 40;
    let cfg = config(20_000, 0, 8, Init::RandomDistinct);
    let mut sim = Simulator::new(PolicyKind::threshold(gamma, 0.15), 25, &cfg).unwrap();
    for t in 0..10_000 {
        sim.step();
        if t >= gamma {
            let mut below: Vec<u64> = sim
                .state()
                .dest_age
                .into_iter()
                .filter(|&a| a < gamma)
                .collect();
            let len = below.len();
            below.sort_unstable();
            below.dedup();
            assert_eq!(below.len(), len, "slot {t}");
        }
    }
}

#[test]
fn estimator_tracks_active_population() {
    let mut sim = Simulator::new(
        PolicyKind::stabilized(30, EstimatorParams::default()),
        10,
        &config(10_000, 0, 1, Init::AllActive),
    )
    .unwrap();
    assert_eq!(sim.state().estimate, Some(10.0));
    for _ in 0..1000 {
        sim.step();
        assert!(sim.state().estimate.unwrap() >= 1.0);
    }
}

fn policies() -> impl Strategy<Value = PolicyKind> {
    let threshold = (1u64..12, 0.05f64..1.0).prop_map(|(g, t)| PolicyKind::threshold(g, t));
    let slotted = (0.05f64..1.0).prop_map(PolicyKind::slotted);
    let stabilized = (1u64..12, any::<bool>()).prop_map(|(g, credit)| {
        PolicyKind::stabilized(
            g,
            EstimatorParams {
                activation_credit: credit,
                ..Default::default()
            },
        )
    });
    let access = prop_oneof![threshold, slotted, stabilized];
    (access, proptest::option::of(0.05f64..=1.0)).prop_map(|(mut p, rate)| {
        p.arrival_rate = rate;
        p
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn engine_matches_reference_step(
        policy in policies(),
        n in 1usize..7,
        seed in any::<u64>(),
        all_active in any::<bool>(),
        per_slot in any::<bool>(),
    ) {
        let init = if all_active { Init::AllActive } else { Init::RandomDistinct };
        let sampling = if per_slot { AttemptSampling::PerSlot } else { AttemptSampling::Clock };
        let cfg = config(400, 0, seed, init).sampling(sampling);
        let mut sim = Simulator::new(policy, n, &cfg).unwrap();
        let mut streams = SourceStreams::new(seed, n, &policy, sampling);
        let mut state = sim.state();
        for _ in 0..300 {
            let (next, fb) = step(&state, &policy, &mut streams);
            prop_assert_eq!(sim.step(), fb);
            prop_assert_eq!(&sim.state(), &next);

            // age recursion, slot by slot
            for i in 0..n {
                let succeeded = fb == SlotFeedback::Success(i);
                let expect = match (&state.source_age, succeeded) {
                    (Some(src), true) => src[i] + 1,
                    (None, true) => 1,
                    (_, false) => state.dest_age[i] + 1,
                };
                prop_assert_eq!(next.dest_age[i], expect);
                prop_assert!(next.dest_age[i] >= 1);
            }
            match fb {
                SlotFeedback::Collision(k) => prop_assert!(k >= 2),
                SlotFeedback::Success(i) => prop_assert!(i < n),
                SlotFeedback::Idle => {}
            }
            state = next;
        }
    }

    #[test]
    fn report_invariants(policy in policies(), n in 1usize..6, seed in any::<u64>()) {
        let r = simulate(policy, n, 3000, Some(200), seed, Init::RandomDistinct).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.throughput));
        prop_assert!(r.network_avg_aoi >= 1.0);
        prop_assert!((r.active_fraction_pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert_eq!(r.success_count, r.successes_per_source.iter().sum::<u64>());
        prop_assert_eq!((r.throughput * 3000.0).round() as u64, r.success_count);
    }
}
