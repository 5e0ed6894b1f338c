mod common;

use iptv_amc::oracle::{build_generator, chain_metrics, erlang_b, stationary_solve};
use iptv_amc::sim::{measure_transition_rates, simulate, MobilityEngine, SimConfig, TraceKind};
use iptv_amc::{exact_report, exact_weights, MobilitySpec, SystemState};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// `|x - exact|` within the 99% half-width plus a small slack for the
/// residual warmup bias.
fn within(est: &iptv_amc::sim::Estimate, exact: f64, slack: f64) -> bool {
    (est.mean - exact).abs() <= est.half_width_or_zero() + slack
}

#[test]
fn single_class_blocking_is_erlang_b() {
    let s = common::small(&[1], &[1.0], 2, 1.0, 1.0, MobilitySpec::None);
    let r = simulate(&SimConfig::new(s, 50_000.0, 10, 7, MobilityEngine::Markov)).unwrap();
    assert!((erlang_b(1.0, 2) - 0.2).abs() < 1e-15);
    assert!(within(&r.blocking_rate, 0.2, 1e-3), "{:?}", r.blocking_rate);
    // Mean busy servers = a (1 - B).
    assert!(
        within(&r.mean_bandwidth_slots, 0.8, 2e-3),
        "{:?}",
        r.mean_bandwidth_slots
    );
}

#[test]
fn idle_cell_reports_zeros() {
    let s = common::reference_cell(10, 0.0, MobilitySpec::MarkovSojourn { mean_sojourn: 5.0 });
    let r = simulate(&SimConfig::new(s, 5_000.0, 3, 1, MobilityEngine::Markov)).unwrap();
    assert_eq!(r.blocking_rate.mean, 0.0);
    assert_eq!(r.mean_bandwidth_slots.mean, 0.0);
    assert_eq!(r.dropping_rate.mean, 0.0);
    assert_eq!(r.counts.arrivals, 0);
}

#[test]
fn results_depend_on_the_seed_alone() {
    let s = common::reference_cell(12, 1.5, MobilitySpec::MarkovSojourn { mean_sojourn: 5.0 });
    let run = |seed| simulate(&SimConfig::new(s.clone(), 4_000.0, 3, seed, MobilityEngine::Markov)).unwrap();
    let (a, b, c) = (run(11), run(11), run(12));
    assert_eq!(a.blocking_rate, b.blocking_rate);
    assert_eq!(a.mean_bandwidth_slots, b.mean_bandwidth_slots);
    assert_eq!(a.dropping_rate, b.dropping_rate);
    assert_eq!(a.counts, b.counts);
    assert_ne!(a.counts, c.counts);
}

#[test]
fn connections_are_conserved_and_capacity_holds() {
    let s = common::reference_cell(12, 2.0, MobilitySpec::MarkovSojourn { mean_sojourn: 5.0 });
    let cap = s.capacity_slots();
    for engine in [
        MobilityEngine::Markov,
        MobilityEngine::RandomWalk {
            step_distance: 0.08,
            speed_per_second: 0.0011,
        },
    ] {
        let r = simulate(&SimConfig::new(s.clone(), 3_000.0, 2, 3, engine).with_trace()).unwrap();
        for rep in &r.replications {
            assert!(rep.is_conserving());
            let t = &rep.total;
            assert_eq!(t.admits, t.departures + t.drops + t.handovers + rep.in_system_at_end);
            assert_eq!(t.arrivals, t.admits + t.blocks);
            let trace = rep.trace.as_ref().unwrap();
            assert!(trace.iter().all(|e| e.load <= cap));
            assert!(trace.windows(2).all(|w| w[0].time <= w[1].time));
            assert!(trace.iter().any(|e| e.kind == TraceKind::Drop));
        }
    }
}

#[test]
fn snapshots_follow_the_product_form() {
    let s = common::small(&[14, 7], &[0.5, 0.5], 28, 2.0, 1.0, MobilitySpec::None);
    let weights = exact_weights(&s).unwrap();
    let cfg = SimConfig::new(s.clone(), 100_000.0, 1, 5, MobilityEngine::Markov).with_snapshots(5.0);
    let r = simulate(&cfg).unwrap();
    let snaps = r.replications[0].snapshots.as_ref().unwrap();
    let total: u64 = snaps.values().sum();
    assert!(total > 15_000);
    let mut states = Vec::new();
    iptv_amc::enumerate_states(&s, |st| states.push(st.clone()));
    assert_eq!(states.len(), 9);
    let mut chi2 = 0.0;
    for st in &states {
        let expected = weights.probability(st) * total as f64;
        let observed = snaps.get(st.counts()).copied().unwrap_or(0) as f64;
        chi2 += (observed - expected).powi(2) / expected;
    }
    assert!(snaps
        .keys()
        .all(|k| SystemState::new(k.clone(), s.slots()).is_admissible(&s)));
    let critical = ChiSquared::new((states.len() - 1) as f64).unwrap().inverse_cdf(0.99);
    assert!(chi2 < critical, "chi2 {chi2} vs {critical}");
}

#[test]
fn interval_narrows_with_replications() {
    let s = common::reference_cell(15, 2.0, MobilitySpec::None);
    let hw = |reps| {
        simulate(&SimConfig::new(s.clone(), 5_000.0, reps, 2, MobilityEngine::Markov))
            .unwrap()
            .blocking_rate
            .half_width
            .unwrap()
    };
    // Quadrupling the replications roughly halves the width; the t quantile
    // shrinks too.
    let ratio = hw(8) / hw(32);
    assert!((1.4..4.0).contains(&ratio), "{ratio}");
}

#[test]
fn frozen_walkers_match_the_static_cell() {
    let s = common::reference_cell(12, 1.5, MobilitySpec::None);
    let exact = exact_report(&s).unwrap();
    let engine = MobilityEngine::RandomWalk {
        step_distance: 0.08,
        speed_per_second: 1e-12,
    };
    let r = simulate(&SimConfig::new(s, 40_000.0, 8, 4, engine)).unwrap();
    assert_eq!(r.counts.mcs_changes + r.counts.handovers + r.counts.drops, 0);
    assert!(
        within(&r.blocking_rate, exact.blocking_rate, 2e-3),
        "{:?} vs {}",
        r.blocking_rate,
        exact.blocking_rate
    );
}

#[test]
fn fast_long_legs_end_sessions_by_handover() {
    let s = common::reference_cell(12, 1.0, MobilitySpec::None);
    let engine = MobilityEngine::RandomWalk {
        step_distance: 10.0,
        speed_per_second: 0.01,
    };
    let r = simulate(&SimConfig::new(s, 5_000.0, 2, 9, engine)).unwrap();
    let c = &r.counts;
    assert!(c.handovers > 10 * c.departures, "{c:?}");
}

#[test]
fn symmetric_rings_have_balanced_flux() {
    let s = common::small(&[2, 1], &[0.5, 0.5], 100, 1.0, 0.05, MobilitySpec::None);
    let engine = MobilityEngine::RandomWalk {
        step_distance: 0.1,
        speed_per_second: 0.002,
    };
    let m = measure_transition_rates(&SimConfig::new(s, 20_000.0, 4, 6, engine)).unwrap();
    let (out, inn) = (m.crossings[1][1] as f64, m.crossings[0][2] as f64);
    assert!(out > 1000.0 && inn > 1000.0);
    // Each visit to the inner ring ends in a crossing out or a session end.
    let ends = 0.05 * m.zone_time[1];
    let visits = m.visits[1] as f64;
    assert!((visits - out - ends).abs() / visits < 0.02, "{visits} {out} {ends}");
    // Leaving the cell only happens from the outer ring.
    assert_eq!(m.crossings[1][0], 0);
}

#[test]
fn markov_simulation_matches_the_exact_chain() {
    let s = common::small(
        &[4, 2, 1],
        &[0.3, 0.3, 0.4],
        12,
        2.0,
        0.2,
        MobilitySpec::MarkovSojourn { mean_sojourn: 5.0 },
    );
    let q = build_generator(&s).unwrap();
    let pi = stationary_solve(&q).unwrap();
    let exact = chain_metrics(&s, &q, &pi);
    let r = simulate(&SimConfig::new(s, 50_000.0, 10, 8, MobilityEngine::Markov)).unwrap();
    assert!(
        within(&r.blocking_rate, exact.blocking_rate, 2e-3),
        "{:?} {}",
        r.blocking_rate,
        exact.blocking_rate
    );
    assert!(within(&r.mean_bandwidth_slots, exact.mean_bandwidth_slots, 0.02));
    assert!(
        within(&r.dropping_rate, exact.dropping_rate, 2e-3),
        "{:?} {}",
        r.dropping_rate,
        exact.dropping_rate
    );
}
