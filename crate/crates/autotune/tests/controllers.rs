//! Controller properties checked against the synthetic oracle.

use afmm::rng::substream;
use afmm_autotune::{
    run_controller, Autotuner, Measurement, Params, Proposal, TunerConfig, TunerKind, WorkloadOracle,
};

const TUNERS: [TunerKind; 4] = [TunerKind::At1, TunerKind::At2, TunerKind::At3a, TunerKind::At3b];

fn tuner(kind: TunerKind, cfg: TunerConfig, start: Params, seed: u64) -> Autotuner {
    Autotuner::new(kind, cfg, start, substream(seed, "tuner")).unwrap()
}

#[test]
fn rejection_safety_all_controllers() {
    let oracle = WorkloadOracle::switching(0.4, 0.62, 5000, 5)
        .with_sawtooth(0.03, 0.04)
        .with_noise(0.05);
    for window in [1, 3] {
        for kind in TUNERS {
            let cfg = TunerConfig {
                window,
                cap: 0.1,
                ..Default::default()
            };
            let mut t = tuner(kind, cfg, Params::new(0.7, 3), 11);
            let traj = run_controller(&mut t, &oracle, 10_000, 11).unwrap();
            let rows = &traj.rows;
            for k in 1..rows.len() {
                let (prev, cur) = (&rows[k - 1], &rows[k]);
                if cur.effective_time > prev.effective_time {
                    assert!(!cur.accepted, "{kind} iteration {}", cur.iteration);
                    if k + 1 < rows.len() {
                        assert_eq!(rows[k + 1].params(), prev.params(), "{kind} iteration {}", cur.iteration);
                    }
                }
            }
        }
    }
}

#[test]
fn rejection_safety_raw_times() {
    // With window 1 the comparison uses the raw runtimes.
    let oracle = WorkloadOracle::single_basin(0.5, 4).with_noise(0.2);
    for kind in TUNERS {
        let cfg = TunerConfig {
            window: 1,
            ..Default::default()
        };
        let mut t = tuner(kind, cfg, Params::new(0.3, 2), 3);
        let traj = run_controller(&mut t, &oracle, 10_000, 3).unwrap();
        for w in traj.rows.windows(3) {
            if w[1].time > w[0].time {
                assert_eq!(w[2].params(), w[0].params());
            }
        }
    }
}

#[test]
fn at2_converges_on_single_basin() {
    let mut hits = 0;
    for seed in 0..20u64 {
        let oracle = WorkloadOracle::single_basin(0.55, 5);
        let start = Params::new(0.3 + 0.02 * (seed % 10) as f64, 3);
        let mut t = tuner(TunerKind::At2, TunerConfig::default(), start, seed);
        let traj = run_controller(&mut t, &oracle, 500, seed).unwrap();
        if (traj.final_params.theta - 0.55).abs() <= 0.02 + 1e-9 {
            hits += 1;
        }
    }
    assert!(hits >= 18, "{hits} of 20 seeds converged");
}

#[test]
fn fibonacci_schedule_under_repeated_rejection() {
    let cfg = TunerConfig {
        window: 1,
        theta_min: 0.05,
        theta_max: 0.95,
        nlevels_every: 1_000_000,
        ..Default::default()
    };
    let mut t = tuner(TunerKind::At2, cfg, Params::new(0.5, 4), 0);
    let mut steps = Vec::new();
    let mut time = 1.0;
    for i in 1..=80u64 {
        // every probe is slower, every revert a little faster than before
        let d = t
            .step(Measurement {
                iteration: i,
                time,
                cpu_wait: None,
            })
            .unwrap();
        if let Proposal::Theta(delta) = d.proposal {
            steps.push((delta.abs() / 0.01).round() as u64);
            time += 1.0;
        } else if !d.accepted {
            time -= 1.0 - 1e-3;
        }
    }
    assert_eq!(&steps[..12], &[1, 1, 2, 1, 1, 2, 3, 1, 1, 2, 3, 5]);
}

#[test]
fn at3a_matches_at2_without_wait_signal() {
    let oracle = WorkloadOracle::switching(0.4, 0.6, 700, 5)
        .with_sawtooth(0.02, 0.05)
        .with_noise(0.03)
        .synchronous();
    for seed in 0..5 {
        let mut a = tuner(TunerKind::At2, TunerConfig::default(), Params::new(0.7, 2), seed);
        let mut b = tuner(TunerKind::At3a, TunerConfig::default(), Params::new(0.7, 2), seed);
        let ta = run_controller(&mut a, &oracle, 2000, seed).unwrap();
        let tb = run_controller(&mut b, &oracle, 2000, seed).unwrap();
        for (x, y) in ta.rows.iter().zip(&tb.rows) {
            assert_eq!((x.iteration, x.theta, x.n_levels, x.time, x.proposal), (y.iteration, y.theta, y.n_levels, y.time, y.proposal));
        }
    }
}

#[test]
fn at3a_moves_toward_balance() {
    let oracle = WorkloadOracle::single_basin(0.5, 6);
    let mut t = tuner(TunerKind::At3a, TunerConfig::default(), Params::new(0.5, 2), 1);
    let traj = run_controller(&mut t, &oracle, 300, 1).unwrap();
    assert!(traj.final_params.n_levels >= 5);
}

#[test]
fn cost_cap_respected() {
    let oracle = WorkloadOracle::single_basin(0.5, 4).with_noise(0.02);
    for cap in [0.0, 0.02, 0.05, 0.1, 0.2] {
        for seed in 0..5 {
            let cfg = TunerConfig {
                cap,
                ..Default::default()
            };
            let mut t = tuner(TunerKind::At3b, cfg, Params::new(0.5, 4), seed);
            let traj = run_controller(&mut t, &oracle, 400, seed).unwrap();
            let acc = traj.probe_account();
            if cap == 0.0 {
                assert_eq!(acc.probes, 0);
            } else {
                assert!(acc.probes > 0);
            }
            assert!(acc.fraction() <= cap + acc.one_probe() + 1e-12, "cap {cap}: {acc:?}");
        }
    }
}

#[test]
fn large_cap_probes_every_turn() {
    let oracle = WorkloadOracle::single_basin(0.5, 4).with_noise(0.0);
    let cfg = TunerConfig {
        cap: 1e9,
        ..Default::default()
    };
    let mut t = tuner(TunerKind::At3b, cfg, Params::new(0.5, 4), 0);
    let traj = run_controller(&mut t, &oracle, 200, 0).unwrap();
    let turns = traj.rows.iter().filter(|r| r.iteration % 10 == 0).count();
    let probes = traj.rows.iter().filter(|r| matches!(r.proposal, Proposal::NLevels(_))).count();
    assert_eq!(probes, turns);
}

#[test]
fn bounds_never_left() {
    let oracle = WorkloadOracle::single_basin(0.1, 20).with_noise(0.05);
    for kind in TUNERS {
        let cfg = TunerConfig {
            n_levels_max: 8,
            cap: 1.0,
            ..Default::default()
        };
        let mut t = tuner(kind, cfg, Params::new(0.3, 7), 2);
        let traj = run_controller(&mut t, &oracle, 3000, 2).unwrap();
        for r in &traj.rows {
            assert!((0.25 - 1e-9..=0.8 + 1e-9).contains(&r.theta), "{kind}: θ {}", r.theta);
            assert!((1..=8).contains(&r.n_levels), "{kind}: levels {}", r.n_levels);
        }
    }
}

#[test]
fn at2_tracks_drift_at_least_as_well_as_at1() {
    let mut at1 = Vec::new();
    let mut at2 = Vec::new();
    for seed in 100..120 {
        // The valley moves from 0.3 to 0.55 under a fixed saw-tooth ripple,
        // whose teeth trap a search with constant small steps.
        let oracle = WorkloadOracle::drifting(0.3, 2.5e-4, 4)
            .with_noise(0.005)
            .with_sawtooth(0.1, 0.05);
        let start = Params::new(0.3, 4);
        let mut a = tuner(TunerKind::At1, TunerConfig::default(), start, seed);
        let mut b = tuner(TunerKind::At2, TunerConfig::default(), start, seed);
        at1.push(run_controller(&mut a, &oracle, 1000, seed).unwrap().mean_time_last(100));
        at2.push(run_controller(&mut b, &oracle, 1000, seed).unwrap().mean_time_last(100));
    }
    let median = |v: &mut Vec<f64>| {
        v.sort_by(f64::total_cmp);
        (v[9] + v[10]) / 2.0
    };
    let (m1, m2) = (median(&mut at1), median(&mut at2));
    assert!(m2 <= m1, "AT2 {m2} vs AT1 {m1}");
}

#[test]
fn at2_recovers_after_basin_switch() {
    let oracle = WorkloadOracle::switching(0.4, 0.6, 500, 4);
    let mut t = tuner(TunerKind::At2, TunerConfig::default(), Params::new(0.45, 4), 9);
    let traj = run_controller(&mut t, &oracle, 2000, 9).unwrap();
    assert!(traj.settled_at(0, 0.4, 0.02).is_none() || traj.rows[499].theta < 0.5);
    let settled = traj.settled_at(500, 0.6, 0.03);
    assert!(settled.is_some(), "final θ {}", traj.final_params.theta);
}
