//! Samplers against the reference CDFs, and the sampled chain against the
//! analytic engine.

use seaowc_core::fso::{self, Direction, FsoParams};
use seaowc_core::montecarlo::{
    empirical_cdf_ks, ks_critical_1pct, run_batches, simulate, simulate_points, McEstimate, McRun, McSettings,
};
use seaowc_core::performance::{
    aber, end_to_end_aber, end_to_end_cdf, outage_probability, HopOffsets, Scenario, ScenarioConfig, SnrGrid,
};
use seaowc_core::rf;
use seaowc_core::sampling::StreamRng;
use seaowc_core::uwoc::{self, UwocParams};

const N: usize = 100_000;

fn ks_ok<F: Fn(f64) -> f64>(samples: &[f64], cdf: F, what: &str) {
    let d = empirical_cdf_ks(samples, cdf).unwrap();
    assert!(d <= ks_critical_1pct(samples.len()), "{what}: KS {d}");
}

#[test]
fn underwater_sampler_matches_reference_cdf() {
    for (i, distance) in [150.0, 350.0, 700.0].into_iter().enumerate() {
        let d = uwoc::derive(&UwocParams {
            distance,
            ..Default::default()
        })
        .unwrap();
        let avg = 1.0 / d.gain_scale().powi(2);
        let mut rng = StreamRng::new(11, i as u64);
        let v: Vec<f64> = (0..N).map(|_| d.sample_snr(&mut rng, avg)).collect();
        ks_ok(&v, |g| d.snr_cdf_reference(g, avg).unwrap(), &format!("uwoc d={distance}"));
    }
}

#[test]
fn underwater_samples_respect_the_pointing_cap() {
    let d = uwoc::derive(&UwocParams::default()).unwrap();
    let mut a = StreamRng::new(3, 0);
    let mut b = StreamRng::new(3, 0);
    for _ in 0..1000 {
        let h = d.sample_gain(&mut a);
        let ht = seaowc_core::sampling::sample_lognormal_turbulence(&mut b, d.sigma2);
        let _ = seaowc_core::sampling::sample_pointing(&mut b, d.pointing.cap, d.pointing.ratio);
        assert!(h <= d.path_loss * d.pointing.cap * ht * (1.0 + 1e-12));
    }
}

#[test]
fn air_samplers_match_reference_cdfs() {
    let d = fso::derive(&FsoParams::default()).unwrap();
    for (k, dir) in [Direction::Uplink, Direction::Downlink].into_iter().enumerate() {
        let il = d.path_loss(dir);
        let avg = 1.0 / il.powi(2);
        let mut rng = StreamRng::new(12, k as u64);
        let v: Vec<f64> = (0..N).map(|_| d.sample_ds_snr(&mut rng, avg, dir)).collect();
        ks_ok(&v, |g| d.ds_snr_cdf_reference(g, avg, dir).unwrap(), "direct");
    }
    let (au, ad) = (
        1.0 / d.path_loss(Direction::Uplink).powi(2),
        1.0 / d.path_loss(Direction::Downlink).powi(4),
    );
    let mut rng = StreamRng::new(13, 0);
    let pairs: Vec<(f64, f64)> = (0..N).map(|_| d.sample_rrs_pair(&mut rng, au, ad)).collect();
    let up: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let down: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    ks_ok(&up, |g| d.rrs_snr_cdf(g, au, Direction::Uplink).unwrap(), "retro up");
    ks_ok(&down, |g| d.rrs_snr_cdf(g, ad, Direction::Downlink).unwrap(), "retro down");
}

#[test]
fn retro_pair_shares_one_turbulence_draw() {
    // equal path gains: γ_down = γ_up² γ̃_down / γ̃_up²
    let mut p = FsoParams::default();
    p.downlink = p.uplink.clone();
    let d = fso::derive(&p).unwrap();
    let mut rng = StreamRng::new(5, 5);
    for _ in 0..100 {
        let (u, w) = d.sample_rrs_pair(&mut rng, 3.0, 7.0);
        assert!(((u * u * 7.0 / 9.0) - w).abs() <= 1e-12 * w);
    }
}

#[test]
fn rf_sampler_moments_and_ks() {
    let mut rng = StreamRng::new(14, 0);
    let v: Vec<f64> = (0..1_000_000).map(|_| rf::sample_snr(&mut rng, 25.0, 0.5).unwrap()).collect();
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    assert!((mean / 25.0 - 1.0).abs() < 0.01);
    ks_ok(&v[..N], |g| rf::snr_cdf(g, 25.0, 0.5).unwrap(), "rf");
}

#[test]
fn min_of_three_matches_the_product_formula() {
    let (a, b, c) = (2.0, 5.0, 9.0);
    let mut rng = StreamRng::new(15, 0);
    let v: Vec<f64> = (0..N)
        .map(|_| {
            let x = rf::sample_snr(&mut rng, a, 0.5).unwrap();
            let y = rf::sample_snr(&mut rng, b, 1.0).unwrap();
            let z = rf::sample_snr(&mut rng, c, 3.0).unwrap();
            x.min(y).min(z)
        })
        .collect();
    let f = |g: f64| {
        end_to_end_cdf([
            rf::snr_cdf(g, a, 0.5).unwrap(),
            rf::snr_cdf(g, b, 1.0).unwrap(),
            rf::snr_cdf(g, c, 3.0).unwrap(),
        ])
        .unwrap()
    };
    ks_ok(&v, f, "min of three");
}

#[test]
fn rf_interval_covers_the_truth() {
    let (avg, th) = (10.0, 2.0);
    let truth = rf::snr_cdf(th, avg, 0.5).unwrap();
    let covered = (0..200u64)
        .filter(|&r| {
            let mut rng = StreamRng::new(16, r);
            let hits = (0..10_000)
                .filter(|_| rf::sample_snr(&mut rng, avg, 0.5).unwrap() <= th)
                .count();
            let e = McEstimate::proportion(hits as u64, 10_000);
            (e.mean - truth).abs() <= e.ci95
        })
        .count();
    assert!(covered >= 180, "{covered} of 200");
}

fn settings(samples: u64, workers: usize) -> McSettings {
    McSettings {
        samples,
        seed: 42,
        batch_size: 2_500,
        workers,
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let config = ScenarioConfig {
        scenario: Scenario::Udr,
        snr_grid: SnrGrid {
            min_db: 25.0,
            max_db: 45.0,
            step_db: 10.0,
        },
        ..Default::default()
    };
    let one = simulate(&McRun {
        settings: settings(20_000, 1),
        config: config.clone(),
    })
    .unwrap();
    let eight = simulate(&McRun {
        settings: settings(20_000, 8),
        config,
    })
    .unwrap();
    assert_eq!(one, eight);
    for (a, b) in one.iter().zip(&eight) {
        for (p, q) in a.points.iter().zip(&b.points) {
            assert_eq!(p.outage.mean.to_bits(), q.outage.mean.to_bits());
            assert_eq!(p.aber.mean.to_bits(), q.aber.mean.to_bits());
        }
    }
}

#[test]
fn batches_are_independent_of_scheduling() {
    let f = |b: u64, rng: &mut StreamRng, n: u64| {
        use rand::Rng;
        (b, (0..n).map(|_| rng.random::<u64>()).fold(0u64, |a, x| a ^ x))
    };
    let a = run_batches(10_007, 1000, 9, 1, f);
    let b = run_batches(10_007, 1000, 9, 7, f);
    assert_eq!(a, b);
    assert_eq!(a.len(), 11);
}

#[test]
fn sampled_chain_agrees_with_the_reference_engine() {
    let config = ScenarioConfig {
        scenario: Scenario::Sud,
        ..Default::default()
    };
    let points = [30.0, 40.0, 50.0];
    let curves = simulate_points(
        &McRun {
            settings: settings(100_000, 0),
            config: config.clone(),
        },
        &points,
    )
    .unwrap();
    let leg = curves[0].leg;
    for p in &curves[0].points {
        let o = outage_probability(&config, leg, p.avg_snr_db).unwrap();
        let se = 1.96 * (o * (1.0 - o) / p.outage.n as f64).sqrt();
        assert!((p.outage.mean - o).abs() <= 3.0 * se, "{} dB outage {} vs {o}", p.avg_snr_db, p.outage.mean);
        let a = aber(&config, leg, p.avg_snr_db).unwrap();
        assert!((p.aber.mean - a).abs() <= 3.0 * p.aber.ci95, "{} dB aber {} vs {a}", p.avg_snr_db, p.aber.mean);
        // combining per draw and combining the per-hop averages agree
        let sep = end_to_end_aber(p.hop_aber.map(|e| e.mean)).unwrap();
        assert!((sep - p.aber.mean).abs() <= 3.0 * p.aber.ci95);
    }
}

#[test]
fn vanishing_threshold_and_huge_snr() {
    let config = ScenarioConfig {
        scenario: Scenario::Sur,
        gamma_th_db: -300.0,
        hop_offsets: HopOffsets {
            uwoc_db: 300.0,
            fso_db: 300.0,
            rf_db: 300.0,
        },
        ..Default::default()
    };
    let c = simulate_points(
        &McRun {
            settings: settings(10_000, 0),
            config,
        },
        &[40.0],
    )
    .unwrap();
    let p = &c[0].points[0];
    assert_eq!(p.outage.mean, 0.0);
    assert!(p.aber.mean < 1e-12);
}

#[test]
fn settings_are_validated() {
    assert!(McSettings {
        samples: 0,
        ..Default::default()
    }
    .validate()
    .is_err());
}
