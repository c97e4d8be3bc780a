//! End-to-end combining, ABER quadrature and the reference-engine curves.

use proptest::prelude::*;
use seaowc_core::common::Weather;
use seaowc_core::performance::{
    aber, aber_from_cdf, analyze, conditional_bit_error, end_to_end_aber, end_to_end_cdf, outage_probability, Chain,
    Engine, Evaluator, HopOffsets, Modulation, Scenario, ScenarioConfig, SnrGrid,
};
use seaowc_core::quadrature::{integrate, QuadratureSpec};
use seaowc_core::rf;
use seaowc_core::special::{erfc, gamma, upper_incomplete_gamma};

fn spec() -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: 1e-15,
        rel_tol: 1e-10,
        max_subdivisions: 4000,
        infinite_tail_transform: true,
    }
}

fn cfg(scenario: Scenario) -> ScenarioConfig {
    ScenarioConfig {
        scenario,
        ..Default::default()
    }
}

fn odd_parity(p: [f64; 3]) -> f64 {
    let [a, b, c] = p;
    a * (1.0 - b) * (1.0 - c) + b * (1.0 - a) * (1.0 - c) + c * (1.0 - a) * (1.0 - b) + a * b * c
}

#[test]
fn combining_examples() {
    assert_eq!(end_to_end_cdf([0.0; 3]).unwrap(), 0.0);
    assert_eq!(end_to_end_cdf([0.2, 1.0, 0.7]).unwrap(), 1.0);
    assert!(end_to_end_cdf([0.2, 1.1, 0.0]).is_err());
    assert_eq!(end_to_end_aber([0.0; 3]).unwrap(), 0.0);
    assert_eq!(end_to_end_aber([0.5, 0.13, 0.4]).unwrap(), 0.5);
    let p = [0.1, 0.01, 0.001];
    assert!((end_to_end_aber(p).unwrap() - odd_parity(p)).abs() <= 1e-15);
    assert!(end_to_end_aber([-0.1, 0.0, 0.0]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn product_form_is_odd_parity(a in 0.0f64..=0.5, b in 0.0f64..=0.5, c in 0.0f64..=0.5) {
        let p = [a, b, c];
        prop_assert!((end_to_end_aber(p).unwrap() - odd_parity(p)).abs() < 1e-14);
        prop_assert!(end_to_end_aber(p).unwrap() <= 0.5);
    }

    #[test]
    fn min_cdf_dominates_each_hop(a in 0.0f64..=1.0, b in 0.0f64..=1.0, c in 0.0f64..=1.0) {
        let f = end_to_end_cdf([a, b, c]).unwrap();
        prop_assert!(f >= a.max(b).max(c) - 1e-15 && f <= 1.0);
    }
}

#[test]
fn conditional_error_examples() {
    for m in Modulation::ALL {
        assert_eq!(conditional_bit_error(m, 0.0), 0.5);
    }
    let v = conditional_bit_error(Modulation::Bpsk, 1.0);
    assert!((v - erfc(1.0) / 2.0).abs() < 1e-16);
    for g in [0.01, 0.7, 3.0, 12.0] {
        assert!((conditional_bit_error(Modulation::Bpsk, g) - erfc(g.sqrt()) / 2.0).abs() < 1e-15);
        let (p, q) = Modulation::Dbpsk.params();
        let expect = upper_incomplete_gamma(p, q * g).unwrap() / (2.0 * gamma(p));
        assert!((conditional_bit_error(Modulation::Dbpsk, g) - expect).abs() < 1e-15);
    }
}

#[test]
fn aber_identity_on_rf_hop() {
    // CDF form of the average against the pdf-weighted conditional error
    for m in Modulation::ALL {
        for (avg, shape) in [(10.0, 0.5), (300.0, 1.0), (31.6, 2.2)] {
            let lhs = aber_from_cdf(m, |x| rf::snr_cdf(x, avg, shape), &spec()).unwrap();
            let rhs = integrate(
                |x| rf::snr_pdf(x, avg, shape) * conditional_bit_error(m, x),
                0.0,
                f64::INFINITY,
                &spec(),
            )
            .unwrap();
            assert!((lhs - rhs).abs() <= 1e-6, "{m} avg={avg} m={shape}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn rayleigh_bpsk_matches_textbook() {
    let mut db = 20.0;
    while db <= 55.0 {
        let g = 10f64.powf(db / 10.0);
        let v = aber_from_cdf(Modulation::Bpsk, |x| rf::snr_cdf(x, g, 1.0), &spec()).unwrap();
        let t = 0.5 * (1.0 - (g / (1.0 + g)).sqrt());
        assert!((v - t).abs() <= 1e-6, "{db} dB: {v} vs {t}");
        db += 2.5;
    }
    let far = aber_from_cdf(Modulation::Bpsk, |x| rf::snr_cdf(x, 1e8, 1.0), &spec()).unwrap();
    assert!(far < 1e-6);
}

#[test]
fn rf_cdf_orders_by_shape() {
    let f: Vec<f64> = [0.5, 1.0, 2.0].iter().map(|&m| rf::snr_cdf(10.0, 100.0, m).unwrap()).collect();
    assert!(f[0] > f[1] && f[1] > f[2]);
    let x = 0.5f64;
    let half = rf::snr_cdf(100.0 * x / 0.5, 100.0, 0.5).unwrap();
    assert!((half - seaowc_core::special::erf(x.sqrt())).abs() < 1e-14);
}

#[test]
fn vanishing_threshold_gives_no_outage() {
    let mut c = cfg(Scenario::Sur);
    c.gamma_th_db = -300.0;
    let leg = c.scenario.legs()[0];
    let p = outage_probability(&c, leg, 30.0).unwrap();
    assert!(p < 1e-12, "{p}");
}

#[test]
fn reference_curves_are_monotone_and_bounded() {
    for s in Scenario::ALL {
        let c = ScenarioConfig {
            snr_grid: SnrGrid {
                min_db: 20.0,
                max_db: 55.0,
                step_db: 5.0,
            },
            ..cfg(s)
        };
        for curve in analyze(&c).unwrap() {
            let mut last = (1.0 + 1e-12, 0.5 + 1e-12);
            for p in &curve.points {
                assert!(p.outage <= last.0 + 1e-12 && p.aber <= last.1 + 1e-12, "{s} {:?}", p);
                assert!((0.0..=1.0).contains(&p.outage) && (0.0..=0.5).contains(&p.aber));
                last = (p.outage, p.aber);
            }
        }
    }
}

#[test]
fn retro_beats_direct_on_the_uplink_in_clear_weather() {
    let (sud, sur) = (cfg(Scenario::Sud), cfg(Scenario::Sur));
    let (ld, lr) = (sud.scenario.legs()[0], sur.scenario.legs()[0]);
    for db in SnrGrid::default().points() {
        let d = outage_probability(&sud, ld, db).unwrap();
        let r = outage_probability(&sur, lr, db).unwrap();
        assert!(r <= d + 1e-12, "{db} dB: RRS {r} vs DS {d}");
    }
}

#[test]
fn modulation_ordering_at_40_db() {
    let v = |m: Modulation| {
        let c = ScenarioConfig {
            modulation: m,
            ..cfg(Scenario::Sur)
        };
        aber(&c, c.scenario.legs()[0], 40.0).unwrap()
    };
    let (ook, bfsk, bpsk, dbpsk) = (v(Modulation::Ook), v(Modulation::Bfsk), v(Modulation::Bpsk), v(Modulation::Dbpsk));
    assert!(bpsk <= dbpsk && bpsk <= bfsk && bpsk <= ook, "{ook} {bfsk} {bpsk} {dbpsk}");
    assert!(dbpsk <= bfsk);
    // With the m = 1/2 RF hop dominating, the high-SNR averages behave as
    // Γ(p + m) / (2 Γ(p) Γ(m + 1)) (m / qγ)^m, which puts OOK (0.45/√γ)
    // just below BFSK (0.5/√γ).
    assert!(ook < bfsk);
}

#[test]
fn weather_orders_outage() {
    let leg = Scenario::Sur.legs()[0];
    for db in SnrGrid::default().points() {
        let o: Vec<f64> = [Weather::Clear, Weather::Snowy, Weather::Foggy]
            .iter()
            .map(|&w| {
                let mut c = cfg(Scenario::Sur);
                c.fso.weather = w;
                outage_probability(&c, leg, db).unwrap()
            })
            .collect();
        assert!(o[0] <= o[1] && o[1] <= o[2], "{db} dB: {o:?}");
        // clear and snowy can tie where the air hop is far from limiting
        if o[0] < 1.0 - 1e-9 {
            assert!(o[0] < o[2], "{db} dB: {o:?}");
        }
    }
}

#[test]
fn hop_offsets_shift_each_hop_independently() {
    let base = Chain::new(&cfg(Scenario::Sur)).unwrap();
    let shifted = Chain::new(&ScenarioConfig {
        hop_offsets: HopOffsets {
            uwoc_db: 10.0,
            fso_db: 0.0,
            rf_db: -10.0,
        },
        ..cfg(Scenario::Sur)
    })
    .unwrap();
    let leg = Scenario::Sur.legs()[0];
    let (a, b) = (base.hop_avg_snrs(leg, 30.0), shifted.hop_avg_snrs(leg, 30.0));
    assert!((b.uwoc / a.uwoc - 10.0).abs() < 1e-12);
    assert_eq!(b.fso, a.fso);
    assert!((b.rf / a.rf - 0.1).abs() < 1e-12);
}

#[test]
fn paper_engine_rows_are_clamped_or_annotated() {
    let c = ScenarioConfig {
        engine: Engine::Both,
        snr_grid: SnrGrid {
            min_db: 30.0,
            max_db: 50.0,
            step_db: 10.0,
        },
        ..cfg(Scenario::Sdd)
    };
    let curves = analyze(&c).unwrap();
    assert_eq!(curves.len(), 2);
    for curve in curves.iter().filter(|c| c.evaluator == Evaluator::Paper) {
        for p in &curve.points {
            if p.note.is_some() {
                assert!(p.outage.is_nan());
            } else {
                assert!((0.0..=1.0).contains(&p.outage) && (0.0..=0.5).contains(&p.aber));
            }
        }
    }
}

#[test]
fn config_rejects_unknown_names() {
    assert!("XYZ".parse::<Scenario>().is_err());
    assert!("qpsk".parse::<Modulation>().is_err());
    assert_eq!("bpsk".parse::<Modulation>().unwrap(), Modulation::Bpsk);
    assert_eq!("udr".parse::<Scenario>().unwrap(), Scenario::Udr);
    assert_eq!(Scenario::Udd.legs().len(), 2);
}
