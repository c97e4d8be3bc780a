//! The acceptance criteria as runnable checks. Each returns a verdict with
//! the measured numbers; tolerances and budgets are the constants below.

use crate::commands::cmd_simulate;
use crate::config::Config;
use crate::fidelity;
use seaowc_core::common::Weather;
use seaowc_core::fso::{self, bs_cdf, bs_pdf, Direction, FsoParams, Strategy};
use seaowc_core::montecarlo::{empirical_cdf_ks, ks_critical_1pct, simulate_points, McRun, McSettings};
use seaowc_core::performance::{
    aber, aber_from_cdf, conditional_bit_error, outage_probability, Modulation, Scenario, ScenarioConfig,
};
use seaowc_core::quadrature::{integrate, QuadratureSpec};
use seaowc_core::rf;
use seaowc_core::sampling::StreamRng;
use seaowc_core::special::{
    erfc, gamma, lower_incomplete_gamma, regularized_lower_gamma, std_normal_cdf, upper_incomplete_gamma,
};
use seaowc_core::tracking::{run_trials, TrackingConfig};
use seaowc_core::uwoc::{self, UwocParams};
use std::time::Instant;

pub const GOLDEN_REL_TOL: f64 = 1e-10;
pub const GOLDEN_MIN_POINTS: usize = 30;
pub const CDF_QUADRATURE_TOL: f64 = 1e-8;
pub const KS_COEFF: f64 = 1.63;
pub const KS_SAMPLES: usize = 100_000;
pub const MASS_TOL: f64 = 1e-6;
pub const ABER_IDENTITY_TOL: f64 = 1e-6;
pub const RAYLEIGH_TOL: f64 = 1e-6;
pub const MC_SAMPLES: u64 = 100_000;
pub const MC_POINTS_DB: [f64; 5] = [30.0, 35.0, 40.0, 45.0, 50.0];
pub const MC_SIGMAS: f64 = 3.0;
pub const WEATHER_RATIO_BAND: (f64, f64) = (20.0, 500.0);
pub const DISTANCE_GROWTH_MIN: f64 = 10.0;
pub const FINE_STEP_BAND: (f64, f64) = (78.0, 146.0);
pub const COARSE_STEP_TARGET: f64 = 6.0;
pub const COARSE_STEP_TOL: f64 = 2.0;
pub const TRACKING_TRIALS: usize = 500;
/// Seed of the per-hop sampler checks (streams 0-4).
pub const SAMPLER_SEED: u64 = 2024;

const GOLDEN: &str = include_str!("../../core/tests/data/golden.csv");

#[derive(Debug, Clone)]
pub struct Verdict {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    /// False for the report-only criterion.
    pub gating: bool,
    pub detail: String,
    pub seconds: f64,
    pub budget_s: f64,
}

impl Verdict {
    pub fn line(&self) -> String {
        let tag = match (self.passed, self.gating) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "NOTE",
        };
        format!(
            "{tag} {:>2} {} [{:.2} s / {} s]: {}",
            self.id, self.name, self.seconds, self.budget_s, self.detail
        )
    }
}

fn timed(id: u8, name: &'static str, budget_s: f64, f: impl FnOnce() -> (bool, String)) -> Verdict {
    let t = Instant::now();
    let (ok, detail) = f();
    let seconds = t.elapsed().as_secs_f64();
    let within = seconds <= budget_s;
    Verdict {
        id,
        name,
        passed: ok && within,
        gating: true,
        detail: if within { detail } else { format!("{detail}; over the time budget") },
        seconds,
        budget_s,
    }
}

fn tight() -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: 1e-13,
        rel_tol: 1e-11,
        max_subdivisions: 4000,
        infinite_tail_transform: true,
    }
}

fn aber_spec() -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: 1e-15,
        rel_tol: 1e-10,
        max_subdivisions: 4000,
        infinite_tail_transform: true,
    }
}

fn ks(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    empirical_cdf_ks(samples, cdf).unwrap_or(f64::INFINITY)
}

pub fn special_functions() -> Verdict {
    timed(1, "special functions vs 50-digit fixtures", 1.0, || {
        let (mut n, mut worst, mut bad) = (0, 0.0f64, Vec::new());
        for line in GOLDEN.lines().skip(1).filter(|l| !l.trim().is_empty()) {
            let f: Vec<&str> = line.split(',').collect();
            let a: f64 = f[1].parse().unwrap_or(f64::NAN);
            let b: f64 = f[2].parse().unwrap_or(f64::NAN);
            let want: f64 = f[3].parse().unwrap_or(f64::NAN);
            let got = match f[0] {
                "erfc" => Ok(erfc(a)),
                "normal_cdf" => Ok(std_normal_cdf(a)),
                "gamma" => Ok(gamma(a)),
                "upper_gamma" => upper_incomplete_gamma(a, b),
                "lower_gamma" => lower_incomplete_gamma(a, b),
                "regularized_lower" => regularized_lower_gamma(a, b),
                _ => continue,
            }
            .unwrap_or(f64::NAN);
            let err = if want == 0.0 { got.abs() } else { ((got - want) / want).abs() };
            n += 1;
            worst = worst.max(err);
            if !(err <= GOLDEN_REL_TOL) {
                bad.push(format!("{}({a}, {b})", f[0]));
            }
        }
        (
            bad.is_empty() && n >= GOLDEN_MIN_POINTS,
            format!("{n} points, worst relative error {worst:.2e}{}", if bad.is_empty() { String::new() } else { format!(", failing {}", bad.join(" ")) }),
        )
    })
}

pub fn distribution_exactness() -> Verdict {
    timed(2, "closed CDFs vs quadrature and sampling", 60.0, || {
        let mut rf_worst = 0.0f64;
        let mut n = 0;
        for m in [0.5, 1.0, 2.3, 4.0] {
            for (avg, g) in [(10.0, 0.3), (10.0, 4.0), (100.0, 50.0), (1e3, 2e3), (3.0, 30.0)] {
                let q = integrate(|x| rf::snr_pdf(x, avg, m), 0.0, g, &tight()).unwrap_or(f64::NAN);
                let c = rf::snr_cdf(g, avg, m).unwrap_or(f64::NAN);
                rf_worst = rf_worst.max((q - c).abs()).max(if q.is_nan() || c.is_nan() { f64::INFINITY } else { 0.0 });
                n += 1;
            }
        }
        let (a, b) = (0.6866, 0.8093);
        let mut bs_worst = 0.0f64;
        for t in [0.05, 0.1, 0.4, 0.8093, 1.3, 2.5, 6.0, 15.0] {
            let q = integrate(|u| bs_pdf(u, a, b), 0.0, t, &tight()).unwrap_or(f64::NAN);
            let closed = std_normal_cdf(((t / b).sqrt() - (b / t).sqrt()) / a);
            bs_worst = bs_worst.max((q - closed).abs()).max((bs_cdf(t, a, b) - closed).abs());
        }
        let d = fso::derive(&FsoParams::default()).expect("default air hop");
        let (au, ad) = (3.0, 5.0);
        let mut rng = StreamRng::new(2, 0);
        let pairs: Vec<(f64, f64)> = (0..KS_SAMPLES).map(|_| d.sample_rrs_pair(&mut rng, au, ad)).collect();
        let up: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let down: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let k_up = ks(&up, |g| d.rrs_snr_cdf(g, au, Direction::Uplink).unwrap_or(f64::NAN));
        let k_down = ks(&down, |g| d.rrs_snr_cdf(g, ad, Direction::Downlink).unwrap_or(f64::NAN));
        let limit = KS_COEFF / (KS_SAMPLES as f64).sqrt();
        let ok = rf_worst <= CDF_QUADRATURE_TOL && bs_worst <= CDF_QUADRATURE_TOL && k_up <= limit && k_down <= limit;
        (
            ok,
            format!(
                "RF {n} points max |diff| {rf_worst:.1e}; BS max |diff| {bs_worst:.1e}; retro KS up {k_up:.4} down {k_down:.4} (limit {limit:.4})"
            ),
        )
    })
}

pub fn reference_normalisation() -> Verdict {
    timed(3, "reference composite pdfs integrate to one", 60.0, || {
        let u = uwoc::derive(&UwocParams::default())
            .and_then(|d| d.reference_pdf_mass(&tight()))
            .unwrap_or(f64::NAN);
        let mut worst = (u - 1.0).abs();
        let mut parts = vec![format!("underwater {u:.9}")];
        for w in [Weather::Clear, Weather::Snowy, Weather::Foggy] {
            let m = fso::derive(&FsoParams {
                weather: w,
                ..Default::default()
            })
            .and_then(|d| d.ds_reference_pdf_mass(&tight()))
            .unwrap_or(f64::NAN);
            worst = worst.max((m - 1.0).abs());
            parts.push(format!("air {} {m:.9}", w.name()));
        }
        (worst <= MASS_TOL, parts.join(", "))
    })
}

pub fn sampler_agreement() -> Verdict {
    timed(4, "hop samplers vs reference CDFs (KS, 1%)", 120.0, || {
        let crit = ks_critical_1pct(KS_SAMPLES);
        let mut results: Vec<(String, f64)> = Vec::new();
        let u = uwoc::derive(&UwocParams::default()).expect("default underwater hop");
        let avg = 1.0 / u.gain_scale().powi(2);
        let mut rng = StreamRng::new(SAMPLER_SEED, 0);
        let v: Vec<f64> = (0..KS_SAMPLES).map(|_| u.sample_snr(&mut rng, avg)).collect();
        results.push(("underwater".into(), ks(&v, |g| u.snr_cdf_reference(g, avg).unwrap_or(f64::NAN))));
        let d = fso::derive(&FsoParams::default()).expect("default air hop");
        for (k, dir) in [Direction::Uplink, Direction::Downlink].into_iter().enumerate() {
            let avg = 1.0 / d.path_loss(dir).powi(2);
            let mut rng = StreamRng::new(SAMPLER_SEED, 1 + k as u64);
            let v: Vec<f64> = (0..KS_SAMPLES).map(|_| d.sample_ds_snr(&mut rng, avg, dir)).collect();
            results.push((
                format!("direct {}", dir.name()),
                ks(&v, |g| d.ds_snr_cdf_reference(g, avg, dir).unwrap_or(f64::NAN)),
            ));
        }
        let (au, ad) = (
            1.0 / d.path_loss(Direction::Uplink).powi(2),
            1.0 / d.path_loss(Direction::Downlink).powi(4),
        );
        let mut rng = StreamRng::new(SAMPLER_SEED, 3);
        let pairs: Vec<(f64, f64)> = (0..KS_SAMPLES).map(|_| d.sample_rrs_pair(&mut rng, au, ad)).collect();
        for (dir, avg) in [(Direction::Uplink, au), (Direction::Downlink, ad)] {
            let v: Vec<f64> = pairs.iter().map(|p| if dir == Direction::Uplink { p.0 } else { p.1 }).collect();
            results.push((
                format!("retro {}", dir.name()),
                ks(&v, |g| d.snr_cdf_reference(Strategy::RetroReflect, g, avg, dir).unwrap_or(f64::NAN)),
            ));
        }
        let mut rng = StreamRng::new(SAMPLER_SEED, 4);
        let v: Vec<f64> = (0..KS_SAMPLES).map(|_| rf::sample_snr(&mut rng, 100.0, 0.5).unwrap_or(f64::NAN)).collect();
        results.push(("rf".into(), ks(&v, |g| rf::snr_cdf(g, 100.0, 0.5).unwrap_or(f64::NAN))));
        let ok = results.iter().all(|(_, d)| *d <= crit);
        let detail = results.iter().map(|(n, d)| format!("{n} {d:.4}")).collect::<Vec<_>>().join(", ");
        (ok, format!("{detail} (critical {crit:.4})"))
    })
}

pub fn aber_identity() -> Verdict {
    timed(5, "ABER by parts equals the pdf average (RF hop)", 60.0, || {
        let mut worst = 0.0f64;
        for m in Modulation::ALL {
            for (avg, shape) in [(10.0, 0.5), (300.0, 1.0), (31.6, 2.2)] {
                let lhs = aber_from_cdf(m, |x| rf::snr_cdf(x, avg, shape), &aber_spec()).unwrap_or(f64::NAN);
                let rhs = integrate(
                    |x| rf::snr_pdf(x, avg, shape) * conditional_bit_error(m, x),
                    0.0,
                    f64::INFINITY,
                    &aber_spec(),
                )
                .unwrap_or(f64::NAN);
                let d = (lhs - rhs).abs();
                worst = if d.is_nan() { f64::INFINITY } else { worst.max(d) };
            }
        }
        (worst <= ABER_IDENTITY_TOL, format!("4 modulations x 3 settings, max |diff| {worst:.1e}"))
    })
}

pub fn rayleigh_cross_check() -> Verdict {
    timed(6, "Rayleigh BPSK textbook form", 10.0, || {
        let mut worst = 0.0f64;
        let mut db = 20.0;
        while db <= 55.0 + 1e-9 {
            let g = 10f64.powf(db / 10.0);
            let v = aber_from_cdf(Modulation::Bpsk, |x| rf::snr_cdf(x, g, 1.0), &aber_spec()).unwrap_or(f64::NAN);
            let t = 0.5 * (1.0 - (g / (1.0 + g)).sqrt());
            let d = (v - t).abs();
            worst = if d.is_nan() { f64::INFINITY } else { worst.max(d) };
            db += 2.5;
        }
        (worst <= RAYLEIGH_TOL, format!("20-55 dB, max |diff| {worst:.1e}"))
    })
}

pub fn end_to_end_mc() -> Verdict {
    timed(7, "end-to-end sampled vs analytic, all scenarios", 600.0, || {
        let mut flags = Vec::new();
        let mut worst = 0.0f64;
        for s in Scenario::ALL {
            let cfg = ScenarioConfig {
                scenario: s,
                ..Default::default()
            };
            let run = McRun {
                settings: McSettings {
                    samples: MC_SAMPLES,
                    seed: 7,
                    batch_size: 10_000,
                    workers: 0,
                },
                config: cfg.clone(),
            };
            let curves = match simulate_points(&run, &MC_POINTS_DB) {
                Ok(c) => c,
                Err(e) => return (false, format!("{s}: {e}")),
            };
            for c in &curves {
                for p in &c.points {
                    let (o, a) = match (
                        outage_probability(&cfg, c.leg, p.avg_snr_db),
                        aber(&cfg, c.leg, p.avg_snr_db),
                    ) {
                        (Ok(o), Ok(a)) => (o, a),
                        _ => return (false, format!("{s}: analytic evaluation failed")),
                    };
                    let se = 1.96 * (o * (1.0 - o) / p.outage.n as f64).sqrt();
                    let zo = if se > 0.0 { (p.outage.mean - o).abs() / se } else if p.outage.mean == o { 0.0 } else { f64::INFINITY };
                    let za = if p.aber.ci95 > 0.0 { (p.aber.mean - a).abs() / p.aber.ci95 } else if p.aber.mean == a { 0.0 } else { f64::INFINITY };
                    worst = worst.max(zo).max(za);
                    if zo > MC_SIGMAS || za > MC_SIGMAS {
                        flags.push(format!("{s} {} {} dB", c.leg.direction.name(), p.avg_snr_db));
                    }
                }
            }
        }
        (
            flags.is_empty(),
            format!(
                "6 scenarios x 5 points, N = {MC_SAMPLES}, worst |diff|/ci95 {worst:.2}{}",
                if flags.is_empty() { String::new() } else { format!(", outside: {}", flags.join("; ")) }
            ),
        )
    })
}

fn uplink_outage(s: Scenario, db: f64, edit: impl FnOnce(&mut ScenarioConfig)) -> f64 {
    let mut cfg = ScenarioConfig {
        scenario: s,
        ..Default::default()
    };
    edit(&mut cfg);
    outage_probability(&cfg, s.legs()[0], db).unwrap_or(f64::NAN)
}

pub fn orderings() -> Verdict {
    timed(8, "strategy and modulation ordering at 40 dB", 60.0, || {
        let sud = uplink_outage(Scenario::Sud, 40.0, |_| {});
        let sur = uplink_outage(Scenario::Sur, 40.0, |_| {});
        let sdd = uplink_outage(Scenario::Sdd, 40.0, |_| {});
        let sdr = uplink_outage(Scenario::Sdr, 40.0, |_| {});
        let abers: Vec<(Modulation, f64)> = Modulation::ALL
            .iter()
            .map(|&m| {
                let cfg = ScenarioConfig {
                    scenario: Scenario::Sur,
                    modulation: m,
                    ..Default::default()
                };
                (m, aber(&cfg, Scenario::Sur.legs()[0], 40.0).unwrap_or(f64::NAN))
            })
            .collect();
        let bpsk = abers.iter().find(|(m, _)| *m == Modulation::Bpsk).map_or(f64::NAN, |x| x.1);
        let bpsk_min = abers.iter().all(|&(_, v)| bpsk <= v);
        let ok = sur < sud && sdr < sdd && bpsk_min;
        let ab = abers.iter().map(|(m, v)| format!("{m} {v:.3e}")).collect::<Vec<_>>().join(", ");
        (
            ok,
            format!("SUR {sur:.3e} < SUD {sud:.3e}; SDR {sdr:.3e} < SDD {sdd:.3e}; SUR ABER {ab}"),
        )
    })
}

pub fn weather_distance_ratios() -> Verdict {
    timed(9, "weather and distance ratios at 45 dB", 60.0, || {
        let clear = uplink_outage(Scenario::Sur, 45.0, |_| {});
        let foggy = uplink_outage(Scenario::Sur, 45.0, |c| c.fso.weather = Weather::Foggy);
        let snowy = uplink_outage(Scenario::Sur, 45.0, |c| c.fso.weather = Weather::Snowy);
        let far = uplink_outage(Scenario::Sur, 45.0, |c| {
            c.uwoc.distance *= 2.0;
            c.fso.distance *= 2.0;
        });
        let weather = foggy / clear;
        let growth = far / clear;
        let ok = (WEATHER_RATIO_BAND.0..=WEATHER_RATIO_BAND.1).contains(&weather) && growth > DISTANCE_GROWTH_MIN;
        (
            ok,
            format!(
                "foggy/clear {weather:.1} (band [{}, {}]), snowy/clear {:.2}; doubled distances {clear:.2e} -> {far:.2e}, x{growth:.3e} (need > {DISTANCE_GROWTH_MIN})",
                WEATHER_RATIO_BAND.0,
                WEATHER_RATIO_BAND.1,
                snowy / clear
            ),
        )
    })
}

/// Builds the fidelity report; passes when the report could be produced.
pub fn fidelity_report() -> (Verdict, Option<String>) {
    let t = Instant::now();
    let r = fidelity::report();
    let seconds = t.elapsed().as_secs_f64();
    let (passed, detail, text) = match r {
        Ok((text, summary)) => (true, summary, Some(text)),
        Err(e) => (false, format!("report failed: {e}"), None),
    };
    (
        Verdict {
            id: 10,
            name: "closed-form fidelity report",
            passed,
            gating: false,
            detail,
            seconds,
            budget_s: 120.0,
        },
        text,
    )
}

pub fn tracking() -> Verdict {
    timed(11, "tracking step counts (500 trials)", 60.0, || {
        match run_trials(&TrackingConfig::default(), TRACKING_TRIALS, 1, 0) {
            Ok((s, _)) => (
                (FINE_STEP_BAND.0..=FINE_STEP_BAND.1).contains(&s.mean_fine_steps)
                    && (s.mean_coarse_steps - COARSE_STEP_TARGET).abs() <= COARSE_STEP_TOL,
                format!(
                    "mean fine {:.1} (band [{}, {}]), mean coarse {:.2} (target {COARSE_STEP_TARGET} +/- {COARSE_STEP_TOL}), aligned {:.3}",
                    s.mean_fine_steps, FINE_STEP_BAND.0, FINE_STEP_BAND.1, s.mean_coarse_steps, s.aligned_rate
                ),
            ),
            Err(e) => (false, e.to_string()),
        }
    })
}

pub fn determinism() -> Verdict {
    timed(12, "simulate output identical across runs and workers", 60.0, || {
        let cfg = Config::default();
        let scenarios = Scenario::ALL;
        let render = |workers: usize| -> Option<Vec<Vec<String>>> {
            cmd_simulate(&cfg, &scenarios, workers).ok().map(|(t, _)| t.rows)
        };
        let (a, b, c) = (render(1), render(8), render(8));
        let ok = a.is_some() && a == b && b == c;
        let flags = a
            .as_ref()
            .map_or(0, |rows| rows.iter().filter(|r| r.last().is_some_and(|f| f == "1")).count());
        (
            ok,
            format!(
                "{} rows, 1 vs 8 workers and repeat {}; rows flagged beyond 3 ci95: {flags}",
                a.as_ref().map_or(0, |r| r.len()),
                if ok { "identical" } else { "differ" }
            ),
        )
    })
}

/// Every criterion in order, plus the fidelity report text.
pub fn run_all() -> (Vec<Verdict>, Option<String>) {
    let mut v = vec![
        special_functions(),
        distribution_exactness(),
        reference_normalisation(),
        sampler_agreement(),
        aber_identity(),
        rayleigh_cross_check(),
        end_to_end_mc(),
        orderings(),
        weather_distance_ratios(),
    ];
    let (f, text) = fidelity_report();
    v.push(f);
    v.push(tracking());
    v.push(determinism());
    (v, text)
}
