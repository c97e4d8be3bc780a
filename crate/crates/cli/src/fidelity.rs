//! Markdown report comparing the printed closed forms with the reference
//! evaluations of the same quantities.

use seaowc_core::fso::{Direction, Strategy};
use seaowc_core::performance::{analyze, Chain, Engine, Evaluator, Leg, Modulation, Scenario, ScenarioConfig, SnrGrid};
use seaowc_core::quadrature::{integrate, QuadratureSpec};
use seaowc_core::Result;
use std::fmt::Write;

const PDF_POINTS: [f64; 10] = [0.01, 0.05, 0.1, 0.3, 0.5, 0.8, 0.95, 1.0, 1.2, 2.0];
const SNR_DB: [f64; 8] = [20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0, 55.0];

fn g(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:.4e}")
    }
}

fn ratio(p: f64, r: f64) -> String {
    if p.is_nan() || r.is_nan() || r == 0.0 {
        "-".into()
    } else {
        let q = p / r;
        if (1e-3..1e4).contains(&q.abs()) {
            format!("{q:.4}")
        } else {
            format!("{q:.3e}")
        }
    }
}

struct Tally {
    rows: usize,
    worst_log_ratio: f64,
}

impl Tally {
    fn add(&mut self, p: f64, r: f64) {
        self.rows += 1;
        if p > 0.0 && r > 0.0 {
            self.worst_log_ratio = self.worst_log_ratio.max((p / r).log10().abs());
        }
    }
}

fn header(out: &mut String, title: &str, cols: &[&str]) {
    let _ = write!(out, "\n## {title}\n\n| {} |\n|{}\n", cols.join(" | "), "---|".repeat(cols.len()));
}

fn mass_spec() -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: 1e-13,
        rel_tol: 1e-9,
        max_subdivisions: 4000,
        infinite_tail_transform: true,
    }
}

/// Returns the report text and a one-line summary.
pub fn report() -> Result<(String, String)> {
    let cfg = ScenarioConfig::default();
    let chain = Chain::new(&cfg)?;
    let gamma_th = cfg.gamma_th();
    let mut t = Tally {
        rows: 0,
        worst_log_ratio: 0.0,
    };
    let mut out = String::from(
        "# Closed-form fidelity\n\n\
         Printed closed forms (\"paper\" engine) against the reference evaluation of the same quantity \
         (quadrature of the exact laws). Default parameters, BPSK, threshold 0 dB. Ratios are paper / reference; \
         `-` marks a zero or undefined reference. Regenerate with `seaowc accept`.\n",
    );

    // underwater gain pdf
    let u = &chain.uwoc;
    let hmax = u.gain_scale();
    header(&mut out, "Underwater gain pdf", &["h / (h_l h_0)", "paper", "reference", "ratio"]);
    for x in PDF_POINTS {
        let (p, r) = (u.pdf_paper(x * hmax), u.pdf_reference(x * hmax)?);
        t.add(p, r);
        let _ = writeln!(out, "| {x} | {} | {} | {} |", g(p), g(r), ratio(p, r));
    }
    // in units of h_l h_0 so the integrand is O(1)
    let pm = integrate(|x| hmax * u.pdf_paper(x * hmax), 0.0, f64::INFINITY, &mass_spec()).unwrap_or(f64::NAN);
    let rm = u.reference_pdf_mass(&mass_spec())?;
    let _ = writeln!(out, "\nTotal mass: paper {}, reference {}.", g(pm), g(rm));

    // underwater SNR CDF
    let leg_of = |strategy, direction| Leg { strategy, direction };
    let up = leg_of(Strategy::Direct, Direction::Uplink);
    header(&mut out, "Underwater SNR CDF at the threshold", &["SNR (dB)", "paper", "reference", "ratio"]);
    for db in SNR_DB {
        let s = chain.hop_avg_snrs(up, db);
        let (p, r) = (u.snr_cdf_paper(gamma_th, s.uwoc), u.snr_cdf_reference(gamma_th, s.uwoc)?);
        t.add(p, r);
        let _ = writeln!(out, "| {db} | {} | {} | {} |", g(p), g(r), ratio(p, r));
    }

    // air direct pdf and CDF
    let f = &chain.fso;
    for dir in [Direction::Uplink, Direction::Downlink] {
        let imax = f.pointing.cap * f.path_loss(dir);
        header(
            &mut out,
            &format!("Air direct-link gain pdf, {}", dir.name()),
            &["I / (I_l I_0)", "paper", "reference", "ratio"],
        );
        for x in PDF_POINTS {
            let p = f.ds_pdf_paper(x * imax, dir).unwrap_or(f64::NAN);
            let r = f.ds_pdf_reference(x * imax, dir)?;
            t.add(p, r);
            let _ = writeln!(out, "| {x} | {} | {} | {} |", g(p), g(r), ratio(p, r));
        }
        let leg = leg_of(Strategy::Direct, dir);
        header(
            &mut out,
            &format!("Air direct-link SNR CDF at the threshold, {}", dir.name()),
            &["SNR (dB)", "paper", "reference", "ratio"],
        );
        for db in SNR_DB {
            let s = chain.hop_avg_snrs(leg, db);
            let p = f.ds_snr_cdf_paper(gamma_th, s.fso, dir).unwrap_or(f64::NAN);
            let r = f.ds_snr_cdf_reference(gamma_th, s.fso, dir)?;
            t.add(p, r);
            let _ = writeln!(out, "| {db} | {} | {} | {} |", g(p), g(r), ratio(p, r));
        }
    }

    // per-hop ABER closed forms
    let legs = [
        ("direct uplink", leg_of(Strategy::Direct, Direction::Uplink)),
        ("direct downlink", leg_of(Strategy::Direct, Direction::Downlink)),
        ("retro uplink", leg_of(Strategy::RetroReflect, Direction::Uplink)),
        ("retro downlink", leg_of(Strategy::RetroReflect, Direction::Downlink)),
    ];
    header(
        &mut out,
        "Per-hop ABER, BPSK",
        &["hop", "SNR (dB)", "paper", "reference", "ratio"],
    );
    for db in SNR_DB {
        for (i, &(name, leg)) in legs.iter().enumerate() {
            let s = chain.hop_avg_snrs(leg, db);
            let p = chain
                .hop_abers(leg, Evaluator::Paper, Modulation::Bpsk, &s)
                .unwrap_or([f64::NAN; 3]);
            let r = chain.hop_abers(leg, Evaluator::Reference, Modulation::Bpsk, &s)?;
            // the underwater and RF hops do not depend on the air leg
            let hops: Vec<(String, usize)> = if i == 0 {
                vec![("underwater".into(), 0), (format!("air {name}"), 1), ("rf".into(), 2)]
            } else {
                vec![(format!("air {name}"), 1)]
            };
            for (label, k) in hops {
                t.add(p[k], r[k]);
                let _ = writeln!(out, "| {label} | {db} | {} | {} | {} |", g(p[k]), g(r[k]), ratio(p[k], r[k]));
            }
        }
    }

    // clamps in the end-to-end paper curves
    header(
        &mut out,
        "End-to-end paper curves over 20-55 dB",
        &["scenario", "leg", "points", "clamped values", "undefined points"],
    );
    let mut clamps = 0;
    for s in Scenario::ALL {
        let c = ScenarioConfig {
            scenario: s,
            engine: Engine::Paper,
            snr_grid: SnrGrid::default(),
            ..cfg.clone()
        };
        for curve in analyze(&c)? {
            let undefined = curve.points.iter().filter(|p| p.note.is_some()).count();
            clamps += curve.clamped;
            let _ = writeln!(
                out,
                "| {s} | {} | {} | {} | {undefined} |",
                curve.leg.direction.name(),
                curve.points.len(),
                curve.clamped
            );
        }
    }
    let summary = format!(
        "{} compared values, worst |log10 ratio| {:.1}, {clamps} clamped end-to-end paper values",
        t.rows, t.worst_log_ratio
    );
    let _ = writeln!(out, "\nSummary: {summary}.");
    Ok((out, summary))
}
