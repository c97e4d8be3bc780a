//! The subcommands as functions from a resolved config to a table.

use crate::config::Config;
use crate::output::{sci, Plot, Table};
use seaowc_core::common::allocate_wavelengths;
use seaowc_core::montecarlo::{simulate, McRun, McSettings};
use seaowc_core::performance::{analyze, Curve, Engine, Evaluator, Scenario, ScenarioConfig};
use seaowc_core::tracking::{run_trials, Outcome, TrialSummary};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
    Acceptance(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Acceptance(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric error: {m}"),
            CliError::Acceptance(n) => write!(f, "{n} acceptance criteria failed"),
        }
    }
}

/// Core errors are numeric unless they are about the configuration.
pub fn from_core(op: &str, e: seaowc_core::Error) -> CliError {
    match e {
        seaowc_core::Error::Config(m) => CliError::Config(m),
        e => CliError::Numeric(format!("{op}: {e}")),
    }
}

fn with_scenario(cfg: &ScenarioConfig, s: Scenario) -> ScenarioConfig {
    ScenarioConfig {
        scenario: s,
        ..cfg.clone()
    }
}

fn rel_dev(paper: f64, reference: f64) -> String {
    if paper.is_nan() {
        String::new()
    } else if reference == 0.0 {
        if paper == 0.0 { sci(0.0) } else { "inf".into() }
    } else {
        sci((paper - reference) / reference)
    }
}

const ANALYZE_COLUMNS: [&str; 9] =
    ["scenario", "direction", "strategy", "weather", "modulation", "snr_db", "outage", "aber", "engine"];

fn analyze_curves(cfg: &Config, scenarios: &[Scenario]) -> Result<Vec<Curve>, CliError> {
    let mut all = Vec::new();
    for &s in scenarios {
        all.extend(analyze(&with_scenario(&cfg.analysis, s)).map_err(|e| from_core("analyze", e))?);
    }
    Ok(all)
}

fn base_row(cfg: &ScenarioConfig, c: &Curve, i: usize) -> Vec<String> {
    let p = &c.points[i];
    vec![
        c.scenario.name().into(),
        c.leg.direction.name().into(),
        match c.leg.strategy {
            seaowc_core::fso::Strategy::Direct => "direct".into(),
            seaowc_core::fso::Strategy::RetroReflect => "retro-reflect".into(),
        },
        cfg.fso.weather.name(),
        cfg.modulation.name().into(),
        format!("{}", p.avg_snr_db),
        sci(p.outage),
        sci(p.aber),
        c.evaluator.name().into(),
    ]
}

/// Outage and ABER over the SNR grid. With both engines each point has a
/// reference row and a paper row; the paper row carries the relative
/// deviation from the reference.
pub fn cmd_analyze(cfg: &Config, scenarios: &[Scenario]) -> Result<(Table, Plot), CliError> {
    let both = cfg.analysis.engine == Engine::Both;
    let mut cols = ANALYZE_COLUMNS.to_vec();
    if both {
        cols.extend(["outage_deviation", "aber_deviation"]);
    }
    cols.push("note");
    let mut t = Table::new(cols);
    let curves = analyze_curves(cfg, scenarios)?;
    // curves come as (leg: reference, paper) pairs when both run
    let step = if both { 2 } else { 1 };
    for group in curves.chunks(step) {
        for i in 0..group[0].points.len() {
            for c in group {
                let mut row = base_row(&cfg.analysis, c, i);
                let p = &c.points[i];
                if both {
                    if c.evaluator == Evaluator::Paper {
                        let r = &group[0].points[i];
                        row.push(rel_dev(p.outage, r.outage));
                        row.push(rel_dev(p.aber, r.aber));
                    } else {
                        row.extend([String::new(), String::new()]);
                    }
                }
                row.push(p.note.clone().unwrap_or_default());
                t.rows.push(row);
            }
        }
    }
    Ok((t, analyze_plot()))
}

fn analyze_plot() -> Plot {
    Plot {
        x: "snr_db",
        panels: vec![("outage", "outage probability", true), ("aber", "ABER", true)],
        keys: vec!["scenario", "direction", "engine"],
        xlabel: "average SNR (dB)",
    }
}

/// Reference-engine rows with the sampled estimates next to them. `flag`
/// is 1 where the two differ by more than three interval half-widths; the
/// outage interval uses the analytic value's binomial spread so that a
/// zero count still gets a usable width.
pub fn cmd_simulate(cfg: &Config, scenarios: &[Scenario], workers: usize) -> Result<(Table, Plot), CliError> {
    let mut cols = ANALYZE_COLUMNS.to_vec();
    cols.extend(["outage_mc", "outage_ci95", "aber_mc", "aber_ci95", "samples", "flag"]);
    let mut t = Table::new(cols);
    let settings = McSettings {
        samples: cfg.monte_carlo.samples,
        seed: cfg.monte_carlo.seed,
        batch_size: cfg.monte_carlo.batch_size,
        workers,
    };
    for &s in scenarios {
        let sc = ScenarioConfig {
            engine: Engine::Reference,
            ..with_scenario(&cfg.analysis, s)
        };
        let analytic = analyze(&sc).map_err(|e| from_core("analyze", e))?;
        let mc = simulate(&McRun {
            settings,
            config: sc.clone(),
        })
        .map_err(|e| from_core("simulate", e))?;
        for (c, m) in analytic.iter().zip(&mc) {
            for (i, (p, q)) in c.points.iter().zip(&m.points).enumerate() {
                let mut row = base_row(&sc, c, i);
                let n = q.outage.n as f64;
                let se_out = 1.96 * (p.outage * (1.0 - p.outage) / n).sqrt();
                let flag = (q.outage.mean - p.outage).abs() > 3.0 * se_out
                    || (q.aber.mean - p.aber).abs() > 3.0 * q.aber.ci95;
                row.extend([
                    sci(q.outage.mean),
                    sci(q.outage.ci95),
                    sci(q.aber.mean),
                    sci(q.aber.ci95),
                    q.outage.n.to_string(),
                    (flag as u8).to_string(),
                ]);
                t.rows.push(row);
            }
        }
    }
    let plot = Plot {
        panels: vec![
            ("outage", "outage probability", true),
            ("outage_mc", "outage (sampled)", true),
            ("aber", "ABER", true),
            ("aber_mc", "ABER (sampled)", true),
        ],
        ..analyze_plot()
    };
    Ok((t, plot))
}

/// Step log of every trial plus the run summary.
pub fn cmd_track(cfg: &Config, workers: usize) -> Result<(Table, Plot, TrialSummary), CliError> {
    let (summary, runs) = run_trials(&cfg.tracking, cfg.track.trials, cfg.track.seed, workers)
        .map_err(|e| from_core("track", e))?;
    let mut t = Table::new(vec![
        "trial", "cycle", "step", "phase", "x_cm", "y_cm", "q1", "q2", "q3", "q4", "e_x", "e_y", "outcome",
    ]);
    for (trial, r) in runs.iter().enumerate() {
        for (k, c) in r.cycles.iter().enumerate() {
            let outcome = match c.outcome {
                Outcome::Aligned => "aligned",
                Outcome::CycleExhausted => "cycle_exhausted",
            };
            if c.log.is_empty() {
                t.rows.push(vec![
                    (trial + 1).to_string(),
                    (k + 1).to_string(),
                    "0".into(),
                    String::new(),
                    format!("{}", c.final_beam.x_cm),
                    format!("{}", c.final_beam.y_cm),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    format!("{}", c.final_errors.0),
                    format!("{}", c.final_errors.1),
                    outcome.into(),
                ]);
            }
            for s in &c.log {
                let mut row = vec![
                    (trial + 1).to_string(),
                    (k + 1).to_string(),
                    s.step.to_string(),
                    s.phase.name().into(),
                    format!("{}", s.x_cm),
                    format!("{}", s.y_cm),
                ];
                row.extend(s.quadrants.iter().map(|q| format!("{q}")));
                row.extend([format!("{}", s.e_x), format!("{}", s.e_y), outcome.into()]);
                t.rows.push(row);
            }
        }
    }
    let plot = Plot {
        x: "step",
        panels: vec![("e_x", "e_x", false), ("e_y", "e_y", false)],
        keys: vec!["trial", "cycle"],
        xlabel: "fine step",
    };
    Ok((t, plot, summary))
}

pub fn summary_lines(s: &TrialSummary) -> String {
    format!(
        "trials={}\nmean_coarse_steps={}\nmean_fine_steps={}\naligned_rate={}\ncycle_exhausted={}\nfallbacks={}\n",
        s.trials, s.mean_coarse_steps, s.mean_fine_steps, s.aligned_rate, s.exhausted_cycles, s.fallbacks
    )
}

pub fn cmd_allocate(k: i64) -> Result<(Table, Plot), CliError> {
    if k <= 0 {
        return Err(CliError::Config(format!("number of sensors must be positive, got {k}")));
    }
    let mut t = Table::new(vec!["k", "wavelength_nm"]);
    for (i, w) in allocate_wavelengths(k as usize).into_iter().enumerate() {
        t.rows.push(vec![(i + 1).to_string(), format!("{w}")]);
    }
    let plot = Plot {
        x: "k",
        panels: vec![("wavelength_nm", "wavelength (nm)", false)],
        keys: vec![],
        xlabel: "sensor",
    };
    Ok((t, plot))
}
