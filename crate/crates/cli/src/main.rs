use clap::{Args, Parser, Subcommand};
use seaowc_cli::acceptance;
use seaowc_cli::commands::{self, CliError};
use seaowc_cli::config::Config;
use seaowc_cli::output::{emit, RunManifest};
use seaowc_core::common::Weather;
use seaowc_core::performance::{Engine, Modulation, Scenario};
use std::path::PathBuf;
use std::process::ExitCode;

/// Outage, error-rate and tracking runs for the sensor/AUV/UAV/AP relay
/// chain. Settings resolve as defaults < config file < SEAOWC_* environment
/// < command-line flags.
#[derive(Parser)]
#[command(name = "seaowc", version)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Command {
    /// Outage and ABER over the SNR grid.
    Analyze,
    /// Analysis columns plus Monte-Carlo estimates and agreement flags.
    Simulate,
    /// Acquisition and tracking trials; step log as CSV, summary as text.
    Track,
    /// Wavelength plan for K sensors (default: analysis.sensors).
    Allocate {
        #[arg(allow_negative_numbers = true)]
        k: Option<i64>,
    },
    /// Run the acceptance criteria and write the fidelity report.
    Accept,
}

#[derive(Clone, Debug)]
struct Selection(Vec<Scenario>);

fn parse_selection(s: &str) -> Result<Selection, String> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(Selection(Scenario::ALL.to_vec()));
    }
    s.parse::<Scenario>().map(|v| Selection(vec![v])).map_err(|e| e.to_string())
}

fn parse_from_str<T: std::str::FromStr<Err = seaowc_core::Error>>(s: &str) -> Result<T, String> {
    s.parse::<T>().map_err(|e| e.to_string())
}

#[derive(Args)]
struct Common {
    /// TOML config; missing fields take the built-in defaults.
    #[arg(long, global = true, env = "SEAOWC_CONFIG")]
    config: Option<PathBuf>,
    /// Output file; a .manifest.json and a .gp script are written next to it.
    /// Without it the CSV goes to stdout.
    #[arg(long, global = true, env = "SEAOWC_OUTPUT")]
    output: Option<PathBuf>,
    /// SUD, SUR, SDD, SDR, UDD, UDR or all.
    #[arg(long, global = true, env = "SEAOWC_SCENARIO", value_parser = parse_selection)]
    scenario: Option<Selection>,
    /// clear, snowy or foggy.
    #[arg(long, global = true, env = "SEAOWC_WEATHER", value_parser = parse_from_str::<Weather>)]
    weather: Option<Weather>,
    /// OOK, BFSK, BPSK or DBPSK.
    #[arg(long, global = true, env = "SEAOWC_MODULATION", value_parser = parse_from_str::<Modulation>)]
    modulation: Option<Modulation>,
    /// paper, reference or both.
    #[arg(long, global = true, env = "SEAOWC_ENGINE", value_parser = parse_from_str::<Engine>)]
    engine: Option<Engine>,
    #[arg(long, global = true, env = "SEAOWC_SNR_MIN_DB", allow_negative_numbers = true)]
    snr_min_db: Option<f64>,
    #[arg(long, global = true, env = "SEAOWC_SNR_MAX_DB", allow_negative_numbers = true)]
    snr_max_db: Option<f64>,
    #[arg(long, global = true, env = "SEAOWC_SNR_STEP_DB")]
    snr_step_db: Option<f64>,
    #[arg(long, global = true, env = "SEAOWC_GAMMA_TH_DB", allow_negative_numbers = true)]
    gamma_th_db: Option<f64>,
    /// Monte-Carlo samples per grid point.
    #[arg(long, global = true, env = "SEAOWC_SAMPLES")]
    samples: Option<u64>,
    /// Seed for both the Monte-Carlo and the tracking runs.
    #[arg(long, global = true, env = "SEAOWC_SEED")]
    seed: Option<u64>,
    /// Tracking trials.
    #[arg(long, global = true, env = "SEAOWC_TRIALS")]
    trials: Option<usize>,
    /// Worker threads (0: one per core). Results do not depend on it.
    #[arg(long, global = true, env = "SEAOWC_WORKERS", default_value_t = 0)]
    workers: usize,
    /// Print the resolved config as TOML and exit.
    #[arg(long, global = true)]
    dump_defaults: bool,
}

impl Common {
    fn resolve(&self) -> Result<Config, CliError> {
        let mut c = match &self.config {
            Some(p) => Config::load(p).map_err(|e| CliError::Config(e.0))?,
            None => Config::default(),
        };
        let a = &mut c.analysis;
        if let Some(Selection(v)) = &self.scenario {
            if let [one] = v.as_slice() {
                a.scenario = *one;
            }
        }
        if let Some(w) = self.weather {
            a.fso.weather = w;
        }
        if let Some(m) = self.modulation {
            a.modulation = m;
        }
        if let Some(e) = self.engine {
            a.engine = e;
        }
        if let Some(v) = self.snr_min_db {
            a.snr_grid.min_db = v;
        }
        if let Some(v) = self.snr_max_db {
            a.snr_grid.max_db = v;
        }
        if let Some(v) = self.snr_step_db {
            a.snr_grid.step_db = v;
        }
        if let Some(v) = self.gamma_th_db {
            a.gamma_th_db = v;
        }
        if let Some(v) = self.samples {
            c.monte_carlo.samples = v;
        }
        if let Some(v) = self.seed {
            c.monte_carlo.seed = v;
            c.track.seed = v;
        }
        if let Some(v) = self.trials {
            c.track.trials = v;
        }
        c.validate().map_err(|e| CliError::Config(e.0))?;
        Ok(c)
    }

    fn scenarios(&self, c: &Config) -> Vec<Scenario> {
        match &self.scenario {
            Some(Selection(v)) => v.clone(),
            None => vec![c.analysis.scenario],
        }
    }
}

fn io(e: std::io::Error) -> CliError {
    CliError::Config(format!("cannot write output: {e}"))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let common = &cli.common;
    let cfg = common.resolve()?;
    if common.dump_defaults {
        let text = cfg.to_toml();
        return match &common.output {
            Some(p) => std::fs::write(p, text).map_err(io),
            None => {
                print!("{text}");
                Ok(())
            }
        };
    }
    let Some(command) = cli.command else {
        return Err(CliError::Config("no subcommand given (analyze, simulate, track, allocate, accept)".into()));
    };
    let out = common.output.as_deref();
    let path = common.config.as_deref();
    match command {
        Command::Analyze => {
            let (t, plot) = commands::cmd_analyze(&cfg, &common.scenarios(&cfg))?;
            emit(out, &RunManifest::new("analyze", path, None, &cfg), &t, Some(&plot)).map_err(io)
        }
        Command::Simulate => {
            let (t, plot) = commands::cmd_simulate(&cfg, &common.scenarios(&cfg), common.workers)?;
            let mut m = RunManifest::new("simulate", path, Some(cfg.monte_carlo.seed), &cfg);
            m.workers = Some(common.workers);
            emit(out, &m, &t, Some(&plot)).map_err(io)
        }
        Command::Track => {
            let (t, plot, summary) = commands::cmd_track(&cfg, common.workers)?;
            let mut m = RunManifest::new("track", path, Some(cfg.track.seed), &cfg);
            m.workers = Some(common.workers);
            emit(out, &m, &t, Some(&plot)).map_err(io)?;
            let text = commands::summary_lines(&summary);
            if out.is_some() {
                print!("{text}");
            } else {
                eprint!("{text}");
            }
            Ok(())
        }
        Command::Allocate { k } => {
            let k = k.unwrap_or(cfg.analysis.sensors as i64);
            let (t, plot) = commands::cmd_allocate(k)?;
            emit(out, &RunManifest::new("allocate", path, None, &cfg), &t, Some(&plot)).map_err(io)
        }
        Command::Accept => {
            let (verdicts, report) = acceptance::run_all();
            for v in &verdicts {
                println!("{}", v.line());
            }
            if let Some(text) = report {
                let p = out.map_or_else(|| PathBuf::from("reports/fidelity.md"), PathBuf::from);
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir).map_err(io)?;
                }
                std::fs::write(&p, text).map_err(io)?;
                println!("fidelity report: {}", p.display());
            }
            let failed = verdicts.iter().filter(|v| v.gating && !v.passed).count();
            if failed > 0 {
                return Err(CliError::Acceptance(failed));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("seaowc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
