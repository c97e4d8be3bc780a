//! End-to-end combining over the three decode-and-forward hops: outage
//! probability, per-hop and end-to-end average bit error rate.

use crate::error::{domain, Error, Result};
use crate::fso::{self, Direction, FsoDerived, FsoParams, Strategy};
use crate::quadrature::{integrate, QuadratureSpec};
use crate::rf::{self, RfParams};
use crate::special::{gamma, regularized_upper_gamma};
use crate::uwoc::{self, UwocDerived, UwocParams};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Distance to a pole below which the printed ABER closed forms are refused.
pub const CLOSED_FORM_POLE_GUARD: f64 = 1e-6;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

// ---------------------------------------------------------------------------
// Modulation

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Modulation {
    Ook,
    Bfsk,
    Bpsk,
    Dbpsk,
}

impl Modulation {
    pub const ALL: [Modulation; 4] = [Modulation::Ook, Modulation::Bfsk, Modulation::Bpsk, Modulation::Dbpsk];

    /// (p, q) in the conditional error probability Γ(p, qγ) / (2Γ(p)).
    pub fn params(self) -> (f64, f64) {
        match self {
            Modulation::Ook => (0.5, 0.25),
            Modulation::Bfsk => (1.0, 0.5),
            Modulation::Bpsk => (0.5, 1.0),
            Modulation::Dbpsk => (1.0, 1.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Modulation::Ook => "OOK",
            Modulation::Bfsk => "BFSK",
            Modulation::Bpsk => "BPSK",
            Modulation::Dbpsk => "DBPSK",
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Modulation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Modulation::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown modulation '{s}' (OOK, BFSK, BPSK, DBPSK)")))
    }
}

/// Bit error probability at instantaneous SNR γ.
pub fn conditional_bit_error(m: Modulation, snr: f64) -> f64 {
    if snr <= 0.0 {
        return 0.5;
    }
    let (p, q) = m.params();
    // p > 0 and qγ > 0 here, so this cannot fail
    0.5 * regularized_upper_gamma(p, q * snr).unwrap_or(f64::NAN)
}

// ---------------------------------------------------------------------------
// Scenarios

/// One FSO strategy/direction pairing evaluated end to end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Leg {
    pub strategy: Strategy,
    pub direction: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Scenario {
    Sud,
    Sur,
    Sdd,
    Sdr,
    Udd,
    Udr,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Sud,
        Scenario::Sur,
        Scenario::Sdd,
        Scenario::Sdr,
        Scenario::Udd,
        Scenario::Udr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Sud => "SUD",
            Scenario::Sur => "SUR",
            Scenario::Sdd => "SDD",
            Scenario::Sdr => "SDR",
            Scenario::Udd => "UDD",
            Scenario::Udr => "UDR",
        }
    }

    pub fn strategy(self) -> Strategy {
        match self {
            Scenario::Sud | Scenario::Sdd | Scenario::Udd => Strategy::Direct,
            _ => Strategy::RetroReflect,
        }
    }

    /// Simplex scenarios have one leg; duplex ones report both directions.
    pub fn legs(self) -> Vec<Leg> {
        let strategy = self.strategy();
        let dirs: &[Direction] = match self {
            Scenario::Sud | Scenario::Sur => &[Direction::Uplink],
            Scenario::Sdd | Scenario::Sdr => &[Direction::Downlink],
            Scenario::Udd | Scenario::Udr => &[Direction::Uplink, Direction::Downlink],
        };
        dirs.iter().map(|&direction| Leg { strategy, direction }).collect()
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown scenario '{s}' (SUD, SUR, SDD, SDR, UDD, UDR)")))
    }
}

// ---------------------------------------------------------------------------
// Engines and configuration

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Paper,
    #[default]
    Reference,
    Both,
}

impl Engine {
    pub fn evaluators(self) -> &'static [Evaluator] {
        match self {
            Engine::Paper => &[Evaluator::Paper],
            Engine::Reference => &[Evaluator::Reference],
            Engine::Both => &[Evaluator::Reference, Evaluator::Paper],
        }
    }
}

impl FromStr for Engine {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "paper" => Ok(Engine::Paper),
            "reference" => Ok(Engine::Reference),
            "both" => Ok(Engine::Both),
            _ => Err(Error::Config(format!("unknown engine '{s}' (paper, reference, both)"))),
        }
    }
}

/// A single evaluation path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Evaluator {
    /// Printed closed forms.
    Paper,
    /// Exact laws by quadrature.
    Reference,
}

impl Evaluator {
    pub fn name(self) -> &'static str {
        match self {
            Evaluator::Paper => "paper",
            Evaluator::Reference => "reference",
        }
    }
}

/// How the swept average SNR maps onto each hop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SnrReference {
    /// The swept value is the SNR a hop would see with the default
    /// clear-weather path gain; changing geometry or weather moves the
    /// curves relative to that link.
    #[default]
    DefaultLink,
    /// The swept value multiplies the raw gain directly.
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnrGrid {
    pub min_db: f64,
    pub max_db: f64,
    pub step_db: f64,
}

impl Default for SnrGrid {
    fn default() -> Self {
        SnrGrid {
            min_db: 20.0,
            max_db: 55.0,
            step_db: 2.5,
        }
    }
}

impl SnrGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_db.is_finite() && self.max_db.is_finite()) || self.max_db < self.min_db {
            return Err(Error::Config(format!(
                "SNR grid needs finite min <= max, got [{}, {}]",
                self.min_db, self.max_db
            )));
        }
        if !(self.step_db > 0.0) {
            return Err(Error::Config(format!("SNR step must be positive, got {}", self.step_db)));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.max_db - self.min_db) / self.step_db + 1e-9).floor() as usize;
        (0..=n).map(|i| self.min_db + i as f64 * self.step_db).collect()
    }
}

/// Per-hop shifts added to the swept average SNR, dB.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HopOffsets {
    pub uwoc_db: f64,
    pub fso_db: f64,
    pub rf_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub modulation: Modulation,
    pub engine: Engine,
    /// Outage threshold, dB.
    pub gamma_th_db: f64,
    pub snr_grid: SnrGrid,
    pub snr_reference: SnrReference,
    pub hop_offsets: HopOffsets,
    /// Number of sensor nodes sharing the underwater hop by wavelength.
    pub sensors: usize,
    pub uwoc: UwocParams,
    pub fso: FsoParams,
    pub rf: RfParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            scenario: Scenario::Sud,
            modulation: Modulation::Bpsk,
            engine: Engine::Reference,
            gamma_th_db: 0.0,
            snr_grid: SnrGrid::default(),
            snr_reference: SnrReference::DefaultLink,
            hop_offsets: HopOffsets::default(),
            sensors: 10,
            uwoc: UwocParams::default(),
            fso: FsoParams::default(),
            rf: RfParams::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.gamma_th_db.is_finite() {
            return Err(Error::Config("gamma_th_db must be finite".into()));
        }
        self.snr_grid.validate()?;
        if self.sensors == 0 {
            return Err(Error::Config("sensors must be at least 1".into()));
        }
        let o = &self.hop_offsets;
        if !(o.uwoc_db.is_finite() && o.fso_db.is_finite() && o.rf_db.is_finite()) {
            return Err(Error::Config("hop offsets must be finite".into()));
        }
        Ok(())
    }

    pub fn gamma_th(&self) -> f64 {
        db_to_linear(self.gamma_th_db)
    }
}

// ---------------------------------------------------------------------------
// Hop chain

/// Linear average SNR handed to each hop's law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopSnrs {
    pub uwoc: f64,
    pub fso: f64,
    pub rf: f64,
}

/// Derived parameters of the three hops plus the SNR mapping.
#[derive(Debug, Clone)]
pub struct Chain {
    pub uwoc: UwocDerived,
    pub fso: FsoDerived,
    pub rf: RfParams,
    pub quadrature: QuadratureSpec,
    reference: SnrReference,
    offsets: HopOffsets,
    uwoc_ref: f64,
    fso_ref: [f64; 2],
}

fn aber_spec() -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: 1e-15,
        rel_tol: 1e-9,
        max_subdivisions: 4000,
        infinite_tail_transform: true,
    }
}

impl Chain {
    pub fn new(cfg: &ScenarioConfig) -> Result<Chain> {
        cfg.validate()?;
        cfg.rf.validate()?;
        let fso_default = FsoParams {
            convention: cfg.fso.convention,
            ..FsoParams::default()
        };
        Ok(Chain {
            uwoc: uwoc::derive(&cfg.uwoc)?,
            fso: fso::derive(&cfg.fso)?,
            rf: cfg.rf.clone(),
            quadrature: aber_spec(),
            reference: cfg.snr_reference,
            offsets: cfg.hop_offsets,
            uwoc_ref: uwoc::path_loss(&UwocParams::default())?,
            fso_ref: [
                fso::path_loss(&fso_default, Direction::Uplink)?,
                fso::path_loss(&fso_default, Direction::Downlink)?,
            ],
        })
    }

    fn fso_ref(&self, dir: Direction) -> f64 {
        match dir {
            Direction::Uplink => self.fso_ref[0],
            Direction::Downlink => self.fso_ref[1],
        }
    }

    /// Per-hop linear average SNRs for one swept value.
    pub fn hop_avg_snrs(&self, leg: Leg, avg_snr_db: f64) -> HopSnrs {
        let g = db_to_linear(avg_snr_db);
        let n = self.fso.snr_power(leg.strategy, leg.direction);
        let (nu, nf) = match self.reference {
            SnrReference::DefaultLink => (self.uwoc_ref.powi(2), self.fso_ref(leg.direction).powi(n)),
            SnrReference::Absolute => (1.0, 1.0),
        };
        let reflect = if leg.strategy == Strategy::RetroReflect && self.fso.index(leg.direction) == 2 {
            self.fso.reflection_gain
        } else {
            1.0
        };
        HopSnrs {
            uwoc: g * db_to_linear(self.offsets.uwoc_db) / nu,
            fso: g * db_to_linear(self.offsets.fso_db) / nf * reflect,
            rf: g * db_to_linear(self.offsets.rf_db) * self.rf.snr_scale(),
        }
    }

    /// Per-hop SNR CDFs at `snr`. Paper values are returned unclamped.
    pub fn hop_cdfs(&self, leg: Leg, ev: Evaluator, snr: f64, s: &HopSnrs) -> Result<[f64; 3]> {
        let m = self.rf.nakagami_m;
        let u = match ev {
            Evaluator::Reference => self.uwoc.snr_cdf_reference(snr, s.uwoc)?,
            Evaluator::Paper => self.uwoc.snr_cdf_paper(snr, s.uwoc),
        };
        let f = match (ev, leg.strategy) {
            (Evaluator::Paper, Strategy::Direct) => self.fso.ds_snr_cdf_paper(snr, s.fso, leg.direction)?,
            _ => self.fso.snr_cdf_reference(leg.strategy, snr, s.fso, leg.direction)?,
        };
        let r = rf::snr_cdf(snr, s.rf, m)?;
        Ok([u, f, r])
    }

    /// Per-hop ABERs. Paper values are returned unclamped.
    pub fn hop_abers(&self, leg: Leg, ev: Evaluator, modulation: Modulation, s: &HopSnrs) -> Result<[f64; 3]> {
        let (p, q) = modulation.params();
        let m = self.rf.nakagami_m;
        match ev {
            Evaluator::Reference => Ok([
                self.aber_from_cdf(modulation, |x| self.uwoc.snr_cdf_reference(x, s.uwoc))?,
                self.aber_from_cdf(modulation, |x| {
                    self.fso.snr_cdf_reference(leg.strategy, x, s.fso, leg.direction)
                })?,
                self.aber_from_cdf(modulation, |x| rf::snr_cdf(x, s.rf, m))?,
            ]),
            Evaluator::Paper => {
                let g = CLOSED_FORM_POLE_GUARD;
                let f = match leg.strategy {
                    Strategy::Direct => self.fso.ds_aber_paper(p, q, s.fso, leg.direction, g)?,
                    Strategy::RetroReflect => self.fso.rrs_aber_paper(p, q, s.fso, leg.direction, g)?,
                };
                Ok([self.uwoc.aber_paper(p, q, s.uwoc), f, rf::aber_paper(p, q, s.rf, m)])
            }
        }
    }

    /// q^p/(2Γ(p)) ∫ e^{-qγ} γ^{p-1} F(γ) dγ, integrated in w = (qγ)^p so
    /// the γ^{p-1} singularity disappears.
    pub fn aber_from_cdf<F: Fn(f64) -> Result<f64>>(&self, modulation: Modulation, cdf: F) -> Result<f64> {
        aber_from_cdf(modulation, cdf, &self.quadrature)
    }
}

/// See [`Chain::aber_from_cdf`].
pub fn aber_from_cdf<F: Fn(f64) -> Result<f64>>(
    modulation: Modulation,
    cdf: F,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let (p, q) = modulation.params();
    let inv_p = 1.0 / p;
    let mut failure: Option<Error> = None;
    let v = integrate(
        |w: f64| {
            if w <= 0.0 {
                return 0.0;
            }
            let x = w.powf(inv_p);
            match cdf(x / q) {
                Ok(f) => (-x).exp() * f,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        f64::INFINITY,
        spec,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(v / (2.0 * gamma(p + 1.0)))
}

/// 1 - Π(1 - F_i): CDF of the smallest of three independent hop SNRs.
pub fn end_to_end_cdf(f: [f64; 3]) -> Result<f64> {
    for v in f {
        if !(0.0..=1.0).contains(&v) {
            return domain(format!("hop CDF value {v} outside [0, 1]"));
        }
    }
    Ok(1.0 - (1.0 - f[0]) * (1.0 - f[1]) * (1.0 - f[2]))
}

/// A bit survives three decode-and-forward hops when an even number of
/// them flip it.
pub fn end_to_end_aber(p: [f64; 3]) -> Result<f64> {
    for v in p {
        if !(0.0..=1.0).contains(&v) {
            return domain(format!("hop error probability {v} outside [0, 1]"));
        }
    }
    Ok(0.5 * ((2.0 * p[0] - 1.0) * (2.0 * p[1] - 1.0) * (2.0 * p[2] - 1.0) + 1.0))
}

/// Clamps a paper-path probability into [0, hi], counting adjustments.
/// NaN passes through.
fn clamp_counted(v: f64, hi: f64, count: &mut usize) -> f64 {
    if v.is_nan() {
        return v;
    }
    if v < 0.0 || v > hi {
        *count += 1;
        v.clamp(0.0, hi)
    } else {
        v
    }
}

// ---------------------------------------------------------------------------
// Sweeps

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointResult {
    pub avg_snr_db: f64,
    pub outage: f64,
    pub aber: f64,
    pub hop_outage: [f64; 3],
    pub hop_aber: [f64; 3],
    /// Set when a paper-path value could not be produced.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub scenario: Scenario,
    pub leg: Leg,
    pub evaluator: Evaluator,
    pub points: Vec<PointResult>,
    /// Paper-path values pulled back into range.
    pub clamped: usize,
}

/// Outage and ABER at one grid point. Paper-path values are clamped
/// (CDFs to [0, 1], ABERs to [0, 0.5]) and the adjustments counted.
pub fn evaluate_point(
    chain: &Chain,
    leg: Leg,
    ev: Evaluator,
    modulation: Modulation,
    gamma_th: f64,
    avg_snr_db: f64,
    clamped: &mut usize,
) -> Result<PointResult> {
    let s = chain.hop_avg_snrs(leg, avg_snr_db);
    let mut cdfs = chain.hop_cdfs(leg, ev, gamma_th, &s)?;
    let mut abers = chain.hop_abers(leg, ev, modulation, &s)?;
    let mut local = 0;
    for v in cdfs.iter_mut() {
        *v = clamp_counted(*v, 1.0, &mut local);
    }
    for v in abers.iter_mut() {
        *v = clamp_counted(*v, 0.5, &mut local);
    }
    // reference values only stray by rounding, so only paper clamps count
    if ev == Evaluator::Paper {
        *clamped += local;
    }
    if cdfs.iter().chain(abers.iter()).any(|v| v.is_nan()) {
        return Ok(PointResult {
            avg_snr_db,
            outage: f64::NAN,
            aber: f64::NAN,
            hop_outage: cdfs,
            hop_aber: abers,
            note: Some("closed form not finite".into()),
        });
    }
    Ok(PointResult {
        avg_snr_db,
        outage: end_to_end_cdf(cdfs)?,
        aber: end_to_end_aber(abers)?,
        hop_outage: cdfs,
        hop_aber: abers,
        note: None,
    })
}

/// Outage probability of one leg at one swept SNR (reference engine).
pub fn outage_probability(cfg: &ScenarioConfig, leg: Leg, avg_snr_db: f64) -> Result<f64> {
    let chain = Chain::new(cfg)?;
    let s = chain.hop_avg_snrs(leg, avg_snr_db);
    let f = chain.hop_cdfs(leg, Evaluator::Reference, cfg.gamma_th(), &s)?;
    end_to_end_cdf(f.map(|v| v.clamp(0.0, 1.0)))
}

/// End-to-end ABER of one leg at one swept SNR (reference engine).
pub fn aber(cfg: &ScenarioConfig, leg: Leg, avg_snr_db: f64) -> Result<f64> {
    let chain = Chain::new(cfg)?;
    let s = chain.hop_avg_snrs(leg, avg_snr_db);
    let p = chain.hop_abers(leg, Evaluator::Reference, cfg.modulation, &s)?;
    end_to_end_aber(p.map(|v| v.clamp(0.0, 0.5)))
}

/// Every leg of the configured scenario under every configured evaluator.
/// Paper-path failures (pole proximity and the like) become NaN points with
/// a note; reference-path failures abort.
pub fn analyze(cfg: &ScenarioConfig) -> Result<Vec<Curve>> {
    let chain = Chain::new(cfg)?;
    let grid = cfg.snr_grid.points();
    let gamma_th = cfg.gamma_th();
    let mut out = Vec::new();
    for leg in cfg.scenario.legs() {
        for &ev in cfg.engine.evaluators() {
            let results: Vec<Result<(PointResult, usize)>> = std::thread::scope(|sc| {
                let handles: Vec<_> = grid
                    .iter()
                    .map(|&db| {
                        let chain = &chain;
                        sc.spawn(move || {
                            let mut c = 0;
                            evaluate_point(chain, leg, ev, cfg.modulation, gamma_th, db, &mut c).map(|p| (p, c))
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("grid worker panicked")).collect()
            });
            let mut points = Vec::with_capacity(grid.len());
            let mut clamped = 0;
            for (r, &db) in results.into_iter().zip(&grid) {
                match (r, ev) {
                    (Ok((p, c)), _) => {
                        clamped += c;
                        points.push(p);
                    }
                    (Err(e), Evaluator::Paper) => points.push(PointResult {
                        avg_snr_db: db,
                        outage: f64::NAN,
                        aber: f64::NAN,
                        hop_outage: [f64::NAN; 3],
                        hop_aber: [f64::NAN; 3],
                        note: Some(format!("{e}; use the reference engine")),
                    }),
                    (Err(e), Evaluator::Reference) => return Err(e),
                }
            }
            out.push(Curve {
                scenario: cfg.scenario,
                leg,
                evaluator: ev,
                points,
                clamped,
            });
        }
    }
    Ok(out)
}
