//! Geometric simulation of AUV-UAV acquisition: a coarse sweep of the
//! beam pointing angle, then fine tracking on a quadrant photodiode (QPD).
//!
//! The QPD is a square grid of sample points centred on the origin. A beam
//! spot lights every sample point inside its disc; the count per quadrant
//! stands in for the quadrant power. Fine tracking walks a pointer outward
//! on a square spiral until it lands inside the spot, walks the lit points
//! to measure the spot, then steps the steering mirror one fine step at a
//! time against the sign of the larger tracking error.

use crate::error::{Error, Result};
use crate::montecarlo::run_batches;
use rand::Rng;
use serde::{Deserialize, Serialize};

const IN_DISC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QpdGrid {
    pub side_cm: f64,
    pub pitch_cm: f64,
}

impl Default for QpdGrid {
    fn default() -> Self {
        QpdGrid {
            side_cm: 40.0,
            pitch_cm: 2.0,
        }
    }
}

impl QpdGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.pitch_cm > 0.0) || !(self.side_cm > 0.0) {
            return Err(Error::Config("QPD side and pitch must be positive".into()));
        }
        let n = self.side_cm / self.pitch_cm;
        if (n - n.round()).abs() > 1e-9 {
            return Err(Error::Config("QPD side must be a multiple of the pitch".into()));
        }
        Ok(())
    }

    /// Points per axis.
    pub fn per_axis(&self) -> usize {
        (self.side_cm / self.pitch_cm).round() as usize + 1
    }

    pub fn sample_points(&self) -> usize {
        self.per_axis().pow(2)
    }

    fn coord(&self, i: usize) -> f64 {
        -self.side_cm / 2.0 + i as f64 * self.pitch_cm
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.per_axis();
        (0..n).flat_map(move |i| (0..n).map(move |j| (self.coord(i), self.coord(j))))
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let h = self.side_cm / 2.0 + IN_DISC_TOL;
        x.abs() <= h && y.abs() <= h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSpot {
    pub x_cm: f64,
    pub y_cm: f64,
    pub radius_cm: f64,
}

impl BeamSpot {
    pub fn covers(&self, x: f64, y: f64) -> bool {
        let (dx, dy) = (x - self.x_cm, y - self.y_cm);
        dx * dx + dy * dy <= self.radius_cm * self.radius_cm + IN_DISC_TOL
    }
}

/// Share of a lit point per quadrant (Q1 = +x+y, Q2 = -x+y, Q3 = -x-y,
/// Q4 = +x-y). A point on an axis is split evenly between the two
/// quadrants it borders and the origin a quarter to each, which keeps a
/// centred spot balanced.
pub fn quadrant_share(x: f64, y: f64) -> [f64; 4] {
    let sx = if x.abs() < IN_DISC_TOL { 0 } else if x > 0.0 { 1 } else { -1 };
    let sy = if y.abs() < IN_DISC_TOL { 0 } else if y > 0.0 { 1 } else { -1 };
    let wx = |s: i32| match (sx, s) {
        (0, _) => 0.5,
        (a, b) if a == b => 1.0,
        _ => 0.0,
    };
    let wy = |s: i32| match (sy, s) {
        (0, _) => 0.5,
        (a, b) if a == b => 1.0,
        _ => 0.0,
    };
    [wx(1) * wy(1), wx(-1) * wy(1), wx(-1) * wy(-1), wx(1) * wy(-1)]
}

/// Lit sample points per quadrant.
pub fn quadrant_powers(grid: &QpdGrid, beam: &BeamSpot) -> [f64; 4] {
    let mut q = [0.0; 4];
    for (x, y) in grid.points() {
        if beam.covers(x, y) {
            let s = quadrant_share(x, y);
            for i in 0..4 {
                q[i] += s[i];
            }
        }
    }
    q
}

/// Signed tracking errors (e_x, e_y) in [-1, 1].
pub fn tracking_errors(q: [f64; 4]) -> Result<(f64, f64)> {
    let t: f64 = q.iter().sum();
    if !(t > 0.0) {
        return Err(Error::NoSignal);
    }
    Ok((((q[0] + q[3]) - (q[1] + q[2])) / t, ((q[0] + q[1]) - (q[2] + q[3])) / t))
}

/// Position after `k` moves of a unit square spiral starting at the origin
/// (right 1, up 1, left 2, down 2, right 3, ...).
pub fn square_spiral(k: usize) -> (i64, i64) {
    let (mut x, mut y) = (0i64, 0i64);
    let dirs = [(1, 0), (0, 1), (-1, 0), (0, -1)];
    let (mut left, mut leg, mut d, mut len) = (k, 0usize, 0usize, 1usize);
    while left > 0 {
        let n = left.min(len);
        x += dirs[d].0 * n as i64;
        y += dirs[d].1 * n as i64;
        left -= n;
        d = (d + 1) % 4;
        leg += 1;
        if leg % 2 == 0 {
            len += 1;
        }
    }
    (x, y)
}

/// Threshold ε to the ratio r_s / w_z used in the link budget. Only the
/// three tabulated thresholds are known; nothing is interpolated.
pub fn rs_over_wz(eps: f64) -> Option<f64> {
    [(0.0, 0.84), (0.1, 0.88), (0.2, 0.91)]
        .into_iter()
        .find(|(e, _)| (e - eps).abs() < 1e-12)
        .map(|(_, v)| v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackingConfig {
    pub grid: QpdGrid,
    pub beam_radius_cm: f64,
    /// Initial spot centres are grid points within this distance of the
    /// centre along each axis.
    pub start_limit_cm: f64,
    /// Fixed centre of the first spot, cm, instead of a random draw.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_spot_cm: Option<(f64, f64)>,
    pub psi_min: f64,
    pub psi_max: f64,
    pub delta_psi: f64,
    /// AUV-UAV distance, m.
    pub distance_m: f64,
    /// Half-width of the beam footprint at the AUV, m.
    pub footprint_half_width_m: f64,
    /// Length of the AUV over which the lens offset is drawn, m.
    pub auv_length_m: f64,
    pub eps_x: f64,
    pub eps_y: f64,
    pub fine_step_cm: f64,
    /// Locate and measure the spot with the scanning pointer before the
    /// mirror moves. Off: the mirror spirals only while the QPD is dark.
    pub pointer_scan: bool,
    pub max_fine_steps: usize,
    pub max_cycles: usize,
    /// Coarse re-acquisitions allowed in one acquisition run.
    pub max_fallbacks: usize,
}

impl Default for TrackingConfig {
    fn default() -> Self {
        let (d, half_len, wz) = (1500.0f64, 12.5f64, 1.25f64);
        TrackingConfig {
            grid: QpdGrid::default(),
            beam_radius_cm: 4.0,
            start_limit_cm: 16.0,
            first_spot_cm: None,
            psi_min: -(half_len / d).atan(),
            psi_max: (half_len / d).atan(),
            delta_psi: 2.0 * (wz / d).atan(),
            distance_m: d,
            footprint_half_width_m: wz,
            auv_length_m: 2.0 * half_len,
            eps_x: 0.0,
            eps_y: 0.0,
            fine_step_cm: 2.0,
            pointer_scan: true,
            max_fine_steps: 441,
            max_cycles: 10,
            max_fallbacks: 100,
        }
    }
}

impl TrackingConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if !(self.delta_psi > 0.0) {
            return Err(Error::Config(format!("delta_psi must be positive, got {}", self.delta_psi)));
        }
        if !(self.psi_min < self.psi_max) {
            return Err(Error::Config("psi_min must be below psi_max".into()));
        }
        if !(self.eps_x >= 0.0 && self.eps_y >= 0.0) {
            return Err(Error::Config("tracking thresholds must be non-negative".into()));
        }
        if !(self.beam_radius_cm > 0.0 && self.fine_step_cm > 0.0 && self.distance_m > 0.0) {
            return Err(Error::Config(
                "beam radius, fine step and distance must be positive".into(),
            ));
        }
        if self.max_cycles == 0 {
            return Err(Error::Config("max_cycles must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Coarse,
    Search,
    Measure,
    Descend,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Coarse => "coarse",
            Phase::Search => "search",
            Phase::Measure => "measure",
            Phase::Descend => "descend",
        }
    }
}

/// One logged step. (x, y) is the pointer while searching and measuring,
/// the spot centre while descending.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub x_cm: f64,
    pub y_cm: f64,
    pub quadrants: [f64; 4],
    pub e_x: f64,
    pub e_y: f64,
    pub phase: Phase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Aligned,
    CycleExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrackingResult {
    pub coarse_steps: usize,
    pub fine_steps: usize,
    pub final_errors: (f64, f64),
    pub final_beam: BeamSpot,
    pub log: Vec<StepRecord>,
    pub outcome: Outcome,
}

fn errors_or_nan(q: [f64; 4]) -> (f64, f64) {
    tracking_errors(q).unwrap_or((f64::NAN, f64::NAN))
}

fn within(cfg: &TrackingConfig, e: (f64, f64)) -> bool {
    e.0.abs() <= cfg.eps_x && e.1.abs() <= cfg.eps_y
}

/// Lit points on the pointer lattice (multiples of `step`), in snake order:
/// rows bottom to top, alternating direction.
fn measure_route(grid: &QpdGrid, beam: &BeamSpot, step: f64) -> Vec<(i64, i64)> {
    let mut pts: Vec<(i64, i64)> = grid
        .points()
        .filter(|&(x, y)| beam.covers(x, y))
        .filter_map(|(x, y)| {
            let (i, j) = ((x / step).round(), (y / step).round());
            ((i * step - x).abs() < 1e-9 && (j * step - y).abs() < 1e-9).then_some((i as i64, j as i64))
        })
        .collect();
    pts.sort_by_key(|&(i, j)| (j, if j.rem_euclid(2) == 0 { i } else { -i }));
    pts
}

struct Tracker<'a> {
    cfg: &'a TrackingConfig,
    beam: BeamSpot,
    q: [f64; 4],
    e: (f64, f64),
    steps: usize,
    log: Vec<StepRecord>,
}

impl Tracker<'_> {
    fn budget_left(&self) -> bool {
        self.steps < self.cfg.max_fine_steps
    }

    fn record(&mut self, x: f64, y: f64, phase: Phase) {
        self.steps += 1;
        self.log.push(StepRecord {
            step: self.steps,
            x_cm: x,
            y_cm: y,
            quadrants: self.q,
            e_x: self.e.0,
            e_y: self.e.1,
            phase,
        });
    }

    fn finish(self, outcome: Outcome) -> TrackingResult {
        TrackingResult {
            coarse_steps: 0,
            fine_steps: self.steps,
            final_errors: self.e,
            final_beam: self.beam,
            log: self.log,
            outcome,
        }
    }

    /// Walks the pointer from `from` to `to` one lattice step at a time,
    /// x first. False if the step budget ran out.
    fn walk(&mut self, from: (i64, i64), to: (i64, i64), phase: Phase) -> bool {
        let step = self.cfg.fine_step_cm;
        let (mut i, mut j) = from;
        while (i, j) != to {
            if !self.budget_left() {
                return false;
            }
            if i != to.0 {
                i += (to.0 - i).signum();
            } else {
                j += (to.1 - j).signum();
            }
            self.record(i as f64 * step, j as f64 * step, phase);
        }
        true
    }

    fn moved(&self, axis: usize) -> (BeamSpot, [f64; 4], (f64, f64)) {
        let mut b = self.beam;
        let step = self.cfg.fine_step_cm;
        if axis == 0 {
            b.x_cm -= step * self.e.0.signum();
        } else {
            b.y_cm -= step * self.e.1.signum();
        }
        let q = quadrant_powers(&self.cfg.grid, &b);
        (b, q, errors_or_nan(q))
    }
}

/// Fine tracking from `initial`. A spot that already meets the thresholds
/// costs nothing; otherwise every logged step moves the pointer or the spot
/// by exactly one fine step.
pub fn fine_track(cfg: &TrackingConfig, initial: BeamSpot) -> Result<TrackingResult> {
    cfg.validate()?;
    let grid = &cfg.grid;
    let step = cfg.fine_step_cm;
    let q = quadrant_powers(grid, &initial);
    let mut t = Tracker {
        cfg,
        beam: initial,
        q,
        e: errors_or_nan(q),
        steps: 0,
        log: Vec::new(),
    };

    if t.e.0.is_finite() && within(cfg, t.e) {
        return Ok(t.finish(Outcome::Aligned));
    }

    if cfg.pointer_scan {
        // Search: outward square spiral until the pointer is inside the spot.
        let mut k = 0usize;
        let found = loop {
            let (i, j) = square_spiral(k);
            let (px, py) = (i as f64 * step, j as f64 * step);
            if grid.contains(px, py) && t.beam.covers(px, py) {
                break (i, j);
            }
            if !t.budget_left() {
                return Ok(t.finish(Outcome::CycleExhausted));
            }
            k += 1;
            let (i, j) = square_spiral(k);
            t.record(i as f64 * step, j as f64 * step, Phase::Search);
        };

        // Measure: visit every lit lattice point of the spot.
        let mut at = found;
        for p in measure_route(grid, &t.beam, step) {
            if !t.walk(at, p, Phase::Measure) {
                return Ok(t.finish(Outcome::CycleExhausted));
            }
            at = p;
        }
    } else {
        // Dark QPD: the mirror walks the spot along the spiral.
        let origin = t.beam;
        let mut k = 0usize;
        while t.e.0.is_nan() {
            if !t.budget_left() {
                return Ok(t.finish(Outcome::CycleExhausted));
            }
            k += 1;
            let (i, j) = square_spiral(k);
            t.beam.x_cm = origin.x_cm + i as f64 * step;
            t.beam.y_cm = origin.y_cm + j as f64 * step;
            t.q = quadrant_powers(grid, &t.beam);
            t.e = errors_or_nan(t.q);
            t.record(t.beam.x_cm, t.beam.y_cm, Phase::Search);
        }
    }

    // Descend: one axis per step, the one with the larger error (x on
    // ties). A step that would undo the previous one means the spot sits
    // between two lattice positions; the other axis is tried, then the
    // descent stops.
    let mut prev: Option<(f64, f64)> = None;
    loop {
        if t.e.0.is_nan() {
            return Err(Error::NoSignal);
        }
        if within(cfg, t.e) {
            return Ok(t.finish(Outcome::Aligned));
        }
        if !t.budget_left() {
            return Ok(t.finish(Outcome::CycleExhausted));
        }
        let over_x = t.e.0.abs() > cfg.eps_x;
        let over_y = t.e.1.abs() > cfg.eps_y;
        let first = if over_x && (!over_y || t.e.0.abs() >= t.e.1.abs()) { 0 } else { 1 };
        let chosen = [first, 1 - first]
            .into_iter()
            .filter(|&axis| if axis == 0 { over_x } else { over_y })
            .map(|axis| t.moved(axis))
            .find(|(b, _, _)| {
                prev.is_none_or(|(px, py)| (b.x_cm - px).abs() > 1e-9 || (b.y_cm - py).abs() > 1e-9)
            });
        let Some((b, q, e)) = chosen else {
            return Ok(t.finish(Outcome::CycleExhausted));
        };
        prev = Some((t.beam.x_cm, t.beam.y_cm));
        t.beam = b;
        t.q = q;
        t.e = e;
        t.record(b.x_cm, b.y_cm, Phase::Descend);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoarseOutcome {
    /// Index of the sweep angle whose footprint covers the AUV lens.
    Caught(usize),
    /// The sweep reached ψ_max without covering the lens.
    NotCaught,
}

/// Number of sweep angles after ψ_min; the last one is clamped to ψ_max.
pub fn sweep_steps(cfg: &TrackingConfig) -> usize {
    ((cfg.psi_max - cfg.psi_min) / cfg.delta_psi - 1e-9).ceil() as usize
}

/// Sweeps ψ_i = min(ψ_min + iΔψ, ψ_max) and reports the first footprint
/// [d tan ψ_i - w, d tan ψ_i + w] containing `offset_m`.
pub fn coarse_track(cfg: &TrackingConfig, offset_m: f64) -> Result<CoarseOutcome> {
    cfg.validate()?;
    for i in 0..=sweep_steps(cfg) {
        let psi = (cfg.psi_min + i as f64 * cfg.delta_psi).min(cfg.psi_max);
        let centre = cfg.distance_m * psi.tan();
        if (centre - offset_m).abs() <= cfg.footprint_half_width_m + 1e-9 {
            return Ok(CoarseOutcome::Caught(i));
        }
    }
    Ok(CoarseOutcome::NotCaught)
}

/// Random spot placed on a grid point inside the start window.
pub fn random_spot<R: Rng + ?Sized>(rng: &mut R, cfg: &TrackingConfig) -> BeamSpot {
    let k = (cfg.start_limit_cm / cfg.grid.pitch_cm + 1e-9).floor() as i64;
    let x = rng.random_range(-k..=k) as f64 * cfg.grid.pitch_cm;
    let y = rng.random_range(-k..=k) as f64 * cfg.grid.pitch_cm;
    BeamSpot {
        x_cm: x,
        y_cm: y,
        radius_cm: cfg.beam_radius_cm,
    }
}

/// Spot displacements seen at the start of each data stream, cm. An
/// empty list is a static AUV with a single stream.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Motion {
    pub shifts: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcquisitionResult {
    /// n₀ of every coarse pass, the first one included.
    pub coarse: Vec<usize>,
    /// One entry per fine cycle, in order.
    pub cycles: Vec<TrackingResult>,
    /// Coarse passes triggered by max_cycles misaligned fine cycles.
    pub fallbacks: usize,
    pub aligned: bool,
}

impl AcquisitionResult {
    pub fn total_fine_steps(&self) -> usize {
        self.cycles.iter().map(|c| c.fine_steps).sum()
    }
}

fn coarse_pass<R: Rng + ?Sized>(rng: &mut R, cfg: &TrackingConfig) -> Result<usize> {
    // a miss means the AUV drifted out of the sweep; draw a new offset
    let mut spent = 0;
    for _ in 0..1000 {
        let half = cfg.auv_length_m / 2.0;
        let x = rng.random_range(-half..=half);
        match coarse_track(cfg, x)? {
            CoarseOutcome::Caught(n) => return Ok(spent + n),
            CoarseOutcome::NotCaught => spent += sweep_steps(cfg) + 1,
        }
    }
    Err(Error::Convergence {
        what: "coarse acquisition",
        estimate: spent as f64,
        error_estimate: f64::NAN,
    })
}

/// Coarse pass, then fine cycles per data stream. After `max_cycles`
/// consecutive misaligned cycles the run falls back to a coarse pass and a
/// fresh spot.
pub fn run_acquisition<R: Rng + ?Sized>(
    rng: &mut R,
    cfg: &TrackingConfig,
    motion: &Motion,
) -> Result<AcquisitionResult> {
    cfg.validate()?;
    let mut res = AcquisitionResult {
        coarse: vec![coarse_pass(rng, cfg)?],
        cycles: Vec::new(),
        fallbacks: 0,
        aligned: false,
    };
    let mut beam = match cfg.first_spot_cm {
        Some((x_cm, y_cm)) => BeamSpot {
            x_cm,
            y_cm,
            radius_cm: cfg.beam_radius_cm,
        },
        None => random_spot(rng, cfg),
    };
    let streams = motion.shifts.len().max(1);
    for s in 0..streams {
        if let Some(&(dx, dy)) = motion.shifts.get(s) {
            beam.x_cm += dx;
            beam.y_cm += dy;
        }
        let mut misaligned = 0;
        loop {
            let r = fine_track(cfg, beam)?;
            beam = r.final_beam;
            let ok = r.outcome == Outcome::Aligned;
            res.cycles.push(r);
            if ok {
                break;
            }
            misaligned += 1;
            if misaligned == cfg.max_cycles {
                if res.fallbacks == cfg.max_fallbacks {
                    return Ok(res);
                }
                res.fallbacks += 1;
                res.coarse.push(coarse_pass(rng, cfg)?);
                beam = random_spot(rng, cfg);
                misaligned = 0;
            }
        }
    }
    res.aligned = true;
    Ok(res)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialSummary {
    pub trials: usize,
    pub mean_coarse_steps: f64,
    pub mean_fine_steps: f64,
    pub aligned_rate: f64,
    pub exhausted_cycles: usize,
    pub fallbacks: usize,
}

/// Independent static-AUV acquisitions, trial t drawing from stream (seed, t).
pub fn run_trials(
    cfg: &TrackingConfig,
    trials: usize,
    seed: u64,
    workers: usize,
) -> Result<(TrialSummary, Vec<AcquisitionResult>)> {
    if trials == 0 {
        return Err(Error::Config("at least one tracking trial is needed".into()));
    }
    let results = run_batches(trials as u64, 1, seed, workers.max(1), |_, rng, _| {
        run_acquisition(rng, cfg, &Motion::default())
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let n = trials as f64;
    let summary = TrialSummary {
        trials,
        mean_coarse_steps: results.iter().map(|r| r.coarse.iter().sum::<usize>() as f64).sum::<f64>() / n,
        mean_fine_steps: results.iter().map(|r| r.total_fine_steps() as f64).sum::<f64>() / n,
        aligned_rate: results.iter().filter(|r| r.aligned).count() as f64 / n,
        exhausted_cycles: results
            .iter()
            .flat_map(|r| &r.cycles)
            .filter(|c| c.outcome == Outcome::CycleExhausted)
            .count(),
        fallbacks: results.iter().map(|r| r.fallbacks).sum(),
    };
    Ok((summary, results))
}
