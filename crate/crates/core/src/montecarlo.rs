//! Sampling estimates of outage and ABER with confidence intervals.
//!
//! Work is cut into batches of fixed size; batch b draws from the stream
//! (seed, b) and batch results are reduced in index order, so estimates do
//! not depend on the worker count. One set of channel draws is shared by
//! every grid point of a run.

use crate::error::{domain, Error, Result};
use crate::fso::Strategy;
use crate::performance::{conditional_bit_error, end_to_end_aber, Chain, HopSnrs, Leg, ScenarioConfig, Scenario};
use crate::rf;
use crate::sampling::StreamRng;
use serde::{Deserialize, Serialize};

const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSettings {
    pub samples: u64,
    pub seed: u64,
    pub batch_size: u64,
    /// Worker threads; 0 means one per available core. Does not affect results.
    pub workers: usize,
}

impl Default for McSettings {
    fn default() -> Self {
        McSettings {
            samples: 100_000,
            seed: 1,
            batch_size: 10_000,
            workers: 0,
        }
    }
}

impl McSettings {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 || self.batch_size == 0 {
            return Err(Error::Config("samples and batch_size must be positive".into()));
        }
        Ok(())
    }

    fn worker_count(&self) -> usize {
        if self.workers > 0 {
            self.workers
        } else {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    /// Half-width of the 95% interval.
    pub ci95: f64,
    pub n: u64,
}

impl McEstimate {
    /// Bernoulli proportion with the normal-approximation interval.
    pub fn proportion(hits: u64, n: u64) -> McEstimate {
        let p = hits as f64 / n as f64;
        McEstimate {
            mean: p,
            ci95: Z95 * (p * (1.0 - p) / n as f64).sqrt(),
            n,
        }
    }

    /// Sample mean from a sum and a sum of squares.
    pub fn from_moments(sum: f64, sum_sq: f64, n: u64) -> McEstimate {
        let nf = n as f64;
        let mean = sum / nf;
        let var = if n > 1 {
            ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0)
        } else {
            0.0
        };
        McEstimate {
            mean,
            ci95: Z95 * (var / nf).sqrt(),
            n,
        }
    }
}

/// Runs `f(batch_index, rng, batch_len)` over all batches on `workers`
/// threads and returns the results in batch order.
pub fn run_batches<T, F>(samples: u64, batch_size: u64, seed: u64, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut StreamRng, u64) -> T + Sync,
{
    let batches = samples.div_ceil(batch_size);
    let len = |b: u64| batch_size.min(samples - b * batch_size);
    let workers = workers.clamp(1, batches.max(1) as usize);
    let mut slots: Vec<Option<T>> = (0..batches).map(|_| None).collect();
    std::thread::scope(|sc| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let f = &f;
                sc.spawn(move || {
                    let mut out = Vec::new();
                    let mut b = w as u64;
                    while b < batches {
                        let mut rng = StreamRng::new(seed, b);
                        out.push((b, f(b, &mut rng, len(b))));
                        b += workers as u64;
                    }
                    out
                })
            })
            .collect();
        for h in handles {
            for (b, v) in h.join().expect("batch worker panicked") {
                slots[b as usize] = Some(v);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("every batch ran")).collect()
}

/// Kolmogorov-Smirnov distance between the empirical CDF of `samples` and `cdf`.
pub fn empirical_cdf_ks<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return domain("KS statistic of an empty sample");
    }
    if samples.iter().any(|v| v.is_nan()) {
        return domain("KS statistic of a sample containing NaN");
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// Critical KS distance at 1% significance for large N.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McPoint {
    pub avg_snr_db: f64,
    pub outage: McEstimate,
    /// Per-sample end-to-end error probability, averaged.
    pub aber: McEstimate,
    /// Per-hop conditional error probabilities, averaged separately.
    pub hop_aber: [McEstimate; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McCurve {
    pub scenario: Scenario,
    pub leg: Leg,
    pub points: Vec<McPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McRun {
    pub settings: McSettings,
    pub config: ScenarioConfig,
}

/// Raw gains of one draw; SNRs are these times the hop's average SNR.
struct Draw {
    uwoc: f64,
    /// One entry per leg.
    fso: Vec<f64>,
    rf: f64,
}

fn draw(chain: &Chain, legs: &[Leg], m: f64, rng: &mut StreamRng) -> Result<Draw> {
    let h = chain.uwoc.sample_gain(rng);
    let fso = match legs[0].strategy {
        Strategy::Direct => legs
            .iter()
            .map(|l| chain.fso.sample_ds_snr(rng, 1.0, l.direction))
            .collect(),
        // one turbulence draw feeds both directions
        Strategy::RetroReflect => {
            let it = chain.fso.sample_turbulence(rng);
            legs.iter()
                .map(|l| chain.fso.rrs_snr_from_turbulence(it, 1.0, l.direction))
                .collect()
        }
    };
    Ok(Draw {
        uwoc: h * h,
        fso,
        rf: rf::sample_snr(rng, 1.0, m)?,
    })
}

#[derive(Clone)]
struct Acc {
    outage: u64,
    sum: f64,
    sum_sq: f64,
    hop_sum: [f64; 3],
    hop_sum_sq: [f64; 3],
}

impl Acc {
    fn new() -> Acc {
        Acc {
            outage: 0,
            sum: 0.0,
            sum_sq: 0.0,
            hop_sum: [0.0; 3],
            hop_sum_sq: [0.0; 3],
        }
    }

    fn merge(&mut self, o: &Acc) {
        self.outage += o.outage;
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
        for i in 0..3 {
            self.hop_sum[i] += o.hop_sum[i];
            self.hop_sum_sq[i] += o.hop_sum_sq[i];
        }
    }
}

/// Outage and ABER estimates at `points` (dB) for every leg of the scenario.
pub fn simulate_points(run: &McRun, points: &[f64]) -> Result<Vec<McCurve>> {
    run.settings.validate()?;
    let chain = Chain::new(&run.config)?;
    let cfg = &run.config;
    let legs = cfg.scenario.legs();
    let m = cfg.rf.nakagami_m;
    let gamma_th = cfg.gamma_th();
    let snrs: Vec<Vec<HopSnrs>> = legs
        .iter()
        .map(|&l| points.iter().map(|&db| chain.hop_avg_snrs(l, db)).collect())
        .collect();
    let s = &run.settings;
    let batches = run_batches(s.samples, s.batch_size, s.seed, s.worker_count(), |_, rng, n| {
        let mut acc = vec![vec![Acc::new(); points.len()]; legs.len()];
        for _ in 0..n {
            let d = draw(&chain, &legs, m, rng)?;
            for (li, leg_snrs) in snrs.iter().enumerate() {
                for (pi, hs) in leg_snrs.iter().enumerate() {
                    let g = [hs.uwoc * d.uwoc, hs.fso * d.fso[li], hs.rf * d.rf];
                    let a = &mut acc[li][pi];
                    if g[0].min(g[1]).min(g[2]) <= gamma_th {
                        a.outage += 1;
                    }
                    let pe = g.map(|v| conditional_bit_error(cfg.modulation, v));
                    let e = end_to_end_aber(pe)?;
                    a.sum += e;
                    a.sum_sq += e * e;
                    for i in 0..3 {
                        a.hop_sum[i] += pe[i];
                        a.hop_sum_sq[i] += pe[i] * pe[i];
                    }
                }
            }
        }
        Ok::<_, Error>(acc)
    });
    let mut total = vec![vec![Acc::new(); points.len()]; legs.len()];
    for b in batches {
        let b = b?;
        for (t, x) in total.iter_mut().zip(&b) {
            for (tp, xp) in t.iter_mut().zip(x) {
                tp.merge(xp);
            }
        }
    }
    let n = s.samples;
    Ok(legs
        .iter()
        .zip(total)
        .map(|(&leg, accs)| McCurve {
            scenario: cfg.scenario,
            leg,
            points: points
                .iter()
                .zip(accs)
                .map(|(&db, a)| McPoint {
                    avg_snr_db: db,
                    outage: McEstimate::proportion(a.outage, n),
                    aber: McEstimate::from_moments(a.sum, a.sum_sq, n),
                    hop_aber: [0, 1, 2].map(|i| McEstimate::from_moments(a.hop_sum[i], a.hop_sum_sq[i], n)),
                })
                .collect(),
        })
        .collect())
}

/// Estimates over the configured SNR grid.
pub fn simulate(run: &McRun) -> Result<Vec<McCurve>> {
    simulate_points(run, &run.config.snr_grid.points())
}

fn leg_point(run: &McRun, leg: Leg, avg_snr_db: f64) -> Result<McPoint> {
    let curves = simulate_points(run, &[avg_snr_db])?;
    curves
        .into_iter()
        .find(|c| c.leg == leg)
        .and_then(|c| c.points.into_iter().next())
        .ok_or_else(|| Error::Config(format!("leg {leg:?} is not part of scenario {}", run.config.scenario)))
}

pub fn simulate_outage(run: &McRun, leg: Leg, avg_snr_db: f64) -> Result<McEstimate> {
    leg_point(run, leg, avg_snr_db).map(|p| p.outage)
}

pub fn simulate_aber(run: &McRun, leg: Leg, avg_snr_db: f64) -> Result<McEstimate> {
    leg_point(run, leg, avg_snr_db).map(|p| p.aber)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batches_come_back_in_order() {
        let v = run_batches(35, 10, 3, 4, |b, _, n| (b, n));
        assert_eq!(v, vec![(0, 10), (1, 10), (2, 10), (3, 5)]);
    }

    #[test]
    fn ks_of_point_mass() {
        let d = empirical_cdf_ks(&[0.3; 50], |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d >= 0.7 - 1e-12);
        assert!(empirical_cdf_ks(&[], |x| x).is_err());
    }

    #[test]
    fn proportion_interval() {
        let e = McEstimate::proportion(0, 1000);
        assert_eq!((e.mean, e.ci95), (0.0, 0.0));
        let e = McEstimate::proportion(500, 1000);
        assert!((e.ci95 - 1.96 * (0.25f64 / 1000.0).sqrt()).abs() < 1e-15);
    }
}
