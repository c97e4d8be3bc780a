//! UAV-to-access-point RF hop with Nakagami-m fading.

use crate::error::{domain, Result};
use crate::sampling::sample_nakagami;
use crate::special::{gamma, ln_gamma, regularized_lower_gamma};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Optional large-scale gain: free-space term at the carrier, a distance
/// exponent of 2.7 and a shadowing value. Off unless configured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RfPathGain {
    pub distance_m: f64,
    /// Shadowing realisation, dB. Held fixed so that the analytic and
    /// sampled curves see the same large-scale gain.
    pub shadowing_db: f64,
}

impl RfPathGain {
    /// Gain in dB at carrier `frequency_hz` with the stored shadowing value.
    pub fn gain_db(&self, frequency_hz: f64) -> f64 {
        // 4π f / c with c = 3e8 m/s and f in GHz gives 40π f / 3
        let fs = -20.0 * (40.0 * PI * frequency_hz / 3.0 / 1e9).log10();
        fs - 27.0 * self.distance_m.log10() + self.shadowing_db
    }

    pub fn gain_linear(&self, frequency_hz: f64) -> f64 {
        10f64.powf(self.gain_db(frequency_hz) / 10.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfParams {
    pub nakagami_m: f64,
    /// Mean-square fading amplitude.
    pub omega: f64,
    pub frequency_hz: f64,
    /// Receiver noise power, W.
    pub noise_power: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_gain: Option<RfPathGain>,
}

impl Default for RfParams {
    fn default() -> Self {
        RfParams {
            nakagami_m: 0.5,
            omega: 1.0,
            frequency_hz: 1.9e9,
            noise_power: 5.56e-13,
            path_gain: None,
        }
    }
}

impl RfParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.nakagami_m >= 0.5) {
            return domain(format!("Nakagami m = {} is below 0.5", self.nakagami_m));
        }
        if !(self.omega > 0.0) {
            return domain("Nakagami Ω must be positive");
        }
        Ok(())
    }

    /// Multiplier applied to the swept average SNR (1 without a path-gain model).
    pub fn snr_scale(&self) -> f64 {
        self.path_gain.map(|g| g.gain_linear(self.frequency_hz)).unwrap_or(1.0)
    }
}

/// Amplitude pdf for raw Ω.
pub fn amplitude_pdf(g: f64, m: f64, omega: f64) -> f64 {
    if g <= 0.0 {
        return 0.0;
    }
    2.0 * m.powf(m) * g.powf(2.0 * m - 1.0) / (gamma(m) * omega.powf(m)) * (-m * g * g / omega).exp()
}

/// SNR pdf for γ = γ̃ G², Ω = 1.
pub fn snr_pdf(gamma_: f64, avg_snr: f64, m: f64) -> f64 {
    if gamma_ <= 0.0 {
        return 0.0;
    }
    let ln = m * m.ln() + (m - 1.0) * gamma_.ln() - ln_gamma(m) - m * avg_snr.ln() - m * gamma_ / avg_snr;
    ln.exp()
}

/// SNR CDF P(m, m γ / γ̃).
pub fn snr_cdf(gamma_: f64, avg_snr: f64, m: f64) -> Result<f64> {
    if !(avg_snr > 0.0) || !(m >= 0.5) {
        return domain(format!("RF CDF needs γ̃ > 0 and m >= 0.5 (γ̃={avg_snr}, m={m})"));
    }
    if gamma_ <= 0.0 {
        return Ok(0.0);
    }
    regularized_lower_gamma(m, m * gamma_ / avg_snr)
}

/// Printed closed-form ABER for modulation parameters (p, q). Not clamped.
pub fn aber_paper(p: f64, q: f64, avg_snr: f64, m: f64) -> f64 {
    let r = avg_snr / m;
    q.powf(p) / (2.0 * gamma(p) * gamma(m))
        * (r.powf(p + 1.0) * gamma(m + p + 1.0) / (p + 1.0) - r.powf(p) * gamma(m + p) / p)
}

/// SNR draw γ̃ G² with G Nakagami(m, 1).
pub fn sample_snr<R: Rng + ?Sized>(rng: &mut R, avg_snr: f64, m: f64) -> Result<f64> {
    let g = sample_nakagami(rng, m, 1.0)?;
    Ok(avg_snr * g * g)
}
