//! AUV-UAV free-space optical hop: Birnbaum-Saunders air/water
//! turbulence, weather attenuation and, for the direct strategy, pointing
//! loss. The retro-reflected strategy has no pointing term; its
//! double-pass direction sees the same turbulence draw twice.

use crate::common::{pointing_tail, PointingConstants, PointingSpec, Weather};
use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate, QuadratureSpec};
use crate::sampling::{sample_birnbaum_saunders, sample_pointing};
use crate::special::{
    gamma, gamma_guarded, ln_gamma, lower_incomplete_gamma_continued, std_normal_cdf, upper_incomplete_gamma,
};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Uplink,
    Downlink,
}

impl Direction {
    pub fn name(&self) -> &'static str {
        match self {
            Direction::Uplink => "uplink",
            Direction::Downlink => "downlink",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Two independent links, one per direction, each with pointing loss.
    Direct,
    /// Modulating retro-reflector at one end; no pointing loss.
    RetroReflect,
}

/// Which direction carries index 1. The index selects the terminal
/// parameters and, for the retro-reflected strategy, the power of the
/// gain in the SNR (γ = γ̃ I^(2j)).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectionConvention {
    /// Uplink is index 1, so the downlink is the double-pass direction.
    #[default]
    UplinkFirst,
    /// Downlink is index 1, so the uplink is the double-pass direction.
    DownlinkFirst,
}

impl DirectionConvention {
    pub fn index(&self, dir: Direction) -> u8 {
        match (self, dir) {
            (DirectionConvention::UplinkFirst, Direction::Uplink) => 1,
            (DirectionConvention::UplinkFirst, Direction::Downlink) => 2,
            (DirectionConvention::DownlinkFirst, Direction::Downlink) => 1,
            (DirectionConvention::DownlinkFirst, Direction::Uplink) => 2,
        }
    }
}

/// Transmit/receive parameters for one direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FsoTerminal {
    /// Receiver aperture area, m².
    pub aperture_area: f64,
    /// Source divergence angle, degrees.
    pub divergence_deg: f64,
    pub wavelength_nm: f64,
    /// Optical-to-electrical conversion factor.
    pub oe_conversion: f64,
    /// Receiver noise variance, A².
    pub noise_var: f64,
}

impl FsoTerminal {
    fn with_wavelength(wavelength_nm: f64) -> Self {
        FsoTerminal {
            aperture_area: 7e-4,
            divergence_deg: 30.0,
            wavelength_nm,
            oe_conversion: 0.5,
            noise_var: 1e-14,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FsoParams {
    pub uplink: FsoTerminal,
    pub downlink: FsoTerminal,
    /// AUV-UAV link length, m.
    pub distance: f64,
    pub weather: Weather,
    /// Birnbaum-Saunders shape.
    pub bs_alpha: f64,
    /// Birnbaum-Saunders scale.
    pub bs_beta: f64,
    pub pointing: PointingSpec,
    /// Retro-reflector efficiency R.
    pub reflection: f64,
    /// Modulator transmittance x_m at the reflector.
    pub mrr_symbol: f64,
    pub convention: DirectionConvention,
}

impl Default for FsoParams {
    fn default() -> Self {
        FsoParams {
            uplink: FsoTerminal::with_wavelength(1064.0),
            downlink: FsoTerminal::with_wavelength(1550.0),
            distance: 1000.0,
            weather: Weather::Clear,
            bs_alpha: 0.6866,
            bs_beta: 0.8093,
            pointing: PointingSpec::direct(4.51, 0.0197),
            reflection: 1.0,
            mrr_symbol: 1.0,
            convention: DirectionConvention::UplinkFirst,
        }
    }
}

impl FsoParams {
    pub fn terminal(&self, dir: Direction) -> &FsoTerminal {
        match dir {
            Direction::Uplink => &self.uplink,
            Direction::Downlink => &self.downlink,
        }
    }
}

/// Deterministic gain I_l = A / (ψ d)² · exp(-α d).
pub fn path_loss(p: &FsoParams, dir: Direction) -> Result<f64> {
    let t = p.terminal(dir);
    let psi = t.divergence_deg.to_radians();
    if p.distance == 0.0 || psi == 0.0 {
        return Err(Error::SingularGeometry(format!(
            "FSO distance {} m, divergence {} deg",
            p.distance, t.divergence_deg
        )));
    }
    if !(p.distance > 0.0) || !(t.aperture_area > 0.0) {
        return domain(format!("FSO link parameters {t:?}, distance {}", p.distance));
    }
    let a = p.weather.attenuation_per_meter()?;
    Ok(t.aperture_area / (psi * p.distance).powi(2) * (-a * p.distance).exp())
}

// ---------------------------------------------------------------------------
// Birnbaum-Saunders turbulence

pub fn bs_pdf(i: f64, alpha: f64, beta: f64) -> f64 {
    if i <= 0.0 {
        return 0.0;
    }
    let r = beta / i;
    let pre = 1.0 / (2.0 * (2.0 * PI).sqrt() * alpha * beta);
    pre * (r.sqrt() + r.powf(1.5)) * (-(i / beta + r - 2.0) / (2.0 * alpha * alpha)).exp()
}

/// The standard-normal argument that maps a Birnbaum-Saunders value.
pub fn bs_z(i: f64, alpha: f64, beta: f64) -> f64 {
    ((i / beta).sqrt() - (beta / i).sqrt()) / alpha
}

pub fn bs_cdf(i: f64, alpha: f64, beta: f64) -> f64 {
    if i <= 0.0 {
        return 0.0;
    }
    std_normal_cdf(bs_z(i, alpha, beta))
}

/// Quantities derived once from [`FsoParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FsoDerived {
    pub path_loss_uplink: f64,
    pub path_loss_downlink: f64,
    pub alpha: f64,
    pub beta: f64,
    pub pointing: PointingConstants,
    pub convention: DirectionConvention,
    /// λ_j²/Φ_j² per direction, single pass.
    pub avg_snr_uplink: f64,
    pub avg_snr_downlink: f64,
    /// R² x_m², applied to the double-pass direction of the retro strategy.
    pub reflection_gain: f64,
}

pub fn derive(p: &FsoParams) -> Result<FsoDerived> {
    if !(p.bs_alpha > 0.0) || !(p.bs_beta > 0.0) {
        return domain("Birnbaum-Saunders parameters must be positive");
    }
    if !(p.reflection > 0.0 && p.reflection <= 1.0) || !(p.mrr_symbol > 0.0 && p.mrr_symbol <= 1.0) {
        return domain("reflection and modulator transmittance must lie in (0, 1]");
    }
    let snr = |t: &FsoTerminal| -> Result<f64> {
        if !(t.noise_var > 0.0) {
            return domain("FSO noise variance must be positive");
        }
        Ok(t.oe_conversion * t.oe_conversion / t.noise_var)
    };
    Ok(FsoDerived {
        path_loss_uplink: path_loss(p, Direction::Uplink)?,
        path_loss_downlink: path_loss(p, Direction::Downlink)?,
        alpha: p.bs_alpha,
        beta: p.bs_beta,
        pointing: p.pointing.resolve()?,
        convention: p.convention,
        avg_snr_uplink: snr(&p.uplink)?,
        avg_snr_downlink: snr(&p.downlink)?,
        reflection_gain: (p.reflection * p.mrr_symbol).powi(2),
    })
}

impl FsoDerived {
    pub fn path_loss(&self, dir: Direction) -> f64 {
        match dir {
            Direction::Uplink => self.path_loss_uplink,
            Direction::Downlink => self.path_loss_downlink,
        }
    }

    /// Index j of a direction under the configured convention.
    pub fn index(&self, dir: Direction) -> u8 {
        self.convention.index(dir)
    }

    /// Power n in γ = γ̃ I^n. Only the retro strategy's index-2 direction
    /// is double pass.
    pub fn snr_power(&self, strategy: Strategy, dir: Direction) -> i32 {
        match strategy {
            Strategy::Direct => 2,
            Strategy::RetroReflect => 2 * self.index(dir) as i32,
        }
    }

    /// Physical average SNR for a direction under a strategy.
    pub fn avg_snr(&self, strategy: Strategy, dir: Direction) -> f64 {
        let base = match dir {
            Direction::Uplink => self.avg_snr_uplink,
            Direction::Downlink => self.avg_snr_downlink,
        };
        if strategy == Strategy::RetroReflect && self.index(dir) == 2 {
            base * self.reflection_gain
        } else {
            base
        }
    }

    fn zeta2(&self) -> f64 {
        self.pointing.ratio * self.pointing.ratio
    }

    fn gain_scale(&self, dir: Direction) -> f64 {
        self.pointing.cap * self.path_loss(dir)
    }

    fn tail(&self, c: f64) -> Result<f64> {
        let (a, b) = (self.alpha, self.beta);
        let lb = b.ln();
        pointing_tail(bs_z(c, a, b), |z| lb + 2.0 * (0.5 * a * z).asinh(), self.zeta2())
    }

    /// Reference pdf of I = I_l I_t I_p (direct strategy).
    pub fn ds_pdf_reference(&self, i: f64, dir: Direction) -> Result<f64> {
        if i <= 0.0 {
            return Ok(0.0);
        }
        let scale = self.gain_scale(dir);
        let c = i / scale;
        Ok(self.zeta2() * self.tail(c)? / (c * scale))
    }

    /// Printed closed-form pdf of the direct-strategy gain.
    pub fn ds_pdf_paper(&self, i: f64, dir: Direction) -> Result<f64> {
        if i <= 0.0 {
            return Ok(0.0);
        }
        let z2 = self.zeta2();
        let a2 = self.alpha * self.alpha;
        let g0 = 2.0 * a2 * self.beta * self.pointing.cap * self.path_loss(dir);
        let x = i / g0;
        let br = upper_incomplete_gamma(0.5 - z2, x)? + upper_incomplete_gamma(-0.5 - z2, x)? / (2.0 * a2);
        Ok((1.0 / a2).exp() / (2.0 * PI.sqrt()) * z2 * x.powf(z2 - 1.0) / g0 * br)
    }

    /// P(I <= x) for the direct-strategy composite gain.
    pub fn ds_gain_cdf_reference(&self, x: f64, dir: Direction) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        let c = x / self.gain_scale(dir);
        Ok((bs_cdf(c, self.alpha, self.beta) + self.tail(c)?).min(1.0))
    }

    /// P(γ̃ I² <= γ) for the direct strategy.
    pub fn ds_snr_cdf_reference(&self, gamma: f64, avg_snr: f64, dir: Direction) -> Result<f64> {
        if !(avg_snr > 0.0) {
            return domain(format!("average SNR must be positive, got {avg_snr}"));
        }
        if gamma <= 0.0 {
            return Ok(0.0);
        }
        self.ds_gain_cdf_reference((gamma / avg_snr).sqrt(), dir)
    }

    /// Printed closed-form SNR CDF for the direct strategy. The lower
    /// incomplete gammas in it have negative orders for typical pointing
    /// ratios; they are read as Γ(s) - Γ(s, x). Not clamped.
    pub fn ds_snr_cdf_paper(&self, gamma: f64, avg_snr: f64, dir: Direction) -> Result<f64> {
        if gamma <= 0.0 {
            return Ok(0.0);
        }
        let z2 = self.zeta2();
        let a2 = self.alpha * self.alpha;
        let g0 = 2.0 * a2 * self.beta * self.pointing.cap * self.path_loss(dir);
        let x = gamma.sqrt() / (g0 * avg_snr.sqrt());
        let ln_pre = (2.0 * (1.0 / a2).exp() * z2 / (PI.sqrt() * (z2 + 6.0))).ln()
            + (1.0 - z2 / 2.0) * avg_snr.ln()
            - z2 * g0.ln();
        let upper = upper_incomplete_gamma(0.5 - z2, x)? + upper_incomplete_gamma(-0.5 - z2, x)? / (2.0 * a2);
        let lower = lower_incomplete_gamma_continued(2.0 - 0.75 * z2, x)?
            + lower_incomplete_gamma_continued(1.0 - 0.75 * z2, x)? / (2.0 * a2);
        let e = (z2 + 6.0) / 8.0;
        let t1 = upper * (ln_pre + e * gamma.ln()).exp();
        let t2 = lower * (ln_pre + 2.0 * e * (g0 * avg_snr.sqrt()).ln()).exp();
        Ok(t1 + t2)
    }

    /// Exact SNR CDF for the retro strategy: γ = γ̃ (I_l I_t)^n.
    pub fn rrs_snr_cdf(&self, gamma: f64, avg_snr: f64, dir: Direction) -> Result<f64> {
        if !(avg_snr > 0.0) {
            return domain(format!("average SNR must be positive, got {avg_snr}"));
        }
        if gamma <= 0.0 {
            return Ok(0.0);
        }
        let n = self.snr_power(Strategy::RetroReflect, dir) as f64;
        let t = (gamma / avg_snr).powf(1.0 / n) / self.path_loss(dir);
        Ok(bs_cdf(t, self.alpha, self.beta))
    }

    /// Reference SNR CDF for either strategy.
    pub fn snr_cdf_reference(&self, strategy: Strategy, gamma: f64, avg_snr: f64, dir: Direction) -> Result<f64> {
        match strategy {
            Strategy::Direct => self.ds_snr_cdf_reference(gamma, avg_snr, dir),
            Strategy::RetroReflect => self.rrs_snr_cdf(gamma, avg_snr, dir),
        }
    }

    /// Printed closed-form ABER of the direct strategy. Gamma arguments
    /// within `guard` of a pole are refused. Not clamped.
    pub fn ds_aber_paper(&self, p: f64, q: f64, avg_snr: f64, dir: Direction, guard: f64) -> Result<f64> {
        let z2 = self.zeta2();
        let a2 = self.alpha * self.alpha;
        let g0 = 2.0 * a2 * self.beta * self.pointing.cap * self.path_loss(dir);
        let u = g0 * g0 * avg_snr;
        let c3 = (z2 - 2.0) / 8.0 + p;
        let g = |x: f64| gamma_guarded(x, guard);
        let ln_pre = p * q.ln() + 1.0 / a2 - 0.5 * PI.ln() - ln_gamma(p) + z2.ln() + avg_snr.ln()
            + (-z2 / 2.0 + p + 1.0) * u.ln()
            - (z2 + 6.0).ln();
        let inner1 = -g(-z2 + 2.0 * c3 + 4.5)? / (c3 + 2.0) - g(-z2 + 2.0 * c3 + 3.5)? / (2.0 * a2 * (c3 + 2.0))
            + g(-0.75 * z2 + 2.0 * p + 4.0)? / (p + 1.0)
            - g(-0.75 * z2 + 2.0 * p + 3.0)? / (2.0 * a2 * (p + 1.0));
        let inner2 = g(-z2 + 2.0 * c3 + 2.5)? / (c3 + 1.0) + g(-z2 + 2.0 * c3 + 1.5)? / (2.0 * a2 * (c3 + 1.0))
            - g(-0.75 * z2 + 2.0 * p + 2.0)? / p
            + g(-0.75 * z2 + 2.0 * p + 1.0)? / (2.0 * a2 * p);
        Ok((ln_pre + q * u.ln()).exp() * inner1 + ln_pre.exp() * inner2)
    }

    /// Printed closed-form ABER of the retro strategy. Not clamped.
    pub fn rrs_aber_paper(&self, p: f64, q: f64, avg_snr: f64, dir: Direction, guard: f64) -> Result<f64> {
        let j = self.index(dir) as f64;
        let il = self.path_loss(dir);
        let ln_root = avg_snr.ln() / (2.0 * j);
        let ln_2bi = (2.0 * self.beta * il).ln();
        let ln_a = self.alpha.ln() + 0.5 * (ln_2bi + ln_root);
        let ln_b = -self.alpha.ln() + 0.5 * (ln_root - ln_2bi);
        let (k1, k0) = (4.0 * j * (p + 1.0), 4.0 * j * p);
        let sp = PI.sqrt();
        let g = |x: f64| gamma_guarded(x, guard);
        let t = -(k1 * ln_a).exp() * g(2.0 * j * (p + 1.0) + 0.5)? / (sp * (p + 1.0))
            + (k0 * ln_a).exp() * g(2.0 * j * p + 0.5)? / (sp * p)
            + (k1 * ln_b).exp() * g(-2.0 * j * (p + 1.0) + 0.5)? / (sp * (p + 1.0))
            - (k0 * ln_b).exp() * g(-2.0 * j * p + 0.5)? / (sp * p);
        Ok(q.powf(p) / (4.0 * gamma(p)) * t)
    }

    pub fn sample_turbulence<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        sample_birnbaum_saunders(rng, self.alpha, self.beta)
    }

    pub fn sample_ds_snr<R: Rng + ?Sized>(&self, rng: &mut R, avg_snr: f64, dir: Direction) -> f64 {
        let it = self.sample_turbulence(rng);
        let ip = sample_pointing(rng, self.pointing.cap, self.pointing.ratio);
        let i = self.path_loss(dir) * it * ip;
        avg_snr * i * i
    }

    /// Uplink and downlink SNRs of the retro strategy from one turbulence draw.
    pub fn sample_rrs_pair<R: Rng + ?Sized>(&self, rng: &mut R, avg_snr_up: f64, avg_snr_down: f64) -> (f64, f64) {
        let it = self.sample_turbulence(rng);
        (
            self.rrs_snr_from_turbulence(it, avg_snr_up, Direction::Uplink),
            self.rrs_snr_from_turbulence(it, avg_snr_down, Direction::Downlink),
        )
    }

    pub fn rrs_snr_from_turbulence(&self, it: f64, avg_snr: f64, dir: Direction) -> f64 {
        let n = self.snr_power(Strategy::RetroReflect, dir);
        avg_snr * (self.path_loss(dir) * it).powi(n)
    }

    /// ∫ ds_pdf_reference over (0, ∞), in the normalised gain.
    pub fn ds_reference_pdf_mass(&self, spec: &QuadratureSpec) -> Result<f64> {
        let z2 = self.zeta2();
        integrate(
            |c: f64| {
                if c <= 0.0 {
                    0.0
                } else {
                    z2 * self.tail(c).unwrap_or(f64::NAN) / c
                }
            },
            0.0,
            f64::INFINITY,
            spec,
        )
    }
}
