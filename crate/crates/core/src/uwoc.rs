//! Sensor-to-AUV underwater optical hop: geometric/extinction path loss,
//! weak log-normal turbulence and Rayleigh-jitter pointing loss.

use crate::common::{pointing_tail, PointingConstants, PointingSpec};
use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate, QuadratureSpec};
use crate::sampling::{sample_lognormal_turbulence, sample_pointing};
use crate::special::{erfc, ln_erfc, ln_gamma, std_normal_cdf};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UwocParams {
    /// Receiver aperture area, m².
    pub aperture_area: f64,
    /// Angle between the link axis and the receiver normal, degrees.
    pub incidence_deg: f64,
    /// Source divergence angle, degrees.
    pub divergence_deg: f64,
    /// Perpendicular sensor-to-relay distance, m.
    pub distance: f64,
    /// Seawater extinction coefficient, 1/m.
    pub extinction: f64,
    /// Refractive-index structure constant, m^(-2/3).
    pub cn2: f64,
    pub wavelength_nm: f64,
    pub pointing: PointingSpec,
    /// Optical-to-electrical conversion factor.
    pub responsivity: f64,
    /// Receiver noise variance, A².
    pub noise_var: f64,
    /// Transmit symbol power; the analyses fix it to one.
    pub symbol_power: f64,
}

impl Default for UwocParams {
    fn default() -> Self {
        UwocParams {
            aperture_area: 1.7e-4,
            incidence_deg: 5.0,
            divergence_deg: 60.0,
            distance: 350.0,
            extinction: 0.151,
            cn2: 1e-15,
            wavelength_nm: 532.0,
            pointing: PointingSpec::direct(2.35, 0.0764),
            responsivity: 0.25,
            noise_var: 1e-14,
            symbol_power: 1.0,
        }
    }
}

/// Deterministic path gain h_l.
pub fn path_loss(p: &UwocParams) -> Result<f64> {
    let th = p.incidence_deg.to_radians();
    let th0 = p.divergence_deg.to_radians();
    if p.distance == 0.0 || th0 == 0.0 {
        return Err(Error::SingularGeometry(format!(
            "distance {} m, divergence {} deg",
            p.distance, p.divergence_deg
        )));
    }
    if !(p.distance > 0.0) || !(p.aperture_area > 0.0) || p.extinction < 0.0 {
        return domain(format!("underwater link parameters {p:?}"));
    }
    let cos_t = th.cos();
    if cos_t <= 1e-12 {
        return domain(format!("incidence angle {} deg leaves no projected aperture", p.incidence_deg));
    }
    let geo = p.aperture_area * cos_t / (2.0 * PI * p.distance * p.distance * (1.0 - th0.cos()));
    Ok(geo * (-p.extinction * p.distance / cos_t).exp())
}

/// Log-amplitude variance σ² = 0.307 Cn² k^(7/6) d^(11/6).
pub fn turbulence_variance(p: &UwocParams) -> Result<f64> {
    if !(p.wavelength_nm > 0.0) || p.cn2 < 0.0 || !(p.distance > 0.0) {
        return domain("turbulence variance needs positive wavelength and distance");
    }
    let k = 2.0 * PI / (p.wavelength_nm * 1e-9);
    Ok(0.307 * p.cn2 * k.powf(7.0 / 6.0) * p.distance.powf(11.0 / 6.0))
}

/// Quantities derived once from [`UwocParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UwocDerived {
    pub path_loss: f64,
    /// Log-amplitude variance σ².
    pub sigma2: f64,
    /// 2σ²(1 + 2ξ²)
    pub phi: f64,
    /// 2σ²ξ²(1 + ξ²)
    pub phi_prime: f64,
    pub pointing: PointingConstants,
    /// η² s² / δ²
    pub avg_snr: f64,
}

pub fn derive(p: &UwocParams) -> Result<UwocDerived> {
    let path_loss = path_loss(p)?;
    let sigma2 = turbulence_variance(p)?;
    if !(sigma2 > 0.0) {
        return domain("underwater turbulence variance must be positive");
    }
    let pointing = p.pointing.resolve()?;
    let x2 = pointing.ratio * pointing.ratio;
    if !(p.noise_var > 0.0) {
        return domain("noise variance must be positive");
    }
    Ok(UwocDerived {
        path_loss,
        sigma2,
        phi: 2.0 * sigma2 * (1.0 + 2.0 * x2),
        phi_prime: 2.0 * sigma2 * x2 * (1.0 + x2),
        pointing,
        avg_snr: (p.responsivity * p.symbol_power).powi(2) / p.noise_var,
    })
}

impl UwocDerived {
    fn xi2(&self) -> f64 {
        self.pointing.ratio * self.pointing.ratio
    }

    fn mu(&self) -> f64 {
        -self.sigma2
    }

    /// Largest gain the hop can deliver without turbulence.
    pub fn gain_scale(&self) -> f64 {
        self.pointing.cap * self.path_loss
    }

    /// Turbulence pdf of h_t = exp(2X).
    pub fn turbulence_pdf(&self, h: f64) -> f64 {
        if h <= 0.0 {
            return 0.0;
        }
        let s2 = self.sigma2;
        let d = h.ln() - 2.0 * self.mu();
        (-d * d / (8.0 * s2)).exp() / (2.0 * h * (2.0 * PI * s2).sqrt())
    }

    pub fn turbulence_cdf(&self, h: f64) -> f64 {
        if h <= 0.0 {
            return 0.0;
        }
        std_normal_cdf(self.z_of(h.ln()))
    }

    fn z_of(&self, ln_h: f64) -> f64 {
        (ln_h - 2.0 * self.mu()) / (2.0 * self.sigma2.sqrt())
    }

    fn tail(&self, c: f64) -> Result<f64> {
        let mu2 = 2.0 * self.mu();
        let s = 2.0 * self.sigma2.sqrt();
        pointing_tail(self.z_of(c.ln()), |z| mu2 + s * z, self.xi2())
    }

    /// Reference pdf of h = h_l h_t h_p by quadrature over the turbulence.
    pub fn pdf_reference(&self, h: f64) -> Result<f64> {
        if h <= 0.0 {
            return Ok(0.0);
        }
        let scale = self.gain_scale();
        let c = h / scale;
        Ok(self.xi2() * self.tail(c)? / (c * scale))
    }

    /// Closed-form pdf as printed in the source derivation; kept for the
    /// fidelity comparison.
    pub fn pdf_paper(&self, h: f64) -> f64 {
        if h <= 0.0 {
            return 0.0;
        }
        let x2 = self.xi2();
        let scale = self.gain_scale();
        let c = h / scale;
        let arg = (c.ln() + self.phi) / (8.0 * self.sigma2).sqrt();
        x2 * c.powf(x2 - 1.0) / (2.0 * scale) * erfc(arg) * self.phi_prime
    }

    /// P(h <= x) for the composite gain.
    pub fn gain_cdf_reference(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        let c = x / self.gain_scale();
        Ok((self.turbulence_cdf(c) + self.tail(c)?).min(1.0))
    }

    /// P(avg_snr · h² <= gamma).
    pub fn snr_cdf_reference(&self, gamma: f64, avg_snr: f64) -> Result<f64> {
        if !(avg_snr > 0.0) {
            return domain(format!("average SNR must be positive, got {avg_snr}"));
        }
        if gamma <= 0.0 {
            return Ok(0.0);
        }
        self.gain_cdf_reference((gamma / avg_snr).sqrt())
    }

    /// SNR CDF in the printed closed form. Not clamped.
    pub fn snr_cdf_paper(&self, gamma: f64, avg_snr: f64) -> f64 {
        if gamma <= 0.0 {
            return 0.0;
        }
        let x2 = self.xi2();
        let s2 = self.sigma2;
        let r8 = (8.0 * s2).sqrt();
        let theta = 0.5 * (gamma.ln() - avg_snr.ln()) - self.gain_scale().ln() + self.phi;
        let lead = (avg_snr * self.phi_prime / 2.0).ln() - self.phi * x2;
        let t1 = (lead + ln_erfc(theta / r8) + theta * x2).exp();
        let t2 = (lead + ln_erfc((4.0 * s2 * x2 - theta) / r8) + 2.0 * s2 * x2 * x2).exp();
        t1 + t2
    }

    /// Printed closed-form ABER for modulation parameters (p, q). Not clamped.
    pub fn aber_paper(&self, p: f64, q: f64, avg_snr: f64) -> f64 {
        let x2 = self.xi2();
        let s2 = self.sigma2;
        let c1 = (self.gain_scale() * avg_snr.sqrt()).ln() - self.phi;
        let c2 = c1 + 4.0 * s2 * x2;
        let lead = p * q.ln() + avg_snr.ln() + self.phi_prime.ln() - LN_2 - ln_gamma(p) - self.phi * x2;
        let a = -c1 * (8.0 * s2 * x2 + c1) / (8.0 * s2);
        let e = |k: f64| (8.0 * s2 * k + 2.0 * c1).powi(2) / (32.0 * s2);
        let t1 = 2.0 * (lead + a + e(x2 + 2.0 * p)).exp() / (x2 + 2.0 * p);
        let t2 = 2.0 * (lead + a + e(x2 + 2.0 * p + 2.0)).exp() / (x2 + 2.0 * p + 2.0);
        let b = lead + 2.0 * s2 * x2 * x2;
        let t3 = (b + (p + 1.0) * (8.0 * s2 * (p + 1.0) + 2.0 * c2)).exp() / (p + 1.0);
        let t4 = (b + p * (8.0 * s2 * p + 2.0 * c2)).exp() / p;
        t1 - t2 + t3 - t4
    }

    /// One draw of the composite gain.
    pub fn sample_gain<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let ht = sample_lognormal_turbulence(rng, self.sigma2);
        let hp = sample_pointing(rng, self.pointing.cap, self.pointing.ratio);
        self.path_loss * ht * hp
    }

    pub fn sample_snr<R: Rng + ?Sized>(&self, rng: &mut R, avg_snr: f64) -> f64 {
        let h = self.sample_gain(rng);
        avg_snr * h * h
    }

    /// ∫ pdf_reference over (0, ∞), done in the normalised gain c = h / (h0 h_l).
    pub fn reference_pdf_mass(&self, spec: &QuadratureSpec) -> Result<f64> {
        let x2 = self.xi2();
        integrate(
            |c: f64| {
                if c <= 0.0 {
                    0.0
                } else {
                    x2 * self.tail(c).unwrap_or(f64::NAN) / c
                }
            },
            0.0,
            f64::INFINITY,
            spec,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d() -> UwocDerived {
        derive(&UwocParams::default()).unwrap()
    }

    #[test]
    fn singular_geometry() {
        let p = UwocParams {
            distance: 0.0,
            ..Default::default()
        };
        assert!(matches!(path_loss(&p), Err(Error::SingularGeometry(_))));
        let p = UwocParams {
            divergence_deg: 0.0,
            ..Default::default()
        };
        assert!(matches!(path_loss(&p), Err(Error::SingularGeometry(_))));
        let p = UwocParams {
            incidence_deg: 90.0,
            ..Default::default()
        };
        assert!(matches!(path_loss(&p), Err(Error::Domain(_))));
    }

    #[test]
    fn reference_cdf_has_no_mass_at_or_below_zero() {
        let u = d();
        assert_eq!(u.snr_cdf_reference(0.0, 1e3).unwrap(), 0.0);
        assert_eq!(u.snr_cdf_reference(-1.0, 1e3).unwrap(), 0.0);
        assert_eq!(u.snr_cdf_paper(0.0, 1e3), 0.0);
    }

    #[test]
    fn turbulence_pdf_is_zero_off_support() {
        assert_eq!(d().turbulence_pdf(0.0), 0.0);
        assert_eq!(d().turbulence_pdf(-1.0), 0.0);
    }
}
