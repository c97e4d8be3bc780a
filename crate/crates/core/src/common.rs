//! Pieces shared by the optical hops: pointing-error constants, weather
//! attenuation and the sensor wavelength plan.

use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate, QuadratureSpec};
use crate::special::erf;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Gaussian beam falling on a circular detector with radial jitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointingGeometry {
    /// Beam waist at the receiver, m.
    pub beam_waist: f64,
    /// Detector radius, m.
    pub detector_radius: f64,
    /// Standard deviation of the jitter along each axis, m.
    pub jitter_std: f64,
}

/// The two numbers the pointing-error law depends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointingConstants {
    /// Equivalent beam radius over twice the jitter deviation.
    pub ratio: f64,
    /// Fraction of power collected with zero displacement.
    pub cap: f64,
}

impl PointingConstants {
    pub fn validate(&self) -> Result<()> {
        if !(self.ratio > 0.0) || !(self.cap > 0.0 && self.cap <= 1.0) {
            return Err(Error::Domain(format!(
                "pointing constants need ratio > 0 and cap in (0, 1], got {:?}",
                self
            )));
        }
        Ok(())
    }
}

pub fn pointing_constants(g: &PointingGeometry) -> Result<PointingConstants> {
    if !(g.beam_waist > 0.0) || !(g.jitter_std > 0.0) || !(g.detector_radius > 0.0) {
        return domain(format!("pointing geometry {g:?} must be strictly positive"));
    }
    let v = (PI / 2.0).sqrt() * g.detector_radius / g.beam_waist;
    let ev = erf(v);
    let cap = ev * ev;
    let weq2 = g.beam_waist * g.beam_waist * (PI / 4.0).sqrt() * ev / v * (v * v).exp();
    let ratio = weq2.sqrt() / (2.0 * g.jitter_std);
    Ok(PointingConstants { ratio, cap })
}

/// Pointing law given either directly or through geometry; geometry wins
/// when both are present.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointingSpec {
    pub ratio: f64,
    pub cap: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<PointingGeometry>,
}

impl PointingSpec {
    pub fn direct(ratio: f64, cap: f64) -> Self {
        PointingSpec {
            ratio,
            cap,
            geometry: None,
        }
    }

    pub fn resolve(&self) -> Result<PointingConstants> {
        let c = match &self.geometry {
            Some(g) => pointing_constants(g)?,
            None => PointingConstants {
                ratio: self.ratio,
                cap: self.cap,
            },
        };
        c.validate()?;
        Ok(c)
    }
}

// ---------------------------------------------------------------------------
// Weather

/// Atmospheric condition over the air hop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weather {
    Clear,
    Snowy,
    Foggy,
    /// Attenuation in dB/km.
    Custom(f64),
}

impl Weather {
    pub fn db_per_km(&self) -> f64 {
        match self {
            Weather::Clear => 0.44,
            Weather::Snowy => 4.53,
            Weather::Foggy => 50.0,
            Weather::Custom(v) => *v,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Weather::Clear => "clear".into(),
            Weather::Snowy => "snowy".into(),
            Weather::Foggy => "foggy".into(),
            Weather::Custom(v) => format!("custom({v})"),
        }
    }

    /// Attenuation coefficient in 1/m.
    pub fn attenuation_per_meter(&self) -> Result<f64> {
        let db = self.db_per_km();
        if !(db > 0.0) || !db.is_finite() {
            return domain(format!("weather attenuation must be positive, got {db} dB/km"));
        }
        Ok(db_per_km_to_per_meter(db))
    }
}

impl std::str::FromStr for Weather {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "clear" => Ok(Weather::Clear),
            "snowy" => Ok(Weather::Snowy),
            "foggy" => Ok(Weather::Foggy),
            other => match other.parse::<f64>() {
                Ok(v) if v > 0.0 => Ok(Weather::Custom(v)),
                _ => Err(Error::Config(format!(
                    "unknown weather '{s}' (clear, snowy, foggy or a dB/km value)"
                ))),
            },
        }
    }
}

/// dB/km to a natural-log intensity coefficient in 1/m.
pub fn db_per_km_to_per_meter(db_per_km: f64) -> f64 {
    std::f64::consts::LN_10 / 10.0 * db_per_km / 1000.0
}

// ---------------------------------------------------------------------------
// Wavelength plan

/// Centre wavelength of the sensor plan, nm.
pub const BASE_WAVELENGTH_NM: f64 = 532.0;
/// Spacing of the reciprocal-wavelength ladder, 1/nm.
pub const WAVENUMBER_STEP: f64 = 1.0 / 30e6;

/// Wavelengths (nm) for K sensors, alternating either side of 532 nm so
/// that every sensor gets a distinct carrier.
pub fn allocate_wavelengths(k: usize) -> Vec<f64> {
    (1..=k)
        .map(|i| {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            let rung = (i / 2) as f64; // ceil((i-1)/2)
            1.0 / (1.0 / BASE_WAVELENGTH_NM + sign * WAVENUMBER_STEP * rung)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Turbulence x pointing composites

fn tail_spec() -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: 0.0,
        rel_tol: 1e-11,
        max_subdivisions: 4000,
        infinite_tail_transform: true,
    }
}

/// E[(c/T)^k ; T > c] for a turbulence gain T = t(Z), Z standard normal and
/// t increasing, where c = t(z_c). `ln_t` maps z to ln t(z).
///
/// Conditioning on the turbulence draw, this is the part of
/// P(T · U^{1/k} <= c) contributed by T > c; the pointing draw U is uniform.
pub(crate) fn pointing_tail<F: Fn(f64) -> f64>(z_c: f64, ln_t: F, k: f64) -> Result<f64> {
    if z_c > 38.5 {
        return Ok(0.0);
    }
    let ln_c = ln_t(z_c);
    let lo = z_c.max(-40.0);
    let norm = (2.0 * PI).sqrt().recip();
    integrate(
        |z| norm * (k * (ln_c - ln_t(z)) - 0.5 * z * z).exp(),
        lo,
        f64::INFINITY,
        &tail_spec(),
    )
}
