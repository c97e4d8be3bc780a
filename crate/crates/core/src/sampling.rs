//! Random streams and the fading/pointing samplers.

use crate::error::{domain, Result};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

/// ChaCha20 stream addressed by (seed, stream index). Two instances built
/// from the same pair produce the same sequence on every platform.
#[derive(Debug, Clone)]
pub struct StreamRng {
    seed: u64,
    stream: u64,
    inner: ChaCha20Rng,
}

impl StreamRng {
    pub const ALGORITHM: &'static str = "chacha20";

    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        StreamRng { seed, stream, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn algorithm(&self) -> &'static str {
        Self::ALGORITHM
    }
}

impl RngCore for StreamRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Uniform draw on (0, 1].
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Log-normal irradiance exp(2X), X ~ N(-σ², σ²), so that the mean is one.
pub fn sample_lognormal_turbulence<R: Rng + ?Sized>(rng: &mut R, sigma2: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    (2.0 * (-sigma2 + sigma2.sqrt() * z)).exp()
}

/// Birnbaum-Saunders draw β/4 (αZ + sqrt((αZ)² + 4))².
pub fn sample_birnbaum_saunders<R: Rng + ?Sized>(rng: &mut R, alpha: f64, beta: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    let az = alpha * z;
    // for very negative az the direct form cancels; use the conjugate
    let root = if az >= 0.0 {
        az + (az * az + 4.0).sqrt()
    } else {
        4.0 / ((az * az + 4.0).sqrt() - az)
    };
    0.25 * beta * root * root
}

/// Nakagami-m amplitude sqrt(X), X ~ Gamma(m, Ω/m).
pub fn sample_nakagami<R: Rng + ?Sized>(rng: &mut R, m: f64, omega: f64) -> Result<f64> {
    if !(m >= 0.5) || !(omega > 0.0) {
        return domain(format!("Nakagami shape m={m} (needs m >= 0.5), Ω={omega}"));
    }
    let g = Gamma::new(m, omega / m).map_err(|e| crate::Error::Domain(e.to_string()))?;
    Ok(g.sample(rng).sqrt())
}

/// Pointing-error gain cap * U^(1/ratio²): the radial displacement is
/// Rayleigh, and under the Gaussian-beam approximation this is exact.
pub fn sample_pointing<R: Rng + ?Sized>(rng: &mut R, cap: f64, ratio: f64) -> f64 {
    cap * open_unit(rng).powf(1.0 / (ratio * ratio))
}
