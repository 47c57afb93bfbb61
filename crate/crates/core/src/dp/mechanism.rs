//! Laplace and exponential mechanisms.
//!
//! Both are plain floating-point implementations. Laplace noise uses inverse
//! CDF sampling; the exponential mechanism normalizes with a max shift. The
//! known floating-point side channels of these textbook samplers are not
//! addressed here.

use rand::rngs::ThreadRng;
use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::rng::{self, RngSeed, StreamRng};

/// Draw from Laplace(0, b), density `exp(-|x|/b) / 2b`.
pub fn laplace_noise<R: Rng + ?Sized>(b: f64, rng: &mut R) -> Result<f64> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::invalid(format!("Laplace scale must be positive and finite, got {b}")));
    }
    // u in the open interval (-1/2, 1/2)
    let u = loop {
        let u: f64 = rng.random::<f64>() - 0.5;
        if u > -0.5 {
            break u;
        }
    };
    Ok(-b * u.signum() * (1.0 - 2.0 * u.abs()).ln())
}

/// Sample an index with probability proportional to `exp(eps_prime * u_i)`.
pub fn exponential_mechanism<R: Rng + ?Sized>(utilities: &[f64], eps_prime: f64, rng: &mut R) -> Result<usize> {
    if utilities.is_empty() {
        return Err(Error::invalid("exponential mechanism needs at least one outcome"));
    }
    if let Some(u) = utilities.iter().find(|u| !u.is_finite()) {
        return Err(Error::invalid(format!("utility {u} is not finite")));
    }
    if !(eps_prime >= 0.0) || !eps_prime.is_finite() {
        return Err(Error::invalid(format!("eps_prime must be nonnegative and finite, got {eps_prime}")));
    }
    let max = utilities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = utilities.iter().map(|&u| (eps_prime * (u - max)).exp()).collect();
    let total: f64 = weights.iter().sum();
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return Ok(i);
        }
    }
    // rounding left `target` at the very top; take the last positive weight
    Ok(weights.iter().rposition(|&w| w > 0.0).unwrap_or(0))
}

/// Where mechanism randomness comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseMode {
    /// Reproducible streams derived from a seed. For experiments only: anyone
    /// holding the seed can strip the noise.
    Seeded(RngSeed),
    /// Fresh randomness from the operating system's entropy source.
    Secure,
}

/// Random source for one mechanism stream.
#[allow(clippy::large_enum_variant)]
pub enum NoiseRng {
    Seeded(StreamRng),
    Secure(ThreadRng),
}

impl NoiseMode {
    /// Stream for the given key. In secure mode the key is ignored.
    pub fn stream(self, key: u64) -> NoiseRng {
        match self {
            NoiseMode::Seeded(seed) => NoiseRng::Seeded(rng::substream(seed, key)),
            NoiseMode::Secure => NoiseRng::Secure(rand::rng()),
        }
    }
}

impl RngCore for NoiseRng {
    fn next_u32(&mut self) -> u32 {
        match self {
            NoiseRng::Seeded(r) => r.next_u32(),
            NoiseRng::Secure(r) => r.next_u32(),
        }
    }

    fn next_u64(&mut self) -> u64 {
        match self {
            NoiseRng::Seeded(r) => r.next_u64(),
            NoiseRng::Secure(r) => r.next_u64(),
        }
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        match self {
            NoiseRng::Seeded(r) => r.fill_bytes(dst),
            NoiseRng::Secure(r) => r.fill_bytes(dst),
        }
    }
}
