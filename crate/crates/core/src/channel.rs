//! Modulation and the two-phase relay channel.
//!
//! Noise convention: `sigma2` is the noise variance per real dimension, so a
//! complex noise sample has `E|w|^2 = 2 sigma2` and the matched likelihood of
//! a hypothesis `s` is `exp(-|y - s|^2 / (2 sigma2))`. With unit-energy
//! symbols the SNR per information symbol is `1 / (2 r sigma2)`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// A labeled unit-energy constellation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constellation {
    points: Vec<C64>,
}

impl Constellation {
    pub fn from_points(points: Vec<C64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidParameter("constellation needs at least two points".into()));
        }
        Ok(Self { points })
    }

    /// 0 -> +1, 1 -> -1.
    pub fn bpsk() -> Self {
        Self {
            points: vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)],
        }
    }

    /// QPSK with labels `0 -> 1, 1 -> j, 2 -> -j, 3 -> -1`.
    ///
    /// Adjacent points differ in one bit, so the bitwise XOR of two labels is
    /// the closest-neighbor clustering at equal channel gains. The two-stage
    /// mapping catalog is expressed in this labeling.
    pub fn qpsk() -> Self {
        Self {
            points: vec![
                C64::new(1.0, 0.0),
                C64::new(0.0, 1.0),
                C64::new(0.0, -1.0),
                C64::new(-1.0, 0.0),
            ],
        }
    }

    /// `m`-PSK with natural labeling, `k -> exp(j 2 pi k / m)`.
    pub fn psk(m: usize) -> Self {
        let points = (0..m)
            .map(|k| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / m as f64))
            .collect();
        Self { points }
    }

    /// BPSK for 2, the labeled QPSK for 4, `m`-PSK otherwise.
    pub fn for_order(m: usize) -> Self {
        match m {
            2 => Self::bpsk(),
            4 => Self::qpsk(),
            _ => Self::psk(m),
        }
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn point(&self, k: usize) -> C64 {
        self.points[k]
    }

    pub fn mean_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.order() as f64
    }

    /// Maps symbols to points.
    pub fn modulate(&self, symbols: &[u8]) -> Result<Vec<C64>> {
        symbols
            .iter()
            .map(|&s| {
                self.points.get(s as usize).copied().ok_or(Error::SymbolOutOfRange {
                    value: s as usize,
                    q: self.order(),
                })
            })
            .collect()
    }

    /// Per-symbol likelihoods `exp(-|y - x_k|^2 / (2 sigma2))` for every label,
    /// scaled so the largest is one.
    pub fn likelihoods(&self, y: C64, gain: C64, sigma2: f64, out: &mut [f64]) {
        let points = self.points.iter().map(|&p| gain * p);
        scaled_likelihoods(y, points, sigma2, out);
    }
}

/// Gaussian likelihoods of `y` under each hypothesis point, scaled so the
/// largest is one. With `sigma2 == 0` a hypothesis scores one if it coincides
/// with `y` (to 1e-9) and zero otherwise.
pub fn scaled_likelihoods(y: C64, points: impl Iterator<Item = C64>, sigma2: f64, out: &mut [f64]) {
    let mut best = f64::INFINITY;
    for (o, p) in out.iter_mut().zip(points) {
        let d = (y - p).norm_sqr();
        *o = d;
        best = best.min(d);
    }
    if sigma2 > 0.0 {
        let scale = 1.0 / (2.0 * sigma2);
        out.iter_mut().for_each(|d| *d = (-(*d - best) * scale).exp());
    } else {
        out.iter_mut().for_each(|d| *d = if *d < 1e-18 { 1.0 } else { 0.0 });
    }
}

/// Gains and noise level of the multiple-access phase. Links are reciprocal,
/// so the broadcast gains are `h_ca = h_ac` and `h_cb = h_bc`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelState {
    pub h_ac: C64,
    pub h_bc: C64,
    /// Noise variance per real dimension.
    pub sigma2: f64,
}

impl ChannelState {
    pub fn new(h_ac: C64, h_bc: C64, sigma2: f64) -> Self {
        Self { h_ac, h_bc, sigma2 }
    }

    pub fn noiseless(h_ac: C64, h_bc: C64) -> Self {
        Self::new(h_ac, h_bc, 0.0)
    }

    /// `h_bc / h_ac` as `(gamma, theta)`.
    pub fn ratio_polar(&self) -> (f64, f64) {
        (self.h_bc / self.h_ac).to_polar()
    }

    pub fn is_degenerate(&self) -> bool {
        self.h_ac.norm_sqr() == 0.0 && self.h_bc.norm_sqr() == 0.0
    }
}

/// Complex Gaussian sample with variance `sigma2` per real dimension.
#[inline]
pub fn complex_noise<R: Rng + ?Sized>(rng: &mut R, sigma2: f64) -> C64 {
    if sigma2 == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let s = sigma2.sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * s, im * s)
}

/// `y(n) = h_ac xa(n) + h_bc xb(n) + w(n)`.
pub fn ma_superimpose<R: Rng + ?Sized>(
    xa: &[C64],
    xb: &[C64],
    ch: &ChannelState,
    rng: &mut R,
) -> Result<Vec<C64>> {
    if xa.len() != xb.len() {
        return Err(Error::LengthMismatch {
            expected: xa.len(),
            got: xb.len(),
        });
    }
    if ch.sigma2 < 0.0 {
        return Err(Error::InvalidParameter("negative noise variance".into()));
    }
    Ok(xa
        .iter()
        .zip(xb)
        .map(|(&a, &b)| ch.h_ac * a + ch.h_bc * b + complex_noise(rng, ch.sigma2))
        .collect())
}

/// `y(n) = gain x(n) + w(n)`.
pub fn bc_transmit<R: Rng + ?Sized>(xc: &[C64], gain: C64, sigma2: f64, rng: &mut R) -> Result<Vec<C64>> {
    if sigma2 < 0.0 {
        return Err(Error::InvalidParameter("negative noise variance".into()));
    }
    Ok(xc.iter().map(|&x| gain * x + complex_noise(rng, sigma2)).collect())
}

/// Noise variance for an SNR per information symbol of `snr_db` at code
/// rate `r`: `sigma2 = 1 / (2 r 10^(snr_db / 10))`.
pub fn snr_to_sigma2(snr_db: f64, r: f64) -> Result<f64> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidParameter(format!("code rate {r} outside (0, 1]")));
    }
    Ok(1.0 / (2.0 * r * 10f64.powf(snr_db / 10.0)))
}

/// Independent unit-power Rayleigh gains `(h_ac, h_bc)`.
pub fn sample_rayleigh_pair<R: Rng + ?Sized>(rng: &mut R) -> (C64, C64) {
    (complex_noise(rng, 0.5), complex_noise(rng, 0.5))
}
