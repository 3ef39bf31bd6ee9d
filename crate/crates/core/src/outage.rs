//! Constrained-input capacity and the outage lower bound for block fading.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{complex_noise, sample_rayleigh_pair, snr_to_sigma2, Constellation, C64};
use crate::error::{Error, Result};
use crate::par;

/// Rates of one fade draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub s_u: f64,
    pub s_r: f64,
    pub c_ac: f64,
    pub c_bc: f64,
}

/// Monte Carlo estimate of the mutual information of `y = alpha x + w` with
/// `x` uniform over the `q`-point constellation and `w` complex Gaussian with
/// variance `sigma2` per real dimension. `n_samples` noise draws are used per
/// constellation point.
pub fn capacity_mc<R: Rng + ?Sized>(alpha: C64, q: usize, sigma2: f64, n_samples: usize, rng: &mut R) -> Result<f64> {
    if sigma2.is_nan() || sigma2 <= 0.0 {
        return Err(Error::InvalidParameter("noise variance must be positive".into()));
    }
    if n_samples == 0 {
        return Err(Error::InvalidParameter("need at least one noise sample".into()));
    }
    let k = Constellation::for_order(q);
    let pts: Vec<C64> = k.points().iter().map(|&p| alpha * p).collect();
    let inv = 1.0 / (2.0 * sigma2);
    let mut exps = vec![0.0; q];
    let mut total = 0.0;
    for m in 0..q {
        for _ in 0..n_samples {
            let w = complex_noise(rng, sigma2);
            let y = pts[m] + w;
            let base = w.norm_sqr();
            let mut top = f64::NEG_INFINITY;
            for (e, &p) in exps.iter_mut().zip(&pts) {
                *e = -((y - p).norm_sqr() - base) * inv;
                top = top.max(*e);
            }
            let s: f64 = exps.iter().map(|&e| (e - top).exp()).sum();
            total += (top + s.ln()) / std::f64::consts::LN_2;
        }
    }
    Ok((q as f64).log2() - total / (q * n_samples) as f64)
}

/// Largest sum rate over the two-phase outer bound with reciprocal links.
pub fn sum_rate_bound(c_ac: f64, c_bc: f64) -> f64 {
    c_ac.min(c_bc)
}

/// Target sum rate `r log2 q`.
pub fn target_sum_rate(r: f64, q: usize) -> f64 {
    r * (q as f64).log2()
}

/// Budget for [`outage_lower_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutageBudget {
    pub n_fades: usize,
    pub n_noise: usize,
}

impl Default for OutageBudget {
    fn default() -> Self {
        Self {
            n_fades: 10_000,
            n_noise: 200,
        }
    }
}

/// Fraction of Rayleigh fade draws whose sum-rate bound falls below the
/// target, per SNR point. Fade `i` at grid point `j` uses its own stream
/// derived from `(seed, j, i)`, so results do not depend on thread count.
pub fn outage_lower_bound(snr_grid: &[f64], q: usize, r: f64, budget: OutageBudget, seed: u64) -> Result<Vec<f64>> {
    if snr_grid.is_empty() {
        return Err(Error::InvalidParameter("empty SNR grid".into()));
    }
    if budget.n_fades == 0 || budget.n_noise == 0 {
        return Err(Error::InvalidParameter("outage budget must be positive".into()));
    }
    let s_r = target_sum_rate(r, q);
    snr_grid
        .iter()
        .enumerate()
        .map(|(j, &snr)| {
            let sigma2 = snr_to_sigma2(snr, r)?;
            let hits = par::map_indexed(budget.n_fades, |i| -> Result<bool> {
                let mut rng = stream(seed, j as u64, i as u64);
                Ok(fade_point(&mut rng, q, sigma2, s_r, budget.n_noise)?.s_u < s_r)
            });
            let mut count = 0usize;
            for h in hits {
                count += h? as usize;
            }
            Ok(count as f64 / budget.n_fades as f64)
        })
        .collect()
}

/// One fade draw with both link capacities.
pub fn fade_point<R: Rng + ?Sized>(rng: &mut R, q: usize, sigma2: f64, s_r: f64, n_noise: usize) -> Result<RatePoint> {
    let (h_ac, h_bc) = sample_rayleigh_pair(rng);
    let c_ac = capacity_mc(h_ac, q, sigma2, n_noise, rng)?;
    let c_bc = capacity_mc(h_bc, q, sigma2, n_noise, rng)?;
    Ok(RatePoint {
        s_u: sum_rate_bound(c_ac, c_bc),
        s_r,
        c_ac,
        c_bc,
    })
}

/// Independent stream for `(seed, a, b)`.
pub fn stream(seed: u64, a: u64, b: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b);
    rng
}

/// Writes `snr_db,p_out_lower` rows.
pub fn write_outage_csv<W: Write>(snr: &[f64], p: &[f64], mut w: W) -> std::io::Result<()> {
    writeln!(w, "snr_db,p_out_lower")?;
    for (s, v) in snr.iter().zip(p) {
        writeln!(w, "{s},{v:.6e}")?;
    }
    Ok(())
}
