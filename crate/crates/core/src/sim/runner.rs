//! Error-rate curves over an SNR grid.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{map_indexed_with, Exec};

use super::config::{ChannelMode, ExperimentConfig, Scheme};
use super::frame::{FrameContext, FrameResult};
use super::stats::{wilson, Z95};

/// Accumulated results of one (SNR, scheme) point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub snr_db: f64,
    pub scheme: Scheme,
    pub frames: u64,
    pub symbols: u64,
    pub relay_symbol_errors: u64,
    pub relay_frame_errors: u64,
    /// `None` when sources were not decoded.
    pub src_a_frame_errors: Option<u64>,
    pub src_b_frame_errors: Option<u64>,
    pub iterations: u64,
    /// Wilson interval on the primary metric: relay SER for deterministic
    /// gains, relay FER for fading.
    pub ci_low: f64,
    pub ci_high: f64,
}

impl CurvePoint {
    pub fn ser_relay(&self) -> f64 {
        ratio(self.relay_symbol_errors, self.symbols)
    }

    pub fn fer_relay(&self) -> f64 {
        ratio(self.relay_frame_errors, self.frames)
    }

    pub fn fer_src_a(&self) -> Option<f64> {
        self.src_a_frame_errors.map(|e| ratio(e, self.frames))
    }

    pub fn fer_src_b(&self) -> Option<f64> {
        self.src_b_frame_errors.map(|e| ratio(e, self.frames))
    }

    pub fn avg_iters(&self) -> f64 {
        ratio(self.iterations, self.frames)
    }

    fn new(snr_db: f64, scheme: Scheme, sources: bool) -> Self {
        Self {
            snr_db,
            scheme,
            frames: 0,
            symbols: 0,
            relay_symbol_errors: 0,
            relay_frame_errors: 0,
            src_a_frame_errors: sources.then_some(0),
            src_b_frame_errors: sources.then_some(0),
            iterations: 0,
            ci_low: 0.0,
            ci_high: 1.0,
        }
    }

    fn absorb(&mut self, r: &FrameResult) {
        self.frames += 1;
        self.symbols += r.symbols as u64;
        self.relay_symbol_errors += r.relay_symbol_errors as u64;
        self.relay_frame_errors += r.relay_frame_error as u64;
        if let (Some(acc), Some(e)) = (self.src_a_frame_errors.as_mut(), r.src_a_error) {
            *acc += e as u64;
        }
        if let (Some(acc), Some(e)) = (self.src_b_frame_errors.as_mut(), r.src_b_error) {
            *acc += e as u64;
        }
        self.iterations += r.iterations as u64;
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        f64::NAN
    } else {
        a as f64 / b as f64
    }
}

/// Runs every (SNR, scheme) point of `cfg`. Frames are processed in
/// fixed-size batches and the stop rule is checked between batches, so the
/// result does not depend on `exec` or the thread count.
pub fn run_experiment(cfg: &ExperimentConfig, exec: Exec) -> Result<Vec<CurvePoint>> {
    run_experiment_with(cfg, exec, |_| {})
}

/// As [`run_experiment`], reporting each finished point.
pub fn run_experiment_with(
    cfg: &ExperimentConfig,
    exec: Exec,
    mut on_point: impl FnMut(&CurvePoint),
) -> Result<Vec<CurvePoint>> {
    let ctx = FrameContext::new(cfg)?;
    let mut out = Vec::new();
    for point in 0..cfg.snr_db.len() {
        for &scheme in &cfg.schemes {
            let p = run_point(&ctx, scheme, point, exec)?;
            on_point(&p);
            out.push(p);
        }
    }
    Ok(out)
}

/// Accumulates frames for one point until the budget or error target.
pub fn run_point(ctx: &FrameContext, scheme: Scheme, point: usize, exec: Exec) -> Result<CurvePoint> {
    let cfg = ctx.config();
    let mut acc = CurvePoint::new(cfg.snr_db[point], scheme, cfg.decode_sources);
    let mut next = 0usize;
    while next < cfg.max_frames && (acc.relay_frame_errors as usize) < cfg.max_frame_errors {
        let n = cfg.batch.min(cfg.max_frames - next);
        let start = next;
        let batch = map_indexed_with(exec, n, |i| ctx.run_frame(scheme, point, start + i));
        for r in batch {
            acc.absorb(&r?);
        }
        next += n;
    }
    let (lo, hi) = match cfg.channel {
        ChannelMode::Deterministic { .. } => wilson(acc.relay_symbol_errors, acc.symbols, Z95),
        ChannelMode::Rayleigh {} => wilson(acc.relay_frame_errors, acc.frames, Z95),
    };
    acc.ci_low = lo;
    acc.ci_high = hi;
    Ok(acc)
}

/// Deterministic-gain curves; errors if `cfg` asks for fading.
pub fn run_deterministic(cfg: &ExperimentConfig, exec: Exec) -> Result<Vec<CurvePoint>> {
    if !matches!(cfg.channel, ChannelMode::Deterministic { .. }) {
        return Err(Error::Config("expected a deterministic channel".into()));
    }
    run_experiment(cfg, exec)
}

/// Rayleigh block-fading curves; errors if `cfg` fixes the gains.
pub fn run_fading(cfg: &ExperimentConfig, exec: Exec) -> Result<Vec<CurvePoint>> {
    if !matches!(cfg.channel, ChannelMode::Rayleigh {}) {
        return Err(Error::Config("expected a rayleigh channel".into()));
    }
    run_experiment(cfg, exec)
}

/// CSV header of [`write_curve_csv`].
pub const CURVE_HEADER: &str = "snr_db,scheme,ser_relay,fer_relay,fer_src_a,fer_src_b,ci_low,ci_high,frames,avg_iters";

fn fmt(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.6e}"),
        _ => "nan".to_string(),
    }
}

/// Writes one row per point.
pub fn write_curve_csv<W: Write>(points: &[CurvePoint], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{CURVE_HEADER}")?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            p.snr_db,
            p.scheme.name(),
            fmt(Some(p.ser_relay())),
            fmt(Some(p.fer_relay())),
            fmt(p.fer_src_a()),
            fmt(p.fer_src_b()),
            fmt(Some(p.ci_low)),
            fmt(Some(p.ci_high)),
            p.frames,
            fmt(Some(p.avg_iters())),
        )?;
    }
    Ok(())
}
