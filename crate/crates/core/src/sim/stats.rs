//! Error-rate statistics.

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if k as f64 == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Whether two closed intervals intersect.
pub fn overlaps(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 <= b.1 && b.0 <= a.1
}

/// SNR at which a decreasing error curve first crosses `level`, by linear
/// interpolation of `log10(rate)` between the bracketing grid points. Zero
/// rates are skipped as interpolation anchors.
pub fn snr_at_level(snr: &[f64], rate: &[f64], level: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = snr
        .iter()
        .zip(rate)
        .filter(|(_, &r)| r > 0.0)
        .map(|(&s, &r)| (s, r.log10()))
        .collect();
    let target = level.log10();
    pts.windows(2).find_map(|w| {
        let ((s0, r0), (s1, r1)) = (w[0], w[1]);
        if r0 >= target && r1 <= target && r0 != r1 {
            Some(s0 + (target - r0) * (s1 - s0) / (r1 - r0))
        } else if r0 == target {
            Some(s0)
        } else {
            None
        }
    })
}
