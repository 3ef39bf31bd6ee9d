//! Small helpers for probability-domain message vectors.

/// Entries below this are clamped before renormalizing.
pub const UNDERFLOW_FLOOR: f64 = 1e-300;

/// Normalizes `v` to sum to one, clamping tiny entries to [`UNDERFLOW_FLOOR`].
///
/// Returns `false` if the vector carried no mass (all zero or non-finite);
/// in that case it is replaced by the uniform distribution.
#[inline]
pub fn normalize(v: &mut [f64]) -> bool {
    let sum: f64 = v.iter().sum();
    if !sum.is_finite() || sum <= 0.0 {
        let u = 1.0 / v.len() as f64;
        v.iter_mut().for_each(|x| *x = u);
        return false;
    }
    let inv = 1.0 / sum;
    let mut clamped = false;
    for x in v.iter_mut() {
        *x *= inv;
        if *x < UNDERFLOW_FLOOR {
            *x = UNDERFLOW_FLOOR;
            clamped = true;
        }
    }
    if clamped {
        let sum: f64 = v.iter().sum();
        v.iter_mut().for_each(|x| *x /= sum);
    }
    true
}

/// Index of the largest entry; ties go to the lowest index.
#[inline]
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Shannon entropy in bits.
pub fn entropy_bits(v: &[f64]) -> f64 {
    v.iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// XOR convolution over an additive group of order `out.len()` (a power of
/// two): `out[z] = sum_x f[x] g[x ^ z]`.
#[inline]
pub fn xor_convolve(f: &[f64], g: &[f64], out: &mut [f64]) {
    let n = out.len();
    debug_assert!(f.len() == n && g.len() == n);
    out.iter_mut().for_each(|o| *o = 0.0);
    for (x, &fx) in f.iter().enumerate() {
        if fx == 0.0 {
            continue;
        }
        for (y, &gy) in g.iter().enumerate() {
            out[x ^ y] += fx * gy;
        }
    }
}
