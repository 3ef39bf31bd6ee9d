//! Reference computations written without the library's internals.

use std::collections::HashMap;

use twr_pcd::channel::{ChannelState, Constellation, C64};
use twr_pcd::ldpc::{ParityCheckMatrix, SystematicEncoder};
use twr_pcd::mapping::ClusterMap;

/// Product in GF(4) by carry-less multiplication reduced modulo x^2 + x + 1.
pub fn gf4_poly_mul(a: u8, b: u8) -> u8 {
    let mut p: u8 = 0;
    for i in 0..2 {
        if (b >> i) & 1 == 1 {
            p ^= a << i;
        }
    }
    if p & 0b100 != 0 {
        p ^= 0b111;
    }
    p
}

/// Gauss–Hermite nodes and weights for the weight `exp(-x^2)`, by Newton
/// iteration on the orthonormal Hermite recurrence.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * n as f64 + 1.0).sqrt() - 1.85575 * (2.0 * n as f64 + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / (j as f64 + 1.0)).sqrt() * p2 - (j as f64 / (j as f64 + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * n as f64).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-14 {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Mutual information of `y = alpha x + w`, `x` uniform over `points`, `w`
/// complex Gaussian with `sigma2` per real dimension, by a product
/// Gauss–Hermite rule with `n` nodes per dimension.
pub fn capacity_quadrature(alpha: C64, points: &[C64], sigma2: f64, n: usize) -> f64 {
    let (x, w) = gauss_hermite(n);
    let m = points.len();
    let s = (2.0 * sigma2).sqrt();
    let mut total = 0.0;
    for i in 0..m {
        for (xu, wu) in x.iter().zip(&w) {
            for (xv, wv) in x.iter().zip(&w) {
                let noise = C64::new(s * xu, s * xv);
                let f: f64 = (0..m)
                    .map(|j| {
                        let d = alpha * (points[i] - points[j]) + noise;
                        (-(d.norm_sqr() - noise.norm_sqr()) / (2.0 * sigma2)).exp()
                    })
                    .sum();
                total += wu * wv * f.log2();
            }
        }
    }
    (m as f64).log2() - total / (std::f64::consts::PI * m as f64)
}

/// Largest `R_AB + R_BA` over the polytope cut out by the four pairwise
/// constraints (the fourth read with `R_BA`) under reciprocal links, by
/// enumerating vertices.
pub fn sum_rate_vertices(c_ac: f64, c_bc: f64) -> f64 {
    // Constraints a * R_AB + b * R_BA <= c.
    let cons = [
        (1.0 / c_ac + 1.0 / c_bc, 0.0, 1.0),
        (1.0 / c_ac, 1.0 / c_ac, 1.0),
        (1.0 / c_bc, 1.0 / c_bc, 1.0),
        (0.0, 1.0 / c_bc + 1.0 / c_ac, 1.0),
        (-1.0, 0.0, 0.0),
        (0.0, -1.0, 0.0),
    ];
    let feasible = |x: f64, y: f64| cons.iter().all(|&(a, b, c)| a * x + b * y <= c + 1e-12);
    let mut best = 0.0f64;
    for i in 0..cons.len() {
        for j in i + 1..cons.len() {
            let (a1, b1, c1) = cons[i];
            let (a2, b2, c2) = cons[j];
            let det = a1 * b2 - a2 * b1;
            if det.abs() < 1e-15 {
                continue;
            }
            let x = (c1 * b2 - c2 * b1) / det;
            let y = (a1 * c2 - a2 * c1) / det;
            if feasible(x, y) {
                best = best.max(x + y);
            }
        }
    }
    best
}

/// Largest sum rate of the time-sharing region over a uniform grid of
/// `steps + 1` values of the sharing parameter.
pub fn sum_rate_time_sharing(c_ac: f64, c_bc: f64, steps: usize) -> f64 {
    (0..=steps)
        .map(|i| {
            let beta = i as f64 / steps as f64;
            let r_ab = (beta * c_ac).min((1.0 - beta) * c_bc);
            let r_ba = (beta * c_bc).min((1.0 - beta) * c_ac);
            r_ab + r_ba
        })
        .fold(0.0, f64::max)
}

/// Every codeword of `h`, by encoding all information words.
pub fn codebook(h: &ParityCheckMatrix) -> Vec<Vec<u8>> {
    let enc = SystematicEncoder::new(h);
    let q = h.field().order();
    let k = enc.dimension();
    (0..q.pow(k as u32))
        .map(|mut idx| {
            let info: Vec<u8> = (0..k)
                .map(|_| {
                    let s = (idx % q) as u8;
                    idx /= q;
                    s
                })
                .collect();
            enc.encode(&info).unwrap().0
        })
        .collect()
}

/// Exhaustive MAP estimate of the hard-map image word: posterior mass of
/// every codeword pair is accumulated on its image and the heaviest image
/// is returned.
pub fn relay_map_decision(
    book_a: &[Vec<u8>],
    book_b: &[Vec<u8>],
    y: &[C64],
    ch: &ChannelState,
    k: &Constellation,
    mh: &ClusterMap,
) -> Vec<u16> {
    let mut loglik: Vec<(Vec<u16>, f64)> = Vec::new();
    for ca in book_a {
        for cb in book_b {
            let ll: f64 = y
                .iter()
                .enumerate()
                .map(|(n, &yn)| {
                    let s = ch.h_ac * k.point(ca[n] as usize) + ch.h_bc * k.point(cb[n] as usize);
                    -(yn - s).norm_sqr() / (2.0 * ch.sigma2)
                })
                .sum();
            let img: Vec<u16> = ca.iter().zip(cb).map(|(&a, &b)| mh.get(a, b) as u16).collect();
            loglik.push((img, ll));
        }
    }
    let top = loglik.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
    let mut mass: HashMap<Vec<u16>, f64> = HashMap::new();
    for (img, ll) in loglik {
        *mass.entry(img).or_insert(0.0) += (ll - top).exp();
    }
    let mut best: Vec<(Vec<u16>, f64)> = mass.into_iter().collect();
    best.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    best.swap_remove(0).0
}

/// Per-symbol MAP estimate of `a ^ b` from one observation.
pub fn xor_symbol_map(y: C64, ch: &ChannelState, k: &Constellation) -> u8 {
    let q = k.order();
    let mut post = vec![0.0; q];
    for a in 0..q {
        for b in 0..q {
            let s = ch.h_ac * k.point(a) + ch.h_bc * k.point(b);
            post[a ^ b] += (-(y - s).norm_sqr() / (2.0 * ch.sigma2)).exp();
        }
    }
    let mut best = 0;
    for (i, &p) in post.iter().enumerate() {
        if p > post[best] {
            best = i;
        }
    }
    best as u8
}
