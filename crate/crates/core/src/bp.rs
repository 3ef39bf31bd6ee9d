//! Flooding sum-product decoding over GF(q) in the probability domain.
//!
//! Check nodes are updated by direct XOR convolution of the coefficient-
//! permuted incoming messages (forward/backward partial sums), which for the
//! small fields used here is cheaper than a transform.

use crate::ldpc::{is_codeword, ParityCheckMatrix};
use crate::prob::{argmax, normalize, xor_convolve};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BpOutcome {
    pub word: Vec<u8>,
    pub converged: bool,
    pub iterations: usize,
}

/// Reusable decoder scratch space for one matrix. Not shareable across
/// threads while decoding; create one per worker.
#[derive(Debug, Clone)]
pub struct BpDecoder<'a> {
    h: &'a ParityCheckMatrix,
    q: usize,
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    posterior: Vec<f64>,
    fwd: Vec<f64>,
    bwd: Vec<f64>,
    perm: Vec<f64>,
    tmp: Vec<f64>,
}

impl<'a> BpDecoder<'a> {
    pub fn new(h: &'a ParityCheckMatrix) -> Self {
        let q = h.field().order();
        let e = h.num_edges();
        let dr = h.max_row_weight();
        Self {
            h,
            q,
            v2c: vec![0.0; e * q],
            c2v: vec![0.0; e * q],
            posterior: vec![0.0; h.cols() * q],
            fwd: vec![0.0; (dr + 1) * q],
            bwd: vec![0.0; (dr + 1) * q],
            perm: vec![0.0; dr * q],
            tmp: vec![0.0; q],
        }
    }

    /// Posterior from the last decode, `N x q` row-major.
    pub fn posterior(&self) -> &[f64] {
        &self.posterior
    }

    /// Decodes from per-symbol priors (`N x q`, row-major, each row a
    /// probability vector).
    pub fn decode(&mut self, priors: &[f64], max_iter: usize) -> BpOutcome {
        let (h, q) = (self.h, self.q);
        let n = h.cols();
        assert_eq!(priors.len(), n * q, "prior length");

        for col in 0..n {
            let p = &priors[col * q..(col + 1) * q];
            self.posterior[col * q..(col + 1) * q].copy_from_slice(p);
            for &e in h.col_edges(col) {
                self.v2c[e * q..(e + 1) * q].copy_from_slice(p);
            }
        }
        let mut word = self.hard_decision();
        if is_codeword(h, &word) {
            return BpOutcome {
                word,
                converged: true,
                iterations: 0,
            };
        }
        for it in 1..=max_iter {
            for m in 0..h.rows() {
                self.check_update(m);
            }
            for col in 0..n {
                self.variable_update(col, &priors[col * q..(col + 1) * q]);
            }
            word = self.hard_decision();
            if is_codeword(h, &word) {
                return BpOutcome {
                    word,
                    converged: true,
                    iterations: it,
                };
            }
        }
        BpOutcome {
            word,
            converged: false,
            iterations: max_iter,
        }
    }

    fn hard_decision(&self) -> Vec<u8> {
        self.posterior
            .chunks_exact(self.q)
            .map(|p| argmax(p) as u8)
            .collect()
    }

    fn check_update(&mut self, m: usize) {
        let (h, q) = (self.h, self.q);
        let f = h.field();
        let edges = h.row_edges(m);
        let r = edges.len();
        // perm_i[x] = v2c_i[a] with x = h_i * a.
        for (i, e) in edges.clone().enumerate() {
            let coef = h.edge_value(e);
            for a in 0..q {
                self.perm[i * q + f.mul_raw(a as u8, coef) as usize] = self.v2c[e * q + a];
            }
        }
        self.fwd[..q].iter_mut().for_each(|x| *x = 0.0);
        self.fwd[0] = 1.0;
        for i in 0..r {
            let (done, rest) = self.fwd.split_at_mut((i + 1) * q);
            xor_convolve(&done[i * q..], &self.perm[i * q..(i + 1) * q], &mut rest[..q]);
        }
        self.bwd[r * q..(r + 1) * q].iter_mut().for_each(|x| *x = 0.0);
        self.bwd[r * q] = 1.0;
        for i in (0..r).rev() {
            let (head, tail) = self.bwd.split_at_mut((i + 1) * q);
            xor_convolve(&self.perm[i * q..(i + 1) * q], &tail[..q], &mut head[i * q..]);
        }
        for (i, e) in edges.enumerate() {
            xor_convolve(
                &self.fwd[i * q..(i + 1) * q],
                &self.bwd[(i + 1) * q..(i + 2) * q],
                &mut self.tmp,
            );
            let coef = h.edge_value(e);
            let out = &mut self.c2v[e * q..(e + 1) * q];
            for (a, o) in out.iter_mut().enumerate() {
                *o = self.tmp[f.mul_raw(a as u8, coef) as usize];
            }
            normalize(out);
        }
    }

    fn variable_update(&mut self, col: usize, prior: &[f64]) {
        let (h, q) = (self.h, self.q);
        let edges = h.col_edges(col);
        for &e in edges {
            let out = &mut self.v2c[e * q..(e + 1) * q];
            out.copy_from_slice(prior);
            for &o in edges {
                if o != e {
                    for (x, &w) in out.iter_mut().zip(&self.c2v[o * q..(o + 1) * q]) {
                        *x *= w;
                    }
                }
            }
            normalize(out);
        }
        let post = &mut self.posterior[col * q..(col + 1) * q];
        post.copy_from_slice(prior);
        for &e in edges {
            for (x, &w) in post.iter_mut().zip(&self.c2v[e * q..(e + 1) * q]) {
                *x *= w;
            }
        }
        normalize(post);
    }
}

/// One-shot decode; see [`BpDecoder::decode`].
pub fn bp_decode(h: &ParityCheckMatrix, priors: &[f64], max_iter: usize) -> BpOutcome {
    BpDecoder::new(h).decode(priors, max_iter)
}
