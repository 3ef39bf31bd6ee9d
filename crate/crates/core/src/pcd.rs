//! Pairwise check decoding at the relay.
//!
//! Messages live on the mapped alphabet of a first-stage map `M` (size q').
//! Check nodes combine incoming messages through the check-relation-tabs of
//! their correlative row pair; symbol nodes combine check messages with the
//! channel observation and correct for the output priors `p_k`. Hard
//! decisions are taken on a coarser map `M'` by summing soft values over the
//! classes `M` merges into.
//!
//! Two exact check kernels are provided. The tab kernel walks the decoder tab
//! rows. The pair kernel spreads each incoming message uniformly over the
//! symbol pairs of its cluster and convolves over the additive group
//! GF(q) x GF(q); since `F_W` counts backing pair assignments divided by the
//! cluster sizes of the other slots, both compute the same sum. The pair
//! kernel costs `O(r q^4)` per check regardless of tab size.

use std::io::Write;
use std::sync::Arc;

use crate::channel::{scaled_likelihoods, ChannelState, Constellation, C64};
use crate::error::{Error, Result};
use crate::gf::GfField;
use crate::ldpc::ParityCheckMatrix;
use crate::mapping::ClusterMap;
use crate::prob::{argmax, entropy_bits, normalize, xor_convolve};
use crate::tab::{CorrelativeRow, DecoderTab, EncoderTab, TabCache};

/// Check-node kernel selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKernel {
    /// Decoder-tab rows.
    Tabs,
    /// Cluster-spread convolution over pair space.
    PairConvolution,
    /// Tabs when every tab has at most [`AUTO_TAB_LIMIT`] tuples, else pairs.
    Auto,
}

/// When the decoder declares convergence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StopRule {
    /// The hard word satisfies every hard-map row.
    HardMap,
    /// Additionally, the soft-map argmax word satisfies every soft-map row.
    #[default]
    Both,
}

/// Largest `q'^r` for which [`CheckKernel::Auto`] picks the tab kernel.
pub const AUTO_TAB_LIMIT: u64 = 1024;

#[derive(Debug)]
enum KernelData {
    Tabs(Vec<Arc<(EncoderTab, DecoderTab)>>),
    Pair,
}

/// Immutable decoding graph for one code pair and map pair. Shareable across
/// threads; per-frame state lives in [`PcdDecoder`].
#[derive(Debug)]
pub struct PcdGraph {
    field: GfField,
    n: usize,
    rows: Vec<CorrelativeRow>,
    row_start: Vec<usize>,
    edge_col: Vec<usize>,
    col_edges: Vec<Vec<usize>>,
    ms: ClusterMap,
    mh: ClusterMap,
    proj: Vec<usize>,
    priors: Vec<f64>,
    inv_cluster: Vec<f64>,
    kernel: KernelData,
    /// Per edge, per hard output: group elements `(eta a) * q + (xi b)` of
    /// the pairs in that hard cluster, as a bitset of `words` u64 words.
    hard_sets: Vec<u64>,
    /// As `hard_sets`, for the soft map's clusters.
    soft_sets: Vec<u64>,
    words: usize,
}

impl PcdGraph {
    /// Builds the graph for codes `ha`, `hb` (same sparsity pattern), soft
    /// map `ms` and hard map `mh`, which `ms` must refine.
    pub fn new(
        ha: &ParityCheckMatrix,
        hb: &ParityCheckMatrix,
        ms: &ClusterMap,
        mh: &ClusterMap,
        kernel: CheckKernel,
    ) -> Result<Self> {
        Self::with_cache(ha, hb, ms, mh, kernel, &TabCache::new())
    }

    pub fn with_cache(
        ha: &ParityCheckMatrix,
        hb: &ParityCheckMatrix,
        ms: &ClusterMap,
        mh: &ClusterMap,
        kernel: CheckKernel,
        cache: &TabCache,
    ) -> Result<Self> {
        if !ha.same_pattern(hb) {
            return Err(Error::InvalidParameter("codes do not share a sparsity pattern".into()));
        }
        let field = ha.field().clone();
        let q = field.order();
        if ms.q() != q || mh.q() != q {
            return Err(Error::InvalidParameter("map alphabet differs from code field".into()));
        }
        for m in [ms, mh] {
            if let Some(v) = m.exclusive_law_violation() {
                return Err(Error::InvalidMapping(format!("exclusive law violated by {v:?}")));
            }
        }
        let proj = ms
            .projection_onto(mh)
            .ok_or_else(|| Error::InvalidMapping("soft map does not refine hard map".into()))?;
        let rows: Vec<CorrelativeRow> = (0..ha.rows())
            .map(|m| CorrelativeRow::from_matrices(ha, hb, m))
            .collect::<Result<_>>()?;
        let mut row_start = vec![0];
        let mut edge_col = Vec::new();
        let mut col_edges = vec![Vec::new(); ha.cols()];
        for r in &rows {
            for &c in &r.positions {
                col_edges[c].push(edge_col.len());
                edge_col.push(c);
            }
            row_start.push(edge_col.len());
        }

        let use_tabs = match kernel {
            CheckKernel::Tabs => true,
            CheckKernel::PairConvolution => false,
            CheckKernel::Auto => rows.iter().all(|r| {
                (ms.q_prime() as u64)
                    .checked_pow(r.weight() as u32)
                    .is_some_and(|s| s <= AUTO_TAB_LIMIT)
            }),
        };
        let kernel = if use_tabs {
            KernelData::Tabs(rows.iter().map(|r| cache.get(r, &field, ms)).collect::<Result<_>>()?)
        } else {
            KernelData::Pair
        };

        let words = (q * q).div_ceil(64);
        let hard_sets = constraint_sets(&rows, &field, mh, words);
        let soft_sets = constraint_sets(&rows, &field, ms, words);

        Ok(Self {
            n: ha.cols(),
            priors: ms.priors(),
            inv_cluster: ms.cluster_sizes().iter().map(|&s| 1.0 / s as f64).collect(),
            field,
            rows,
            row_start,
            edge_col,
            col_edges,
            ms: ms.clone(),
            mh: mh.clone(),
            proj,
            kernel,
            hard_sets,
            soft_sets,
            words,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn soft_map(&self) -> &ClusterMap {
        &self.ms
    }

    pub fn hard_map(&self) -> &ClusterMap {
        &self.mh
    }

    /// Output priors `p_k` of the soft map.
    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn uses_tabs(&self) -> bool {
        matches!(self.kernel, KernelData::Tabs(_))
    }

    pub fn num_edges(&self) -> usize {
        self.edge_col.len()
    }

    pub fn rows(&self) -> &[CorrelativeRow] {
        &self.rows
    }

    /// Whether a hard word satisfies every row: some choice of pairs inside
    /// the hard clusters satisfies both parity equations.
    pub fn hard_word_satisfies(&self, word: &[u16]) -> bool {
        (0..self.rows.len()).all(|m| self.row_satisfied(m, word, &self.hard_sets, self.mh.q_prime()))
    }

    /// As [`PcdGraph::hard_word_satisfies`], for a word over the soft map.
    pub fn soft_word_satisfies(&self, word: &[u16]) -> bool {
        (0..self.rows.len()).all(|m| self.row_satisfied(m, word, &self.soft_sets, self.ms.q_prime()))
    }

    fn row_satisfied(&self, m: usize, word: &[u16], sets: &[u64], qh: usize) -> bool {
        let w = self.words;
        let mut acc = vec![0u64; w];
        acc[0] = 1;
        let mut next = vec![0u64; w];
        for e in self.row_start[m]..self.row_start[m + 1] {
            let k = word[self.edge_col[e]] as usize;
            let set = &sets[(e * qh + k) * w..(e * qh + k + 1) * w];
            next.iter_mut().for_each(|x| *x = 0);
            for (si, &sw) in acc.iter().enumerate() {
                let mut bits = sw;
                while bits != 0 {
                    let s = si * 64 + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    for (gi, &gw) in set.iter().enumerate() {
                        let mut gb = gw;
                        while gb != 0 {
                            let g = gi * 64 + gb.trailing_zeros() as usize;
                            gb &= gb - 1;
                            let z = s ^ g;
                            next[z / 64] |= 1 << (z % 64);
                        }
                    }
                }
            }
            std::mem::swap(&mut acc, &mut next);
        }
        acc[0] & 1 == 1
    }

    /// Maps a pair word through the hard map.
    pub fn hard_image(&self, ca: &[u8], cb: &[u8]) -> Vec<u16> {
        ca.iter().zip(cb).map(|(&a, &b)| self.mh.get(a, b) as u16).collect()
    }
}

/// Per-symbol soft-map likelihoods `u'^k = sum over cluster k of
/// exp(-|y - h_ac x(a) - h_bc x(b)|^2 / (2 sigma2))`, normalized per symbol.
pub fn init_messages(y: &[C64], ch: &ChannelState, ms: &ClusterMap, k: &Constellation) -> Result<Vec<f64>> {
    let q = ms.q();
    if k.order() != q {
        return Err(Error::InvalidParameter("constellation order differs from map alphabet".into()));
    }
    let points: Vec<C64> = (0..q * q)
        .map(|p| ch.h_ac * k.point(p / q) + ch.h_bc * k.point(p % q))
        .collect();
    let qp = ms.q_prime();
    let mut out = vec![0.0; y.len() * qp];
    let mut lik = vec![0.0; q * q];
    for (n, &yn) in y.iter().enumerate() {
        scaled_likelihoods(yn, points.iter().copied(), ch.sigma2, &mut lik);
        let u = &mut out[n * qp..(n + 1) * qp];
        for (p, &l) in lik.iter().enumerate() {
            u[ms.get_index(p)] += l;
        }
        if !normalize(u) {
            return Err(Error::ZeroLikelihood(n));
        }
    }
    Ok(out)
}

/// Unnormalized tab-kernel check message for `slot`: `v^k = sum_rows F_W
/// prod_{i != slot} t_i(row_i)`. `incoming` holds `r` messages of length q'.
pub fn tab_check_message(tab: &DecoderTab, slot: usize, incoming: &[&[f64]], out: &mut [f64]) {
    for (k, o) in out.iter_mut().enumerate() {
        let mut v = 0.0;
        for (row, f_w) in tab.rows(slot, k) {
            let mut prod = f_w;
            let mut j = 0;
            for (i, msg) in incoming.iter().enumerate() {
                if i != slot {
                    prod *= msg[row[j] as usize];
                    j += 1;
                }
            }
            v += prod;
        }
        *o = v;
    }
}

/// Scratch for the pair kernel.
#[derive(Debug, Clone)]
struct PairScratch {
    spread: Vec<f64>,
    fwd: Vec<f64>,
    bwd: Vec<f64>,
    tmp: Vec<f64>,
}

impl PairScratch {
    fn new(q2: usize, max_r: usize) -> Self {
        Self {
            spread: vec![0.0; max_r * q2],
            fwd: vec![0.0; (max_r + 1) * q2],
            bwd: vec![0.0; (max_r + 1) * q2],
            tmp: vec![0.0; q2],
        }
    }
}

/// Per-edge trace entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub symbol: usize,
    pub entropy: f64,
}

/// Writes a trace as CSV with header `iteration,symbol,entropy`.
pub fn write_trace_csv<W: Write>(rows: &[TraceRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "iteration,symbol,entropy")?;
    for r in rows {
        writeln!(w, "{},{},{:.12e}", r.iteration, r.symbol, r.entropy)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcdOutcome {
    /// Hard word over the hard map's canonical outputs.
    pub word: Vec<u16>,
    pub converged: bool,
    pub iterations: usize,
    /// Messages that had to be reset because their product vanished.
    pub renorm_failures: usize,
}

/// Per-frame decoder state over a shared [`PcdGraph`].
#[derive(Debug, Clone)]
pub struct PcdDecoder<'g> {
    g: &'g PcdGraph,
    u: Vec<f64>,
    t: Vec<f64>,
    w: Vec<f64>,
    soft: Vec<f64>,
    hard_soft: Vec<f64>,
    corr: Vec<Vec<f64>>,
    v: Vec<f64>,
    pair: PairScratch,
    trace: Option<Vec<TraceRow>>,
    failures: usize,
    stop: StopRule,
}

impl<'g> PcdDecoder<'g> {
    pub fn new(g: &'g PcdGraph) -> Self {
        let qp = g.ms.q_prime();
        let e = g.num_edges();
        let max_r = g.rows.iter().map(|r| r.weight()).max().unwrap_or(0);
        let max_o = g.col_edges.iter().map(|c| c.len()).max().unwrap_or(0);
        // corr[o][k] = p_k^{-o}
        let corr = (0..=max_o)
            .map(|o| g.priors.iter().map(|&p| p.powi(-(o as i32))).collect())
            .collect();
        let q = g.field.order();
        Self {
            g,
            u: vec![0.0; g.n * qp],
            t: vec![0.0; e * qp],
            w: vec![0.0; e * qp],
            soft: vec![0.0; g.n * qp],
            hard_soft: vec![0.0; g.n * g.mh.q_prime()],
            corr,
            v: vec![0.0; qp],
            pair: PairScratch::new(q * q, max_r),
            trace: None,
            failures: 0,
            stop: StopRule::default(),
        }
    }

    pub fn with_stop_rule(mut self, stop: StopRule) -> Self {
        self.stop = stop;
        self
    }

    /// Records per-symbol entropy of the soft decision every iteration.
    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn trace(&self) -> Option<&[TraceRow]> {
        self.trace.as_deref()
    }

    /// Symbol-to-check messages, `E x q'`, edges in row-major order.
    pub fn symbol_messages(&self) -> &[f64] {
        &self.t
    }

    /// Check-to-symbol messages, `E x q'`.
    pub fn check_messages(&self) -> &[f64] {
        &self.w
    }

    /// Normalized soft decision over the soft map, `N x q'`.
    pub fn soft_decision(&self) -> &[f64] {
        &self.soft
    }

    /// Normalized soft decision over the hard map, `N x q_h`.
    pub fn hard_posterior(&self) -> &[f64] {
        &self.hard_soft
    }

    /// Decodes a received word.
    pub fn decode(&mut self, y: &[C64], ch: &ChannelState, k: &Constellation, max_iter: usize) -> Result<PcdOutcome> {
        if y.len() != self.g.n {
            return Err(Error::LengthMismatch {
                expected: self.g.n,
                got: y.len(),
            });
        }
        let u = init_messages(y, ch, &self.g.ms, k)?;
        self.decode_likelihoods(&u, max_iter)
    }

    /// Decodes from per-symbol soft-map likelihoods (`N x q'`).
    pub fn decode_likelihoods(&mut self, u: &[f64], max_iter: usize) -> Result<PcdOutcome> {
        let g = self.g;
        let qp = g.ms.q_prime();
        if u.len() != g.n * qp {
            return Err(Error::LengthMismatch {
                expected: g.n * qp,
                got: u.len(),
            });
        }
        self.failures = 0;
        if let Some(t) = self.trace.as_mut() {
            t.clear();
        }
        self.u.copy_from_slice(u);
        for n in 0..g.n {
            let un = &mut self.u[n * qp..(n + 1) * qp];
            if !normalize(un) {
                return Err(Error::ZeroLikelihood(n));
            }
            for &e in &g.col_edges[n] {
                self.t[e * qp..(e + 1) * qp].copy_from_slice(&self.u[n * qp..(n + 1) * qp]);
            }
        }
        self.soft.copy_from_slice(&self.u);
        let (mut word, mut ok) = self.decide(0);
        if ok {
            return Ok(self.outcome(word, true, 0));
        }
        for it in 1..=max_iter {
            self.check_update();
            self.symbol_update();
            (word, ok) = self.decide(it);
            if ok {
                return Ok(self.outcome(word, true, it));
            }
        }
        Ok(self.outcome(word, false, max_iter))
    }

    fn outcome(&self, word: Vec<u16>, converged: bool, iterations: usize) -> PcdOutcome {
        PcdOutcome {
            word,
            converged,
            iterations,
            renorm_failures: self.failures,
        }
    }

    /// All check nodes, reading only symbol-to-check messages.
    pub fn check_update(&mut self) {
        let g = self.g;
        for m in 0..g.rows.len() {
            match &g.kernel {
                KernelData::Tabs(tabs) => self.check_row_tabs(m, &tabs[m].1),
                KernelData::Pair => self.check_row_pairs(m),
            }
        }
    }

    fn check_row_tabs(&mut self, m: usize, tab: &DecoderTab) {
        let qp = self.g.ms.q_prime();
        let (lo, hi) = (self.g.row_start[m], self.g.row_start[m + 1]);
        for slot in 0..hi - lo {
            let incoming: Vec<&[f64]> = (lo..hi).map(|e| &self.t[e * qp..(e + 1) * qp]).collect();
            tab_check_message(tab, slot, &incoming, &mut self.v);
            let e = lo + slot;
            let out = &mut self.w[e * qp..(e + 1) * qp];
            out.copy_from_slice(&self.v);
            if !normalize(out) {
                self.failures += 1;
            }
        }
    }

    fn check_row_pairs(&mut self, m: usize) {
        let g = self.g;
        let f = &g.field;
        let q = f.order();
        let q2 = q * q;
        let qp = g.ms.q_prime();
        let row = &g.rows[m];
        let lo = g.row_start[m];
        let r = row.weight();
        let s = &mut self.pair;
        for i in 0..r {
            let t = &self.t[(lo + i) * qp..(lo + i + 1) * qp];
            let spread = &mut s.spread[i * q2..(i + 1) * q2];
            for p in 0..q2 {
                let (a, b) = ((p / q) as u8, (p % q) as u8);
                let gidx = f.mul_raw(row.eta[i], a) as usize * q + f.mul_raw(row.xi[i], b) as usize;
                let k = g.ms.get_index(p);
                spread[gidx] = t[k] * g.inv_cluster[k];
            }
        }
        s.fwd[..q2].iter_mut().for_each(|x| *x = 0.0);
        s.fwd[0] = 1.0;
        for i in 0..r {
            let (done, rest) = s.fwd.split_at_mut((i + 1) * q2);
            xor_convolve(&done[i * q2..], &s.spread[i * q2..(i + 1) * q2], &mut rest[..q2]);
        }
        s.bwd[r * q2..(r + 1) * q2].iter_mut().for_each(|x| *x = 0.0);
        s.bwd[r * q2] = 1.0;
        for i in (0..r).rev() {
            let (head, tail) = s.bwd.split_at_mut((i + 1) * q2);
            xor_convolve(&s.spread[i * q2..(i + 1) * q2], &tail[..q2], &mut head[i * q2..]);
        }
        for i in 0..r {
            xor_convolve(&s.fwd[i * q2..(i + 1) * q2], &s.bwd[(i + 1) * q2..(i + 2) * q2], &mut s.tmp);
            let e = lo + i;
            let out = &mut self.w[e * qp..(e + 1) * qp];
            out.iter_mut().for_each(|x| *x = 0.0);
            for p in 0..q2 {
                let (a, b) = ((p / q) as u8, (p % q) as u8);
                let gidx = f.mul_raw(row.eta[i], a) as usize * q + f.mul_raw(row.xi[i], b) as usize;
                out[g.ms.get_index(p)] += s.tmp[gidx];
            }
            if !normalize(out) {
                self.failures += 1;
            }
        }
    }

    /// All symbol nodes: extrinsic messages and the soft decision.
    pub fn symbol_update(&mut self) {
        let g = self.g;
        let qp = g.ms.q_prime();
        for n in 0..g.n {
            let edges = &g.col_edges[n];
            let o = edges.len();
            let un = &self.u[n * qp..(n + 1) * qp];
            for &e in edges {
                let out = &mut self.t[e * qp..(e + 1) * qp];
                for ((x, &uk), &c) in out.iter_mut().zip(un).zip(&self.corr[o.saturating_sub(1)]) {
                    *x = uk * c;
                }
                for &other in edges {
                    if other != e {
                        for (x, &wk) in out.iter_mut().zip(&self.w[other * qp..(other + 1) * qp]) {
                            *x *= wk;
                        }
                    }
                }
                if !normalize(out) {
                    self.failures += 1;
                }
            }
            let soft = &mut self.soft[n * qp..(n + 1) * qp];
            for ((x, &uk), &c) in soft.iter_mut().zip(un).zip(&self.corr[o]) {
                *x = uk * c;
            }
            for &e in edges {
                for (x, &wk) in soft.iter_mut().zip(&self.w[e * qp..(e + 1) * qp]) {
                    *x *= wk;
                }
            }
            if !normalize(soft) {
                self.failures += 1;
            }
        }
    }

    /// Hard decision over the hard map and the satisfaction flag.
    fn decide(&mut self, iteration: usize) -> (Vec<u16>, bool) {
        let g = self.g;
        let qp = g.ms.q_prime();
        let qh = g.mh.q_prime();
        let mut word = Vec::with_capacity(g.n);
        for n in 0..g.n {
            let h = &mut self.hard_soft[n * qh..(n + 1) * qh];
            h.iter_mut().for_each(|x| *x = 0.0);
            for (k, &s) in self.soft[n * qp..(n + 1) * qp].iter().enumerate() {
                h[g.proj[k]] += s;
            }
            word.push(argmax(h) as u16);
            if let Some(tr) = self.trace.as_mut() {
                tr.push(TraceRow {
                    iteration,
                    symbol: n,
                    entropy: entropy_bits(&self.soft[n * qp..(n + 1) * qp]),
                });
            }
        }
        let mut ok = g.hard_word_satisfies(&word);
        if ok && self.stop == StopRule::Both {
            let soft_word: Vec<u16> = self.soft.chunks_exact(qp).map(|s| argmax(s) as u16).collect();
            ok = g.soft_word_satisfies(&soft_word);
        }
        (word, ok)
    }
}

/// Per edge and map output, the bitset of group elements `(eta a) * q + (xi b)`
/// over the pairs in that cluster.
fn constraint_sets(rows: &[CorrelativeRow], field: &GfField, map: &ClusterMap, words: usize) -> Vec<u64> {
    let q = field.order();
    let qp = map.q_prime();
    let edges: usize = rows.iter().map(|r| r.weight()).sum();
    let mut sets = vec![0u64; edges * qp * words];
    let mut e = 0;
    for r in rows {
        for i in 0..r.weight() {
            for p in 0..q * q {
                let (a, b) = ((p / q) as u8, (p % q) as u8);
                let g = field.mul_raw(r.eta[i], a) as usize * q + field.mul_raw(r.xi[i], b) as usize;
                let k = map.get_index(p);
                sets[(e * qp + k) * words + g / 64] |= 1 << (g % 64);
            }
            e += 1;
        }
    }
    sets
}

/// One-shot decode; see [`PcdDecoder::decode`].
pub fn pcd_decode(
    graph: &PcdGraph,
    y: &[C64],
    ch: &ChannelState,
    k: &Constellation,
    max_iter: usize,
) -> Result<PcdOutcome> {
    PcdDecoder::new(graph).decode(y, ch, k, max_iter)
}
