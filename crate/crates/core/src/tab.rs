//! Check-relation-tabs: the constraints that a pair of parity checks places on
//! the mapped relay symbols.
//!
//! For one correlative row pair (coefficients `eta` on code A and `xi` on code
//! B over shared positions), every assignment of symbol pairs to all but one
//! position determines the remaining pair through both check equations. Mapping
//! each pair through a [`ClusterMap`] gives an output tuple; an
//! [`EncoderTab`] records how many pair assignments back each output tuple.
//! The [`DecoderTab`] reverse-indexes those tuples by (position, output) with
//! weight `F_W = count / prod_{other slots} |cluster|`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::GfField;
use crate::ldpc::ParityCheckMatrix;
use crate::mapping::ClusterMap;

/// Upper limit on `q'^r`, the dense output-tuple space of one tab.
pub const MAX_TAB_ENTRIES: u64 = 10_000_000;
/// Upper limit on `q^(2(r-1))`, the pair assignments enumerated per tab.
pub const MAX_ENUMERATION: u64 = 100_000_000;

/// One correlative row pair: shared positions and the nonzero coefficients of
/// each code on them.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CorrelativeRow {
    pub positions: Vec<usize>,
    pub eta: Vec<u8>,
    pub xi: Vec<u8>,
}

impl CorrelativeRow {
    /// Row `m` of both matrices.
    pub fn from_matrices(ha: &ParityCheckMatrix, hb: &ParityCheckMatrix, m: usize) -> Result<Self> {
        if ha.field().order() != hb.field().order() {
            return Err(Error::InvalidParameter("codes over different fields".into()));
        }
        let positions = ha.row_support(m).to_vec();
        if hb.row_support(m) != positions.as_slice() {
            return Err(Error::InvalidParameter(format!("row {m} has different supports in the two codes")));
        }
        Ok(Self {
            positions,
            eta: ha.row_values(m).to_vec(),
            xi: hb.row_values(m).to_vec(),
        })
    }

    pub fn weight(&self) -> usize {
        self.positions.len()
    }

    fn validate(&self, field: &GfField) -> Result<()> {
        let r = self.positions.len();
        if self.eta.len() != r || self.xi.len() != r {
            return Err(Error::InvalidParameter("coefficient count differs from position count".into()));
        }
        if r < 2 {
            return Err(Error::InvalidParameter("a check needs at least two positions".into()));
        }
        let q = field.order();
        if self.eta.iter().chain(&self.xi).any(|&v| v == 0 || v as usize >= q) {
            return Err(Error::InvalidParameter("row coefficients must be nonzero field elements".into()));
        }
        Ok(())
    }
}

/// Achievable output tuples for one correlative row pair under one map.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderTab {
    row: CorrelativeRow,
    q_prime: usize,
    cluster_sizes: Vec<usize>,
    labels: Vec<String>,
    /// Achievable tuples as base-q' indices, slot 0 most significant; sorted.
    tuples: Vec<u64>,
    counts: Vec<u32>,
}

/// Known outputs at all slots but the last, and the distribution of the last.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderRow {
    pub known: Vec<u16>,
    pub outcomes: Vec<(u16, f64)>,
}

fn pow_checked(base: usize, exp: usize) -> Option<u64> {
    (base as u64).checked_pow(exp as u32)
}

/// Enumerates the pair assignments of a row and tallies output tuples.
pub fn build_encoder_tab(row: &CorrelativeRow, field: &GfField, map: &ClusterMap) -> Result<EncoderTab> {
    row.validate(field)?;
    let q = field.order();
    if map.q() != q {
        return Err(Error::InvalidParameter(format!("map over Z_{} used with GF({q})", map.q())));
    }
    let r = row.weight();
    let qp = map.q_prime();
    let space = pow_checked(qp, r).filter(|&s| s <= MAX_TAB_ENTRIES).ok_or_else(|| {
        Error::TabTooLarge(format!("{qp}^{r} output tuples exceed {MAX_TAB_ENTRIES}"))
    })?;
    let enumeration = pow_checked(q * q, r - 1).filter(|&s| s <= MAX_ENUMERATION).ok_or_else(|| {
        Error::TabTooLarge(format!("{}^{} pair assignments exceed {MAX_ENUMERATION}", q * q, r - 1))
    })?;

    let mut dense = vec![0u32; space as usize];
    let inv_eta = field.inv_raw(row.eta[r - 1]);
    let inv_xi = field.inv_raw(row.xi[r - 1]);
    let mut pairs = vec![0usize; r - 1];
    for _ in 0..enumeration {
        let (mut sa, mut sb, mut idx) = (0u8, 0u8, 0u64);
        for (i, &p) in pairs.iter().enumerate() {
            let (a, b) = ((p / q) as u8, (p % q) as u8);
            sa ^= field.mul_raw(row.eta[i], a);
            sb ^= field.mul_raw(row.xi[i], b);
            idx = idx * qp as u64 + map.get_index(p) as u64;
        }
        let a = field.mul_raw(inv_eta, sa);
        let b = field.mul_raw(inv_xi, sb);
        idx = idx * qp as u64 + map.get(a, b) as u64;
        dense[idx as usize] += 1;
        // Odometer increment, last slot fastest.
        for p in pairs.iter_mut().rev() {
            *p += 1;
            if *p < q * q {
                break;
            }
            *p = 0;
        }
    }
    let (tuples, counts) = dense
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| (i as u64, c))
        .unzip();
    Ok(EncoderTab {
        row: row.clone(),
        q_prime: qp,
        cluster_sizes: map.cluster_sizes(),
        labels: map.labels().to_vec(),
        tuples,
        counts,
    })
}

impl EncoderTab {
    pub fn row(&self) -> &CorrelativeRow {
        &self.row
    }

    pub fn positions(&self) -> &[usize] {
        &self.row.positions
    }

    pub fn weight(&self) -> usize {
        self.row.weight()
    }

    pub fn q_prime(&self) -> usize {
        self.q_prime
    }

    pub fn cluster_sizes(&self) -> &[usize] {
        &self.cluster_sizes
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Number of distinct known-output tuples, `q'^(r-1)`.
    pub fn s_e(&self) -> u64 {
        (self.q_prime as u64).pow(self.weight() as u32 - 1)
    }

    /// Number of achievable output tuples.
    pub fn s_d(&self) -> usize {
        self.tuples.len()
    }

    /// Average number of possible outputs per known tuple, `S_D / S_E`.
    pub fn ambiguity(&self) -> f64 {
        self.s_d() as f64 / self.s_e() as f64
    }

    fn encode(&self, tuple: &[u16]) -> Option<u64> {
        if tuple.len() != self.weight() || tuple.iter().any(|&k| k as usize >= self.q_prime) {
            return None;
        }
        Some(tuple.iter().fold(0u64, |acc, &k| acc * self.q_prime as u64 + k as u64))
    }

    fn decode(&self, mut idx: u64) -> Vec<u16> {
        let mut out = vec![0u16; self.weight()];
        for slot in out.iter_mut().rev() {
            *slot = (idx % self.q_prime as u64) as u16;
            idx /= self.q_prime as u64;
        }
        out
    }

    /// Iterates achievable tuples in lexicographic order with their backing
    /// assignment counts.
    pub fn tuples(&self) -> impl Iterator<Item = (Vec<u16>, u32)> + '_ {
        self.tuples.iter().zip(&self.counts).map(|(&i, &c)| (self.decode(i), c))
    }

    /// Number of pair assignments mapping to `tuple` (zero if unachievable).
    pub fn count(&self, tuple: &[u16]) -> u32 {
        self.encode(tuple)
            .and_then(|i| self.tuples.binary_search(&i).ok())
            .map_or(0, |j| self.counts[j])
    }

    pub fn is_achievable(&self, tuple: &[u16]) -> bool {
        self.count(tuple) > 0
    }

    /// Probability that slot `slot` takes output `k` given the other slots'
    /// outputs, when their pairs are uniform within their clusters.
    pub fn generation_probability(&self, tuple_with_target: &[u16], slot: usize) -> f64 {
        let denom: usize = tuple_with_target
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != slot)
            .map(|(_, &k)| self.cluster_sizes[k as usize])
            .product();
        self.count(tuple_with_target) as f64 / denom as f64
    }

    /// Forward view with the last slot as the parity position: one entry per
    /// known tuple, in lexicographic order.
    pub fn known_rows(&self) -> Vec<EncoderRow> {
        let mut rows: Vec<EncoderRow> = Vec::new();
        let last = self.weight() - 1;
        for (t, _) in self.tuples() {
            let known = t[..last].to_vec();
            let p = self.generation_probability(&t, last);
            match rows.last_mut() {
                Some(row) if row.known == known => row.outcomes.push((t[last], p)),
                _ => rows.push(EncoderRow {
                    known,
                    outcomes: vec![(t[last], p)],
                }),
            }
        }
        rows
    }

    /// All pair assignments backing `tuple`, by direct enumeration of each
    /// slot's cluster.
    pub fn backing_assignments(&self, tuple: &[u16], field: &GfField, map: &ClusterMap) -> Vec<Vec<(u8, u8)>> {
        let clusters: Vec<Vec<(u8, u8)>> = tuple.iter().map(|&k| map.cluster(k as usize)).collect();
        let mut out = Vec::new();
        let mut idx = vec![0usize; tuple.len()];
        loop {
            let pairs: Vec<(u8, u8)> = idx.iter().zip(&clusters).map(|(&i, c)| c[i]).collect();
            let (sa, sb) = pairs.iter().enumerate().fold((0u8, 0u8), |(sa, sb), (i, &(a, b))| {
                (sa ^ field.mul_raw(self.row.eta[i], a), sb ^ field.mul_raw(self.row.xi[i], b))
            });
            if sa == 0 && sb == 0 {
                out.push(pairs);
            }
            let mut slot = tuple.len();
            loop {
                if slot == 0 {
                    return out;
                }
                slot -= 1;
                idx[slot] += 1;
                if idx[slot] < clusters[slot].len() {
                    break;
                }
                idx[slot] = 0;
            }
        }
    }
}

/// Reverse index of an [`EncoderTab`]: for each slot and output value, the
/// achievable outputs at the other slots with their weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderTab {
    weight: usize,
    q_prime: usize,
    offsets: Vec<usize>,
    rows: Vec<u16>,
    weights: Vec<f64>,
}

pub fn build_decoder_tab(e: &EncoderTab) -> DecoderTab {
    let r = e.weight();
    let qp = e.q_prime();
    let mut buckets: Vec<Vec<(Vec<u16>, f64)>> = vec![Vec::new(); r * qp];
    for (t, _) in e.tuples() {
        for slot in 0..r {
            let f_w = e.generation_probability(&t, slot);
            let rest: Vec<u16> = t.iter().enumerate().filter(|&(i, _)| i != slot).map(|(_, &k)| k).collect();
            buckets[slot * qp + t[slot] as usize].push((rest, f_w));
        }
    }
    let mut offsets = Vec::with_capacity(r * qp + 1);
    let mut rows = Vec::new();
    let mut weights = Vec::new();
    offsets.push(0);
    for mut b in buckets {
        b.sort_by(|x, y| x.0.cmp(&y.0));
        for (row, w) in b {
            rows.extend_from_slice(&row);
            weights.push(w);
        }
        offsets.push(weights.len());
    }
    DecoderTab {
        weight: r,
        q_prime: qp,
        offsets,
        rows,
        weights,
    }
}

impl DecoderTab {
    pub fn weight(&self) -> usize {
        self.weight
    }

    pub fn q_prime(&self) -> usize {
        self.q_prime
    }

    /// Rows for output `k` at `slot`; each row lists the other slots in order.
    pub fn rows(&self, slot: usize, k: usize) -> impl Iterator<Item = (&[u16], f64)> + '_ {
        let i = slot * self.q_prime + k;
        let range = self.offsets[i]..self.offsets[i + 1];
        let w = self.weight - 1;
        range.map(move |j| (&self.rows[j * w..(j + 1) * w], self.weights[j]))
    }

    pub fn row_count(&self, slot: usize, k: usize) -> usize {
        let i = slot * self.q_prime + k;
        self.offsets[i + 1] - self.offsets[i]
    }

    /// Total rows for one target slot (the achievable tuple count).
    pub fn slot_rows(&self, slot: usize) -> usize {
        (0..self.q_prime).map(|k| self.row_count(slot, k)).sum()
    }

    /// Rebuilds per-tuple assignment counts from the weights at `slot`.
    pub fn regenerate_counts(&self, slot: usize, cluster_sizes: &[usize]) -> Vec<(Vec<u16>, f64)> {
        let mut out = Vec::new();
        for k in 0..self.q_prime {
            for (row, f_w) in self.rows(slot, k) {
                let mut t = row.to_vec();
                t.insert(slot, k as u16);
                let denom: usize = row.iter().map(|&s| cluster_sizes[s as usize]).product();
                out.push((t, f_w * denom as f64));
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }
}

/// Sizes for a matrix pair under one map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    /// Upper bound on distinct tabs, summed over row weights.
    pub nt_bound: u64,
    /// Distinct tabs actually required (rows with equal coefficients share).
    pub distinct_tabs: usize,
    /// Per row weight: (weight, rows, S_E, S_D lower, S_D upper).
    pub per_weight: Vec<WeightSizes>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSizes {
    pub weight: usize,
    pub rows: usize,
    pub s_e: u64,
    pub s_d_min: u64,
    pub s_d_max: u64,
}

pub fn complexity_report(ha: &ParityCheckMatrix, hb: &ParityCheckMatrix, map: &ClusterMap) -> Result<ComplexityReport> {
    if !ha.same_pattern(hb) {
        return Err(Error::InvalidParameter("codes do not share a sparsity pattern".into()));
    }
    let q = ha.field().order() as u64;
    let qp = map.q_prime() as u64;
    let mut per_weight = Vec::new();
    let mut nt_bound = 0u64;
    for (r, rows) in ha.row_weight_histogram() {
        let pairs = (q * q).saturating_pow(r as u32 - 1);
        nt_bound = nt_bound.saturating_add((rows as u64).min(pairs).saturating_mul(r as u64));
        let s_e = qp.saturating_pow(r as u32 - 1);
        per_weight.push(WeightSizes {
            weight: r,
            rows,
            s_e,
            s_d_min: s_e,
            s_d_max: qp.saturating_pow(r as u32),
        });
    }
    let mut seen = std::collections::HashSet::new();
    for m in 0..ha.rows() {
        seen.insert((ha.row_values(m).to_vec(), hb.row_values(m).to_vec()));
    }
    Ok(ComplexityReport {
        nt_bound,
        distinct_tabs: seen.len(),
        per_weight,
    })
}

/// Outcome of the correlative-row search.
#[derive(Debug, Clone, PartialEq)]
pub struct McoResult {
    pub g_max: f64,
    pub c_exp: Vec<(Vec<u8>, Vec<u8>)>,
}

/// Sweeps every nonzero coefficient assignment of a weight-`r` row pair and
/// keeps those minimizing the largest ambiguity `S_D / S_E` over `mappings`.
/// Assignments are visited with `eta` outer and `xi` inner, last slot fastest.
pub fn mco(r: usize, field: &GfField, mappings: &[ClusterMap]) -> Result<McoResult> {
    if r < 2 {
        return Err(Error::InvalidParameter("row weight must be at least 2".into()));
    }
    if mappings.is_empty() {
        return Err(Error::InvalidParameter("empty mapping set".into()));
    }
    let q = field.order();
    let q_prime_max = mappings.iter().map(|m| m.q_prime()).max().unwrap_or(q);
    let mut g_max = q_prime_max as f64;
    let mut c_exp = Vec::new();
    let positions: Vec<usize> = (0..r).collect();
    let coeffs = |idx: usize| -> Vec<u8> {
        let mut v = vec![0u8; r];
        let mut x = idx;
        for slot in v.iter_mut().rev() {
            *slot = (x % (q - 1)) as u8 + 1;
            x /= q - 1;
        }
        v
    };
    let combos = (q - 1).pow(r as u32);
    for ie in 0..combos {
        let eta = coeffs(ie);
        for ix in 0..combos {
            let xi = coeffs(ix);
            let row = CorrelativeRow {
                positions: positions.clone(),
                eta: eta.clone(),
                xi: xi.clone(),
            };
            let mut g = 0.0f64;
            for m in mappings {
                g = g.max(build_encoder_tab(&row, field, m)?.ambiguity());
            }
            if g <= g_max + 1e-12 {
                if g < g_max - 1e-12 {
                    g_max = g;
                    c_exp.clear();
                }
                c_exp.push((eta.clone(), xi));
            }
        }
    }
    Ok(McoResult { g_max, c_exp })
}

/// Row coefficients of both codes followed by the map's labels.
type TabKey = (Vec<u8>, Vec<u8>, Vec<u16>);

/// Shared tabs keyed by row coefficients and map.
#[derive(Debug, Default)]
pub struct TabCache {
    inner: Mutex<HashMap<TabKey, Arc<(EncoderTab, DecoderTab)>>>,
}

impl TabCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the tabs for `row`, building them on first use. Positions do
    /// not enter the key: tabs only depend on coefficients and the map.
    pub fn get(&self, row: &CorrelativeRow, field: &GfField, map: &ClusterMap) -> Result<Arc<(EncoderTab, DecoderTab)>> {
        let key = (row.eta.clone(), row.xi.clone(), map.table().to_vec());
        if let Some(t) = self.inner.lock().expect("tab cache poisoned").get(&key) {
            return Ok(Arc::clone(t));
        }
        let enc = build_encoder_tab(row, field, map)?;
        let dec = build_decoder_tab(&enc);
        let entry = Arc::new((enc, dec));
        let mut guard = self.inner.lock().expect("tab cache poisoned");
        Ok(Arc::clone(guard.entry(key).or_insert(entry)))
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("tab cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// JSON form of a tab pair, using map labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabDump {
    pub positions: Vec<usize>,
    pub encoder_rows: Vec<EncoderRowJson>,
    pub decoder_index: Vec<DecoderEntryJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncoderRowJson {
    pub known: Vec<String>,
    pub outcomes: Vec<OutcomeJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeJson {
    pub symbol: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderEntryJson {
    pub position: usize,
    pub target: String,
    pub rows: Vec<DecoderRowJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderRowJson {
    pub symbols: Vec<String>,
    pub weight: f64,
}

pub fn dump_tabs(e: &EncoderTab, d: &DecoderTab) -> TabDump {
    let name = |k: u16| e.labels()[k as usize].clone();
    let encoder_rows = e
        .known_rows()
        .into_iter()
        .map(|row| EncoderRowJson {
            known: row.known.iter().map(|&k| name(k)).collect(),
            outcomes: row
                .outcomes
                .iter()
                .map(|&(k, p)| OutcomeJson {
                    symbol: name(k),
                    probability: p,
                })
                .collect(),
        })
        .collect();
    let mut decoder_index = Vec::new();
    for (slot, &position) in e.positions().iter().enumerate() {
        for k in 0..d.q_prime() {
            decoder_index.push(DecoderEntryJson {
                position,
                target: name(k as u16),
                rows: d
                    .rows(slot, k)
                    .map(|(row, w)| DecoderRowJson {
                        symbols: row.iter().map(|&s| name(s)).collect(),
                        weight: w,
                    })
                    .collect(),
            });
        }
    }
    TabDump {
        positions: e.positions().to_vec(),
        encoder_rows,
        decoder_index,
    }
}
