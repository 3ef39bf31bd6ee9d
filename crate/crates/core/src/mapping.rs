//! Physical-layer network coding maps on symbol pairs.
//!
//! A [`ClusterMap`] sends each pair `(c_A, c_B)` of source symbols to one of
//! `q'` output symbols. Output ids are canonical: clusters are numbered in the
//! order of their lexicographically smallest pair, so two maps describing the
//! same partition compare equal regardless of how they were labeled.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelState, Constellation, C64};
use crate::error::{Error, Result};
use crate::gf::GfField;

/// Role of a map in the relay pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapKind {
    /// A conventional one-stage closest-neighbor clustering.
    Traditional,
    /// The fine map used to initialize soft decoding.
    FirstStage,
    /// The coarse map used for hard decision and broadcast.
    SecondStage,
    /// A hard-decision map derived for a custom soft map.
    HardDecision,
    /// Any other map (XOR, hand-written examples).
    Custom,
}

/// A total map `Z_q x Z_q -> Z_q'`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClusterMap {
    q: usize,
    q_prime: usize,
    table: Vec<u16>,
    kind: MapKind,
    labels: Vec<String>,
}

/// A pair of source symbols.
pub type SymbolPair = (u8, u8);

impl ClusterMap {
    /// Builds a map from any labeling of the `q * q` pairs (row-major in
    /// `c_A`). Labels are canonicalized.
    pub fn from_table<T: Copy + Eq>(q: usize, table: &[T], kind: MapKind) -> Result<Self> {
        if q < 2 || table.len() != q * q {
            return Err(Error::InvalidMapping(format!(
                "table of length {} does not cover {q}x{q} pairs",
                table.len()
            )));
        }
        let mut seen: Vec<T> = Vec::new();
        let canon: Vec<u16> = table
            .iter()
            .map(|t| match seen.iter().position(|s| s == t) {
                Some(i) => i as u16,
                None => {
                    seen.push(*t);
                    (seen.len() - 1) as u16
                }
            })
            .collect();
        let q_prime = seen.len();
        let labels = (0..q_prime).map(|k| k.to_string()).collect();
        Ok(Self {
            q,
            q_prime,
            table: canon,
            kind,
            labels,
        })
    }

    /// Builds a map from string labels and keeps them for display.
    pub fn from_labels(q: usize, labels: &[&str], kind: MapKind) -> Result<Self> {
        let mut map = Self::from_table(q, labels, kind)?;
        let mut names = vec![String::new(); map.q_prime];
        for (i, l) in labels.iter().enumerate() {
            names[map.table[i] as usize] = (*l).to_string();
        }
        map.labels = names;
        Ok(map)
    }

    pub fn with_kind(mut self, kind: MapKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Output cardinality q'.
    pub fn q_prime(&self) -> usize {
        self.q_prime
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    /// Canonical output for the pair `(a, b)`.
    #[inline]
    pub fn get(&self, a: u8, b: u8) -> usize {
        self.table[a as usize * self.q + b as usize] as usize
    }

    /// Canonical output for pair index `a * q + b`.
    #[inline]
    pub fn get_index(&self, pair: usize) -> usize {
        self.table[pair] as usize
    }

    pub fn table(&self) -> &[u16] {
        &self.table
    }

    pub fn label(&self, k: usize) -> &str {
        &self.labels[k]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Canonical id of a display label.
    pub fn id_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn cluster(&self, k: usize) -> Vec<SymbolPair> {
        (0..self.q * self.q)
            .filter(|&i| self.table[i] as usize == k)
            .map(|i| ((i / self.q) as u8, (i % self.q) as u8))
            .collect()
    }

    pub fn clusters(&self) -> Vec<Vec<SymbolPair>> {
        (0..self.q_prime).map(|k| self.cluster(k)).collect()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.q_prime];
        self.table.iter().for_each(|&k| sizes[k as usize] += 1);
        sizes
    }

    /// Occurrence probabilities `p_k` of each output under uniform source
    /// symbols.
    pub fn priors(&self) -> Vec<f64> {
        let total = (self.q * self.q) as f64;
        self.cluster_sizes().iter().map(|&s| s as f64 / total).collect()
    }

    /// The first pair of pairs, in lexicographic order, that shares a source
    /// symbol and an output; `None` if the exclusive law holds.
    pub fn exclusive_law_violation(&self) -> Option<(SymbolPair, SymbolPair)> {
        let q = self.q;
        for i in 0..q * q {
            for j in i + 1..q * q {
                let (a, b) = (i / q, i % q);
                let (a2, b2) = (j / q, j % q);
                if (a == a2 || b == b2) && self.table[i] == self.table[j] {
                    return Some(((a as u8, b as u8), (a2 as u8, b2 as u8)));
                }
            }
        }
        None
    }

    pub fn satisfies_exclusive_law(&self) -> bool {
        self.exclusive_law_violation().is_none()
    }

    /// If every cluster of `self` lies inside one cluster of `coarse`, returns
    /// the induced projection from `self` outputs to `coarse` outputs.
    pub fn projection_onto(&self, coarse: &ClusterMap) -> Option<Vec<usize>> {
        if self.q != coarse.q {
            return None;
        }
        let mut proj = vec![usize::MAX; self.q_prime];
        for (i, &k) in self.table.iter().enumerate() {
            let target = coarse.table[i] as usize;
            let slot = &mut proj[k as usize];
            if *slot == usize::MAX {
                *slot = target;
            } else if *slot != target {
                return None;
            }
        }
        Some(proj)
    }

    /// The map with the roles of the two sources exchanged.
    pub fn transposed(&self) -> ClusterMap {
        let q = self.q;
        let table: Vec<u16> = (0..q * q).map(|i| self.table[(i % q) * q + i / q]).collect();
        let mut out = Self::from_table(q, &table, self.kind).expect("same shape");
        let mut labels = vec![String::new(); out.q_prime];
        for (i, &k) in table.iter().enumerate() {
            labels[out.table[i] as usize] = self.labels[k as usize].clone();
        }
        out.labels = labels;
        out
    }
}

/// `c_A + c_B` in GF(q).
pub fn xor_map(q: usize) -> Result<ClusterMap> {
    GfField::new(q)?;
    let table: Vec<usize> = (0..q * q).map(|i| (i / q) ^ (i % q)).collect();
    ClusterMap::from_table(q, &table, MapKind::Custom)
}

/// Superimposed noiseless points `h_ac x(c_A) + h_bc x(c_B)` and their
/// pairwise squared distances.
#[derive(Debug, Clone)]
pub struct DistanceProfile {
    q: usize,
    points: Vec<C64>,
    dist: Vec<f64>,
}

impl DistanceProfile {
    pub fn new(ch: &ChannelState, k: &Constellation) -> Self {
        let q = k.order();
        let points: Vec<C64> = (0..q * q)
            .map(|i| ch.h_ac * k.point(i / q) + ch.h_bc * k.point(i % q))
            .collect();
        let n = q * q;
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                dist[i * n + j] = (points[i] - points[j]).norm_sqr();
            }
        }
        Self { q, points, dist }
    }

    pub fn point(&self, a: u8, b: u8) -> C64 {
        self.points[a as usize * self.q + b as usize]
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    /// Squared distance between pair indices.
    pub fn sq_dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.q * self.q + j]
    }

    /// Minimum squared distance between two sets of pair indices.
    pub fn linkage(&self, x: &[usize], y: &[usize]) -> f64 {
        x.iter()
            .flat_map(|&i| y.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.sq_dist(i, j))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Per-symbol minimum squared Euclidean distance between superimposed points
/// of pairs with different outputs.
pub fn symbol_med(map: &ClusterMap, ch: &ChannelState, k: &Constellation) -> Result<f64> {
    if ch.is_degenerate() {
        return Err(Error::DegenerateChannel);
    }
    check_compatible(map, k)?;
    if let Some(v) = map.exclusive_law_violation() {
        return Err(Error::InvalidMapping(format!("exclusive law violated by {v:?}")));
    }
    Ok(med_with_profile(map, &DistanceProfile::new(ch, k)))
}

pub(crate) fn med_with_profile(map: &ClusterMap, profile: &DistanceProfile) -> f64 {
    let n = map.q * map.q;
    let mut best = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            if map.table[i] != map.table[j] {
                best = best.min(profile.sq_dist(i, j));
            }
        }
    }
    best
}

fn check_compatible(map: &ClusterMap, k: &Constellation) -> Result<()> {
    if map.q != k.order() {
        return Err(Error::InvalidMapping(format!(
            "map over Z_{} used with a {}-point constellation",
            map.q,
            k.order()
        )));
    }
    Ok(())
}

/// Splits and re-merges a traditional clustering for the given channel.
///
/// Clusters of `mt` whose members lie farther apart than `d_max` (the largest
/// minimum-linkage distance between two clusters of `mt`) are split greedily:
/// members are visited in pair order and join the first sub-cluster whose
/// members are all within `d_max`. The sub-clusters form the first-stage map;
/// re-merging the pieces of each original cluster gives the second-stage map.
pub fn msmm(mt: &ClusterMap, ch: &ChannelState, k: &Constellation) -> Result<(ClusterMap, ClusterMap)> {
    if ch.is_degenerate() {
        return Err(Error::DegenerateChannel);
    }
    check_compatible(mt, k)?;
    if let Some(v) = mt.exclusive_law_violation() {
        return Err(Error::InvalidMapping(format!("exclusive law violated by {v:?}")));
    }
    let profile = DistanceProfile::new(ch, k);
    let q = mt.q;
    let members: Vec<Vec<usize>> = (0..mt.q_prime)
        .map(|c| (0..q * q).filter(|&i| mt.table[i] as usize == c).collect())
        .collect();
    let (d_max, _d_min) = cluster_distance_range(&members, &profile);
    let tol = 1e-9 * d_max.max(1.0);

    let mut fine = vec![0usize; q * q];
    let mut next_id = 0;
    for cluster in &members {
        let mut subs: Vec<Vec<usize>> = Vec::new();
        for &i in cluster {
            match subs
                .iter_mut()
                .find(|s| s.iter().all(|&j| profile.sq_dist(i, j) <= d_max + tol))
            {
                Some(s) => s.push(i),
                None => subs.push(vec![i]),
            }
        }
        for s in subs {
            for i in s {
                fine[i] = next_id;
            }
            next_id += 1;
        }
    }
    let ms = ClusterMap::from_table(q, &fine, MapKind::FirstStage)?;
    let mh = mt.clone().with_kind(MapKind::SecondStage);
    debug_assert!(ms.satisfies_exclusive_law());
    if !mh.satisfies_exclusive_law() {
        return Err(Error::InvalidMapping("merged map violates the exclusive law".into()));
    }
    Ok((ms, mh))
}

/// `(d_max, d_min)` over minimum-linkage distances between distinct clusters.
pub fn cluster_distance_range(members: &[Vec<usize>], profile: &DistanceProfile) -> (f64, f64) {
    let mut d_max = 0.0f64;
    let mut d_min = f64::INFINITY;
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            let d = profile.linkage(&members[i], &members[j]);
            d_max = d_max.max(d);
            d_min = d_min.min(d);
        }
    }
    (d_max, d_min)
}
