//! The two-stage map catalog for 4-ary codes with QPSK, and channel-adaptive
//! selection from it.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelState, Constellation};
use crate::error::{Error, Result};
use crate::mapping::{med_with_profile, ClusterMap, DistanceProfile, MapKind};

/// Rows of the first-stage maps, pairs in row-major order.
const FIRST_STAGE: [&str; 12] = [
    "f b c a b g a d c a h e a d e i",
    "b a f c g d b a a e c h d i a e",
    "a b c f d a g c e h a b i e d a",
    "b f a c a c d g h b e a e a i d",
    "e a f b g h a c b d i j c k d l",
    "a b e f g c h a d i b j k l c d",
    "a e b f c b g h i j d a k d l c",
    "e f a b b g c h i a j d d c k l",
    "a b e f g c h d c i d j k l a b",
    "a e b f c d g h i j c d k a l b",
    "e f a b c g d h i c j d a b k l",
    "e a f b g h c d c d i j a k b l",
];

const SECOND_STAGE: [&str; 6] = [
    "a' b' c' d' b' a' d' c' c' d' a' b' d' c' b' a'",
    "a' b' c' d' c' d' a' b' b' a' d' c' d' c' b' a'",
    "b' c' a' d' a' d' c' e' d' b' e' a' e' a' b' c'",
    "b' c' d' a' c' e' a' b' d' a' c' e' a' b' e' d'",
    "b' a' c' d' e' c' b' a' a' e' d' b' c' d' a' e'",
    "a' b' c' d' d' a' e' c' e' c' a' b' b' e' d' a'",
];

/// First-stage map indices paired with each second-stage map.
const BLOCKS: [[usize; 2]; 6] = [[0, 2], [1, 3], [4, 8], [5, 9], [6, 10], [7, 11]];

/// The fixed set of candidate maps.
#[derive(Debug, Clone)]
pub struct MappingCatalog {
    first: Vec<ClusterMap>,
    second: Vec<ClusterMap>,
    blocks: Vec<Vec<usize>>,
}

/// Outcome of channel-adaptive selection.
#[derive(Debug, Clone)]
pub struct Selection {
    pub first_index: usize,
    pub second_index: usize,
    pub first: ClusterMap,
    pub second: ClusterMap,
    /// Symbol MED of the second-stage map.
    pub med_second: f64,
    /// Symbol MED of the first-stage map.
    pub med_first: f64,
}

impl MappingCatalog {
    /// The 12 first-stage and 6 second-stage maps for q = 4.
    pub fn qpsk4() -> Self {
        let parse = |row: &str, kind| {
            let labels: Vec<&str> = row.split_whitespace().collect();
            ClusterMap::from_labels(4, &labels, kind).expect("catalog row covers 16 pairs")
        };
        Self {
            first: FIRST_STAGE.iter().map(|r| parse(r, MapKind::FirstStage)).collect(),
            second: SECOND_STAGE.iter().map(|r| parse(r, MapKind::SecondStage)).collect(),
            blocks: BLOCKS.iter().map(|b| b.to_vec()).collect(),
        }
    }

    /// Builds a catalog from explicit maps; `blocks[j]` lists the first-stage
    /// maps that refine second-stage map `j`.
    pub fn new(first: Vec<ClusterMap>, second: Vec<ClusterMap>, blocks: Vec<Vec<usize>>) -> Result<Self> {
        if blocks.len() != second.len() {
            return Err(Error::InvalidMapping("one block per second-stage map".into()));
        }
        for (j, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidMapping(format!("block {j} is empty")));
            }
            for &i in block {
                let fine = first
                    .get(i)
                    .ok_or_else(|| Error::InvalidMapping(format!("block {j} names map {i}")))?;
                if fine.projection_onto(&second[j]).is_none() {
                    return Err(Error::InvalidMapping(format!(
                        "first-stage map {i} does not refine second-stage map {j}"
                    )));
                }
            }
        }
        Ok(Self { first, second, blocks })
    }

    pub fn first_stage(&self) -> &[ClusterMap] {
        &self.first
    }

    pub fn second_stage(&self) -> &[ClusterMap] {
        &self.second
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Index of the second-stage map paired with first-stage map `i`.
    pub fn block_of(&self, i: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(&i))
    }

    /// Picks the second-stage map with the largest symbol MED, then the
    /// first-stage map of its block with the largest MED. Ties go to the
    /// lowest index.
    pub fn select(&self, ch: &ChannelState, k: &Constellation) -> Result<Selection> {
        if ch.is_degenerate() {
            return Err(Error::DegenerateChannel);
        }
        if k.order() != self.second[0].q() {
            return Err(Error::InvalidMapping("constellation order does not match catalog".into()));
        }
        let profile = DistanceProfile::new(ch, k);
        let (second_index, med_second) = best(self.second.iter().enumerate(), &profile);
        let (first_index, med_first) = best(
            self.blocks[second_index].iter().map(|&i| (i, &self.first[i])),
            &profile,
        );
        Ok(Selection {
            first_index,
            second_index,
            first: self.first[first_index].clone(),
            second: self.second[second_index].clone(),
            med_second,
            med_first,
        })
    }

    /// JSON array of clusters per map.
    pub fn to_json(&self) -> serde_json::Value {
        let entry = |name: String, m: &ClusterMap| MapJson::from_map(name, m);
        let first: Vec<MapJson> = self
            .first
            .iter()
            .enumerate()
            .map(|(i, m)| entry(format!("first-{i}"), m))
            .collect();
        let second: Vec<MapJson> = self
            .second
            .iter()
            .enumerate()
            .map(|(i, m)| entry(format!("second-{i}"), m))
            .collect();
        serde_json::json!({ "first_stage": first, "second_stage": second, "blocks": self.blocks })
    }
}

fn best<'a>(maps: impl Iterator<Item = (usize, &'a ClusterMap)>, profile: &DistanceProfile) -> (usize, f64) {
    let mut out = (usize::MAX, f64::NEG_INFINITY);
    for (i, m) in maps {
        let med = med_with_profile(m, profile);
        if med > out.1 + 1e-12 {
            out = (i, med);
        }
    }
    out
}

/// One output cluster of a map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterJson {
    pub pairs: Vec<[u8; 2]>,
    pub output: String,
}

/// Serialized form of a [`ClusterMap`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapJson {
    pub name: String,
    pub q: usize,
    pub clusters: Vec<ClusterJson>,
}

impl MapJson {
    pub fn from_map(name: String, m: &ClusterMap) -> Self {
        let clusters = m
            .clusters()
            .into_iter()
            .enumerate()
            .map(|(k, pairs)| ClusterJson {
                pairs: pairs.into_iter().map(|(a, b)| [a, b]).collect(),
                output: m.label(k).to_string(),
            })
            .collect();
        Self { name, q: m.q(), clusters }
    }

    pub fn to_map(&self, kind: MapKind) -> Result<ClusterMap> {
        let q = self.q;
        let mut labels: Vec<Option<&str>> = vec![None; q * q];
        for c in &self.clusters {
            for &[a, b] in &c.pairs {
                let (a, b) = (a as usize, b as usize);
                if a >= q || b >= q {
                    return Err(Error::InvalidMapping(format!("pair ({a},{b}) outside Z_{q}")));
                }
                if labels[a * q + b].replace(&c.output).is_some() {
                    return Err(Error::InvalidMapping(format!("pair ({a},{b}) listed twice")));
                }
            }
        }
        let labels: Vec<&str> = labels
            .into_iter()
            .enumerate()
            .map(|(i, l)| l.ok_or_else(|| Error::InvalidMapping(format!("pair ({},{}) unmapped", i / q, i % q))))
            .collect::<Result<_>>()?;
        ClusterMap::from_labels(q, &labels, kind)
    }
}
