use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{AnnotatedPoint, AnnotationSet, PartialOrder, RelativeTuple, TupleKind, TupleSource, MAX_LAYER_ID};
use crate::render::LayeredDepthMap;
use crate::rng::DetRng;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TupleCounts {
    pub pairs: u64,
    pub triplets: u64,
    pub quadruplets: u64,
}

impl TupleCounts {
    pub fn new(pairs: u64, triplets: u64, quadruplets: u64) -> Self {
        TupleCounts {
            pairs,
            triplets,
            quadruplets,
        }
    }

    pub fn get(&self, kind: TupleKind) -> u64 {
        match kind {
            TupleKind::Pair => self.pairs,
            TupleKind::Triplet => self.triplets,
            TupleKind::Quadruplet => self.quadruplets,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sampled {
    /// Pairs, then triplets, then quadruplets; each kind in chain-rank order.
    pub tuples: Vec<RelativeTuple>,
    /// Chains available per kind.
    pub available: BTreeMap<TupleKind, u128>,
    /// Kinds for which fewer chains existed than were requested.
    pub exhausted: Vec<TupleKind>,
}

/// `m` distinct values from `0..n`, uniformly (Floyd's algorithm), ascending.
fn distinct_ranks(n: u128, m: u128, rng: &mut DetRng) -> Vec<u128> {
    let mut chosen = BTreeSet::new();
    for j in n - m..n {
        let t = rng.below_u128(j + 1);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    chosen.into_iter().collect()
}

/// Uniform sample without replacement of chains in the set's partial order,
/// `counts` per kind, reproducible from `seed`. Expects a validated set.
pub fn sample_tuples(set: &AnnotationSet, counts: TupleCounts, seed: u64) -> Sampled {
    let order = PartialOrder::new(set);
    let mut out = Sampled {
        tuples: Vec::new(),
        available: BTreeMap::new(),
        exhausted: Vec::new(),
    };
    for kind in TupleKind::ALL {
        let k = kind.len();
        let total = order.chain_count(k);
        let want = counts.get(kind) as u128;
        out.available.insert(kind, total);
        if want > total {
            out.exhausted.push(kind);
        }
        let take = want.min(total);
        if take == 0 {
            continue;
        }
        let tag = format!("tuples/{}/{}", kind.name(), set.image_id);
        let mut rng = DetRng::derive(seed, &tag);
        let ranks = distinct_ranks(total, take, &mut rng);
        for chain in order.unrank_chains(k, &ranks) {
            out.tuples.push(RelativeTuple {
                image_id: set.image_id.clone(),
                points: chain.iter().map(|&i| order.nodes()[i]).collect(),
                source: Some(order.source_of(&chain)),
            });
        }
    }
    out
}

/// Tuples drawn from rendered ground truth: each picks distinct
/// (pixel, layer) entries uniformly among layers `1..=7` and orders them by
/// depth. Draws with tied depths are rejected. Points sit at integer pixel
/// coordinates.
pub fn sample_from_layers(
    gt: &LayeredDepthMap,
    image_id: &str,
    counts: TupleCounts,
    seed: u64,
) -> Vec<RelativeTuple> {
    let mut entries: Vec<(usize, u32)> = Vec::new();
    for i in 0..gt.pixel_count() {
        let n = (gt.count_at(i) as u32).min(MAX_LAYER_ID);
        entries.extend((1..=n).map(|l| (i, l)));
    }
    let width = gt.width() as usize;
    let mut out = Vec::new();
    for kind in TupleKind::ALL {
        let k = kind.len();
        let want = counts.get(kind);
        if want == 0 || entries.len() < k {
            continue;
        }
        let mut rng = DetRng::derive(seed, &format!("gt-tuples/{}/{image_id}", kind.name()));
        let mut made = 0;
        let mut attempts = 0u64;
        while made < want && attempts < 100 * want + 1000 {
            attempts += 1;
            let mut pick: Vec<(f32, usize, u32)> = Vec::with_capacity(k);
            while pick.len() < k {
                let (i, l) = entries[rng.below(entries.len() as u64) as usize];
                if !pick.iter().any(|&(_, j, m)| j == i && m == l) {
                    pick.push((gt.layer_at(i, l).expect("entry exists"), i, l));
                }
            }
            pick.sort_by(|a, b| a.0.total_cmp(&b.0));
            if pick.windows(2).any(|w| w[0].0 == w[1].0) {
                continue;
            }
            out.push(RelativeTuple {
                image_id: image_id.into(),
                points: pick
                    .iter()
                    .map(|&(_, i, l)| AnnotatedPoint::new((i % width) as f64, (i / width) as f64, l))
                    .collect(),
                source: Some(TupleSource {
                    annotation: image_id.into(),
                    derivation: "ground_truth".into(),
                }),
            });
            made += 1;
        }
    }
    out
}
