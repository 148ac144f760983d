use std::collections::HashMap;

use super::{AnnotatedPoint, AnnotationSet, TupleSource};

/// Fixed-width bit rows for the closure matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
struct BitRow(Vec<u64>);

impl BitRow {
    fn new(n: usize) -> Self {
        BitRow(vec![0; n.div_ceil(64)])
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn or_assign(&mut self, other: &BitRow) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }

    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &bits)| {
            (0..64).filter(move |b| bits >> b & 1 == 1).map(move |b| w * 64 + b)
        })
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// Strict "closer than" relation over the distinct points of a set.
///
/// Points with identical coordinates and layer are one node, which is how
/// separate annotations become linked: the relation is the transitive
/// closure of all annotation-level relations.
#[derive(Debug, Clone)]
pub struct PartialOrder {
    nodes: Vec<AnnotatedPoint>,
    /// Annotation indices each node appears in, ascending.
    owners: Vec<Vec<usize>>,
    ids: Vec<(String, &'static str)>,
    /// Relations stated directly by each annotation, as node pairs.
    direct: Vec<Vec<(usize, usize)>>,
    less: Vec<BitRow>,
}

impl PartialOrder {
    pub fn new(set: &AnnotationSet) -> Self {
        let mut index: HashMap<(u64, u64, u32), usize> = HashMap::new();
        let mut nodes = Vec::new();
        let mut owners: Vec<Vec<usize>> = Vec::new();
        let mut node = |p: &AnnotatedPoint, owner: usize, nodes: &mut Vec<AnnotatedPoint>| {
            let i = *index.entry(p.key()).or_insert_with(|| {
                nodes.push(*p);
                owners.push(Vec::new());
                nodes.len() - 1
            });
            if owners[i].last() != Some(&owner) {
                owners[i].push(owner);
            }
            i
        };
        let mut ids = Vec::new();
        let mut direct = Vec::new();
        for line in &set.lines {
            let a = ids.len();
            ids.push((line.id.clone(), "line"));
            let pts: Vec<usize> = line.points.iter().map(|p| node(p, a, &mut nodes)).collect();
            let front: Vec<usize> = line.front.iter().map(|p| node(p, a, &mut nodes)).collect();
            let behind: Vec<usize> = line.behind.iter().map(|p| node(p, a, &mut nodes)).collect();
            let mut rel = Vec::new();
            for (k, &p) in pts.iter().enumerate() {
                rel.extend(pts[k + 1..].iter().map(|&q| (p, q)));
                rel.extend(front.iter().map(|&f| (f, p)));
                rel.extend(behind.iter().map(|&b| (p, b)));
            }
            for &f in &front {
                rel.extend(behind.iter().map(|&b| (f, b)));
            }
            direct.push(rel);
        }
        for group in &set.groups {
            let a = ids.len();
            ids.push((group.id.clone(), "group"));
            let r = node(&group.reference, a, &mut nodes);
            let front: Vec<usize> = group.front.iter().map(|p| node(p, a, &mut nodes)).collect();
            let behind: Vec<usize> = group.behind.iter().map(|p| node(p, a, &mut nodes)).collect();
            let mut rel: Vec<(usize, usize)> = front.iter().map(|&f| (f, r)).collect();
            rel.extend(behind.iter().map(|&b| (r, b)));
            for &f in &front {
                rel.extend(behind.iter().map(|&b| (f, b)));
            }
            direct.push(rel);
        }
        let n = nodes.len();
        let mut less = vec![BitRow::new(n); n];
        for &(a, b) in direct.iter().flatten() {
            less[a].set(b);
        }
        // Warshall over bit rows.
        for k in 0..n {
            let row_k = less[k].clone();
            for row in less.iter_mut() {
                if row.get(k) {
                    row.or_assign(&row_k);
                }
            }
        }
        PartialOrder {
            nodes,
            owners,
            ids,
            direct,
            less,
        }
    }

    pub fn nodes(&self) -> &[AnnotatedPoint] {
        &self.nodes
    }

    pub fn less(&self, a: usize, b: usize) -> bool {
        self.less[a].get(b)
    }

    /// Number of related pairs.
    pub fn relation_count(&self) -> usize {
        self.less.iter().map(BitRow::count).sum()
    }

    pub fn relations(&self) -> Vec<(AnnotatedPoint, AnnotatedPoint)> {
        let mut out = Vec::new();
        for (a, row) in self.less.iter().enumerate() {
            out.extend(row.ones().map(|b| (self.nodes[a], self.nodes[b])));
        }
        out
    }

    /// A node that precedes itself, if the stated relations are cyclic.
    pub fn cycle_witness(&self) -> Option<AnnotatedPoint> {
        (0..self.nodes.len())
            .find(|&i| self.less[i].get(i))
            .map(|i| self.nodes[i])
    }

    /// `table[v][j]` = number of chains with `j + 1` elements starting at `v`.
    fn chains_from(&self, k: usize) -> Vec<Vec<u128>> {
        let n = self.nodes.len();
        // Successor counts strictly increase toward the start of chains, so
        // sorting by them is a reverse topological order.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&v| (self.less[v].count(), v));
        let mut table = vec![vec![0u128; k]; n];
        for &v in &order {
            table[v][0] = 1;
            for j in 1..k {
                table[v][j] = self.less[v]
                    .ones()
                    .map(|w| table[w][j - 1])
                    .fold(0u128, u128::saturating_add);
            }
        }
        table
    }

    /// Number of chains with `k` elements. Panics if the order is cyclic.
    pub fn chain_count(&self, k: usize) -> u128 {
        assert!(self.cycle_witness().is_none(), "chain counting needs an acyclic order");
        if k == 0 {
            return 0;
        }
        self.chains_from(k)
            .iter()
            .map(|row| row[k - 1])
            .fold(0, u128::saturating_add)
    }

    /// Chains with `k` elements at the given lexicographic ranks (ranks
    /// ascending and below [`PartialOrder::chain_count`]).
    pub fn unrank_chains(&self, k: usize, ranks: &[u128]) -> Vec<Vec<usize>> {
        let table = self.chains_from(k);
        ranks
            .iter()
            .map(|&rank| {
                let mut r = rank;
                let mut chain = Vec::with_capacity(k);
                let mut candidates: Vec<usize> = (0..self.nodes.len()).collect();
                for j in (0..k).rev() {
                    let mut chosen = None;
                    for &v in &candidates {
                        let c = table[v][j];
                        if r < c {
                            chosen = Some(v);
                            break;
                        }
                        r -= c;
                    }
                    let v = chosen.expect("rank below chain count");
                    chain.push(v);
                    candidates = self.less[v].ones().collect();
                }
                chain
            })
            .collect()
    }

    /// Every chain with `k` elements, in lexicographic node order.
    pub fn chains(&self, k: usize) -> Vec<Vec<AnnotatedPoint>> {
        let total = self.chain_count(k);
        let ranks: Vec<u128> = (0..total).collect();
        self.unrank_chains(k, &ranks)
            .into_iter()
            .map(|c| c.into_iter().map(|i| self.nodes[i]).collect())
            .collect()
    }

    /// Which annotation a chain of nodes derives from.
    pub(crate) fn source_of(&self, chain: &[usize]) -> TupleSource {
        let mut shared: Vec<usize> = self.owners[chain[0]].clone();
        for &v in &chain[1..] {
            shared.retain(|a| self.owners[v].contains(a));
        }
        let stated = shared.into_iter().find(|&a| {
            chain
                .windows(2)
                .all(|w| self.direct[a].contains(&(w[0], w[1])))
        });
        match stated {
            Some(a) => TupleSource {
                annotation: self.ids[a].0.clone(),
                derivation: self.ids[a].1.into(),
            },
            None => {
                let mut all: Vec<usize> = chain.iter().flat_map(|&v| self.owners[v].clone()).collect();
                all.sort_unstable();
                all.dedup();
                TupleSource {
                    annotation: all
                        .iter()
                        .map(|&a| self.ids[a].0.as_str())
                        .collect::<Vec<_>>()
                        .join("+"),
                    derivation: "closure".into(),
                }
            }
        }
    }
}
