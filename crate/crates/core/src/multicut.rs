//! Correlation clustering of the signed patch graph by greedy additive edge
//! contraction, and the corner rule that separates foreground clusters from
//! background.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use serde::{Deserialize, Serialize};

use crate::affinity::SignedGraph;
use crate::error::{Error, Result};
use crate::mask::PatchMask;

/// Cluster assignment per node with contiguous ids `0..k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    /// Validates that `labels` is a surjection onto `0..k`.
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        let k = labels.iter().max().map_or(0, |&m| m + 1);
        let mut seen = vec![false; k];
        labels.iter().for_each(|&l| seen[l] = true);
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidInput(format!("cluster id {missing} is unused")));
        }
        Ok(Partition { labels, k })
    }

    /// Relabels arbitrary ids to `0..k` in order of first appearance.
    pub fn from_raw_labels(raw: &[usize]) -> Self {
        let mut map = BTreeMap::new();
        let labels = raw
            .iter()
            .map(|r| {
                let next = map.len();
                *map.entry(*r).or_insert(next)
            })
            .collect();
        Partition { labels, k: map.len() }
    }

    pub fn singletons(nodes: usize) -> Self {
        Partition {
            labels: (0..nodes).collect(),
            k: nodes,
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Sum of costs over edges whose endpoints fall in different clusters.
pub fn multicut_objective(graph: &SignedGraph, partition: &Partition) -> Result<f64> {
    let labels = partition.labels();
    if labels.len() < graph.node_count() {
        return Err(Error::LabelOutOfRange {
            label: labels.len(),
            nodes: graph.node_count(),
        });
    }
    Ok(graph
        .edges()
        .iter()
        .filter(|e| labels[e.u] != labels[e.v])
        .map(|e| e.cost)
        .sum())
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    cost: f64,
    lo: usize,
    hi: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    // max-heap: highest cost first, then the lexicographically smallest pair
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then_with(|| (other.lo, other.hi).cmp(&(self.lo, self.hi)))
    }
}

/// Greedy additive edge contraction.
///
/// Repeatedly contracts the cluster pair with the largest aggregate
/// inter-cluster cost while that cost is strictly positive. Parallel edges
/// created by a contraction are summed. Ties go to the smallest
/// `(min id, max id)` pair, where a cluster's id is its smallest node.
pub fn solve_multicut(graph: &SignedGraph) -> Partition {
    let nodes = graph.node_count();
    let mut adjacency: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); nodes];
    for e in graph.edges() {
        adjacency[e.u].insert(e.v, e.cost);
        adjacency[e.v].insert(e.u, e.cost);
    }
    let mut heap: BinaryHeap<Candidate> = graph
        .edges()
        .iter()
        .filter(|e| e.cost > 0.0)
        .map(|e| Candidate {
            cost: e.cost,
            lo: e.u,
            hi: e.v,
        })
        .collect();
    let mut merged_into: Vec<usize> = (0..nodes).collect();
    let mut alive = vec![true; nodes];

    while let Some(top) = heap.pop() {
        if top.cost <= 0.0 {
            break;
        }
        let current = adjacency[top.lo].get(&top.hi).copied();
        let fresh = alive[top.lo] && alive[top.hi] && current.map(f64::to_bits) == Some(top.cost.to_bits());
        if !fresh {
            continue;
        }
        let (keep, gone) = (top.lo, top.hi);
        let moved = std::mem::take(&mut adjacency[gone]);
        adjacency[keep].remove(&gone);
        for (other, w) in moved {
            if other == keep {
                continue;
            }
            adjacency[other].remove(&gone);
            let total = {
                let slot = adjacency[keep].entry(other).or_insert(0.0);
                *slot += w;
                *slot
            };
            adjacency[other].insert(keep, total);
            if total > 0.0 {
                heap.push(Candidate {
                    cost: total,
                    lo: keep.min(other),
                    hi: keep.max(other),
                });
            }
        }
        alive[gone] = false;
        merged_into[gone] = keep;
    }

    let roots: Vec<usize> = (0..nodes)
        .map(|mut v| {
            while merged_into[v] != v {
                v = merged_into[v];
            }
            v
        })
        .collect();
    Partition::from_raw_labels(&roots)
}

/// One mask per cluster over an `n x n` grid (node id `row * n + col`).
pub fn partition_to_masks(partition: &Partition, n: usize) -> Result<Vec<PatchMask>> {
    if partition.len() != n * n {
        return Err(Error::ShapeMismatch(format!(
            "partition has {} nodes, grid {n}x{n} has {}",
            partition.len(),
            n * n
        )));
    }
    (0..partition.k())
        .map(|cluster| {
            let values = partition.labels().iter().map(|&l| (l == cluster) as u8).collect();
            PatchMask::new(n, values)
        })
        .collect()
}

/// Number of the four grid corners covered by the mask.
pub fn corner_count(mask: &PatchMask) -> usize {
    let last = mask.n() - 1;
    [(0, 0), (0, last), (last, 0), (last, last)]
        .iter()
        .filter(|&&(r, c)| mask.get(r, c))
        .count()
}

/// Corner rule: masks touching fewer than two grid corners are foreground.
pub fn is_foreground(mask: &PatchMask) -> bool {
    corner_count(mask) <= 1
}

/// Per-mask record of the candidate sidecar written next to a mask stack.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateInfo {
    pub mask_index: usize,
    pub cluster_id: usize,
    pub foreground: bool,
}

pub fn describe_candidates(masks: &[PatchMask]) -> Vec<CandidateInfo> {
    masks
        .iter()
        .enumerate()
        .map(|(i, m)| CandidateInfo {
            mask_index: i,
            cluster_id: i,
            foreground: is_foreground(m),
        })
        .collect()
}
