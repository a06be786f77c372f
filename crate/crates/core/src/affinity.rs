//! Patch-feature affinities: the pooled 8-neighbour cosine map used to rate
//! masks, and the signed lattice graph handed to the multicut solver.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ndio::ArrayFile;

/// Norms below this are treated as zero vectors.
pub const MIN_NORM: f64 = 1e-12;

/// Row/column offsets of the 8-neighbourhood, in a fixed visiting order.
pub(crate) const NEIGHBORS_8: [(isize, isize); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

/// Iterates the in-grid 8-neighbours of `(row, col)` on an `n x n` grid.
pub(crate) fn neighbors8(n: usize, row: usize, col: usize) -> impl Iterator<Item = (usize, usize)> {
    NEIGHBORS_8.iter().filter_map(move |&(dr, dc)| {
        let r = row as isize + dr;
        let c = col as isize + dc;
        (r >= 0 && c >= 0 && (r as usize) < n && (c as usize) < n).then_some((r as usize, c as usize))
    })
}

/// `n x n` grid of `e`-dimensional patch embeddings, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchGrid {
    n: usize,
    e: usize,
    values: Vec<f32>,
}

impl PatchGrid {
    pub fn new(n: usize, e: usize, values: Vec<f32>) -> Result<Self> {
        if values.len() != n * n * e {
            return Err(Error::ShapeMismatch(format!(
                "patch grid [{n},{n},{e}] needs {} values, got {}",
                n * n * e,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite feature value at flat index {i}")));
        }
        Ok(PatchGrid { n, e, values })
    }

    /// Reads an `[N, N, E]` float32 array.
    pub fn from_array(array: &ArrayFile) -> Result<Self> {
        match (array.shape(), array.as_f32()) {
            ([a, b, e], Some(v)) if a == b => Self::new(*a, *e, v.to_vec()),
            _ => Err(Error::ShapeMismatch(format!(
                "features must be [N,N,E] float32, got {} {:?}",
                array.dtype(),
                array.shape()
            ))),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.e
    }

    pub fn patch(&self, row: usize, col: usize) -> &[f32] {
        let start = (row * self.n + col) * self.e;
        &self.values[start..start + self.e]
    }

    /// Patches whose embedding norm is below [`MIN_NORM`], row-major ids.
    pub fn degenerate_patches(&self) -> Vec<usize> {
        (0..self.n * self.n)
            .filter(|&p| norm(self.patch(p / self.n, p % self.n)) < MIN_NORM)
            .collect()
    }

    pub fn transposed(&self) -> PatchGrid {
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.n {
            for c in 0..self.n {
                values.extend_from_slice(self.patch(c, r));
            }
        }
        PatchGrid {
            n: self.n,
            e: self.e,
            values,
        }
    }
}

fn norm(v: &[f32]) -> f64 {
    v.iter().map(|&x| (x as f64) * (x as f64)).sum::<f64>().sqrt()
}

/// Cosine similarity, accumulated in `f64`. Returns 0 when either vector is
/// (numerically) zero.
pub fn cosine(u: &[f32], v: &[f32]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    Ok(cosine_unchecked(u, v))
}

fn cosine_unchecked(u: &[f32], v: &[f32]) -> f64 {
    let (mut dot, mut nu, mut nv) = (0.0f64, 0.0f64, 0.0f64);
    for (&a, &b) in u.iter().zip(v) {
        let (a, b) = (a as f64, b as f64);
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    let (nu, nv) = (nu.sqrt(), nv.sqrt());
    if nu < MIN_NORM || nv < MIN_NORM {
        return 0.0;
    }
    (dot / (nu * nv)).clamp(-1.0, 1.0)
}

/// Per-patch mean cosine similarity to its in-grid 8-neighbours.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMap {
    n: usize,
    values: Vec<f32>,
}

impl AffinityMap {
    pub fn new(n: usize, values: Vec<f32>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::ShapeMismatch(format!(
                "affinity map {n}x{n} needs {} values, got {}",
                n * n,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("affinity map has non-finite entries".into()));
        }
        Ok(AffinityMap { n, values })
    }

    pub fn from_array(array: &ArrayFile) -> Result<Self> {
        match (array.shape(), array.as_f32()) {
            ([a, b], Some(v)) if a == b => Self::new(*a, v.to_vec()),
            _ => Err(Error::ShapeMismatch(format!(
                "affinity map must be [N,N] float32, got {} {:?}",
                array.dtype(),
                array.shape()
            ))),
        }
    }

    pub fn to_array(&self) -> ArrayFile {
        ArrayFile::from_f32(vec![self.n, self.n], self.values.clone()).expect("square map")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.values[row * self.n + col]
    }

    /// Elementwise `scale * a + shift`.
    pub fn affine(&self, scale: f32, shift: f32) -> AffinityMap {
        AffinityMap {
            n: self.n,
            values: self.values.iter().map(|&a| scale * a + shift).collect(),
        }
    }
}

pub fn build_affinity_map(grid: &PatchGrid) -> Result<AffinityMap> {
    let n = grid.n;
    if n < 2 {
        return Err(Error::InvalidInput(format!("affinity map needs n >= 2, got {n}")));
    }
    let values = (0..n * n)
        .into_par_iter()
        .map(|p| {
            let (row, col) = (p / n, p % n);
            let here = grid.patch(row, col);
            let (sum, count) = neighbors8(n, row, col).fold((0.0f64, 0usize), |(s, k), (r, c)| {
                (s + cosine_unchecked(here, grid.patch(r, c)), k + 1)
            });
            (sum / count as f64) as f32
        })
        .collect();
    Ok(AffinityMap { n, values })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedEdge {
    pub u: usize,
    pub v: usize,
    pub cost: f64,
}

/// Undirected graph with signed edge costs: positive costs favour joining
/// the endpoints, negative costs favour cutting them apart.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedGraph {
    node_count: usize,
    edges: Vec<SignedEdge>,
}

impl SignedGraph {
    pub fn new(node_count: usize, edges: Vec<SignedEdge>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(edges.len());
        for e in &edges {
            if e.u >= e.v {
                return Err(Error::InvalidInput(format!("edge ({}, {}) must satisfy u < v", e.u, e.v)));
            }
            if e.v >= node_count {
                return Err(Error::LabelOutOfRange {
                    label: e.v,
                    nodes: node_count,
                });
            }
            if !e.cost.is_finite() {
                return Err(Error::InvalidInput(format!("edge ({}, {}) has non-finite cost", e.u, e.v)));
            }
            if !seen.insert((e.u, e.v)) {
                return Err(Error::InvalidInput(format!("duplicate edge ({}, {})", e.u, e.v)));
            }
        }
        Ok(SignedGraph { node_count, edges })
    }

    /// Builds a graph from `(u, v, cost)` triples, normalising endpoint order.
    pub fn from_triples(node_count: usize, triples: &[(usize, usize, f64)]) -> Result<Self> {
        let edges = triples
            .iter()
            .map(|&(a, b, cost)| SignedEdge {
                u: a.min(b),
                v: a.max(b),
                cost,
            })
            .collect();
        Self::new(node_count, edges)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[SignedEdge] {
        &self.edges
    }
}

/// One node per patch (`row * n + col`), one edge per 8-neighbour pair with
/// cost `cosine - tau_cut`.
pub fn build_multicut_graph(grid: &PatchGrid, tau_cut: f64) -> Result<SignedGraph> {
    let n = grid.n;
    if n < 2 {
        return Err(Error::InvalidInput(format!("multicut graph needs n >= 2, got {n}")));
    }
    let mut edges = Vec::with_capacity(4 * n * n);
    for row in 0..n {
        for col in 0..n {
            let u = row * n + col;
            let here = grid.patch(row, col);
            // forward half of the neighbourhood: each pair visited once
            for (r, c) in neighbors8(n, row, col) {
                let v = r * n + c;
                if v > u {
                    edges.push(SignedEdge {
                        u,
                        v,
                        cost: cosine_unchecked(here, grid.patch(r, c)) - tau_cut,
                    });
                }
            }
        }
    }
    Ok(SignedGraph {
        node_count: n * n,
        edges,
    })
}
