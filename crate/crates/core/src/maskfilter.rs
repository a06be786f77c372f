//! Mask rating by inner-versus-edge affinity and top-Q% selection.
//!
//! The edge set of a mask is its inside boundary band: mask patches with at
//! least one non-mask 8-neighbour, plus mask patches on the grid border. The
//! inner set is the rest of the mask. A mask without inner patches cannot be
//! rated and receives [`f64::NEG_INFINITY`].

use serde::{Deserialize, Serialize};

use crate::affinity::{neighbors8, AffinityMap};
use crate::error::{Error, Result};
use crate::mask::PatchMask;

/// Row-major patch ids split into inner and edge sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InnerEdge {
    pub inner: Vec<usize>,
    pub edge: Vec<usize>,
}

pub fn split_inner_edge(mask: &PatchMask) -> InnerEdge {
    let n = mask.n();
    let mut split = InnerEdge {
        inner: Vec::new(),
        edge: Vec::new(),
    };
    for row in 0..n {
        for col in 0..n {
            if !mask.get(row, col) {
                continue;
            }
            let on_border = row == 0 || col == 0 || row + 1 == n || col + 1 == n;
            let touches_background = neighbors8(n, row, col).any(|(r, c)| !mask.get(r, c));
            if on_border || touches_background {
                split.edge.push(row * n + col);
            } else {
                split.inner.push(row * n + col);
            }
        }
    }
    split
}

/// Mean affinity over inner patches minus mean affinity over edge patches.
pub fn rate_mask(mask: &PatchMask, affinity: &AffinityMap) -> Result<f64> {
    if mask.n() != affinity.n() {
        return Err(Error::ShapeMismatch(format!(
            "mask grid {} vs affinity grid {}",
            mask.n(),
            affinity.n()
        )));
    }
    let split = split_inner_edge(mask);
    if split.inner.is_empty() {
        return Ok(f64::NEG_INFINITY);
    }
    let mean = |ids: &[usize]| ids.iter().map(|&p| affinity.values()[p] as f64).sum::<f64>() / ids.len() as f64;
    Ok(mean(&split.inner) - mean(&split.edge))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredMask {
    pub mask: PatchMask,
    pub rating: f64,
    pub kept: bool,
}

impl ScoredMask {
    pub fn rate(mask: PatchMask, affinity: &AffinityMap) -> Result<Self> {
        let rating = rate_mask(&mask, affinity)?;
        Ok(ScoredMask {
            mask,
            rating,
            kept: false,
        })
    }
}

/// `ceil(q_percent / 100 * total)`, computed so exact products are not pushed
/// over an integer by rounding noise.
pub fn keep_count(total: usize, q_percent: f64) -> usize {
    if total == 0 {
        return 0;
    }
    let raw = q_percent * total as f64 / 100.0;
    let nearest = raw.round();
    let count = if (raw - nearest).abs() <= 1e-9 * raw.max(1.0) {
        nearest
    } else {
        raw.ceil()
    };
    (count as usize).clamp(1, total)
}

/// Marks the `keep_count` best masks as kept. Ranking: higher rating, then
/// larger area, then lower list index.
pub fn select_top_q(mut scored: Vec<ScoredMask>, q_percent: f64) -> Result<Vec<ScoredMask>> {
    if !(q_percent > 0.0 && q_percent <= 100.0) {
        return Err(Error::InvalidInput(format!("q_percent {q_percent} outside (0, 100]")));
    }
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&a, &b| {
        let (ma, mb) = (&scored[a], &scored[b]);
        mb.rating
            .total_cmp(&ma.rating)
            .then_with(|| mb.mask.area().cmp(&ma.mask.area()))
            .then(a.cmp(&b))
    });
    let keep = keep_count(scored.len(), q_percent);
    for m in &mut scored {
        m.kept = false;
    }
    for &i in &order[..keep] {
        scored[i].kept = true;
    }
    Ok(scored)
}

/// One row of the filter report; `rating` is `None` for unrateable masks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterRecord {
    pub mask_index: usize,
    pub rating: Option<f64>,
    pub kept: bool,
}

pub fn filter_report(indices: &[usize], scored: &[ScoredMask]) -> Vec<FilterRecord> {
    indices
        .iter()
        .zip(scored)
        .map(|(&mask_index, s)| FilterRecord {
            mask_index,
            rating: s.rating.is_finite().then_some(s.rating),
            kept: s.kept,
        })
        .collect()
}
