//! Superpixel-guided mask loss and its gradient with respect to the
//! per-pixel foreground probability map.
//!
//! Pixel probabilities are pooled into superpixel probabilities with colour
//! similarity weights, scored against all-or-nothing superpixel labels from a
//! coarse mask (hard loss), and against soft labels propagated over the
//! minimum spanning tree of the superpixel colour graph (soft loss).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::PixelMask;
use crate::ndio::{ArrayFile, HyperParams};
use crate::superpixel::{sq_dist, AdjacencyEdge, SuperpixelSeg};

/// Probabilities are clamped to `[P_MIN, 1 - P_MIN]` before any logarithm.
pub const P_MIN: f64 = 1e-6;

pub const FLAG_NO_LABELED: &str = "no_labeled_superpixels";

/// Per-pixel foreground probabilities, clamped into the open unit interval.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMap {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl ProbMap {
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != height * width {
            return Err(Error::ShapeMismatch(format!(
                "probability map {height}x{width} needs {} values, got {}",
                height * width,
                values.len()
            )));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidInput("probability map contains NaN".into()));
        }
        let values = values.into_iter().map(|v| v.clamp(P_MIN, 1.0 - P_MIN)).collect();
        Ok(ProbMap { height, width, values })
    }

    pub fn from_array(array: &ArrayFile) -> Result<Self> {
        match (array.shape(), array.as_f32()) {
            ([h, w], Some(v)) => Self::new(*h, *w, v.iter().map(|&x| x as f64).collect()),
            _ => Err(Error::ShapeMismatch(format!(
                "probability map must be [H,W] float32, got {} {:?}",
                array.dtype(),
                array.shape()
            ))),
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Writes an `[H, W]` gradient or weight buffer as float32.
pub fn field_to_array(height: usize, width: usize, values: &[f64]) -> ArrayFile {
    ArrayFile::from_f32(vec![height, width], values.iter().map(|&v| v as f32).collect()).expect("field shape")
}

/// `exp(-|mu - c|^2 / alpha1)`
pub fn color_similarity(mu: &[f64; 3], color: &[f64; 3], alpha1: f64) -> f64 {
    (-sq_dist(mu, color) / alpha1).exp()
}

/// Superpixel foreground probabilities with the weights used to form them.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperpixelProb {
    /// Colour-weighted mean probability per superpixel.
    pub p: Vec<f64>,
    /// Sum of colour weights per superpixel.
    pub upsilon: Vec<f64>,
    /// Colour weight of every pixel with respect to its own superpixel.
    pub delta: Vec<f64>,
}

fn check_extent(seg: &SuperpixelSeg, dims: (usize, usize), what: &str) -> Result<()> {
    if (seg.height(), seg.width()) != dims {
        return Err(Error::ShapeMismatch(format!(
            "{what} is {}x{}, superpixels are {}x{}",
            dims.0,
            dims.1,
            seg.height(),
            seg.width()
        )));
    }
    Ok(())
}

pub fn superpixel_prob(pm: &ProbMap, seg: &SuperpixelSeg, alpha1: f64) -> Result<SuperpixelProb> {
    check_extent(seg, pm.dims(), "probability map")?;
    if !(alpha1 > 0.0) {
        return Err(Error::InvalidInput(format!("alpha1 {alpha1} must be positive")));
    }
    let colors = seg.colors();
    let mut delta = vec![0.0; colors.len()];
    let k = seg.k();
    let (mut p, mut upsilon) = (vec![0.0; k], vec![0.0; k]);
    for (sp, pixels) in seg.members().iter().enumerate() {
        let mu = &seg.mean_color()[sp];
        // offsets from the first pixel keep a constant map exactly constant
        let anchor = pm.values()[pixels[0]];
        let (mut weighted, mut total) = (0.0, 0.0);
        for &i in pixels {
            let d = color_similarity(mu, &colors[i], alpha1);
            delta[i] = d;
            weighted += (pm.values()[i] - anchor) * d;
            total += d;
        }
        p[sp] = anchor + weighted / total;
        upsilon[sp] = total;
    }
    Ok(SuperpixelProb { p, upsilon, delta })
}

/// All-or-nothing superpixel labels from a pixel mask: `Some(true)` when every
/// pixel is foreground, `Some(false)` when every pixel is background,
/// `None` for mixed superpixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperpixelLabeling {
    pub labels: Vec<Option<bool>>,
    pub n_labeled: usize,
}

pub fn label_superpixels(mask: &PixelMask, seg: &SuperpixelSeg) -> Result<SuperpixelLabeling> {
    check_extent(seg, mask.dims(), "mask")?;
    let labels: Vec<Option<bool>> = seg
        .members()
        .iter()
        .map(|pixels| {
            let fg = pixels.iter().filter(|&&i| mask.values()[i] != 0).count();
            match fg {
                0 => Some(false),
                f if f == pixels.len() => Some(true),
                _ => None,
            }
        })
        .collect();
    let n_labeled = labels.iter().filter(|l| l.is_some()).count();
    Ok(SuperpixelLabeling { labels, n_labeled })
}

/// Binary cross-entropy over labelled superpixels and its gradient with
/// respect to `p`. Both are zero when nothing is labelled.
pub fn hard_loss(p: &[f64], labeling: &SuperpixelLabeling) -> (f64, Vec<f64>) {
    let mut grad = vec![0.0; p.len()];
    if labeling.n_labeled == 0 {
        return (0.0, grad);
    }
    let n_s = labeling.n_labeled as f64;
    let mut sum = 0.0;
    for (k, label) in labeling.labels.iter().enumerate() {
        match label {
            Some(true) => {
                sum += p[k].ln();
                grad[k] = -1.0 / (n_s * p[k]);
            }
            Some(false) => {
                sum += (1.0 - p[k]).ln();
                grad[k] = 1.0 / (n_s * (1.0 - p[k]));
            }
            None => {}
        }
    }
    (-sum / n_s, grad)
}

/// Minimum spanning forest of the superpixel graph with all-pairs path
/// maxima. Pairs in different components hold `f64::INFINITY`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityTree {
    k: usize,
    mst_edges: Vec<AdjacencyEdge>,
    pathmax: Vec<f64>,
}

impl AffinityTree {
    /// Kruskal over `edges`, filling path maxima as components merge: edges
    /// arrive in non-decreasing weight order, so the joining edge is the
    /// largest on every new tree path between the two components.
    pub fn from_edges(k: usize, edges: &[AdjacencyEdge]) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput("affinity tree needs at least one node".into()));
        }
        if let Some(e) = edges.iter().find(|e| e.m >= k || e.n >= k || e.m == e.n) {
            return Err(Error::InvalidInput(format!("bad edge ({}, {}) for {k} nodes", e.m, e.n)));
        }
        if edges.iter().any(|e| !(e.weight >= 0.0) || e.weight.is_infinite()) {
            return Err(Error::InvalidInput("edge weights must be finite and non-negative".into()));
        }
        let mut order: Vec<&AdjacencyEdge> = edges.iter().collect();
        order.sort_by(|a, b| a.weight.total_cmp(&b.weight).then((a.m, a.n).cmp(&(b.m, b.n))));

        let mut pathmax = vec![f64::INFINITY; k * k];
        for i in 0..k {
            pathmax[i * k + i] = 0.0;
        }
        let mut component: Vec<usize> = (0..k).collect();
        let mut members: Vec<Vec<usize>> = (0..k).map(|i| vec![i]).collect();
        let mut mst_edges = Vec::with_capacity(k.saturating_sub(1));
        for e in order {
            let (ca, cb) = (component[e.m], component[e.n]);
            if ca == cb {
                continue;
            }
            for &a in &members[ca] {
                for &b in &members[cb] {
                    pathmax[a * k + b] = e.weight;
                    pathmax[b * k + a] = e.weight;
                }
            }
            let (big, small) = if members[ca].len() >= members[cb].len() { (ca, cb) } else { (cb, ca) };
            let moved = std::mem::take(&mut members[small]);
            for &v in &moved {
                component[v] = big;
            }
            members[big].extend(moved);
            mst_edges.push(*e);
        }
        Ok(AffinityTree { k, mst_edges, pathmax })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mst_edges(&self) -> &[AdjacencyEdge] {
        &self.mst_edges
    }

    pub fn pathmax(&self, a: usize, b: usize) -> f64 {
        self.pathmax[a * self.k + b]
    }
}

pub fn build_affinity_tree(seg: &SuperpixelSeg) -> Result<AffinityTree> {
    AffinityTree::from_edges(seg.k(), seg.edges())
}

/// Symmetric `K x K` matrix of `exp(-pathmax / alpha2)` with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalAffinity {
    k: usize,
    psi: Vec<f64>,
}

impl GlobalAffinity {
    pub fn from_matrix(k: usize, psi: Vec<f64>) -> Result<Self> {
        if psi.len() != k * k {
            return Err(Error::ShapeMismatch(format!("psi needs {} entries, got {}", k * k, psi.len())));
        }
        Ok(GlobalAffinity { k, psi })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.psi[a * self.k + b]
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.psi[a * self.k..(a + 1) * self.k]
    }
}

pub fn global_affinity(tree: &AffinityTree, alpha2: f64) -> Result<GlobalAffinity> {
    if !(alpha2 > 0.0) {
        return Err(Error::InvalidInput(format!("alpha2 {alpha2} must be positive")));
    }
    let k = tree.k;
    let psi = tree
        .pathmax
        .iter()
        .enumerate()
        .map(|(idx, &m)| {
            if idx / k == idx % k {
                1.0
            } else if m.is_infinite() {
                0.0
            } else {
                (-m / alpha2).exp()
            }
        })
        .collect();
    Ok(GlobalAffinity { k, psi })
}

/// Whether a superpixel's own probability takes part in its soft label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelfTerm {
    /// Weighted mean over every superpixel, itself included with weight 1.
    #[default]
    Include,
    /// Weighted mean over the other superpixels only. A superpixel with no
    /// affinity to any other keeps its own probability as soft label.
    Exclude,
}

/// How soft-loss gradients treat the soft labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SoftGradient {
    /// Soft labels are constant targets.
    #[default]
    Detached,
    /// Differentiate through the propagation as well.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SgmOptions {
    pub self_term: SelfTerm,
    pub soft_gradient: SoftGradient,
}

/// Row-normalised propagation weights: `phat = W p`.
fn propagation_weights(psi: &GlobalAffinity, mode: SelfTerm) -> Vec<f64> {
    let k = psi.k;
    let mut w = vec![0.0; k * k];
    for a in 0..k {
        let row = psi.row(a);
        let gamma: f64 = match mode {
            SelfTerm::Include => row.iter().sum(),
            SelfTerm::Exclude => row.iter().enumerate().filter(|&(b, _)| b != a).map(|(_, v)| v).sum(),
        };
        let out = &mut w[a * k..(a + 1) * k];
        if mode == SelfTerm::Exclude && gamma <= 0.0 {
            out[a] = 1.0;
            continue;
        }
        for (b, &v) in row.iter().enumerate() {
            if mode == SelfTerm::Include || b != a {
                out[b] = v / gamma;
            }
        }
    }
    w
}

pub fn soft_labels(p: &[f64], psi: &GlobalAffinity, mode: SelfTerm) -> Result<Vec<f64>> {
    if p.len() != psi.k {
        return Err(Error::ShapeMismatch(format!("{} probabilities vs {}x{} psi", p.len(), psi.k, psi.k)));
    }
    Ok(propagate(&propagation_weights(psi, mode), p))
}

/// `W p`, written as `p_a + sum_b W[a][b] (p_b - p_a)` so rows summing to one
/// reproduce a constant vector exactly.
fn propagate(w: &[f64], p: &[f64]) -> Vec<f64> {
    let k = p.len();
    (0..k)
        .map(|a| p[a] + w[a * k..(a + 1) * k].iter().zip(p).map(|(wv, pv)| wv * (pv - p[a])).sum::<f64>())
        .collect()
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Mean absolute difference and its gradient with `phat` held fixed.
pub fn soft_loss(p: &[f64], phat: &[f64]) -> Result<(f64, Vec<f64>)> {
    if p.len() != phat.len() || p.is_empty() {
        return Err(Error::ShapeMismatch(format!(
            "soft loss needs equal non-empty inputs, got {} and {}",
            p.len(),
            phat.len()
        )));
    }
    let k = p.len() as f64;
    let value = p.iter().zip(phat).map(|(a, b)| (a - b).abs()).sum::<f64>() / k;
    let grad = p.iter().zip(phat).map(|(a, b)| sign(a - b) / k).collect();
    Ok((value, grad))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    pub hard: f64,
    pub soft: f64,
    pub total: f64,
    pub n_s: usize,
    pub flags: Vec<String>,
    /// Gradient of `total` with respect to each pixel probability.
    pub grad: Vec<f64>,
    pub p_super: Vec<f64>,
    pub p_hat: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSummary {
    pub hard: f64,
    pub soft: f64,
    pub total: f64,
    pub n_s: usize,
    pub flags: Vec<String>,
}

impl LossReport {
    pub fn summary(&self) -> LossSummary {
        LossSummary {
            hard: self.hard,
            soft: self.soft,
            total: self.total,
            n_s: self.n_s,
            flags: self.flags.clone(),
        }
    }
}

/// Superpixel-guided loss with default options (self-term included,
/// detached soft labels).
pub fn sgm_loss(pm: &ProbMap, mask: &PixelMask, seg: &SuperpixelSeg, hp: &HyperParams) -> Result<LossReport> {
    let tree = build_affinity_tree(seg)?;
    let psi = global_affinity(&tree, hp.alpha2)?;
    sgm_loss_with(pm, mask, seg, &psi, hp.alpha1, SgmOptions::default())
}

/// Superpixel-guided loss against a precomputed `psi`, so one image's
/// affinity matrix can be shared by all of its masks.
pub fn sgm_loss_with(
    pm: &ProbMap,
    mask: &PixelMask,
    seg: &SuperpixelSeg,
    psi: &GlobalAffinity,
    alpha1: f64,
    options: SgmOptions,
) -> Result<LossReport> {
    check_extent(seg, mask.dims(), "mask")?;
    if psi.k != seg.k() {
        return Err(Error::ShapeMismatch(format!("psi covers {} superpixels, segmentation has {}", psi.k, seg.k())));
    }
    let sp = superpixel_prob(pm, seg, alpha1)?;
    let labeling = label_superpixels(mask, seg)?;
    let (hard, hard_grad) = hard_loss(&sp.p, &labeling);

    let k = seg.k();
    let w = propagation_weights(psi, options.self_term);
    let p_hat = propagate(&w, &sp.p);
    let (soft, mut soft_grad) = soft_loss(&sp.p, &p_hat)?;
    if options.soft_gradient == SoftGradient::Full {
        // d/dp_b of -(1/K) sum_a s_a phat_a = -(1/K) sum_a s_a W[a][b]
        let signs: Vec<f64> = sp.p.iter().zip(&p_hat).map(|(a, b)| sign(a - b)).collect();
        for (b, g) in soft_grad.iter_mut().enumerate() {
            let back: f64 = (0..k).map(|a| signs[a] * w[a * k + b]).sum();
            *g -= back / k as f64;
        }
    }

    let mut grad = vec![0.0; pm.values().len()];
    for (s, pixels) in seg.members().iter().enumerate() {
        let d_p = hard_grad[s] + soft_grad[s];
        for &i in pixels {
            grad[i] = d_p * sp.delta[i] / sp.upsilon[s];
        }
    }

    let mut flags = Vec::new();
    if labeling.n_labeled == 0 {
        flags.push(FLAG_NO_LABELED.to_string());
    }
    Ok(LossReport {
        hard,
        soft,
        total: hard + soft,
        n_s: labeling.n_labeled,
        flags,
        grad,
        p_super: sp.p,
        p_hat,
    })
}
