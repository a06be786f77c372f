//! Adaptive self-training loss.
//!
//! Masks predicted by the final checkpoint are scored by how stable they were
//! across earlier checkpoints. Scores are min-max normalised into
//! `[epsilon, 1]` and used to down-weight a band around each mask boundary in
//! a pixel-wise binary cross-entropy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::PixelMask;
use crate::sgmloss::ProbMap;
use crate::superpixel::neighbors4;

/// Intersection over union; zero when both masks are empty.
pub fn iou(a: &PixelMask, b: &PixelMask) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::ShapeMismatch(format!("iou of {:?} and {:?} masks", a.dims(), b.dims())));
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.values().iter().zip(b.values()) {
        let (x, y) = (x != 0, y != 0);
        inter += (x && y) as usize;
        union += (x || y) as usize;
    }
    Ok(if union == 0 { 0.0 } else { inter as f64 / union as f64 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaggedMask {
    pub image_id: String,
    pub mask: PixelMask,
}

/// Predictions of one checkpoint, tagged by the image they belong to.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointMaskSet {
    pub checkpoint_id: usize,
    pub masks: Vec<TaggedMask>,
}

impl CheckpointMaskSet {
    pub fn for_image(checkpoint_id: usize, image_id: &str, masks: Vec<PixelMask>) -> Self {
        CheckpointMaskSet {
            checkpoint_id,
            masks: masks
                .into_iter()
                .map(|mask| TaggedMask {
                    image_id: image_id.to_string(),
                    mask,
                })
                .collect(),
        }
    }
}

/// Sum over intermediate checkpoints of the best IoU between `last` and any
/// mask of the same image. A checkpoint with no such mask contributes zero.
pub fn stability_score(image_id: &str, last: &PixelMask, intermediates: &[CheckpointMaskSet]) -> Result<f64> {
    let mut z = 0.0;
    for set in intermediates {
        let mut best = 0.0f64;
        for tagged in set.masks.iter().filter(|t| t.image_id == image_id) {
            best = best.max(iou(last, &tagged.mask)?);
        }
        z += best;
    }
    Ok(z)
}

/// Maps `scores` linearly onto `[epsilon, 1]`. A constant list maps to 1.
pub fn minmax_normalize(scores: &[f64], epsilon: f64) -> Result<Vec<f64>> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidInput(format!("epsilon {epsilon} outside (0, 1)")));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidInput("scores must be finite".into()));
    }
    let lo = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(scores
        .iter()
        .map(|&z| {
            if hi == lo || z == hi {
                1.0
            } else if z == lo {
                epsilon
            } else {
                (z - lo) / (hi - lo) * (1.0 - epsilon) + epsilon
            }
        })
        .collect())
}

/// Pixels on either side of the mask contour: foreground with a background
/// 4-neighbour, or background with a foreground 4-neighbour.
pub fn boundary_pixels(mask: &PixelMask) -> Vec<bool> {
    let (h, w) = mask.dims();
    let v = mask.values();
    (0..h * w)
        .map(|p| neighbors4(h, w, p).any(|q| (v[q] != 0) != (v[p] != 0)))
        .collect()
}

/// Squared distances along one line to the nearest finite site of `f`, by the
/// lower envelope of parabolas rooted at each site.
fn edt_1d(f: &[f64], out: &mut [f64]) {
    let mut v: Vec<usize> = Vec::with_capacity(f.len());
    let mut z: Vec<f64> = Vec::with_capacity(f.len());
    for q in (0..f.len()).filter(|&q| f[q].is_finite()) {
        let fq = f[q] + (q * q) as f64;
        loop {
            let Some(&p) = v.last() else {
                v.push(q);
                z.push(f64::NEG_INFINITY);
                break;
            };
            let s = (fq - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= *z.last().unwrap() {
                v.pop();
                z.pop();
            } else {
                v.push(q);
                z.push(s);
                break;
            }
        }
    }
    if v.is_empty() {
        out.fill(f64::INFINITY);
        return;
    }
    let mut k = 0;
    for (x, o) in out.iter_mut().enumerate() {
        while k + 1 < v.len() && z[k + 1] < x as f64 {
            k += 1;
        }
        let d = x as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Exact Euclidean distance from every pixel to the nearest boundary pixel.
/// Every entry is `f64::INFINITY` when the mask has no boundary.
pub fn distance_transform(mask: &PixelMask) -> Vec<f64> {
    let (h, w) = mask.dims();
    let boundary = boundary_pixels(mask);
    let mut sq: Vec<f64> = boundary.iter().map(|&b| if b { 0.0 } else { f64::INFINITY }).collect();
    let (mut col, mut col_out) = (vec![0.0; h], vec![0.0; h]);
    for x in 0..w {
        for y in 0..h {
            col[y] = sq[y * w + x];
        }
        edt_1d(&col, &mut col_out);
        for y in 0..h {
            sq[y * w + x] = col_out[y];
        }
    }
    let mut row_out = vec![0.0; w];
    for y in 0..h {
        edt_1d(&sq[y * w..(y + 1) * w], &mut row_out);
        sq[y * w..(y + 1) * w].copy_from_slice(&row_out);
    }
    sq.iter().map(|d| d.sqrt()).collect()
}

/// Per-pixel loss weights: `z_bar` inside the boundary band, 1 elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMap {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl WeightMap {
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != height * width {
            return Err(Error::ShapeMismatch(format!(
                "weight map {height}x{width} needs {} values, got {}",
                height * width,
                values.len()
            )));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidInput("weights must be finite and non-negative".into()));
        }
        Ok(WeightMap { height, width, values })
    }

    pub fn uniform(height: usize, width: usize) -> Self {
        WeightMap {
            height,
            width,
            values: vec![1.0; height * width],
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

pub fn weight_map(mask: &PixelMask, z_bar: f64, d_hat: f64) -> Result<WeightMap> {
    if !(z_bar > 0.0 && z_bar <= 1.0) {
        return Err(Error::InvalidInput(format!("z_bar {z_bar} outside (0, 1]")));
    }
    if !(d_hat > 0.0) {
        return Err(Error::InvalidInput(format!("d_hat {d_hat} must be positive")));
    }
    let (h, w) = mask.dims();
    let values = distance_transform(mask)
        .into_iter()
        .map(|d| if d <= d_hat { z_bar } else { 1.0 })
        .collect();
    Ok(WeightMap {
        height: h,
        width: w,
        values,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveLoss {
    pub value: f64,
    pub grad: Vec<f64>,
}

/// Weighted pixel-wise binary cross-entropy against `target`, averaged over
/// all pixels, with its gradient with respect to each probability.
pub fn adaptive_loss(pm: &ProbMap, target: &PixelMask, wm: &WeightMap) -> Result<AdaptiveLoss> {
    if pm.dims() != target.dims() || pm.dims() != wm.dims() {
        return Err(Error::ShapeMismatch(format!(
            "probabilities {:?}, target {:?}, weights {:?}",
            pm.dims(),
            target.dims(),
            wm.dims()
        )));
    }
    let n_p = pm.values().len() as f64;
    let mut sum = 0.0;
    let grad = pm
        .values()
        .iter()
        .zip(target.values())
        .zip(wm.values())
        .map(|((&p, &y), &phi)| {
            if y != 0 {
                sum += phi * p.ln();
                -phi / (n_p * p)
            } else {
                sum += phi * (1.0 - p).ln();
                phi / (n_p * (1.0 - p))
            }
        })
        .collect();
    Ok(AdaptiveLoss { value: -sum / n_p, grad })
}

/// One row of the stability report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRecord {
    pub mask_index: usize,
    #[serde(rename = "Z")]
    pub z: f64,
    #[serde(rename = "Z_bar")]
    pub z_bar: f64,
}

/// Scores every final-checkpoint mask and normalises over the whole batch.
pub fn score_batch(
    last: &[TaggedMask],
    intermediates: &[CheckpointMaskSet],
    epsilon: f64,
) -> Result<Vec<StabilityRecord>> {
    let raw = last
        .iter()
        .map(|t| stability_score(&t.image_id, &t.mask, intermediates))
        .collect::<Result<Vec<_>>>()?;
    let norm = minmax_normalize(&raw, epsilon)?;
    Ok(raw
        .into_iter()
        .zip(norm)
        .enumerate()
        .map(|(mask_index, (z, z_bar))| StabilityRecord { mask_index, z, z_bar })
        .collect())
}
