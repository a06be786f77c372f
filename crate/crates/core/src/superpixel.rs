//! Superpixel segmentations: SNIC generation, ingestion of external label
//! maps, CIELAB colour statistics and the 4-adjacency graph whose edge
//! weights are squared distances between superpixel mean colours.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap, VecDeque};

use serde_json::json;

use crate::error::{Error, Result};
use crate::ndio::ArrayFile;

/// CIELAB colour under the D65 white point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabColor {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

impl LabColor {
    pub fn to_array(self) -> [f64; 3] {
        [self.l, self.a, self.b]
    }
}

// sRGB primaries to XYZ, D65
const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];
const WHITE_D65: [f64; 3] = [0.95047, 1.0, 1.08883];

fn srgb_to_linear(c: u8) -> f64 {
    let c = c as f64 / 255.0;
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const EPSILON: f64 = 216.0 / 24389.0;
    const KAPPA: f64 = 24389.0 / 27.0;
    if t > EPSILON {
        t.cbrt()
    } else {
        (KAPPA * t + 16.0) / 116.0
    }
}

pub fn rgb_to_lab(rgb: [u8; 3]) -> LabColor {
    let lin = rgb.map(srgb_to_linear);
    let mut f = [0.0; 3];
    for (i, row) in RGB_TO_XYZ.iter().enumerate() {
        let xyz = row[0] * lin[0] + row[1] * lin[1] + row[2] * lin[2];
        f[i] = lab_f(xyz / WHITE_D65[i]);
    }
    LabColor {
        l: 116.0 * f[1] - 16.0,
        a: 500.0 * (f[0] - f[1]),
        b: 200.0 * (f[1] - f[2]),
    }
}

#[inline]
pub(crate) fn sq_dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

/// Packed 8-bit RGB image, row-major with top-left origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    height: usize,
    width: usize,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(height: usize, width: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != height * width * 3 {
            return Err(Error::ShapeMismatch(format!(
                "RGB image {height}x{width} needs {} bytes, got {}",
                height * width * 3,
                data.len()
            )));
        }
        Ok(RgbImage { height, width, data })
    }

    pub fn from_fn(height: usize, width: usize, f: impl Fn(usize, usize) -> [u8; 3]) -> Self {
        let data = (0..height * width).flat_map(|i| f(i / width, i % width)).collect();
        RgbImage { height, width, data }
    }

    pub fn from_array(array: &ArrayFile) -> Result<Self> {
        match (array.shape(), array.as_u8()) {
            ([h, w, 3], Some(v)) => Self::new(*h, *w, v.to_vec()),
            _ => Err(Error::ShapeMismatch(format!(
                "image must be [H,W,3] uint8, got {} {:?}",
                array.dtype(),
                array.shape()
            ))),
        }
    }

    pub fn to_array(&self) -> ArrayFile {
        ArrayFile::from_u8(vec![self.height, self.width, 3], self.data.clone()).expect("image shape")
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn pixel(&self, index: usize) -> [u8; 3] {
        [self.data[3 * index], self.data[3 * index + 1], self.data[3 * index + 2]]
    }

    pub fn to_lab(&self) -> Vec<[f64; 3]> {
        (0..self.height * self.width)
            .map(|i| rgb_to_lab(self.pixel(i)).to_array())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjacencyEdge {
    pub m: usize,
    pub n: usize,
    /// Squared Euclidean distance between the two mean Lab colours.
    pub weight: f64,
}

/// Pixel-resolution superpixel labels with per-superpixel statistics.
///
/// Labels are contiguous `0..K`, every superpixel is 4-connected, and
/// `edges` lists each 4-adjacent pair once with `m < n`, sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperpixelSeg {
    height: usize,
    width: usize,
    labels: Vec<usize>,
    colors: Vec<[f64; 3]>,
    members: Vec<Vec<usize>>,
    mean_color: Vec<[f64; 3]>,
    edges: Vec<AdjacencyEdge>,
}

impl SuperpixelSeg {
    /// Builds a segmentation from arbitrary non-negative region ids and
    /// per-pixel Lab colours.
    ///
    /// Each 4-connected component of equal raw ids becomes one superpixel.
    /// New ids follow `(raw id, first pixel in raster order)`, so an input
    /// that is already contiguous and connected keeps its ids.
    pub fn from_labels(height: usize, width: usize, raw: &[i64], colors: Vec<[f64; 3]>) -> Result<Self> {
        let count = height * width;
        if raw.len() != count || colors.len() != count {
            return Err(Error::ShapeMismatch(format!(
                "{height}x{width} segmentation needs {count} labels and colours, got {} and {}",
                raw.len(),
                colors.len()
            )));
        }
        if count == 0 {
            return Err(Error::InvalidInput("empty image".into()));
        }
        if let Some(pixel) = raw.iter().position(|&l| l < 0) {
            return Err(Error::NegativeLabel {
                label: raw[pixel].clamp(i32::MIN as i64, -1) as i32,
                pixel,
            });
        }

        const UNSET: usize = usize::MAX;
        let mut component = vec![UNSET; count];
        let mut keys: Vec<(i64, usize)> = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..count {
            if component[start] != UNSET {
                continue;
            }
            let id = keys.len();
            keys.push((raw[start], start));
            component[start] = id;
            queue.push_back(start);
            while let Some(p) = queue.pop_front() {
                for q in neighbors4(height, width, p) {
                    if component[q] == UNSET && raw[q] == raw[start] {
                        component[q] = id;
                        queue.push_back(q);
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..keys.len()).collect();
        order.sort_by_key(|&c| keys[c]);
        let mut new_id = vec![0; keys.len()];
        for (rank, &c) in order.iter().enumerate() {
            new_id[c] = rank;
        }
        let labels: Vec<usize> = component.iter().map(|&c| new_id[c]).collect();
        Ok(Self::from_connected_labels(height, width, labels, colors))
    }

    fn from_connected_labels(height: usize, width: usize, labels: Vec<usize>, colors: Vec<[f64; 3]>) -> Self {
        let k = labels.iter().max().map_or(0, |&m| m + 1);
        let mut members = vec![Vec::new(); k];
        for (p, &l) in labels.iter().enumerate() {
            members[l].push(p);
        }
        let mean_color: Vec<[f64; 3]> = members
            .iter()
            .map(|pix| {
                let mut sum = [0.0; 3];
                for &p in pix {
                    for c in 0..3 {
                        sum[c] += colors[p][c];
                    }
                }
                sum.map(|s| s / pix.len() as f64)
            })
            .collect();

        let mut pairs = BTreeSet::new();
        for y in 0..height {
            for x in 0..width {
                let p = y * width + x;
                let here = labels[p];
                if x + 1 < width && labels[p + 1] != here {
                    pairs.insert((here.min(labels[p + 1]), here.max(labels[p + 1])));
                }
                if y + 1 < height && labels[p + width] != here {
                    pairs.insert((here.min(labels[p + width]), here.max(labels[p + width])));
                }
            }
        }
        let edges = pairs
            .into_iter()
            .map(|(m, n)| AdjacencyEdge {
                m,
                n,
                weight: sq_dist(&mean_color[m], &mean_color[n]),
            })
            .collect();
        SuperpixelSeg {
            height,
            width,
            labels,
            colors,
            members,
            mean_color,
            edges,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn k(&self) -> usize {
        self.members.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Per-pixel Lab colours.
    pub fn colors(&self) -> &[[f64; 3]] {
        &self.colors
    }

    /// Raster-ordered pixel indices of each superpixel.
    pub fn members(&self) -> &[Vec<usize>] {
        &self.members
    }

    pub fn mean_color(&self) -> &[[f64; 3]] {
        &self.mean_color
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    pub fn edges(&self) -> &[AdjacencyEdge] {
        &self.edges
    }

    pub fn labels_array(&self) -> ArrayFile {
        let values = self.labels.iter().map(|&l| l as i32).collect();
        ArrayFile::from_i32(vec![self.height, self.width], values).expect("label map shape")
    }

    /// `{K, sizes, mean_color, edges: [[m, n, w], ...]}`
    pub fn stats_json(&self) -> serde_json::Value {
        json!({
            "K": self.k(),
            "sizes": self.sizes(),
            "mean_color": self.mean_color,
            "edges": self.edges.iter().map(|e| json!([e.m, e.n, e.weight])).collect::<Vec<_>>(),
        })
    }
}

pub(crate) fn neighbors4(height: usize, width: usize, p: usize) -> impl Iterator<Item = usize> {
    let (y, x) = (p / width, p % width);
    let up = (y > 0).then(|| p - width);
    let down = (y + 1 < height).then(|| p + width);
    let left = (x > 0).then(|| p - 1);
    let right = (x + 1 < width).then(|| p + 1);
    [up, left, right, down].into_iter().flatten()
}

/// Wraps an external label map (any non-negative ids) as a segmentation.
pub fn ingest_labels(labels: &[i32], image: &RgbImage) -> Result<SuperpixelSeg> {
    let raw: Vec<i64> = labels.iter().map(|&l| l as i64).collect();
    SuperpixelSeg::from_labels(image.height(), image.width(), &raw, image.to_lab())
}

pub fn ingest_label_array(labels: &ArrayFile, image: &RgbImage) -> Result<SuperpixelSeg> {
    match (labels.shape(), labels.as_i32()) {
        ([h, w], Some(v)) if (*h, *w) == (image.height(), image.width()) => ingest_labels(v, image),
        _ => Err(Error::ShapeMismatch(format!(
            "superpixel labels must be [{},{}] int32, got {} {:?}",
            image.height(),
            image.width(),
            labels.dtype(),
            labels.shape()
        ))),
    }
}

/// Seed grid columns and rows: the most cells not exceeding `k_target`,
/// shaped after the image aspect ratio.
fn seed_grid(height: usize, width: usize, k_target: usize) -> (usize, usize) {
    let cols = ((k_target as f64 * width as f64 / height as f64).sqrt().round() as usize).clamp(1, width.min(k_target));
    let rows = (k_target / cols).clamp(1, height);
    (cols, rows)
}

#[derive(Debug, Clone, Copy)]
struct QueueEntry {
    dist: f64,
    seq: u64,
    pixel: usize,
    label: usize,
}

impl PartialEq for QueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QueueEntry {}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist.total_cmp(&other.dist).then(self.seq.cmp(&other.seq))
    }
}

/// Simple non-iterative clustering: priority-queue region growing in Lab
/// space from a regular seed grid.
///
/// A candidate pixel's priority is its squared Lab distance to the region's
/// running mean colour plus its squared spatial distance to the region's
/// running centroid scaled by `compactness^2 * K / N`. Equal priorities pop
/// in insertion order, so the result is fully deterministic.
pub fn snic_superpixels(image: &RgbImage, k_target: usize, compactness: f64) -> Result<SuperpixelSeg> {
    let (height, width) = (image.height(), image.width());
    let count = height * width;
    if k_target == 0 || k_target > count {
        return Err(Error::InvalidInput(format!(
            "k_target {k_target} must lie in [1, {count}]"
        )));
    }
    if !(compactness.is_finite() && compactness >= 0.0) {
        return Err(Error::InvalidInput(format!("compactness {compactness} must be non-negative")));
    }
    let lab = image.to_lab();
    let (cols, rows) = seed_grid(height, width, k_target);
    let k = cols * rows;
    let spatial_weight = compactness * compactness * k as f64 / count as f64;

    struct Region {
        sum_y: f64,
        sum_x: f64,
        sum_lab: [f64; 3],
        size: f64,
    }
    let mut regions: Vec<Region> = Vec::with_capacity(k);
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    for r in 0..rows {
        for c in 0..cols {
            let y = ((r as f64 + 0.5) * height as f64 / rows as f64) as usize;
            let x = ((c as f64 + 0.5) * width as f64 / cols as f64) as usize;
            let label = regions.len();
            regions.push(Region {
                sum_y: 0.0,
                sum_x: 0.0,
                sum_lab: [0.0; 3],
                size: 0.0,
            });
            heap.push(Reverse(QueueEntry {
                dist: 0.0,
                seq,
                pixel: y * width + x,
                label,
            }));
            seq += 1;
        }
    }

    const UNSET: usize = usize::MAX;
    let mut labels = vec![UNSET; count];
    while let Some(Reverse(entry)) = heap.pop() {
        if labels[entry.pixel] != UNSET {
            continue;
        }
        labels[entry.pixel] = entry.label;
        let region = &mut regions[entry.label];
        let (py, px) = ((entry.pixel / width) as f64, (entry.pixel % width) as f64);
        region.sum_y += py;
        region.sum_x += px;
        for (sum, v) in region.sum_lab.iter_mut().zip(lab[entry.pixel]) {
            *sum += v;
        }
        region.size += 1.0;
        let cy = region.sum_y / region.size;
        let cx = region.sum_x / region.size;
        let mean = region.sum_lab.map(|s| s / region.size);

        for q in neighbors4(height, width, entry.pixel) {
            if labels[q] != UNSET {
                continue;
            }
            let (qy, qx) = ((q / width) as f64, (q % width) as f64);
            let spatial = (qy - cy).powi(2) + (qx - cx).powi(2);
            let dist = sq_dist(&lab[q], &mean) + spatial * spatial_weight;
            heap.push(Reverse(QueueEntry {
                dist,
                seq,
                pixel: q,
                label: entry.label,
            }));
            seq += 1;
        }
    }

    let raw: Vec<i64> = labels.iter().map(|&l| l as i64).collect();
    SuperpixelSeg::from_labels(height, width, &raw, lab)
}
