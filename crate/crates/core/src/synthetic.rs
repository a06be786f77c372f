//! Deterministic synthetic scenes for demos and tests.
//!
//! A scene is a flat background with one rectangular object. Features,
//! image colours, probabilities and checkpoint predictions are all derived
//! from the object rectangle plus hash-based noise, so a `(seed, image_id)`
//! pair always produces the same files.

use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::mask::PixelMask;
use crate::ndio::{write_array, write_image_ppm, write_manifest, ArrayFile, HyperParams, RunManifest};
use crate::superpixel::RgbImage;

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    /// Patch grid side.
    pub n: usize,
    /// Pixels per patch side.
    pub patch: usize,
    /// Feature dimension.
    pub dim: usize,
    /// Object rectangle in patch units: rows `r0..r1`, columns `c0..c1`.
    pub object: (usize, usize, usize, usize),
    pub seed: u64,
}

impl SceneSpec {
    /// A scene whose object placement varies with `seed`.
    pub fn from_seed(seed: u64) -> Self {
        let r0 = 1 + (mix(seed, 1) % 3) as usize;
        let c0 = 1 + (mix(seed, 2) % 3) as usize;
        let rows = 3 + (mix(seed, 3) % 2) as usize;
        let cols = 3 + (mix(seed, 4) % 2) as usize;
        SceneSpec {
            n: 8,
            patch: 4,
            dim: 6,
            object: (r0, r0 + rows, c0, c0 + cols),
            seed,
        }
    }

    pub fn side(&self) -> usize {
        self.n * self.patch
    }

    fn in_object(&self, row: usize, col: usize) -> bool {
        let (r0, r1, c0, c1) = self.object;
        (r0..r1).contains(&row) && (c0..c1).contains(&col)
    }

    /// Object mask at pixel resolution, optionally shifted right by `dx`.
    pub fn object_mask(&self, dx: usize) -> PixelMask {
        let s = self.side();
        PixelMask::from_fn(s, s, |y, x| x >= dx && self.in_object(y / self.patch, (x - dx) / self.patch))
    }

    pub fn features(&self) -> ArrayFile {
        let mut values = Vec::with_capacity(self.n * self.n * self.dim);
        for row in 0..self.n {
            for col in 0..self.n {
                let fg = self.in_object(row, col);
                for k in 0..self.dim {
                    let base = if (k < self.dim / 2) == fg { 1.0 } else { 0.0 };
                    values.push(base + 0.05 * unit(self.seed, ((row * self.n + col) * self.dim + k) as u64) as f32);
                }
            }
        }
        ArrayFile::from_f32(vec![self.n, self.n, self.dim], values).expect("feature shape")
    }

    pub fn image(&self) -> RgbImage {
        let s = self.side();
        RgbImage::from_fn(s, s, |y, x| {
            let fg = self.in_object(y / self.patch, x / self.patch);
            let base: [f64; 3] = if fg { [200.0, 60.0, 40.0] } else { [40.0, 90.0, 160.0] };
            let i = (y * s + x) as u64;
            [0, 1, 2].map(|c| (base[c] + 12.0 * unit(self.seed ^ 0x5eed, 3 * i + c as u64)).round() as u8)
        })
    }

    pub fn prob_map(&self) -> ArrayFile {
        let s = self.side();
        let values = (0..s * s)
            .map(|i| {
                let fg = self.in_object(i / s / self.patch, i % s / self.patch);
                let base = if fg { 0.75 } else { 0.25 };
                (base + 0.2 * unit(self.seed ^ 0xfeed, i as u64)) as f32
            })
            .collect();
        ArrayFile::from_f32(vec![s, s], values).expect("prob shape")
    }

    /// Predictions of `e` checkpoints: the object drifting towards its final
    /// position plus one small spurious mask.
    pub fn checkpoints(&self, e: usize) -> Vec<ArrayFile> {
        let s = self.side();
        (0..e)
            .map(|j| {
                let drift = e - 1 - j;
                let spurious = PixelMask::from_fn(s, s, |y, x| y < 3 + j && x >= s - 4);
                PixelMask::stack_to_array(s, s, &[self.object_mask(drift), spurious])
            })
            .collect()
    }

    /// Writes every input of the scene into `dir` and returns the manifest path.
    pub fn write(&self, dir: &Path, image_id: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| crate::ndio::NdioError::io(dir, e))?;
        write_array(&self.features(), dir.join(format!("{image_id}_features.npy")))?;
        write_image_ppm(&self.image().to_array(), dir.join(format!("{image_id}.ppm")))?;
        write_array(&self.prob_map(), dir.join(format!("{image_id}_prob.npy")))?;
        let hp = HyperParams::default();
        let mut checkpoints = Vec::new();
        for (j, arr) in self.checkpoints(hp.e_checkpoints).iter().enumerate() {
            let name = format!("{image_id}_checkpoint_{}.npy", j + 1);
            write_array(arr, dir.join(&name))?;
            checkpoints.push(PathBuf::from(name));
        }
        let manifest = RunManifest {
            image_id: image_id.to_string(),
            features: Some(format!("{image_id}_features.npy").into()),
            image: Some(format!("{image_id}.ppm").into()),
            prob_map: Some(format!("{image_id}_prob.npy").into()),
            hyperparams: hp,
            checkpoints,
            ..RunManifest::default()
        };
        let path = dir.join(format!("{image_id}.json"));
        write_manifest(&manifest, &path)?;
        Ok(path)
    }
}

fn mix(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform value in `[-1, 1)`.
fn unit(seed: u64, index: u64) -> f64 {
    (mix(seed, index) >> 11) as f64 / (1u64 << 52) as f64 - 1.0
}

/// Writes scenes `0..count` as `img0`, `img1`, ... and returns manifest paths.
pub fn write_scenes(dir: &Path, count: usize) -> Result<Vec<PathBuf>> {
    (0..count)
        .map(|i| SceneSpec::from_seed(i as u64 + 1).write(dir, &format!("img{i}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scene_is_reproducible() {
        let a = SceneSpec::from_seed(4);
        assert_eq!(a.features(), SceneSpec::from_seed(4).features());
        assert_eq!(a.image(), SceneSpec::from_seed(4).image());
        assert_ne!(a.prob_map(), SceneSpec::from_seed(5).prob_map());
    }

    #[test]
    fn object_stays_off_corners() {
        for seed in 0..20 {
            let s = SceneSpec::from_seed(seed);
            let (r0, r1, c0, c1) = s.object;
            assert!(r0 >= 1 && c0 >= 1 && r1 < s.n && c1 < s.n);
        }
    }

    #[test]
    fn unit_range() {
        assert!((0..1000).map(|i| unit(9, i)).all(|v| (-1.0..1.0).contains(&v)));
    }
}
