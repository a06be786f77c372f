use crate::error::{Error, Result};
use crate::ndio::ArrayFile;

/// Binary mask over an `n x n` patch grid; at least one patch is set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PatchMask {
    n: usize,
    values: Vec<u8>,
}

impl PatchMask {
    pub fn new(n: usize, values: Vec<u8>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::ShapeMismatch(format!(
                "patch mask needs {} values, got {}",
                n * n,
                values.len()
            )));
        }
        if values.iter().any(|&v| v > 1) {
            return Err(Error::InvalidInput("mask values must be 0 or 1".into()));
        }
        if !values.contains(&1) {
            return Err(Error::InvalidInput("patch mask has no foreground patch".into()));
        }
        Ok(PatchMask { n, values })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let values = (0..n * n).map(|i| f(i / n, i % n) as u8).collect();
        Self::new(n, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.values[row * self.n + col] != 0
    }

    pub fn area(&self) -> usize {
        self.values.iter().filter(|&&v| v != 0).count()
    }

    /// Nearest-neighbour upsampling to pixel resolution.
    pub fn upsample(&self, height: usize, width: usize) -> PixelMask {
        let n = self.n;
        let values = (0..height * width)
            .map(|i| {
                let (y, x) = (i / width, i % width);
                self.values[(y * n / height) * n + x * n / width]
            })
            .collect();
        PixelMask { height, width, values }
    }

    pub fn stack_to_array(n: usize, masks: &[PatchMask]) -> ArrayFile {
        let values = masks.iter().flat_map(|m| m.values.iter().copied()).collect();
        ArrayFile::from_u8(vec![masks.len(), n, n], values).expect("stack shape matches")
    }

    /// Reads a `[M, N, N]` uint8 stack.
    pub fn stack_from_array(array: &ArrayFile) -> Result<Vec<PatchMask>> {
        let (count, n) = match (array.shape(), array.as_u8()) {
            ([m, a, b], Some(_)) if a == b => (*m, *a),
            _ => {
                return Err(Error::ShapeMismatch(format!(
                    "expected [M,N,N] uint8 mask stack, got {} {:?}",
                    array.dtype(),
                    array.shape()
                )))
            }
        };
        let data = array.as_u8().unwrap_or_default();
        (0..count)
            .map(|i| PatchMask::new(n, data[i * n * n..(i + 1) * n * n].to_vec()))
            .collect()
    }
}

/// Binary mask at pixel resolution. May be empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PixelMask {
    height: usize,
    width: usize,
    values: Vec<u8>,
}

impl PixelMask {
    pub fn new(height: usize, width: usize, values: Vec<u8>) -> Result<Self> {
        if values.len() != height * width {
            return Err(Error::ShapeMismatch(format!(
                "pixel mask {height}x{width} needs {} values, got {}",
                height * width,
                values.len()
            )));
        }
        if values.iter().any(|&v| v > 1) {
            return Err(Error::InvalidInput("mask values must be 0 or 1".into()));
        }
        Ok(PixelMask { height, width, values })
    }

    pub fn from_fn(height: usize, width: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let values = (0..height * width).map(|i| f(i / width, i % width) as u8).collect();
        PixelMask { height, width, values }
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

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> bool {
        self.values[y * self.width + x] != 0
    }

    pub fn area(&self) -> usize {
        self.values.iter().filter(|&&v| v != 0).count()
    }

    pub fn stack_to_array(height: usize, width: usize, masks: &[PixelMask]) -> ArrayFile {
        let values = masks.iter().flat_map(|m| m.values.iter().copied()).collect();
        ArrayFile::from_u8(vec![masks.len(), height, width], values).expect("stack shape matches")
    }

    /// Reads a `[M, H, W]` uint8 stack. Stacks stored at patch resolution are
    /// upsampled when `(height, width)` is given and differs.
    pub fn stack_from_array(array: &ArrayFile, target: Option<(usize, usize)>) -> Result<Vec<PixelMask>> {
        let (count, h, w) = match (array.shape(), array.as_u8()) {
            ([m, h, w], Some(_)) => (*m, *h, *w),
            _ => {
                return Err(Error::ShapeMismatch(format!(
                    "expected [M,H,W] uint8 mask stack, got {} {:?}",
                    array.dtype(),
                    array.shape()
                )))
            }
        };
        let data = array.as_u8().unwrap_or_default();
        let mut out = Vec::with_capacity(count);
        for i in 0..count {
            let raw = data[i * h * w..(i + 1) * h * w].to_vec();
            match target {
                Some((th, tw)) if (th, tw) != (h, w) => {
                    if h != w {
                        return Err(Error::ShapeMismatch(format!(
                            "cannot resample non-square {h}x{w} mask stack to {th}x{tw}"
                        )));
                    }
                    out.push(PatchMask::new(h, raw)?.upsample(th, tw));
                }
                _ => out.push(PixelMask::new(h, w, raw)?),
            }
        }
        Ok(out)
    }
}
