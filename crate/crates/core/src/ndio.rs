//! Interchange I/O: NPY v1.0 arrays, binary PPM images and run manifests.
//!
//! Only little-endian `float32`, `uint8` and `int32` arrays in C order are
//! accepted. Headers are written exactly like `numpy.save` writes them, so a
//! file produced here is byte-identical to the NumPy output for the same
//! array.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

const NPY_MAGIC: &[u8; 6] = b"\x93NUMPY";
const NPY_ALIGN: usize = 64;

#[derive(Debug, Error)]
pub enum NdioError {
    #[error("malformed header at byte {offset}: {reason}")]
    MalformedHeader { offset: usize, reason: String },
    #[error("unsupported dtype {descr:?} at byte {offset}")]
    UnsupportedDtype { offset: usize, descr: String },
    #[error("truncated payload at byte {offset}: expected {expected} bytes, found {found}")]
    TruncatedPayload {
        offset: usize,
        expected: usize,
        found: usize,
    },
    #[error("{found} unexpected trailing bytes after payload at byte {offset}")]
    TrailingData { offset: usize, found: usize },
    #[error("unsupported PPM maxval {maxval} (only 255 is accepted)")]
    UnsupportedMaxval { maxval: u32 },
    #[error("shape {shape:?} holds {expected} elements but {found} values were given")]
    ShapeDataMismatch {
        shape: Vec<usize>,
        expected: usize,
        found: usize,
    },
    #[error("I/O failure on {path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid manifest {path}: {reason}")]
    InvalidManifest { path: PathBuf, reason: String },
    #[error("invalid hyperparameter {name}: {reason}")]
    InvalidHyperParam { name: &'static str, reason: String },
}

impl NdioError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        NdioError::IoFailure {
            path: path.to_path_buf(),
            source,
        }
    }

    fn malformed(offset: usize, reason: impl Into<String>) -> Self {
        NdioError::MalformedHeader {
            offset,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dtype {
    Float32,
    Uint8,
    Int32,
}

impl Dtype {
    pub fn descr(self) -> &'static str {
        match self {
            Dtype::Float32 => "<f4",
            Dtype::Uint8 => "|u1",
            Dtype::Int32 => "<i4",
        }
    }

    pub fn item_size(self) -> usize {
        match self {
            Dtype::Float32 | Dtype::Int32 => 4,
            Dtype::Uint8 => 1,
        }
    }

    fn from_descr(descr: &str) -> Option<Self> {
        match descr {
            "<f4" => Some(Dtype::Float32),
            "<i4" => Some(Dtype::Int32),
            "|u1" | "<u1" | ">u1" | "=u1" | "u1" => Some(Dtype::Uint8),
            _ => None,
        }
    }
}

impl fmt::Display for Dtype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Dtype::Float32 => "float32",
            Dtype::Uint8 => "uint8",
            Dtype::Int32 => "int32",
        };
        f.write_str(name)
    }
}

/// Typed element storage of an [`ArrayFile`].
#[derive(Debug, Clone, PartialEq)]
pub enum ArrayData {
    F32(Vec<f32>),
    U8(Vec<u8>),
    I32(Vec<i32>),
}

impl ArrayData {
    pub fn len(&self) -> usize {
        match self {
            ArrayData::F32(v) => v.len(),
            ArrayData::U8(v) => v.len(),
            ArrayData::I32(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dtype(&self) -> Dtype {
        match self {
            ArrayData::F32(_) => Dtype::Float32,
            ArrayData::U8(_) => Dtype::Uint8,
            ArrayData::I32(_) => Dtype::Int32,
        }
    }
}

/// A C-contiguous, row-major array with a whitelisted dtype.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayFile {
    shape: Vec<usize>,
    data: ArrayData,
}

impl ArrayFile {
    pub fn new(shape: Vec<usize>, data: ArrayData) -> Result<Self, NdioError> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(NdioError::ShapeDataMismatch {
                shape,
                expected,
                found: data.len(),
            });
        }
        Ok(ArrayFile { shape, data })
    }

    pub fn from_f32(shape: Vec<usize>, values: Vec<f32>) -> Result<Self, NdioError> {
        Self::new(shape, ArrayData::F32(values))
    }

    pub fn from_u8(shape: Vec<usize>, values: Vec<u8>) -> Result<Self, NdioError> {
        Self::new(shape, ArrayData::U8(values))
    }

    pub fn from_i32(shape: Vec<usize>, values: Vec<i32>) -> Result<Self, NdioError> {
        Self::new(shape, ArrayData::I32(values))
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn dtype(&self) -> Dtype {
        self.data.dtype()
    }

    pub fn data(&self) -> &ArrayData {
        &self.data
    }

    pub fn into_data(self) -> ArrayData {
        self.data
    }

    pub fn as_f32(&self) -> Option<&[f32]> {
        match &self.data {
            ArrayData::F32(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_u8(&self) -> Option<&[u8]> {
        match &self.data {
            ArrayData::U8(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_i32(&self) -> Option<&[i32]> {
        match &self.data {
            ArrayData::I32(v) => Some(v),
            _ => None,
        }
    }

    /// Serializes to the NPY v1.0 byte layout.
    pub fn to_npy_bytes(&self) -> Vec<u8> {
        let header = npy_header(self.dtype(), &self.shape);
        let mut out = Vec::with_capacity(header.len() + self.data.len() * self.dtype().item_size());
        out.extend_from_slice(&header);
        match &self.data {
            ArrayData::F32(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            ArrayData::U8(v) => out.extend_from_slice(v),
            ArrayData::I32(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        }
        out
    }

    /// Parses an NPY byte buffer.
    pub fn from_npy_bytes(bytes: &[u8]) -> Result<Self, NdioError> {
        if bytes.len() < 10 {
            return Err(NdioError::malformed(bytes.len(), "file shorter than the NPY preamble"));
        }
        if &bytes[..6] != NPY_MAGIC {
            return Err(NdioError::malformed(0, "missing \\x93NUMPY magic"));
        }
        let (major, minor) = (bytes[6], bytes[7]);
        let (header_len, header_start) = match major {
            1 => (u16::from_le_bytes([bytes[8], bytes[9]]) as usize, 10),
            2 | 3 => {
                if bytes.len() < 12 {
                    return Err(NdioError::malformed(bytes.len(), "truncated v2 header length"));
                }
                (u32::from_le_bytes([bytes[8], bytes[9], bytes[10], bytes[11]]) as usize, 12)
            }
            _ => {
                return Err(NdioError::malformed(6, format!("unsupported NPY version {major}.{minor}")));
            }
        };
        let header_end = header_start + header_len;
        if bytes.len() < header_end {
            return Err(NdioError::malformed(bytes.len(), "header extends past end of file"));
        }
        let header = std::str::from_utf8(&bytes[header_start..header_end])
            .map_err(|e| NdioError::malformed(header_start + e.valid_up_to(), "header is not valid text"))?;
        let fields = parse_header_dict(header, header_start)?;

        let descr = match fields.get("descr") {
            Some((HeaderValue::Str(s), _)) => s.clone(),
            Some((_, at)) => return Err(NdioError::malformed(*at, "'descr' is not a string")),
            None => return Err(NdioError::malformed(header_start, "missing 'descr'")),
        };
        let descr_at = fields["descr"].1;
        let dtype = Dtype::from_descr(&descr).ok_or(NdioError::UnsupportedDtype {
            offset: descr_at,
            descr: descr.clone(),
        })?;
        match fields.get("fortran_order") {
            Some((HeaderValue::Bool(false), _)) => {}
            Some((_, at)) => {
                return Err(NdioError::malformed(*at, "only fortran_order=False is supported"));
            }
            None => return Err(NdioError::malformed(header_start, "missing 'fortran_order'")),
        }
        let shape = match fields.get("shape") {
            Some((HeaderValue::Tuple(s), _)) => s.clone(),
            Some((_, at)) => return Err(NdioError::malformed(*at, "'shape' is not a tuple")),
            None => return Err(NdioError::malformed(header_start, "missing 'shape'")),
        };

        let count = shape
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| NdioError::malformed(fields["shape"].1, "shape overflows"))?;
        let expected = count * dtype.item_size();
        let payload = &bytes[header_end..];
        if payload.len() < expected {
            return Err(NdioError::TruncatedPayload {
                offset: bytes.len(),
                expected,
                found: payload.len(),
            });
        }
        if payload.len() > expected {
            return Err(NdioError::TrailingData {
                offset: header_end + expected,
                found: payload.len() - expected,
            });
        }
        let data = match dtype {
            Dtype::Float32 => ArrayData::F32(
                payload
                    .chunks_exact(4)
                    .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                    .collect(),
            ),
            Dtype::Int32 => ArrayData::I32(
                payload
                    .chunks_exact(4)
                    .map(|c| i32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                    .collect(),
            ),
            Dtype::Uint8 => ArrayData::U8(payload.to_vec()),
        };
        Ok(ArrayFile { shape, data })
    }
}

fn npy_header(dtype: Dtype, shape: &[usize]) -> Vec<u8> {
    let shape_repr = match shape {
        [] => "()".to_string(),
        [d] => format!("({d},)"),
        dims => {
            let parts: Vec<String> = dims.iter().map(|d| d.to_string()).collect();
            format!("({})", parts.join(", "))
        }
    };
    let mut dict = format!(
        "{{'descr': '{}', 'fortran_order': False, 'shape': {}, }}",
        dtype.descr(),
        shape_repr
    );
    // magic(6) + version(2) + length(2) + dict + padding + '\n' is a multiple of 64
    let unpadded = 10 + dict.len() + 1;
    let pad = (NPY_ALIGN - unpadded % NPY_ALIGN) % NPY_ALIGN;
    dict.extend(std::iter::repeat_n(' ', pad));
    dict.push('\n');

    let mut out = Vec::with_capacity(10 + dict.len());
    out.extend_from_slice(NPY_MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&(dict.len() as u16).to_le_bytes());
    out.extend_from_slice(dict.as_bytes());
    out
}

#[derive(Debug, Clone, PartialEq)]
enum HeaderValue {
    Str(String),
    Bool(bool),
    Tuple(Vec<usize>),
}

/// Minimal parser for the Python dict literal of an NPY header. Offsets in
/// errors are absolute file positions.
fn parse_header_dict(text: &str, base: usize) -> Result<BTreeMap<String, (HeaderValue, usize)>, NdioError> {
    struct Cursor<'a> {
        s: &'a [u8],
        pos: usize,
        base: usize,
    }

    impl Cursor<'_> {
        fn at(&self) -> usize {
            self.base + self.pos
        }
        fn skip_ws(&mut self) {
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
        }
        fn peek(&self) -> Option<u8> {
            self.s.get(self.pos).copied()
        }
        fn expect(&mut self, c: u8) -> Result<(), NdioError> {
            self.skip_ws();
            if self.peek() == Some(c) {
                self.pos += 1;
                Ok(())
            } else {
                Err(NdioError::malformed(self.at(), format!("expected '{}'", c as char)))
            }
        }
        fn string(&mut self) -> Result<String, NdioError> {
            self.skip_ws();
            let quote = match self.peek() {
                Some(q @ (b'\'' | b'"')) => q,
                _ => return Err(NdioError::malformed(self.at(), "expected quoted string")),
            };
            self.pos += 1;
            let start = self.pos;
            while self.pos < self.s.len() && self.s[self.pos] != quote {
                self.pos += 1;
            }
            if self.pos >= self.s.len() {
                return Err(NdioError::malformed(self.at(), "unterminated string"));
            }
            let out = String::from_utf8_lossy(&self.s[start..self.pos]).into_owned();
            self.pos += 1;
            Ok(out)
        }
        fn integer(&mut self) -> Result<usize, NdioError> {
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            // numpy < 2 on some platforms wrote shapes like (3L,)
            let digits = std::str::from_utf8(&self.s[start..self.pos]).unwrap_or("");
            if self.peek() == Some(b'L') {
                self.pos += 1;
            }
            digits
                .parse()
                .map_err(|_| NdioError::malformed(self.base + start, "expected non-negative integer"))
        }
        fn value(&mut self) -> Result<HeaderValue, NdioError> {
            self.skip_ws();
            match self.peek() {
                Some(b'\'' | b'"') => Ok(HeaderValue::Str(self.string()?)),
                Some(b'(') => {
                    self.pos += 1;
                    let mut dims = Vec::new();
                    loop {
                        self.skip_ws();
                        if self.peek() == Some(b')') {
                            self.pos += 1;
                            break;
                        }
                        dims.push(self.integer()?);
                        self.skip_ws();
                        match self.peek() {
                            Some(b',') => self.pos += 1,
                            Some(b')') => {}
                            _ => return Err(NdioError::malformed(self.at(), "expected ',' or ')' in shape")),
                        }
                    }
                    Ok(HeaderValue::Tuple(dims))
                }
                _ => {
                    let rest = &self.s[self.pos..];
                    if rest.starts_with(b"True") {
                        self.pos += 4;
                        Ok(HeaderValue::Bool(true))
                    } else if rest.starts_with(b"False") {
                        self.pos += 5;
                        Ok(HeaderValue::Bool(false))
                    } else {
                        Err(NdioError::malformed(self.at(), "unrecognized header value"))
                    }
                }
            }
        }
    }

    let mut cur = Cursor {
        s: text.as_bytes(),
        pos: 0,
        base,
    };
    let mut out = BTreeMap::new();
    cur.expect(b'{')?;
    loop {
        cur.skip_ws();
        if cur.peek() == Some(b'}') {
            cur.pos += 1;
            break;
        }
        let key = cur.string()?;
        cur.expect(b':')?;
        cur.skip_ws();
        let at = cur.at();
        let value = cur.value()?;
        out.insert(key, (value, at));
        cur.skip_ws();
        match cur.peek() {
            Some(b',') => cur.pos += 1,
            Some(b'}') => {}
            _ => return Err(NdioError::malformed(cur.at(), "expected ',' or '}'")),
        }
    }
    cur.skip_ws();
    if cur.pos != cur.s.len() {
        return Err(NdioError::malformed(cur.at(), "unexpected text after header dict"));
    }
    Ok(out)
}

pub fn read_array(path: impl AsRef<Path>) -> Result<ArrayFile, NdioError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| NdioError::io(path, e))?;
    ArrayFile::from_npy_bytes(&bytes)
}

pub fn write_array(array: &ArrayFile, path: impl AsRef<Path>) -> Result<(), NdioError> {
    let path = path.as_ref();
    fs::write(path, array.to_npy_bytes()).map_err(|e| NdioError::io(path, e))
}

/// Decodes a binary PPM (P6, maxval 255) into a `[H, W, 3]` uint8 array.
pub fn decode_ppm(bytes: &[u8]) -> Result<ArrayFile, NdioError> {
    if bytes.len() < 2 || &bytes[..2] != b"P6" {
        return Err(NdioError::malformed(0, "only binary P6 images are accepted"));
    }
    let mut pos = 2;
    let next_token = |pos: &mut usize| -> Result<(u32, usize), NdioError> {
        loop {
            match bytes.get(*pos) {
                Some(b'#') => {
                    while *pos < bytes.len() && bytes[*pos] != b'\n' {
                        *pos += 1;
                    }
                }
                Some(c) if c.is_ascii_whitespace() => *pos += 1,
                _ => break,
            }
        }
        let start = *pos;
        while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
            *pos += 1;
        }
        if start == *pos {
            return Err(NdioError::malformed(start, "expected decimal header field"));
        }
        let text = std::str::from_utf8(&bytes[start..*pos]).unwrap_or("");
        let value = text
            .parse::<u32>()
            .map_err(|_| NdioError::malformed(start, "header field out of range"))?;
        Ok((value, start))
    };
    if !bytes.get(pos).is_some_and(|c| c.is_ascii_whitespace() || *c == b'#') {
        return Err(NdioError::malformed(pos, "expected whitespace after magic"));
    }
    let (width, _) = next_token(&mut pos)?;
    let (height, _) = next_token(&mut pos)?;
    let (maxval, _) = next_token(&mut pos)?;
    if maxval != 255 {
        return Err(NdioError::UnsupportedMaxval { maxval });
    }
    match bytes.get(pos) {
        Some(c) if c.is_ascii_whitespace() => pos += 1,
        _ => return Err(NdioError::malformed(pos, "expected single whitespace before raster")),
    }
    let (w, h) = (width as usize, height as usize);
    let expected = w * h * 3;
    let payload = &bytes[pos..];
    if payload.len() < expected {
        return Err(NdioError::TruncatedPayload {
            offset: bytes.len(),
            expected,
            found: payload.len(),
        });
    }
    ArrayFile::from_u8(vec![h, w, 3], payload[..expected].to_vec())
}

pub fn read_image_ppm(path: impl AsRef<Path>) -> Result<ArrayFile, NdioError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| NdioError::io(path, e))?;
    decode_ppm(&bytes)
}

pub fn encode_ppm(image: &ArrayFile) -> Result<Vec<u8>, NdioError> {
    let (h, w) = match (image.shape(), image.as_u8()) {
        ([h, w, 3], Some(_)) => (*h, *w),
        _ => {
            return Err(NdioError::malformed(0, format!(
                "PPM output needs a [H,W,3] uint8 array, got {} {:?}",
                image.dtype(),
                image.shape()
            )))
        }
    };
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    out.extend_from_slice(image.as_u8().unwrap_or_default());
    Ok(out)
}

pub fn write_image_ppm(image: &ArrayFile, path: impl AsRef<Path>) -> Result<(), NdioError> {
    let path = path.as_ref();
    let bytes = encode_ppm(image)?;
    fs::write(path, bytes).map_err(|e| NdioError::io(path, e))
}

/// Tunable constants shared by every stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HyperParams {
    /// Percentage of rated masks kept by the filter, in (0, 100].
    pub q_percent: f64,
    /// Pixel-to-superpixel color similarity bandwidth.
    pub alpha1: f64,
    /// Superpixel path-max affinity bandwidth.
    pub alpha2: f64,
    /// Number of stored checkpoints, the last one included.
    pub e_checkpoints: usize,
    /// Lower bound of normalized stability scores.
    pub epsilon: f64,
    /// Boundary band half-width in pixels.
    pub d_hat: f64,
    /// Offset subtracted from cosine similarity to form multicut costs.
    pub tau_cut: f64,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            q_percent: 60.0,
            alpha1: 100.0,
            alpha2: 200.0,
            e_checkpoints: 3,
            epsilon: 0.6,
            d_hat: 3.0,
            tau_cut: 0.5,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<(), NdioError> {
        let bad = |name, reason: &str| {
            Err(NdioError::InvalidHyperParam {
                name,
                reason: reason.to_string(),
            })
        };
        if !(self.q_percent > 0.0 && self.q_percent <= 100.0) {
            return bad("q_percent", "must lie in (0, 100]");
        }
        if !(self.alpha1 > 0.0 && self.alpha1.is_finite()) {
            return bad("alpha1", "must be positive");
        }
        if !(self.alpha2 > 0.0 && self.alpha2.is_finite()) {
            return bad("alpha2", "must be positive");
        }
        if self.e_checkpoints < 2 {
            return bad("e_checkpoints", "must be at least 2");
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad("epsilon", "must lie in (0, 1)");
        }
        if !(self.d_hat > 0.0 && self.d_hat.is_finite()) {
            return bad("d_hat", "must be positive");
        }
        if !self.tau_cut.is_finite() {
            return bad("tau_cut", "must be finite");
        }
        Ok(())
    }
}

/// Per-image manifest tying together the files each stage reads and writes.
///
/// Relative paths are resolved against the directory holding the manifest
/// file. `affinity` and `checkpoints` are optional extensions beyond the
/// base key set; they are omitted from the JSON when unset.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunManifest {
    pub image_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prob_map: Option<PathBuf>,
    #[serde(default)]
    pub masks: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub superpixels: Option<PathBuf>,
    #[serde(default)]
    pub hyperparams: HyperParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub affinity: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checkpoints: Vec<PathBuf>,
}

impl RunManifest {
    /// Rewrites every relative path as `base.join(path)`.
    pub fn resolve_against(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [
            &mut self.features,
            &mut self.image,
            &mut self.prob_map,
            &mut self.superpixels,
            &mut self.affinity,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        self.masks.iter_mut().for_each(fix);
        self.checkpoints.iter_mut().for_each(fix);
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

/// Loads a manifest and resolves its relative paths against the manifest's
/// own directory.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<RunManifest, NdioError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| NdioError::io(path, e))?;
    let mut manifest: RunManifest = serde_json::from_str(&text).map_err(|e| NdioError::InvalidManifest {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    if manifest.image_id.is_empty() {
        return Err(NdioError::InvalidManifest {
            path: path.to_path_buf(),
            reason: "empty image_id".into(),
        });
    }
    manifest.hyperparams.validate()?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    manifest.resolve_against(base);
    Ok(manifest)
}

pub fn write_manifest(manifest: &RunManifest, path: impl AsRef<Path>) -> Result<(), NdioError> {
    let path = path.as_ref();
    fs::write(path, manifest.to_json_string()).map_err(|e| NdioError::io(path, e))
}
