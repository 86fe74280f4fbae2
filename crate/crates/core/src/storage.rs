//! Little-endian binary interchange formats.
//!
//! | format | magic  | header after magic                       | body                         |
//! |--------|--------|------------------------------------------|------------------------------|
//! | EMB1   | `EMB1` | `u32 n_rows, u32 dim`                    | `n_rows * dim` f32, row-major |
//! | FPZ1   | `FPZ1` | `u32 n_patches, u32 n_frames, u32 n_bands` | patches back to back, row-major f32 |
//! | HDP1   | `HDP1` | `u32 n_layers`, then `u32 out, u32 in` per layer | per layer: weight `[out x in]` f32 then bias `[out]` f32 |

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::dsp::FeaturePatch;
use crate::error::{Error, Result};
use crate::head::{HeadParams, Layer};

pub const EMB_MAGIC: &[u8; 4] = b"EMB1";
pub const FPZ_MAGIC: &[u8; 4] = b"FPZ1";
pub const HDP_MAGIC: &[u8; 4] = b"HDP1";

/// Backbone embeddings, one row per manifest record.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub values: Array2<f32>,
}

impl EmbeddingMatrix {
    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn dim(&self) -> usize {
        self.values.ncols()
    }
}

fn push_u32(buf: &mut Vec<u8>, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| Error::invalid(format!("{v} does not fit in u32")))?;
    buf.extend_from_slice(&v.to_le_bytes());
    Ok(())
}

fn push_f32s<'a>(buf: &mut Vec<u8>, values: impl IntoIterator<Item = &'a f32>) {
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Sequential reader over a byte buffer that reports offsets on failure.
struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn magic(&mut self, expected: &[u8; 4]) -> Result<()> {
        let got = self.take(4, "magic")?;
        if got != expected {
            return Err(Error::format(
                0,
                format!(
                    "bad magic {:?}, expected {:?}",
                    String::from_utf8_lossy(got),
                    String::from_utf8_lossy(expected)
                ),
            ));
        }
        Ok(())
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let out = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(out)
            }
            None => Err(Error::format(
                self.pos as u64,
                format!(
                    "truncated {what}: expected {n} bytes, {} available (file length {})",
                    self.bytes.len() - self.pos,
                    self.bytes.len()
                ),
            )),
        }
    }

    fn u32(&mut self, what: &str) -> Result<usize> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
    }

    /// Reads `count` f32 values after checking the whole span is present,
    /// so truncation is reported against the expected total length.
    fn f32s(&mut self, count: usize, what: &str) -> Result<Vec<f32>> {
        let n_bytes = count
            .checked_mul(4)
            .ok_or_else(|| Error::format(self.pos as u64, format!("{what} size overflows")))?;
        let expected_len = self.pos + n_bytes;
        if expected_len > self.bytes.len() {
            return Err(Error::format(
                self.bytes.len() as u64,
                format!(
                    "truncated {what}: expected file length {expected_len} bytes, actual {}",
                    self.bytes.len()
                ),
            ));
        }
        let raw = self.take(n_bytes, what)?;
        Ok(raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect())
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::format(
                self.pos as u64,
                format!("{} trailing bytes", self.bytes.len() - self.pos),
            ));
        }
        Ok(())
    }
}

pub fn encode_embeddings(matrix: &EmbeddingMatrix) -> Result<Vec<u8>> {
    if let Some(i) = matrix.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid(format!(
            "embedding value at flat index {i} is not finite"
        )));
    }
    let mut buf = Vec::with_capacity(12 + 4 * matrix.values.len());
    buf.extend_from_slice(EMB_MAGIC);
    push_u32(&mut buf, matrix.n_rows())?;
    push_u32(&mut buf, matrix.dim())?;
    push_f32s(&mut buf, matrix.values.iter());
    Ok(buf)
}

pub fn decode_embeddings(bytes: &[u8]) -> Result<EmbeddingMatrix> {
    let mut cur = Cursor::new(bytes);
    cur.magic(EMB_MAGIC)?;
    let n_rows = cur.u32("row count")?;
    let dim = cur.u32("dimension")?;
    let data = cur.f32s(n_rows * dim, "embedding body")?;
    cur.finish()?;
    if let Some(i) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::format(
            12 + 4 * i as u64,
            "non-finite embedding value",
        ));
    }
    let values = Array2::from_shape_vec((n_rows, dim), data)
        .map_err(|e| Error::format(12, e.to_string()))?;
    Ok(EmbeddingMatrix { values })
}

/// Write an EMB1 file. Non-finite values are rejected before anything is
/// written.
pub fn write_embeddings(matrix: &EmbeddingMatrix, path: &Path) -> Result<()> {
    let bytes = encode_embeddings(matrix)?;
    write_file(path, &bytes)
}

pub fn read_embeddings(path: &Path) -> Result<EmbeddingMatrix> {
    decode_embeddings(&read_file(path)?)
}

/// Patches as stored in an FPZ1 file; all share one shape.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchSet {
    pub n_frames: usize,
    pub n_bands: usize,
    /// Each entry is one row-major `[n_frames x n_bands]` patch.
    pub patches: Vec<Array2<f32>>,
}

impl PatchSet {
    pub fn from_patches(n_frames: usize, n_bands: usize, patches: &[FeaturePatch]) -> Result<Self> {
        let patches = patches
            .iter()
            .map(|p| {
                if p.values.dim() != (n_frames, n_bands) {
                    return Err(Error::invalid(format!(
                        "patch {}#{} has shape {:?}, expected ({n_frames}, {n_bands})",
                        p.source_clip_id,
                        p.segment_index,
                        p.values.dim()
                    )));
                }
                Ok(p.values.clone())
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            n_frames,
            n_bands,
            patches,
        })
    }

    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    /// Flatten each patch into one row, `[n_patches x (n_frames * n_bands)]`.
    pub fn flattened(&self) -> Array2<f32> {
        let width = self.n_frames * self.n_bands;
        let mut out = Array2::zeros((self.patches.len(), width));
        for (mut row, patch) in out.rows_mut().into_iter().zip(&self.patches) {
            row.iter_mut().zip(patch.iter()).for_each(|(o, &v)| *o = v);
        }
        out
    }
}

pub fn encode_patches(set: &PatchSet) -> Result<Vec<u8>> {
    let mut buf = Vec::with_capacity(16 + 4 * set.len() * set.n_frames * set.n_bands);
    buf.extend_from_slice(FPZ_MAGIC);
    push_u32(&mut buf, set.len())?;
    push_u32(&mut buf, set.n_frames)?;
    push_u32(&mut buf, set.n_bands)?;
    for p in &set.patches {
        if p.dim() != (set.n_frames, set.n_bands) {
            return Err(Error::invalid("patch shape does not match the set header"));
        }
        push_f32s(&mut buf, p.iter());
    }
    Ok(buf)
}

pub fn decode_patches(bytes: &[u8]) -> Result<PatchSet> {
    let mut cur = Cursor::new(bytes);
    cur.magic(FPZ_MAGIC)?;
    let n_patches = cur.u32("patch count")?;
    let n_frames = cur.u32("frame count")?;
    let n_bands = cur.u32("band count")?;
    let data = cur.f32s(n_patches * n_frames * n_bands, "patch body")?;
    cur.finish()?;
    let per = n_frames * n_bands;
    let patches = (0..n_patches)
        .map(|i| {
            Array2::from_shape_vec((n_frames, n_bands), data[i * per..(i + 1) * per].to_vec())
                .expect("slice length matches shape")
        })
        .collect();
    Ok(PatchSet {
        n_frames,
        n_bands,
        patches,
    })
}

pub fn write_patches(set: &PatchSet, path: &Path) -> Result<()> {
    write_file(path, &encode_patches(set)?)
}

pub fn read_patches(path: &Path) -> Result<PatchSet> {
    decode_patches(&read_file(path)?)
}

/// Serialize head parameters; values are stored as f32.
pub fn encode_checkpoint(params: &HeadParams) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    buf.extend_from_slice(HDP_MAGIC);
    push_u32(&mut buf, params.layers.len())?;
    for layer in &params.layers {
        push_u32(&mut buf, layer.weight.nrows())?;
        push_u32(&mut buf, layer.weight.ncols())?;
    }
    for layer in &params.layers {
        if layer
            .weight
            .iter()
            .chain(&layer.bias)
            .any(|v| !v.is_finite())
        {
            return Err(Error::invalid("checkpoint parameters must be finite"));
        }
        let weight: Vec<f32> = layer.weight.iter().map(|&v| v as f32).collect();
        let bias: Vec<f32> = layer.bias.iter().map(|&v| v as f32).collect();
        push_f32s(&mut buf, &weight);
        push_f32s(&mut buf, &bias);
    }
    Ok(buf)
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<HeadParams> {
    let mut cur = Cursor::new(bytes);
    cur.magic(HDP_MAGIC)?;
    let n_layers = cur.u32("layer count")?;
    if n_layers == 0 {
        return Err(Error::format(4, "checkpoint has no layers"));
    }
    let mut dims = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        let out = cur.u32("layer output width")?;
        let inp = cur.u32("layer input width")?;
        dims.push((out, inp));
    }
    for (i, pair) in dims.windows(2).enumerate() {
        if pair[1].1 != pair[0].0 {
            return Err(Error::format(
                8 + 8 * (i as u64 + 1),
                format!(
                    "layer {} expects {} inputs but layer {i} emits {}",
                    i + 1,
                    pair[1].1,
                    pair[0].0
                ),
            ));
        }
    }
    let mut layers = Vec::with_capacity(n_layers);
    for &(out, inp) in &dims {
        let w = cur.f32s(out * inp, "weight tensor")?;
        let b = cur.f32s(out, "bias tensor")?;
        layers.push(Layer {
            weight: Array2::from_shape_vec((out, inp), w.into_iter().map(f64::from).collect())
                .expect("length matches shape"),
            bias: Array1::from_iter(b.into_iter().map(f64::from)),
        });
    }
    cur.finish()?;
    Ok(HeadParams { layers })
}

pub fn write_checkpoint(params: &HeadParams, path: &Path) -> Result<()> {
    write_file(path, &encode_checkpoint(params)?)
}

pub fn read_checkpoint(path: &Path) -> Result<HeadParams> {
    decode_checkpoint(&read_file(path)?)
}
