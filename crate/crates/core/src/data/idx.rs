//! IDX files: big-endian header (magic, counts, dims) followed by raw data.
//!
//! Images are read from unsigned-byte files (`0x00000803`, scaled by 1/255)
//! or from double files (`0x00000E03`, taken verbatim). Labels are unsigned
//! bytes (`0x00000801`).

use std::fs;
use std::path::Path;

use crate::data::Dataset;
use crate::error::{Error, IdxError, Result};

pub const IMAGES_U8_MAGIC: u32 = 0x0000_0803;
pub const IMAGES_F64_MAGIC: u32 = 0x0000_0E03;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdxFormat {
    /// Pixel bytes; every value must be `k/255` for some integer `k`.
    U8,
    /// Big-endian doubles, bit-exact.
    F64,
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    file: &'a str,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, field: &'static str) -> std::result::Result<&'a [u8], IdxError> {
        if self.bytes.len() - self.pos < n {
            return Err(IdxError::Truncated {
                file: self.file.to_string(),
                field,
            });
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self, field: &'static str) -> std::result::Result<u32, IdxError> {
        let b = self.take(4, field)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }
}

/// Decoded image file: row-major pixels and the per-image geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<f64>,
}

pub fn parse_images(bytes: &[u8], file: &str) -> std::result::Result<IdxImages, IdxError> {
    let mut r = Reader { bytes, pos: 0, file };
    let magic = r.u32("magic")?;
    if magic != IMAGES_U8_MAGIC && magic != IMAGES_F64_MAGIC {
        return Err(IdxError::UnexpectedMagic {
            file: file.to_string(),
            found: magic,
            expected: "0x00000803 or 0x00000e03",
        });
    }
    let count = r.u32("image count")? as usize;
    let rows = r.u32("rows")? as usize;
    let cols = r.u32("cols")? as usize;
    if rows == 0 || cols == 0 {
        return Err(IdxError::Invalid {
            file: file.to_string(),
            field: "rows/cols",
            message: "image dimensions must be positive".into(),
        });
    }
    let n = count * rows * cols;
    let pixels = if magic == IMAGES_U8_MAGIC {
        r.take(n, "pixel data")?.iter().map(|&b| b as f64 / 255.0).collect()
    } else {
        let raw = r.take(n * 8, "pixel data")?;
        let vals: Vec<f64> = raw
            .chunks_exact(8)
            .map(|c| f64::from_be_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(IdxError::Invalid {
                file: file.to_string(),
                field: "pixel data",
                message: "non-finite value".into(),
            });
        }
        vals
    };
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels,
    })
}

pub fn parse_labels(bytes: &[u8], file: &str) -> std::result::Result<Vec<usize>, IdxError> {
    let mut r = Reader { bytes, pos: 0, file };
    let magic = r.u32("magic")?;
    if magic != LABELS_MAGIC {
        return Err(IdxError::UnexpectedMagic {
            file: file.to_string(),
            found: magic,
            expected: "0x00000801",
        });
    }
    let count = r.u32("label count")? as usize;
    Ok(r.take(count, "label data")?.iter().map(|&b| b as usize).collect())
}

/// Combine decoded images and labels. The class count is `max label + 1` (at least 2).
pub fn dataset_from_parts(images: IdxImages, labels: Vec<usize>) -> Result<Dataset> {
    if images.count != labels.len() {
        return Err(IdxError::CountMismatch {
            images: images.count,
            labels: labels.len(),
        }
        .into());
    }
    let classes = labels.iter().copied().max().map_or(2, |m| (m + 1).max(2));
    Dataset::new(images.pixels, images.rows * images.cols, labels, classes)
}

pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let img = fs::read(images_path).map_err(|e| Error::io(images_path, e))?;
    let lab = fs::read(labels_path).map_err(|e| Error::io(labels_path, e))?;
    let images = parse_images(&img, &images_path.display().to_string())?;
    let labels = parse_labels(&lab, &labels_path.display().to_string())?;
    dataset_from_parts(images, labels)
}

/// Serialize as one image per row (`rows = 1`, `cols = dim`).
pub fn encode_images(ds: &Dataset, format: IdxFormat) -> Result<Vec<u8>> {
    let magic = match format {
        IdxFormat::U8 => IMAGES_U8_MAGIC,
        IdxFormat::F64 => IMAGES_F64_MAGIC,
    };
    let mut out = Vec::with_capacity(16 + ds.inputs().len() * 8);
    for v in [magic, len_u32(ds.len())?, 1, len_u32(ds.dim())?] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    match format {
        IdxFormat::U8 => {
            for &x in ds.inputs() {
                let k = (x * 255.0).round();
                if !(0.0..=255.0).contains(&k) || k / 255.0 != x {
                    return Err(Error::config(
                        "format",
                        format!("value {x} is not representable as a byte pixel; use f64"),
                    ));
                }
                out.push(k as u8);
            }
        }
        IdxFormat::F64 => {
            for &x in ds.inputs() {
                out.extend_from_slice(&x.to_be_bytes());
            }
        }
    }
    Ok(out)
}

pub fn encode_labels(ds: &Dataset) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(8 + ds.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&len_u32(ds.len())?.to_be_bytes());
    for &l in ds.labels() {
        let b = u8::try_from(l).map_err(|_| Error::config("labels", "label exceeds 255"))?;
        out.push(b);
    }
    Ok(out)
}

pub fn write_idx(ds: &Dataset, images_path: &Path, labels_path: &Path, format: IdxFormat) -> Result<()> {
    let img = encode_images(ds, format)?;
    let lab = encode_labels(ds)?;
    fs::write(images_path, img).map_err(|e| Error::io(images_path, e))?;
    fs::write(labels_path, lab).map_err(|e| Error::io(labels_path, e))?;
    Ok(())
}

fn len_u32(n: usize) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::config("dataset", "too large for the IDX header"))
}
