//! IDX binary dataset format (the MNIST/Fashion-MNIST container).
//!
//! Big-endian headers: images carry magic `0x00000803` followed by count,
//! rows, and cols; labels carry magic `0x00000801` followed by count. Pixel
//! bytes are scaled to `[0,1]` and flattened row-major. The byte-level
//! parsers are separated from file loading so they can be driven directly by
//! tests and fuzz targets.

use super::{DataError, Dataset};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Error)]
pub enum IdxError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("wrong magic at offset 0: expected {expected:#010x}, found {found:#010x}")]
    BadMagic { expected: u32, found: u32 },
    #[error("truncated file: needed {needed} bytes at offset {offset}, only {available} remain")]
    Truncated {
        offset: usize,
        needed: usize,
        available: usize,
    },
    #[error("{0} trailing bytes after payload")]
    TrailingBytes(usize),
    #[error("count mismatch: {images} images vs {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error("image file declares zero-sized dimension {rows}x{cols}")]
    ZeroDimension { rows: usize, cols: usize },
    #[error("files hold no samples")]
    Empty,
    #[error(transparent)]
    Data(#[from] DataError),
}

fn read_u32_be(bytes: &[u8], offset: usize) -> Result<u32, IdxError> {
    match bytes.get(offset..offset + 4) {
        Some(b) => Ok(u32::from_be_bytes(b.try_into().unwrap())),
        None => Err(IdxError::Truncated {
            offset,
            needed: 4,
            available: bytes.len().saturating_sub(offset),
        }),
    }
}

/// Parsed image file: pixel bytes scaled to `[0,1]`, flattened row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<f32>,
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImages, IdxError> {
    let magic = read_u32_be(bytes, 0)?;
    if magic != IMAGES_MAGIC {
        return Err(IdxError::BadMagic {
            expected: IMAGES_MAGIC,
            found: magic,
        });
    }
    let count = read_u32_be(bytes, 4)? as usize;
    let rows = read_u32_be(bytes, 8)? as usize;
    let cols = read_u32_be(bytes, 12)? as usize;
    if count > 0 && (rows == 0 || cols == 0) {
        return Err(IdxError::ZeroDimension { rows, cols });
    }
    // Sizes come from untrusted headers; overflow-check before allocating.
    let payload = count
        .checked_mul(rows)
        .and_then(|v| v.checked_mul(cols))
        .ok_or(IdxError::Truncated {
            offset: 16,
            needed: usize::MAX,
            available: bytes.len().saturating_sub(16),
        })?;
    let available = bytes.len() - 16;
    if available < payload {
        return Err(IdxError::Truncated {
            offset: 16,
            needed: payload,
            available,
        });
    }
    if available > payload {
        return Err(IdxError::TrailingBytes(available - payload));
    }
    let pixels = bytes[16..16 + payload]
        .iter()
        .map(|&b| b as f32 / 255.0)
        .collect();
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels,
    })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>, IdxError> {
    let magic = read_u32_be(bytes, 0)?;
    if magic != LABELS_MAGIC {
        return Err(IdxError::BadMagic {
            expected: LABELS_MAGIC,
            found: magic,
        });
    }
    let count = read_u32_be(bytes, 4)? as usize;
    let available = bytes.len() - 8;
    if available < count {
        return Err(IdxError::Truncated {
            offset: 8,
            needed: count,
            available,
        });
    }
    if available > count {
        return Err(IdxError::TrailingBytes(available - count));
    }
    Ok(bytes[8..8 + count].to_vec())
}

/// Encode raw pixel bytes (`count = pixels.len() / (rows*cols)`) as an IDX
/// image file. Used for fixtures and fuzz corpus seeds; round-trips through
/// [`parse_idx_images`] bit-exactly.
pub fn encode_idx_images(rows: usize, cols: usize, pixels: &[u8]) -> Vec<u8> {
    assert!(rows > 0 && cols > 0);
    assert_eq!(pixels.len() % (rows * cols), 0);
    let count = pixels.len() / (rows * cols);
    let mut out = Vec::with_capacity(16 + pixels.len());
    out.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    out.extend_from_slice(&(count as u32).to_be_bytes());
    out.extend_from_slice(&(rows as u32).to_be_bytes());
    out.extend_from_slice(&(cols as u32).to_be_bytes());
    out.extend_from_slice(pixels);
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

fn read_file(path: &Path) -> Result<Vec<u8>, IdxError> {
    std::fs::read(path).map_err(|source| IdxError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Load an image/label IDX pair into a [`Dataset`]. Class count is
/// `max label + 1`.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset, IdxError> {
    let images = parse_idx_images(&read_file(images_path)?)?;
    let labels = parse_idx_labels(&read_file(labels_path)?)?;
    if images.count != labels.len() {
        return Err(IdxError::CountMismatch {
            images: images.count,
            labels: labels.len(),
        });
    }
    if images.count == 0 {
        return Err(IdxError::Empty);
    }
    let classes = *labels.iter().max().unwrap() as usize + 1;
    let labels: Vec<usize> = labels.into_iter().map(|l| l as usize).collect();
    Ok(Dataset::new(
        images.pixels,
        images.rows * images.cols,
        labels,
        classes,
    )?)
}
