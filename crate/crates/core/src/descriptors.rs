//! Image front-end and descriptor containers.
//!
//! The built-in front-end turns grayscale images into patch-normalized,
//! downsampled feature vectors compared with a plain distance metric.
//! Descriptors produced elsewhere (e.g. CNN embeddings) are ingested through
//! [`DescriptorSet::from_rows`] so the rest of the pipeline never needs to
//! know which technique produced them.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// A single grayscale image, row-major, intensities in `[0, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageFrame {
    width: usize,
    height: usize,
    pixels: Vec<f32>,
}

impl ImageFrame {
    /// Builds a frame from grayscale intensities. Rejects zero-sized images,
    /// pixel-count mismatches, and intensities outside `[0, 255]`.
    pub fn from_gray(width: usize, height: usize, pixels: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Empty("image"));
        }
        if pixels.len() != width * height {
            return Err(Error::SizeMismatch {
                what: "image pixels",
                left: width * height,
                right: pixels.len(),
            });
        }
        for (k, p) in pixels.iter().enumerate() {
            if !p.is_finite() || *p < 0.0 || *p > 255.0 {
                return Err(Error::Parse {
                    row: k / width,
                    col: k % width,
                    message: "pixel intensity outside [0, 255]".to_string(),
                });
            }
        }
        Ok(ImageFrame {
            width,
            height,
            pixels,
        })
    }

    pub fn from_gray8(width: usize, height: usize, pixels: &[u8]) -> Result<Self> {
        Self::from_gray(width, height, pixels.iter().map(|&p| p as f32).collect())
    }

    /// Converts packed RGB8 to grayscale with ITU-R BT.601 luma weights.
    pub fn from_rgb8(width: usize, height: usize, rgb: &[u8]) -> Result<Self> {
        if rgb.len() != width * height * 3 {
            return Err(Error::SizeMismatch {
                what: "rgb pixels",
                left: width * height * 3,
                right: rgb.len(),
            });
        }
        let pixels = rgb
            .chunks_exact(3)
            .map(|px| 0.299 * px[0] as f32 + 0.587 * px[1] as f32 + 0.114 * px[2] as f32)
            .collect();
        Self::from_gray(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }
}

/// Configuration for the patch-normalized downsampling front-end.
///
/// The image is area-averaged down to `width x height`, split into
/// `patch_width x patch_height` tiles, and each tile is normalized to zero
/// mean and unit standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SadConfig {
    pub width: usize,
    pub height: usize,
    pub patch_width: usize,
    pub patch_height: usize,
}

impl Default for SadConfig {
    fn default() -> Self {
        SadConfig {
            width: 64,
            height: 32,
            patch_width: 8,
            patch_height: 8,
        }
    }
}

impl SadConfig {
    fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 || self.patch_width == 0 || self.patch_height == 0 {
            return Err(Error::Empty("sad configuration dimensions"));
        }
        if !self.width.is_multiple_of(self.patch_width) {
            return Err(Error::SizeMismatch {
                what: "sad width vs patch width",
                left: self.width,
                right: self.patch_width,
            });
        }
        if !self.height.is_multiple_of(self.patch_height) {
            return Err(Error::SizeMismatch {
                what: "sad height vs patch height",
                left: self.height,
                right: self.patch_height,
            });
        }
        Ok(())
    }
}

/// Exact area-averaged resampling to `tw x th`. Each target pixel is the
/// overlap-weighted mean of the source pixels it covers, so the result is
/// deterministic and free of interpolation-kernel choices.
fn area_downsample(img: &ImageFrame, tw: usize, th: usize) -> Vec<f64> {
    let (sw, sh) = (img.width, img.height);
    let scale_x = sw as f64 / tw as f64;
    let scale_y = sh as f64 / th as f64;
    let mut out = vec![0.0f64; tw * th];
    for ty in 0..th {
        let y0 = ty as f64 * scale_y;
        let y1 = (ty + 1) as f64 * scale_y;
        let sy_start = math::floor(y0) as usize;
        let sy_end = (math::ceil(y1) as usize).min(sh);
        for tx in 0..tw {
            let x0 = tx as f64 * scale_x;
            let x1 = (tx + 1) as f64 * scale_x;
            let sx_start = math::floor(x0) as usize;
            let sx_end = (math::ceil(x1) as usize).min(sw);
            let mut acc = 0.0;
            for sy in sy_start..sy_end {
                let wy = (y1.min((sy + 1) as f64) - y0.max(sy as f64)).max(0.0);
                if wy == 0.0 {
                    continue;
                }
                for sx in sx_start..sx_end {
                    let wx = (x1.min((sx + 1) as f64) - x0.max(sx as f64)).max(0.0);
                    if wx == 0.0 {
                        continue;
                    }
                    acc += wx * wy * img.pixels[sy * sw + sx] as f64;
                }
            }
            out[ty * tw + tx] = acc / (scale_x * scale_y);
        }
    }
    out
}

/// Computes the patch-normalized downsampled feature vector for one image.
///
/// The image is resampled to `cfg.width x cfg.height`, each
/// `cfg.patch_width x cfg.patch_height` tile is shifted to zero mean and
/// scaled to unit standard deviation (population), and the normalized image
/// is flattened row-major. Tiles with zero variance map to all zeros.
pub fn sad_descriptor(img: &ImageFrame, cfg: &SadConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let mut values = area_downsample(img, cfg.width, cfg.height);
    let patches_x = cfg.width / cfg.patch_width;
    let patches_y = cfg.height / cfg.patch_height;
    let patch_len = (cfg.patch_width * cfg.patch_height) as f64;
    for py in 0..patches_y {
        for px in 0..patches_x {
            let mut sum = 0.0;
            for dy in 0..cfg.patch_height {
                for dx in 0..cfg.patch_width {
                    sum += values[(py * cfg.patch_height + dy) * cfg.width
                        + px * cfg.patch_width
                        + dx];
                }
            }
            let mean = sum / patch_len;
            let mut var = 0.0;
            for dy in 0..cfg.patch_height {
                for dx in 0..cfg.patch_width {
                    let v = values
                        [(py * cfg.patch_height + dy) * cfg.width + px * cfg.patch_width + dx]
                        - mean;
                    var += v * v;
                }
            }
            var /= patch_len;
            let std = math::sqrt(var);
            for dy in 0..cfg.patch_height {
                for dx in 0..cfg.patch_width {
                    let idx =
                        (py * cfg.patch_height + dy) * cfg.width + px * cfg.patch_width + dx;
                    values[idx] = if std == 0.0 {
                        0.0
                    } else {
                        (values[idx] - mean) / std
                    };
                }
            }
        }
    }
    Ok(values)
}

/// Which front-end produced a descriptor set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescriptorKind {
    /// Built-in patch-normalized downsampled images.
    Sad,
    /// Ingested from an external technique.
    External,
}

/// One feature vector; `id` is the frame's 0-based position along the
/// traverse.
#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor {
    pub id: usize,
    pub values: Vec<f64>,
}

/// An ordered set of descriptors for one traverse. Ids are consecutive
/// `0..len-1` by construction and all descriptors share one dimensionality.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorSet {
    descriptors: Vec<Descriptor>,
    kind: DescriptorKind,
    dim: usize,
}

impl DescriptorSet {
    /// Builds a set from per-frame value rows in traverse order. Rejects
    /// empty input, ragged rows, and non-finite values (naming row/column).
    pub fn from_rows(kind: DescriptorKind, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("descriptor set"));
        }
        let dim = rows[0].len();
        if dim == 0 {
            return Err(Error::Empty("descriptor row"));
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Parse {
                    row: r,
                    col: row.len().min(dim),
                    message: "ragged row: inconsistent descriptor dimensionality".to_string(),
                });
            }
            for (c, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Parse {
                        row: r,
                        col: c,
                        message: "non-finite descriptor value".to_string(),
                    });
                }
            }
        }
        let descriptors = rows
            .into_iter()
            .enumerate()
            .map(|(id, values)| Descriptor { id, values })
            .collect();
        Ok(DescriptorSet {
            descriptors,
            kind,
            dim,
        })
    }

    /// Runs the SAD front-end over a traverse of images (in order).
    pub fn from_sad_images(frames: &[ImageFrame], cfg: &SadConfig) -> Result<Self> {
        let rows = frames
            .iter()
            .map(|f| sad_descriptor(f, cfg))
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(DescriptorKind::Sad, rows)
    }

    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> DescriptorKind {
        self.kind
    }

    pub fn values(&self, id: usize) -> &[f64] {
        &self.descriptors[id].values
    }

    pub fn iter(&self) -> impl Iterator<Item = &Descriptor> {
        self.descriptors.iter()
    }
}
