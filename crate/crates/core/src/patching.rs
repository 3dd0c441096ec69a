//! Fixed-width time windows over spectrogram grids.
//!
//! Training windows tile the spectrogram (stride = width by default);
//! inference windows slide one frame at a time and their predictions are
//! averaged back into a per-element mean. Grids are zero-padded at the end so
//! the last window always fits; padded frames are discarded on repacking.

use alloc::vec::Vec;

use crate::grid::Grid;
use crate::stft::MagnitudeSpectrogram;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PatchConfig {
    /// Window width in frames.
    pub width: usize,
    pub train_stride: usize,
    pub test_stride: usize,
}

impl PatchConfig {
    /// Non-overlapping training windows and stride-1 inference windows.
    pub fn new(width: usize) -> Self {
        PatchConfig {
            width,
            train_stride: width,
            test_stride: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 {
            return Err(Error::InvalidConfig("patch width must be at least 1"));
        }
        if self.train_stride == 0 || self.test_stride == 0 {
            return Err(Error::InvalidConfig("patch strides must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatchKind {
    MixtureInput,
    MaskTarget,
    Prediction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchSet {
    pub patches: Vec<Grid<f64>>,
    /// Start frame of each patch.
    pub offsets: Vec<usize>,
    /// Frame count of the source grid before padding.
    pub total_frames: usize,
    pub kind: PatchKind,
}

impl PatchSet {
    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    /// `(bins, width)` of every patch, if any.
    pub fn patch_shape(&self) -> Option<(usize, usize)> {
        self.patches.first().map(|p| p.shape())
    }

    pub fn with_kind(mut self, kind: PatchKind) -> Self {
        self.kind = kind;
        self
    }

    /// Same offsets and frame count, new patch contents.
    pub fn with_patches(&self, patches: Vec<Grid<f64>>, kind: PatchKind) -> PatchSet {
        PatchSet {
            patches,
            offsets: self.offsets.clone(),
            total_frames: self.total_frames,
            kind,
        }
    }
}

/// Per-element mean of overlapping window predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanPrediction {
    pub values: Grid<f64>,
    pub counts: Grid<u32>,
}

/// Divides by the global maximum; returns the scaled grid and that maximum.
pub fn normalize_unit_scale(mag: &MagnitudeSpectrogram) -> Result<(MagnitudeSpectrogram, f64)> {
    let scale = mag.max().unwrap_or(0.0);
    if !(scale > 0.0) {
        return Err(Error::Empty("spectrogram has no positive element"));
    }
    Ok((mag.map(|v| v / scale), scale))
}

/// Window start frames for `frames` frames: `0, stride, 2 stride, ...`, up to
/// the first window that reaches the last frame.
pub fn window_offsets(frames: usize, width: usize, stride: usize) -> Vec<usize> {
    let count = if frames <= width {
        1
    } else {
        (frames - width).div_ceil(stride) + 1
    };
    (0..count).map(|i| i * stride).collect()
}

pub fn extract_patches(
    grid: &Grid<f64>,
    width: usize,
    stride: usize,
    kind: PatchKind,
) -> Result<PatchSet> {
    if width == 0 || stride == 0 {
        return Err(Error::InvalidConfig("patch width and stride must be at least 1"));
    }
    let (bins, frames) = grid.shape();
    if frames == 0 || bins == 0 {
        return Err(Error::Empty("spectrogram"));
    }
    let offsets = window_offsets(frames, width, stride);
    let patches = offsets
        .iter()
        .map(|&start| {
            let mut patch = Grid::new(bins, width);
            for t in 0..width {
                if start + t < frames {
                    patch.frame_mut(t).copy_from_slice(grid.frame(start + t));
                }
            }
            patch
        })
        .collect();
    Ok(PatchSet {
        patches,
        offsets,
        total_frames: frames,
        kind,
    })
}

/// Column-major flattening: all bins of frame 0, then frame 1, ...
pub fn flatten(patch: &Grid<f64>) -> Vec<f64> {
    patch.as_slice().to_vec()
}

pub fn unflatten(vector: &[f64], bins: usize, width: usize) -> Result<Grid<f64>> {
    Grid::from_vec(bins, width, vector.to_vec())
}

/// Averages every patch value into the frames it covers.
///
/// Each element keeps a running mean updated in patch order,
/// `m += (x - m) / count`, so the result is reproducible bit for bit and a
/// set of identical contributions averages to exactly that value. Frames
/// covered by fewer windows (at the edges) average over however many windows
/// cover them.
pub fn repack_mean(predictions: &PatchSet) -> Result<MeanPrediction> {
    if predictions.kind != PatchKind::Prediction {
        return Err(Error::InvalidConfig("repack_mean expects a prediction patch set"));
    }
    let (bins, width) = predictions
        .patch_shape()
        .ok_or(Error::Empty("prediction patch set"))?;
    if predictions.offsets.len() != predictions.patches.len() {
        return Err(Error::LengthMismatch {
            expected: predictions.patches.len(),
            found: predictions.offsets.len(),
        });
    }
    let frames = predictions.total_frames;
    let mut values = Grid::<f64>::new(bins, frames);
    let mut counts = Grid::<u32>::new(bins, frames);
    for (patch, &start) in predictions.patches.iter().zip(&predictions.offsets) {
        patch.ensure_shape((bins, width))?;
        for t in 0..width {
            let frame = start + t;
            if frame >= frames {
                break;
            }
            let counts = counts.frame_mut(frame);
            let means = values.frame_mut(frame);
            for ((m, c), x) in means.iter_mut().zip(counts.iter_mut()).zip(patch.frame(t)) {
                *c += 1;
                *m += (x - *m) / *c as f64;
            }
        }
    }
    if counts.iter().any(|&c| c == 0) {
        return Err(Error::InvalidConfig("patch offsets leave frames uncovered"));
    }
    Ok(MeanPrediction { values, counts })
}
