//! Ideal binary masks, confidence-thresholded masks, soft masks and their
//! application to complex mixture spectrograms.

use num_complex::Complex64;

use crate::grid::Grid;
use crate::patching::MeanPrediction;
use crate::stft::{ComplexSpectrogram, MagnitudeSpectrogram};
use crate::{Error, Result, Source};

#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMask {
    pub values: Grid<bool>,
    pub source: Source,
}

impl BinaryMask {
    /// Number of elements set to 1.
    pub fn count_ones(&self) -> usize {
        self.values.iter().filter(|&&v| v).count()
    }

    /// Elementwise complement, tagged with the other source.
    pub fn complement(&self) -> BinaryMask {
        BinaryMask {
            values: self.values.map(|v| !v),
            source: match self.source {
                Source::Vocal => Source::NonVocal,
                Source::NonVocal => Source::Vocal,
            },
        }
    }
}

/// Gains in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftMask {
    pub values: Grid<f64>,
}

impl SoftMask {
    /// `1 - S`.
    pub fn complement(&self) -> SoftMask {
        SoftMask {
            values: self.values.map(|v| 1.0 - v),
        }
    }
}

/// Anything that can scale a spectrogram element by element.
pub trait Mask {
    fn shape(&self) -> (usize, usize);
    /// Gain of the element at frame-major flat index `index`.
    fn gain(&self, index: usize) -> f64;
}

impl Mask for BinaryMask {
    fn shape(&self) -> (usize, usize) {
        self.values.shape()
    }

    fn gain(&self, index: usize) -> f64 {
        if self.values.as_slice()[index] {
            1.0
        } else {
            0.0
        }
    }
}

impl Mask for SoftMask {
    fn shape(&self) -> (usize, usize) {
        self.values.shape()
    }

    fn gain(&self, index: usize) -> f64 {
        self.values.as_slice()[index]
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}

/// 1 where the vocal magnitude is strictly greater, 0 otherwise (ties go to
/// the non-vocal side).
pub fn ideal_binary_mask(
    vocal: &MagnitudeSpectrogram,
    non_vocal: &MagnitudeSpectrogram,
) -> Result<BinaryMask> {
    non_vocal.ensure_shape(vocal.shape())?;
    let (bins, frames) = vocal.shape();
    let values = vocal
        .iter()
        .zip(non_vocal.iter())
        .map(|(v, a)| v > a)
        .collect();
    Ok(BinaryMask {
        values: Grid::from_vec(bins, frames, values)?,
        source: Source::Vocal,
    })
}

/// Vocal mask: 1 where the mean prediction exceeds `alpha`.
pub fn vocal_mask_from_confidence(mean: &MeanPrediction, alpha: f64) -> Result<BinaryMask> {
    check_alpha(alpha)?;
    Ok(BinaryMask {
        values: mean.values.map(|&m| m > alpha),
        source: Source::Vocal,
    })
}

/// Non-vocal mask: 1 where the mean prediction is below `1 - alpha`.
pub fn nonvocal_mask_from_confidence(mean: &MeanPrediction, alpha: f64) -> Result<BinaryMask> {
    check_alpha(alpha)?;
    let bound = 1.0 - alpha;
    Ok(BinaryMask {
        values: mean.values.map(|&m| m < bound),
        source: Source::NonVocal,
    })
}

/// `V_v / (V_v + V_nv)` elementwise, with `0 / 0` defined as 0.5.
pub fn soft_mask(vocal: &MagnitudeSpectrogram, non_vocal: &MagnitudeSpectrogram) -> Result<SoftMask> {
    non_vocal.ensure_shape(vocal.shape())?;
    if vocal.iter().chain(non_vocal.iter()).any(|&v| v < 0.0) {
        return Err(Error::NegativeInput("soft mask magnitudes"));
    }
    let (bins, frames) = vocal.shape();
    let values = vocal
        .iter()
        .zip(non_vocal.iter())
        .map(|(&v, &a)| soft_ratio(v, a))
        .collect();
    Ok(SoftMask {
        values: Grid::from_vec(bins, frames, values)?,
    })
}

#[inline]
pub(crate) fn soft_ratio(v: f64, a: f64) -> f64 {
    let total = v + a;
    if total == 0.0 {
        0.5
    } else {
        v / total
    }
}

/// `B_v = [S_v > alpha]`, `B_nv = [1 - S_v > alpha]`.
pub fn threshold_soft_mask(vocal: &SoftMask, alpha: f64) -> Result<(BinaryMask, BinaryMask)> {
    check_alpha(alpha)?;
    Ok((
        BinaryMask {
            values: vocal.values.map(|&s| s > alpha),
            source: Source::Vocal,
        },
        BinaryMask {
            values: vocal.values.map(|&s| 1.0 - s > alpha),
            source: Source::NonVocal,
        },
    ))
}

/// Multiplies each complex element by the mask gain.
pub fn apply_mask<M: Mask + ?Sized>(mix: &ComplexSpectrogram, mask: &M) -> Result<ComplexSpectrogram> {
    let shape = mix.shape();
    if mask.shape() != shape {
        return Err(Error::ShapeMismatch {
            expected: shape,
            found: mask.shape(),
        });
    }
    let data = mix
        .grid()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let g = mask.gain(i);
            Complex64::new(c.re * g, c.im * g)
        })
        .collect();
    Ok(mix.with_grid(Grid::from_vec(shape.0, shape.1, data)?))
}
