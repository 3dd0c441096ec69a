//! Core numerics for monaural vocal/accompaniment separation by
//! time-frequency masking.
//!
//! Everything in this crate is pure computation on in-memory buffers and
//! builds without `std` (an allocator is required). File formats, the
//! experiment pipeline and the command-line tool live in the `maskforge`
//! crate.
//!
//! The processing chain is:
//!
//! 1. [`audio`]: peak normalization and stem pooling into vocal and
//!    non-vocal submixes.
//! 2. [`stft`]: Hann-windowed STFT and weighted overlap-add inversion.
//! 3. [`patching`]: fixed-width time windows over magnitude spectrograms
//!    and mean re-assembly of sliding-window predictions.
//! 4. [`mlp`] / [`nmf`]: the two mask estimators.
//! 5. [`masking`]: ideal, confidence-thresholded and soft masks.
//! 6. [`bss_eval`]: SDR / SIR / SAR by orthogonal projection.

#![no_std]

extern crate alloc;

pub mod audio;
pub mod bss_eval;
mod error;
mod fft;
pub mod grid;
pub mod masking;
mod math;
pub mod mlp;
pub mod nmf;
pub mod patching;
pub mod stft;

pub use error::{Error, Result};
pub use grid::Grid;

/// Which side of the separation a signal, stem or mask belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    Vocal,
    NonVocal,
}

impl Source {
    pub const ALL: [Source; 2] = [Source::Vocal, Source::NonVocal];

    pub fn as_str(self) -> &'static str {
        match self {
            Source::Vocal => "vocal",
            Source::NonVocal => "non_vocal",
        }
    }
}

impl core::fmt::Display for Source {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}
