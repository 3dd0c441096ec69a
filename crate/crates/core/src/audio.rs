//! Mono sample buffers and the stem pooling / mixing procedure.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result, Source};

/// Mono audio at a fixed sample rate. Samples are always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidConfig("sample rate must be positive"));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFinite("audio samples"));
        }
        Ok(AudioBuffer {
            samples,
            sample_rate,
        })
    }

    pub fn silence(len: usize, sample_rate: u32) -> Result<Self> {
        Self::new(vec![0.0; len], sample_rate)
    }

    #[inline]
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    #[inline]
    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Largest absolute sample value (0 for an empty buffer).
    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.abs()))
    }

    /// Truncates or zero-pads to exactly `len` samples.
    pub fn resized(&self, len: usize) -> AudioBuffer {
        let mut samples = self.samples.clone();
        samples.resize(len, 0.0);
        AudioBuffer {
            samples,
            sample_rate: self.sample_rate,
        }
    }
}

/// Scales `buffer` so its largest absolute sample is exactly 1.
pub fn peak_normalize(buffer: &AudioBuffer) -> Result<AudioBuffer> {
    let peak = buffer.peak();
    if peak == 0.0 {
        return Err(Error::ZeroPeak);
    }
    Ok(AudioBuffer {
        samples: buffer.samples.iter().map(|s| s / peak).collect(),
        sample_rate: buffer.sample_rate,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stem {
    pub audio: AudioBuffer,
    pub label: Source,
}

/// All labelled stems of one song.
#[derive(Debug, Clone, PartialEq)]
pub struct StemSet {
    pub song_id: String,
    pub stems: Vec<Stem>,
}

/// Output of [`pool_and_mix`].
#[derive(Debug, Clone, PartialEq)]
pub struct PooledMix {
    pub vocal: AudioBuffer,
    pub non_vocal: AudioBuffer,
    /// `vocal + non_vocal`, not renormalized.
    pub full: AudioBuffer,
}

impl PooledMix {
    pub fn source(&self, source: Source) -> &AudioBuffer {
        match source {
            Source::Vocal => &self.vocal,
            Source::NonVocal => &self.non_vocal,
        }
    }
}

/// Peak-normalizes every stem, sums stems per label, peak-normalizes each
/// submix and adds the two submixes. Shorter stems are zero-padded to the
/// longest one.
pub fn pool_and_mix(stems: &StemSet) -> Result<PooledMix> {
    let first = stems.stems.first().ok_or(Error::Empty("stem set"))?;
    let sample_rate = first.audio.sample_rate;
    for stem in &stems.stems {
        if stem.audio.sample_rate != sample_rate {
            return Err(Error::SampleRateMismatch {
                expected: sample_rate,
                found: stem.audio.sample_rate,
            });
        }
    }
    for source in Source::ALL {
        if !stems.stems.iter().any(|s| s.label == source) {
            return Err(Error::MissingLabel(source));
        }
    }
    let len = stems.stems.iter().map(|s| s.audio.len()).max().unwrap_or(0);

    let submix = |source: Source| -> Result<AudioBuffer> {
        let mut acc = vec![0.0; len];
        for stem in stems.stems.iter().filter(|s| s.label == source) {
            let unit = peak_normalize(&stem.audio)?;
            for (a, s) in acc.iter_mut().zip(unit.samples()) {
                *a += s;
            }
        }
        peak_normalize(&AudioBuffer::new(acc, sample_rate)?)
    };
    let vocal = submix(Source::Vocal)?;
    let non_vocal = submix(Source::NonVocal)?;
    let full = vocal
        .samples()
        .iter()
        .zip(non_vocal.samples())
        .map(|(v, a)| v + a)
        .collect();
    Ok(PooledMix {
        full: AudioBuffer::new(full, sample_rate)?,
        vocal,
        non_vocal,
    })
}
