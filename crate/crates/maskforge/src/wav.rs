//! WAV reading and writing on top of `hound`.

use std::path::Path;

use hound::{SampleFormat, WavSpec};
use maskforge_core::audio::AudioBuffer;

use crate::error::{Error, Result};

/// Sample encoding used by [`write_wav`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum WavEncoding {
    /// 16-bit PCM: `round(x * 32768)` clamped to the i16 range.
    Pcm16,
    /// 32-bit IEEE float.
    #[default]
    Float32,
}

fn classify(path: &Path, err: hound::Error) -> Error {
    match err {
        hound::Error::IoError(e)
            if matches!(e.kind(), std::io::ErrorKind::NotFound | std::io::ErrorKind::PermissionDenied) =>
        {
            Error::io(path, e)
        }
        // hound reports short chunks as plain I/O errors.
        hound::Error::IoError(e) => Error::MalformedWav {
            path: path.to_path_buf(),
            reason: e.to_string(),
        },
        hound::Error::FormatError(reason) => Error::MalformedWav {
            path: path.to_path_buf(),
            reason: reason.into(),
        },
        hound::Error::Unsupported => Error::UnsupportedWav {
            path: path.to_path_buf(),
            detail: "format not handled".into(),
        },
        other => Error::MalformedWav {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    }
}

/// Reads PCM16, PCM24 or float32 WAV. Channels are averaged to mono; integer
/// samples are divided by `2^(bits - 1)`.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let path = path.as_ref();
    let reader = hound::WavReader::open(path).map_err(|e| classify(path, e))?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(Error::MalformedWav {
            path: path.to_path_buf(),
            reason: "zero channels".into(),
        });
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16 | 24) => {
            let scale = (1u32 << (spec.bits_per_sample - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f64 / scale))
                .collect::<Result<_, _>>()
                .map_err(|e| classify(path, e))?
        }
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<Result<_, _>>()
            .map_err(|e| classify(path, e))?,
        (format, bits) => {
            return Err(Error::UnsupportedWav {
                path: path.to_path_buf(),
                detail: format!("{bits}-bit {format:?}"),
            })
        }
    };
    let samples: Vec<f64> = interleaved
        .chunks_exact(channels)
        .map(|frame| frame.iter().sum::<f64>() / channels as f64)
        .collect();
    AudioBuffer::new(samples, spec.sample_rate).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes a mono file. Samples must be finite.
pub fn write_wav(path: impl AsRef<Path>, buffer: &AudioBuffer, encoding: WavEncoding) -> Result<()> {
    let path = path.as_ref();
    if buffer.samples().iter().any(|s| !s.is_finite()) {
        return Err(Error::File {
            path: path.to_path_buf(),
            source: maskforge_core::Error::NonFinite("samples"),
        });
    }
    let spec = WavSpec {
        channels: 1,
        sample_rate: buffer.sample_rate(),
        bits_per_sample: match encoding {
            WavEncoding::Pcm16 => 16,
            WavEncoding::Float32 => 32,
        },
        sample_format: match encoding {
            WavEncoding::Pcm16 => SampleFormat::Int,
            WavEncoding::Float32 => SampleFormat::Float,
        },
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(|e| classify(path, e))?;
    for &s in buffer.samples() {
        let written = match encoding {
            WavEncoding::Pcm16 => writer.write_sample((s * 32768.0).round().clamp(-32768.0, 32767.0) as i16),
            WavEncoding::Float32 => writer.write_sample(s as f32),
        };
        written.map_err(|e| classify(path, e))?;
    }
    writer.finalize().map_err(|e| classify(path, e))
}
