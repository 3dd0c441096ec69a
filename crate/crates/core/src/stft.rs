//! Hann-windowed short-time Fourier transform and weighted overlap-add
//! inversion.
//!
//! Frames are not centred: frame `m` covers samples
//! `[m * hop, m * hop + frame_len)`, and the final partial frame is
//! zero-padded. Only the non-negative frequency bins are stored, so a
//! spectrogram has `frame_len / 2 + 1` bins.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::audio::AudioBuffer;
use crate::fft::FftPlan;
use crate::grid::Grid;
use crate::math::{atan2, cos, sin};
use crate::{Error, Result};

pub type MagnitudeSpectrogram = Grid<f64>;
/// Angles in `(-pi, pi]`.
pub type PhaseSpectrogram = Grid<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Window {
    /// Periodic Hann, `0.5 (1 - cos(2 pi k / n))`.
    Hann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StftConfig {
    pub frame_len: usize,
    pub hop: usize,
    pub window: Window,
}

impl Default for StftConfig {
    fn default() -> Self {
        StftConfig {
            frame_len: 2048,
            hop: 512,
            window: Window::Hann,
        }
    }
}

impl StftConfig {
    pub fn new(frame_len: usize, hop: usize) -> Result<Self> {
        let cfg = StftConfig {
            frame_len,
            hop,
            window: Window::Hann,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.frame_len < 2 || !self.frame_len.is_multiple_of(2) {
            return Err(Error::InvalidConfig("frame length must be even and at least 2"));
        }
        if self.hop == 0 || self.hop > self.frame_len {
            return Err(Error::InvalidConfig("hop must be in 1..=frame_len"));
        }
        Ok(())
    }

    /// Number of stored frequency bins, `frame_len / 2 + 1`.
    pub fn bins(&self) -> usize {
        self.frame_len / 2 + 1
    }

    /// Frames needed to cover `len` samples: `ceil((len - frame_len) / hop) + 1`,
    /// and a single frame for inputs shorter than one frame.
    pub fn frame_count(&self, len: usize) -> usize {
        if len <= self.frame_len {
            1
        } else {
            (len - self.frame_len).div_ceil(self.hop) + 1
        }
    }
}

/// Periodic Hann window of length `n`.
pub fn hann_window(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidConfig("window length must be at least 2"));
    }
    Ok((0..n)
        .map(|k| 0.5 * (1.0 - cos(2.0 * PI * k as f64 / n as f64)))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrogram {
    bins: Grid<Complex64>,
    config: StftConfig,
    original_len: usize,
    sample_rate: u32,
}

impl ComplexSpectrogram {
    pub fn from_parts(
        bins: Grid<Complex64>,
        config: StftConfig,
        original_len: usize,
        sample_rate: u32,
    ) -> Result<Self> {
        config.validate()?;
        if bins.bins() != config.bins() {
            return Err(Error::ShapeMismatch {
                expected: (config.bins(), bins.frames()),
                found: bins.shape(),
            });
        }
        if bins.frames() < config.frame_count(original_len) {
            return Err(Error::InvalidConfig("too few frames for the recorded signal length"));
        }
        if bins.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("spectrogram"));
        }
        Ok(ComplexSpectrogram {
            bins,
            config,
            original_len,
            sample_rate,
        })
    }

    pub fn grid(&self) -> &Grid<Complex64> {
        &self.bins
    }

    pub fn config(&self) -> StftConfig {
        self.config
    }

    pub fn original_len(&self) -> usize {
        self.original_len
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    /// `(bins, frames)`.
    pub fn shape(&self) -> (usize, usize) {
        self.bins.shape()
    }

    /// Same metadata, new values. The caller guarantees the shape.
    pub(crate) fn with_grid(&self, bins: Grid<Complex64>) -> ComplexSpectrogram {
        debug_assert_eq!(bins.shape(), self.bins.shape());
        ComplexSpectrogram {
            bins,
            config: self.config,
            original_len: self.original_len,
            sample_rate: self.sample_rate,
        }
    }
}

pub fn stft(buffer: &AudioBuffer, cfg: &StftConfig) -> Result<ComplexSpectrogram> {
    cfg.validate()?;
    let window = hann_window(cfg.frame_len)?;
    let plan = FftPlan::new(cfg.frame_len);
    let samples = buffer.samples();
    let frames = cfg.frame_count(samples.len());
    let bins = cfg.bins();

    let mut out = Grid::filled(bins, frames, Complex64::new(0.0, 0.0));
    let mut work = vec![Complex64::new(0.0, 0.0); cfg.frame_len];
    for m in 0..frames {
        let start = m * cfg.hop;
        for (k, slot) in work.iter_mut().enumerate() {
            let x = samples.get(start + k).copied().unwrap_or(0.0);
            *slot = Complex64::new(x * window[k], 0.0);
        }
        plan.forward(&mut work);
        out.frame_mut(m).copy_from_slice(&work[..bins]);
    }
    Ok(ComplexSpectrogram {
        bins: out,
        config: *cfg,
        original_len: samples.len(),
        sample_rate: buffer.sample_rate(),
    })
}

/// Weighted overlap-add inversion.
///
/// Each frame is inverse transformed, multiplied by the analysis window and
/// accumulated; the sum is divided by the accumulated squared window.
///
/// Near both ends fewer frames overlap and the envelope tends to zero. There
/// the divisor is floored at half the smallest envelope found in the
/// interior (at least `frame_len` samples from either end, or the peak
/// envelope when the signal has no interior). A consistent spectrogram is
/// reproduced exactly wherever the envelope is above that floor and fades in
/// and out below it; a masked frame cannot be amplified at the edges.
pub fn istft(spec: &ComplexSpectrogram) -> Result<AudioBuffer> {
    let cfg = spec.config;
    cfg.validate()?;
    let n = cfg.frame_len;
    let bins = cfg.bins();
    if spec.bins.bins() != bins {
        return Err(Error::ShapeMismatch {
            expected: (bins, spec.bins.frames()),
            found: spec.bins.shape(),
        });
    }
    let window = hann_window(n)?;
    let plan = FftPlan::new(n);
    let frames = spec.bins.frames();
    let total = (frames - 1) * cfg.hop + n;
    let mut acc = vec![0.0; total];
    let mut envelope = vec![0.0; total];
    let mut work = vec![Complex64::new(0.0, 0.0); n];
    let scale = 1.0 / n as f64;

    for m in 0..frames {
        let half = spec.bins.frame(m);
        work[..bins].copy_from_slice(half);
        for k in 1..n / 2 {
            work[n - k] = half[k].conj();
        }
        plan.inverse_unscaled(&mut work);
        let start = m * cfg.hop;
        for k in 0..n {
            acc[start + k] += work[k].re * scale * window[k];
            envelope[start + k] += window[k] * window[k];
        }
    }

    let interior = if total > 2 * n { &envelope[n..total - n] } else { &envelope[..] };
    let floor = if total > 2 * n {
        0.5 * interior.iter().copied().fold(f64::INFINITY, f64::min)
    } else {
        0.5 * interior.iter().copied().fold(0.0, f64::max)
    };
    let mut out = Vec::with_capacity(spec.original_len);
    for t in 0..spec.original_len {
        let env = envelope[t];
        if env == 0.0 && t > 0 {
            return Err(Error::ZeroEnvelope { sample: t });
        }
        out.push(acc[t] / env.max(floor));
    }
    AudioBuffer::new(out, spec.sample_rate)
}

/// Splits into magnitude and phase. Zero bins get phase 0.
pub fn split(spec: &ComplexSpectrogram) -> (MagnitudeSpectrogram, PhaseSpectrogram) {
    let mag = spec.bins.map(|c| c.norm());
    let phase = spec.bins.map(|c| {
        if c.re == 0.0 && c.im == 0.0 {
            0.0
        } else {
            let p = atan2(c.im, c.re);
            if p == -PI {
                PI
            } else {
                p
            }
        }
    });
    (mag, phase)
}

/// Rebuilds a complex spectrogram from magnitude and phase, keeping the
/// metadata of `like`.
pub fn combine(
    mag: &MagnitudeSpectrogram,
    phase: &PhaseSpectrogram,
    like: &ComplexSpectrogram,
) -> Result<ComplexSpectrogram> {
    mag.ensure_shape(like.shape())?;
    phase.ensure_shape(like.shape())?;
    let data = mag
        .iter()
        .zip(phase.iter())
        .map(|(&r, &p)| Complex64::new(r * cos(p), r * sin(p)))
        .collect();
    let (b, f) = like.shape();
    Ok(like.with_grid(Grid::from_vec(b, f, data)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, hop: usize) -> StftConfig {
        StftConfig::new(n, hop).unwrap()
    }

    fn lcg_noise(len: usize, mut state: u64) -> Vec<f64> {
        (0..len)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
            })
            .collect()
    }

    #[test]
    fn hann_closed_form() {
        let w = hann_window(4).unwrap();
        let expected = [0.0, 0.5, 1.0, 0.5];
        for (a, b) in w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(hann_window(8).unwrap()[4], 1.0);
        assert!(hann_window(1).is_err());
    }

    #[test]
    fn hann_quarter_hop_sums_to_two() {
        for n in [8usize, 16, 64, 2048] {
            let w = hann_window(n).unwrap();
            let hop = n / 4;
            // Brute force: place shifted windows and sum at interior samples.
            let len = 4 * n;
            let mut sum = vec![0.0; len];
            let mut start = 0;
            while start + n <= len {
                for k in 0..n {
                    sum[start + k] += w[k];
                }
                start += hop;
            }
            for s in &sum[n..len - n] {
                assert!((s - 2.0).abs() < 1e-12, "n={n}: {s}");
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(StftConfig::new(7, 2).is_err());
        assert!(StftConfig::new(8, 0).is_err());
        assert!(StftConfig::new(8, 9).is_err());
        assert_eq!(StftConfig::default().bins(), 1025);
    }

    #[test]
    fn frame_count_contract() {
        let c = cfg(8, 2);
        assert_eq!(c.frame_count(0), 1);
        assert_eq!(c.frame_count(5), 1);
        assert_eq!(c.frame_count(8), 1);
        assert_eq!(c.frame_count(9), 2);
        assert_eq!(c.frame_count(10), 2);
        assert_eq!(c.frame_count(11), 3);
    }

    #[test]
    fn zero_signal_gives_zero_spectrogram_and_back() {
        let x = AudioBuffer::silence(1000, 8000).unwrap();
        let s = stft(&x, &cfg(64, 16)).unwrap();
        assert!(s.grid().iter().all(|c| c.norm() == 0.0));
        let y = istft(&s).unwrap();
        assert_eq!(y.len(), 1000);
        assert!(y.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn bin_centred_cosine() {
        let n = 64;
        let k = 5;
        let x: Vec<f64> = (0..n)
            .map(|i| cos(2.0 * PI * k as f64 * i as f64 / n as f64))
            .collect();
        let s = stft(&AudioBuffer::new(x, 8000).unwrap(), &cfg(n, 16)).unwrap();
        assert_eq!(s.shape(), (33, 1));
        let wsum: f64 = hann_window(n).unwrap().iter().sum();
        let peak = s.grid().get(k, 0).norm();
        assert!((peak - wsum / 2.0).abs() < 1e-10 * wsum);
        // Hann leaks only into the two neighbouring bins.
        for b in 0..33 {
            if (b as isize - k as isize).abs() > 1 {
                assert!(s.grid().get(b, 0).norm() < 1e-10 * peak, "bin {b}");
            }
        }
    }

    #[test]
    fn parseval_per_frame() {
        let n = 32;
        let c = cfg(n, 8);
        let x = lcg_noise(200, 3);
        let s = stft(&AudioBuffer::new(x.clone(), 8000).unwrap(), &c).unwrap();
        let w = hann_window(n).unwrap();
        let mut spectral = 0.0;
        let mut temporal = 0.0;
        for m in 0..s.shape().1 {
            for b in 0..c.bins() {
                let e = s.grid().get(b, m).norm_sqr();
                spectral += if b == 0 || b == n / 2 { e } else { 2.0 * e };
            }
            for k in 0..n {
                let v = x.get(m * c.hop + k).copied().unwrap_or(0.0) * w[k];
                temporal += v * v;
            }
        }
        assert!((spectral / n as f64 - temporal).abs() < 1e-10 * temporal);
    }

    #[test]
    fn round_trip_noise_and_tone() {
        let c = cfg(2048, 512);
        let noise = lcg_noise(44100, 11);
        let tone: Vec<f64> = (0..44100)
            .map(|i| sin(2.0 * PI * 440.0 * i as f64 / 44100.0))
            .collect();
        for x in [noise, tone] {
            let buf = AudioBuffer::new(x.clone(), 44100).unwrap();
            let y = istft(&stft(&buf, &c).unwrap()).unwrap();
            assert_eq!(y.len(), x.len());
            let interior = 2048..x.len() - 2048;
            let mut err = 0.0;
            let mut max_abs: f64 = 0.0;
            let mut energy = 0.0;
            for t in interior {
                let d = y.samples()[t] - x[t];
                err += d * d;
                energy += x[t] * x[t];
                max_abs = max_abs.max(d.abs());
            }
            assert!((err / energy).sqrt() < 1e-6);
            assert!(max_abs < 1e-6);
        }
    }

    #[test]
    fn full_hop_has_zero_envelope() {
        let c = cfg(8, 8);
        let buf = AudioBuffer::new(lcg_noise(30, 1), 8000).unwrap();
        let s = stft(&buf, &c).unwrap();
        assert_eq!(istft(&s), Err(Error::ZeroEnvelope { sample: 8 }));
    }

    #[test]
    fn split_conventions() {
        let grid = Grid::from_vec(
            2,
            1,
            vec![Complex64::new(3.0, 4.0), Complex64::new(-0.0, 0.0)],
        )
        .unwrap();
        let spec = ComplexSpectrogram::from_parts(grid, cfg(2, 1), 1, 8000).unwrap();
        let (mag, phase) = split(&spec);
        assert_eq!(*mag.get(0, 0), 5.0);
        assert_eq!(*phase.get(0, 0), atan2(4.0, 3.0));
        assert_eq!(*mag.get(1, 0), 0.0);
        assert_eq!(*phase.get(1, 0), 0.0);
        let neg_real = Grid::from_vec(2, 1, vec![Complex64::new(-1.0, -0.0); 2]).unwrap();
        let spec = ComplexSpectrogram::from_parts(neg_real, cfg(2, 1), 1, 8000).unwrap();
        assert_eq!(*split(&spec).1.get(0, 0), PI);
    }

    #[test]
    fn combine_rejects_shape_mismatch() {
        let buf = AudioBuffer::new(lcg_noise(100, 2), 8000).unwrap();
        let s = stft(&buf, &cfg(16, 4)).unwrap();
        let (mag, _) = split(&s);
        let bad = Grid::new(3, 3);
        assert!(matches!(combine(&mag, &bad, &s), Err(Error::ShapeMismatch { .. })));
    }
}
