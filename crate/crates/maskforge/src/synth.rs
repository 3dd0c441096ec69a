//! Seeded synthetic corpus.
//!
//! Vocal stems are harmonic glides with vibrato, phrased into notes.
//! Accompaniment stems are steady harmonic tones, a low bass line and
//! band-limited noise bursts. A second generator builds songs whose two
//! sources occupy disjoint frequency bands.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use maskforge_core::audio::{AudioBuffer, Stem, StemSet};
use maskforge_core::Source;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::manifest::{Manifest, SongEntry, StemEntry};
use crate::wav::{write_wav, WavEncoding};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub sample_rate: u32,
    pub duration_s: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            sample_rate: 16_000,
            duration_s: 2.0,
        }
    }
}

impl SynthConfig {
    fn len(&self) -> usize {
        (self.duration_s * self.sample_rate as f64).round() as usize
    }
}

fn song_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// Raised-cosine ramps of `ramp` samples at both ends of `[start, end)`.
fn gate(t: usize, start: usize, end: usize, ramp: usize) -> f64 {
    if t < start || t >= end {
        return 0.0;
    }
    let ramp = ramp.min((end - start) / 2).max(1);
    let d = (t - start).min(end - 1 - t);
    if d >= ramp {
        1.0
    } else {
        0.5 - 0.5 * (PI * d as f64 / ramp as f64).cos()
    }
}

fn harmonic(phase: f64, f0: f64, nyquist: f64, rolloff: f64) -> f64 {
    let mut acc = 0.0;
    let mut k = 1;
    while k as f64 * f0 < 0.9 * nyquist {
        acc += (k as f64 * phase).sin() / (k as f64).powf(rolloff);
        k += 1;
    }
    acc
}

fn vocal_line(rng: &mut ChaCha8Rng, cfg: &SynthConfig) -> Vec<f64> {
    let sr = cfg.sample_rate as f64;
    let n = cfg.len();
    let nyquist = sr / 2.0;
    let mut out = vec![0.0; n];
    let mut t = (rng.gen_range(0.0..0.15) * sr) as usize;
    let mut prev = log_uniform(rng, 160.0, 450.0);
    let vib_rate = rng.gen_range(4.5..7.0);
    let vib_depth = rng.gen_range(0.015..0.035);
    let mut phase = 0.0;
    while t < n {
        let dur = (rng.gen_range(0.2..0.55) * sr) as usize;
        let end = (t + dur).min(n);
        let target = log_uniform(rng, 160.0, 450.0);
        let glide = ((end - t) as f64 * rng.gen_range(0.2..0.5)) as usize;
        let loudness = rng.gen_range(0.6..1.0);
        for i in t..end {
            let u = if glide == 0 { 1.0 } else { ((i - t) as f64 / glide as f64).min(1.0) };
            let base = prev * (target / prev).powf(u);
            let vib = 1.0 + vib_depth * (2.0 * PI * vib_rate * i as f64 / sr).sin();
            let f0 = base * vib;
            phase += 2.0 * PI * f0 / sr;
            out[i] = loudness * gate(i, t, end, (0.02 * sr) as usize) * harmonic(phase, f0, nyquist, 1.1);
        }
        prev = target;
        t = end + (rng.gen_range(0.0..0.08) * sr) as usize;
    }
    out
}

fn pad_tones(rng: &mut ChaCha8Rng, cfg: &SynthConfig) -> Vec<f64> {
    let sr = cfg.sample_rate as f64;
    let n = cfg.len();
    let nyquist = sr / 2.0;
    let mut out = vec![0.0; n];
    let chord_len = (rng.gen_range(0.5..1.0) * sr) as usize;
    let mut start = 0;
    while start < n {
        let end = (start + chord_len).min(n);
        for _ in 0..3 {
            let f = log_uniform(rng, 120.0, 900.0);
            let amp = rng.gen_range(0.3..0.8);
            let phase0 = rng.gen_range(0.0..2.0 * PI);
            for i in start..end {
                let phase = phase0 + 2.0 * PI * f * i as f64 / sr;
                out[i] += amp * gate(i, start, end, (0.03 * sr) as usize) * harmonic(phase, f, nyquist, 2.0);
            }
        }
        start = end;
    }
    out
}

fn bass_line(rng: &mut ChaCha8Rng, cfg: &SynthConfig) -> Vec<f64> {
    let sr = cfg.sample_rate as f64;
    let n = cfg.len();
    let mut out = vec![0.0; n];
    let step = (rng.gen_range(0.25..0.5) * sr) as usize;
    let mut start = 0;
    while start < n {
        let end = (start + step).min(n);
        let f = log_uniform(rng, 45.0, 110.0);
        for i in start..end {
            let phase = 2.0 * PI * f * i as f64 / sr;
            out[i] = gate(i, start, end, (0.01 * sr) as usize) * (phase.sin() + 0.3 * (2.0 * phase).sin());
        }
        start = end;
    }
    out
}

/// Decaying bursts of white noise through a two-pole resonator.
fn noise_bursts(rng: &mut ChaCha8Rng, cfg: &SynthConfig) -> Vec<f64> {
    let sr = cfg.sample_rate as f64;
    let n = cfg.len();
    let mut out = vec![0.0; n];
    let mut t = (rng.gen_range(0.0..0.1) * sr) as usize;
    while t < n {
        let centre = log_uniform(rng, 800.0, 0.8 * sr / 2.0);
        let bandwidth = centre * rng.gen_range(0.3..1.0);
        let r = (-PI * bandwidth / sr).exp();
        let (a1, a2) = (2.0 * r * (2.0 * PI * centre / sr).cos(), -r * r);
        let decay = rng.gen_range(0.03..0.12) * sr;
        let len = (decay * 4.0) as usize;
        let amp = rng.gen_range(0.4..1.0);
        let (mut y1, mut y2) = (0.0, 0.0);
        for i in t..(t + len).min(n) {
            let x = rng.gen_range(-1.0..1.0) * (-((i - t) as f64) / decay).exp();
            let y = x + a1 * y1 + a2 * y2;
            y2 = y1;
            y1 = y;
            out[i] += amp * (1.0 - r) * y;
        }
        t += (rng.gen_range(0.12..0.4) * sr) as usize;
    }
    out
}

fn stem(samples: Vec<f64>, cfg: &SynthConfig, label: Source) -> Stem {
    Stem {
        audio: AudioBuffer::new(samples, cfg.sample_rate).expect("synthesized samples are finite"),
        label,
    }
}

/// One song: a lead vocal, sometimes a harmony vocal, and three
/// accompaniment stems.
pub fn synth_song(seed: u64, index: usize, cfg: &SynthConfig) -> StemSet {
    let mut rng = song_rng(seed, index);
    let mut stems = vec![stem(vocal_line(&mut rng, cfg), cfg, Source::Vocal)];
    if rng.gen_bool(0.4) {
        let harmony = vocal_line(&mut rng, cfg).into_iter().map(|x| 0.5 * x).collect();
        stems.push(stem(harmony, cfg, Source::Vocal));
    }
    stems.push(stem(pad_tones(&mut rng, cfg), cfg, Source::NonVocal));
    stems.push(stem(bass_line(&mut rng, cfg), cfg, Source::NonVocal));
    stems.push(stem(noise_bursts(&mut rng, cfg), cfg, Source::NonVocal));
    StemSet {
        song_id: format!("song{index:03}"),
        stems,
    }
}

pub fn synth_corpus(seed: u64, count: usize, cfg: &SynthConfig) -> Vec<StemSet> {
    (0..count).map(|i| synth_song(seed, i, cfg)).collect()
}

fn tones(rng: &mut ChaCha8Rng, cfg: &SynthConfig, lo: f64, hi: f64) -> Vec<f64> {
    let sr = cfg.sample_rate as f64;
    let n = cfg.len();
    let ramp = (0.05 * sr) as usize;
    let mut out = vec![0.0; n];
    for _ in 0..3 {
        let f = rng.gen_range(lo..hi);
        let amp = rng.gen_range(0.5..1.0);
        let phase0 = rng.gen_range(0.0..2.0 * PI);
        for (i, x) in out.iter_mut().enumerate() {
            *x += amp * gate(i, 0, n, ramp) * (phase0 + 2.0 * PI * f * i as f64 / sr).sin();
        }
    }
    out
}

/// Vocal tones below 1 kHz, accompaniment tones between 3 and 6 kHz (scaled
/// down when the sample rate cannot hold them).
pub fn disjoint_song(seed: u64, index: usize, cfg: &SynthConfig) -> StemSet {
    let mut rng = song_rng(seed ^ 0xd15_0417, index);
    let nyquist = cfg.sample_rate as f64 / 2.0;
    let scale = (nyquist / 8000.0).min(1.0);
    StemSet {
        song_id: format!("disjoint{index:03}"),
        stems: vec![
            stem(tones(&mut rng, cfg, 200.0 * scale, 1000.0 * scale), cfg, Source::Vocal),
            stem(tones(&mut rng, cfg, 3000.0 * scale, 6000.0 * scale), cfg, Source::NonVocal),
        ],
    }
}

/// Writes every stem as float32 WAV under `dir` and a `manifest.json`
/// listing them.
pub fn write_corpus(dir: impl AsRef<Path>, songs: &[StemSet]) -> Result<Manifest> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut entries = Vec::with_capacity(songs.len());
    for song in songs {
        let mut stems = Vec::with_capacity(song.stems.len());
        for (i, s) in song.stems.iter().enumerate() {
            let name = format!("{}_{}_{}.wav", song.song_id, i, s.label.as_str());
            write_wav(dir.join(&name), &s.audio, WavEncoding::Float32)?;
            stems.push(StemEntry {
                path: name.into(),
                label: s.label.into(),
            });
        }
        entries.push(SongEntry {
            id: song.song_id.clone(),
            stems,
        });
    }
    let manifest = Manifest {
        songs: entries,
        base_dir: dir.to_path_buf(),
    };
    manifest.save(dir.join("manifest.json"))?;
    Ok(manifest)
}
