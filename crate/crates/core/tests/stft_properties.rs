use std::f64::consts::PI;

use maskforge_core::audio::AudioBuffer;
use maskforge_core::grid::Grid;
use maskforge_core::masking::{apply_mask, BinaryMask};
use maskforge_core::stft::{combine, istft, split, stft, StftConfig};
use maskforge_core::Source;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn relative_interior_rms(x: &[f64], y: &[f64], margin: usize) -> f64 {
    let (mut err, mut energy) = (0.0, 0.0);
    for t in margin..x.len() - margin {
        err += (x[t] - y[t]).powi(2);
        energy += x[t] * x[t];
    }
    (err / energy).sqrt()
}

#[test]
fn round_trip_on_random_lengths() {
    let cfg = StftConfig::new(256, 64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let len = rng.gen_range(600..5000);
        let x: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let buf = AudioBuffer::new(x.clone(), 16000).unwrap();
        let spec = stft(&buf, &cfg).unwrap();
        assert_eq!(spec.shape(), (129, cfg.frame_count(len)));
        let y = istft(&spec).unwrap();
        assert_eq!(y.len(), len);
        assert!(relative_interior_rms(&x, y.samples(), 256) < 1e-6);
    }
}

#[test]
fn edge_frames_are_not_amplified() {
    // Keep only the first and last frame of white noise; the sparse window
    // overlap near the ends must not blow those samples up.
    let cfg = StftConfig::new(512, 128).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let len = rng.gen_range(2000..6000);
        let x: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let spec = stft(&AudioBuffer::new(x, 16000).unwrap(), &cfg).unwrap();
        let (bins, frames) = spec.shape();
        let ends = BinaryMask {
            values: Grid::from_fn(bins, frames, |_, t| t == 0 || t == frames - 1),
            source: Source::Vocal,
        };
        let y = istft(&apply_mask(&spec, &ends).unwrap()).unwrap();
        let peak = y.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(peak < 4.0, "edge peak {peak}");
    }
}

#[test]
fn frame_count_formula() {
    let cfg = StftConfig::new(64, 16).unwrap();
    for len in 65..400usize {
        let expected = ((len - 64) as f64 / 16.0).ceil() as usize + 1;
        assert_eq!(cfg.frame_count(len), expected);
    }
}

#[test]
fn non_power_of_two_frames_round_trip() {
    let cfg = StftConfig::new(300, 75).unwrap();
    let x: Vec<f64> = (0..3000).map(|i| (i as f64 * 0.013).sin() + 0.3 * (i as f64 * 0.29).cos()).collect();
    let y = istft(&stft(&AudioBuffer::new(x.clone(), 8000).unwrap(), &cfg).unwrap()).unwrap();
    assert!(relative_interior_rms(&x, y.samples(), 300) < 1e-9);
}

proptest! {
    #[test]
    fn linearity(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = rng.gen_range(100..700);
        let x: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let z: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let cfg = StftConfig::new(64, 16).unwrap();
        let sx = stft(&AudioBuffer::new(x, 8000).unwrap(), &cfg).unwrap();
        let sy = stft(&AudioBuffer::new(y, 8000).unwrap(), &cfg).unwrap();
        let sz = stft(&AudioBuffer::new(z, 8000).unwrap(), &cfg).unwrap();
        let scale = sz.grid().iter().map(|c| c.norm()).fold(1.0, f64::max);
        for ((u, v), w) in sx.grid().iter().zip(sy.grid().iter()).zip(sz.grid().iter()) {
            prop_assert!((u * a + v * b - w).norm() <= 1e-9 * scale);
        }
    }

    #[test]
    fn combine_inverts_split(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..500).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let cfg = StftConfig::new(32, 8).unwrap();
        let s = stft(&AudioBuffer::new(x, 8000).unwrap(), &cfg).unwrap();
        let (mag, phase) = split(&s);
        prop_assert!(mag.iter().all(|&m| m >= 0.0));
        prop_assert!(phase.iter().all(|&p| p > -PI && p <= PI));
        let back = combine(&mag, &phase, &s).unwrap();
        for (a, b) in back.grid().iter().zip(s.grid().iter()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }
}
