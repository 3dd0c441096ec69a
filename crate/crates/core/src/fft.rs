//! Complex FFT for arbitrary lengths.
//!
//! Power-of-two lengths use an iterative radix-2 transform. Other lengths go
//! through Bluestein's chirp-z identity on top of a power-of-two plan.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::math::{cos, sin};

#[derive(Debug, Clone)]
pub(crate) struct FftPlan {
    len: usize,
    kind: PlanKind,
}

#[derive(Debug, Clone)]
enum PlanKind {
    Radix2 {
        twiddles: Vec<Complex64>,
        bitrev: Vec<usize>,
    },
    Bluestein {
        inner: alloc::boxed::Box<FftPlan>,
        chirp: Vec<Complex64>,
        kernel_spectrum: Vec<Complex64>,
    },
}

fn unit(angle: f64) -> Complex64 {
    Complex64::new(cos(angle), sin(angle))
}

impl FftPlan {
    pub(crate) fn new(len: usize) -> Self {
        assert!(len > 0, "FFT length must be positive");
        if len.is_power_of_two() {
            Self::radix2(len)
        } else {
            Self::bluestein(len)
        }
    }

    fn radix2(len: usize) -> Self {
        let twiddles = (0..len / 2)
            .map(|k| unit(-2.0 * PI * k as f64 / len as f64))
            .collect();
        let bits = len.trailing_zeros();
        let bitrev = (0..len)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        FftPlan {
            len,
            kind: PlanKind::Radix2 { twiddles, bitrev },
        }
    }

    fn bluestein(len: usize) -> Self {
        let m = (2 * len - 1).next_power_of_two();
        let inner = FftPlan::radix2(m);
        // k^2 mod 2n keeps the chirp argument small and exact.
        let modulus = 2 * len as u128;
        let chirp: Vec<Complex64> = (0..len)
            .map(|k| {
                let k2 = (k as u128 * k as u128) % modulus;
                unit(-PI * k2 as f64 / len as f64)
            })
            .collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); m];
        kernel[0] = chirp[0].conj();
        for k in 1..len {
            kernel[k] = chirp[k].conj();
            kernel[m - k] = chirp[k].conj();
        }
        inner.forward(&mut kernel);
        FftPlan {
            len,
            kind: PlanKind::Bluestein {
                inner: alloc::boxed::Box::new(inner),
                chirp,
                kernel_spectrum: kernel,
            },
        }
    }

    /// In-place forward transform, `X[k] = sum x[n] e^{-2 pi i k n / N}`.
    pub(crate) fn forward(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.len);
        match &self.kind {
            PlanKind::Radix2 { twiddles, bitrev } => radix2_in_place(buf, twiddles, bitrev),
            PlanKind::Bluestein {
                inner,
                chirp,
                kernel_spectrum,
            } => {
                let m = inner.len;
                let mut work = vec![Complex64::new(0.0, 0.0); m];
                for (w, (x, c)) in work.iter_mut().zip(buf.iter().zip(chirp)) {
                    *w = x * c;
                }
                inner.forward(&mut work);
                for (w, k) in work.iter_mut().zip(kernel_spectrum) {
                    *w *= k;
                }
                inner.inverse_unscaled(&mut work);
                let scale = 1.0 / m as f64;
                for (x, (w, c)) in buf.iter_mut().zip(work.iter().zip(chirp)) {
                    *x = w * c * scale;
                }
            }
        }
    }

    /// In-place inverse transform without the `1/N` factor.
    pub(crate) fn inverse_unscaled(&self, buf: &mut [Complex64]) {
        for x in buf.iter_mut() {
            *x = x.conj();
        }
        self.forward(buf);
        for x in buf.iter_mut() {
            *x = x.conj();
        }
    }
}

fn radix2_in_place(buf: &mut [Complex64], twiddles: &[Complex64], bitrev: &[usize]) {
    let n = buf.len();
    for i in 0..n {
        let j = bitrev[i];
        if i < j {
            buf.swap(i, j);
        }
    }
    let mut size = 2;
    while size <= n {
        let half = size / 2;
        let stride = n / size;
        for start in (0..n).step_by(size) {
            for k in 0..half {
                let t = buf[start + k + half] * twiddles[k * stride];
                let u = buf[start + k];
                buf[start + k] = u + t;
                buf[start + k + half] = u - t;
            }
        }
        size *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, v)| v * unit(-2.0 * PI * ((k * j) % n) as f64 / n as f64))
                    .sum()
            })
            .collect()
    }

    fn test_signal(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|i| Complex64::new(sin(i as f64 * 0.37) + 0.1 * i as f64, cos(i as f64 * 1.3)))
            .collect()
    }

    #[test]
    fn matches_naive_dft_for_mixed_lengths() {
        for n in [1, 2, 3, 5, 8, 12, 17, 64, 100, 257] {
            let x = test_signal(n);
            let expected = naive_dft(&x);
            let mut got = x.clone();
            FftPlan::new(n).forward(&mut got);
            let scale: f64 = expected.iter().map(|v| v.norm()).fold(1.0, f64::max);
            for (a, b) in got.iter().zip(&expected) {
                assert!((a - b).norm() < 1e-10 * scale, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn inverse_round_trip() {
        for n in [16, 30] {
            let x = test_signal(n);
            let plan = FftPlan::new(n);
            let mut y = x.clone();
            plan.forward(&mut y);
            plan.inverse_unscaled(&mut y);
            for (a, b) in y.iter().zip(&x) {
                assert!((a / n as f64 - b).norm() < 1e-12);
            }
        }
    }
}
