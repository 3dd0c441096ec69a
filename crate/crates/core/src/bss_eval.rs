//! Signal-to-distortion, -interference and -artefact ratios.
//!
//! An estimate `s_hat` is split against the true sources into
//!
//! * `s_target`: its orthogonal projection onto the target reference,
//! * `e_interf`: the rest of its projection onto the span of all references,
//! * `e_artif`: whatever lies outside that span.
//!
//! This is the time-invariant-gain (filter length 1) form of the
//! decomposition; no distortion filter is fitted.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{dot, log10, sqrt};
use crate::{Error, Result};

/// Eigenvalues below this fraction of the largest are dropped when
/// pseudo-inverting the reference Gram matrix.
pub const GRAM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub s_target: Vec<f64>,
    pub e_interf: Vec<f64>,
    pub e_artif: Vec<f64>,
}

/// Ratios in dB. A zero denominator gives `+inf`; a zero numerator with a
/// non-zero denominator gives `-inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationMetrics {
    pub sdr_db: f64,
    pub sir_db: f64,
    pub sar_db: f64,
}

impl SeparationMetrics {
    /// Placeholder for estimates whose ratios are undefined (all-zero
    /// estimates).
    pub const UNDEFINED: SeparationMetrics = SeparationMetrics {
        sdr_db: f64::NAN,
        sir_db: f64::NAN,
        sar_db: f64::NAN,
    };

    /// Elementwise arithmetic mean of dB values.
    pub fn mean(a: &SeparationMetrics, b: &SeparationMetrics) -> SeparationMetrics {
        SeparationMetrics {
            sdr_db: (a.sdr_db + b.sdr_db) / 2.0,
            sir_db: (a.sir_db + b.sir_db) / 2.0,
            sar_db: (a.sar_db + b.sar_db) / 2.0,
        }
    }
}

/// Solves `G c = b` for symmetric positive semi-definite `G` (row-major
/// `k x k`) through a Jacobi eigendecomposition, dropping eigenvalues below
/// `GRAM_TOLERANCE * max`.
pub fn solve_gram_pinv(gram: &[f64], rhs: &[f64]) -> Vec<f64> {
    let k = rhs.len();
    assert_eq!(gram.len(), k * k);
    let mut a = gram.to_vec();
    let mut v = vec![0.0; k * k];
    for i in 0..k {
        v[i * k + i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..k)
            .flat_map(|i| (0..k).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * k + j] * a[i * k + j])
            .sum();
        let diag: f64 = (0..k).map(|i| a[i * k + i] * a[i * k + i]).sum();
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..k {
            for q in p + 1..k {
                let apq = a[p * k + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * k + q] - a[p * k + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / sqrt(t * t + 1.0);
                let s = t * c;
                for r in 0..k {
                    let arp = a[r * k + p];
                    let arq = a[r * k + q];
                    a[r * k + p] = c * arp - s * arq;
                    a[r * k + q] = s * arp + c * arq;
                }
                for r in 0..k {
                    let apr = a[p * k + r];
                    let aqr = a[q * k + r];
                    a[p * k + r] = c * apr - s * aqr;
                    a[q * k + r] = s * apr + c * aqr;
                }
                for r in 0..k {
                    let vrp = v[r * k + p];
                    let vrq = v[r * k + q];
                    v[r * k + p] = c * vrp - s * vrq;
                    v[r * k + q] = s * vrp + c * vrq;
                }
            }
        }
    }
    let eig: Vec<f64> = (0..k).map(|i| a[i * k + i]).collect();
    let max = eig.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let mut out = vec![0.0; k];
    for (e_idx, &lambda) in eig.iter().enumerate() {
        if max == 0.0 || lambda.abs() <= GRAM_TOLERANCE * max {
            continue;
        }
        // c += v_e (v_e . b) / lambda
        let proj: f64 = (0..k).map(|r| v[r * k + e_idx] * rhs[r]).sum();
        for r in 0..k {
            out[r] += v[r * k + e_idx] * proj / lambda;
        }
    }
    out
}

/// Splits `estimate` into target, interference and artefact components.
pub fn decompose(estimate: &[f64], references: &[&[f64]], target_index: usize) -> Result<Decomposition> {
    let n = estimate.len();
    let target = *references
        .get(target_index)
        .ok_or(Error::InvalidConfig("target index out of range"))?;
    for r in references {
        if r.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: r.len(),
            });
        }
    }
    if estimate.iter().chain(references.iter().flat_map(|r| r.iter())).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("evaluation signals"));
    }
    let target_energy = dot(target, target);
    if target_energy == 0.0 {
        return Err(Error::ZeroReference);
    }
    let gain = dot(estimate, target) / target_energy;
    let s_target: Vec<f64> = target.iter().map(|s| gain * s).collect();

    let k = references.len();
    let mut gram = vec![0.0; k * k];
    for i in 0..k {
        for j in i..k {
            let g = dot(references[i], references[j]);
            gram[i * k + j] = g;
            gram[j * k + i] = g;
        }
    }
    let rhs: Vec<f64> = references.iter().map(|r| dot(r, estimate)).collect();
    let coeffs = solve_gram_pinv(&gram, &rhs);
    let mut projection = vec![0.0; n];
    for (c, r) in coeffs.iter().zip(references) {
        for (p, x) in projection.iter_mut().zip(r.iter()) {
            *p += c * x;
        }
    }
    let e_interf = projection.iter().zip(&s_target).map(|(p, s)| p - s).collect();
    let e_artif = estimate.iter().zip(&projection).map(|(e, p)| e - p).collect();
    Ok(Decomposition {
        s_target,
        e_interf,
        e_artif,
    })
}

fn ratio_db(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        f64::INFINITY
    } else if num == 0.0 {
        f64::NEG_INFINITY
    } else {
        10.0 * log10(num / den)
    }
}

pub fn metrics(d: &Decomposition) -> Result<SeparationMetrics> {
    let target = dot(&d.s_target, &d.s_target);
    let interf = dot(&d.e_interf, &d.e_interf);
    let artif = dot(&d.e_artif, &d.e_artif);
    if target == 0.0 && interf == 0.0 && artif == 0.0 {
        return Err(Error::UndefinedMetrics);
    }
    let distortion: f64 = d
        .e_interf
        .iter()
        .zip(&d.e_artif)
        .map(|(i, a)| (i + a) * (i + a))
        .sum();
    let signal: f64 = d
        .s_target
        .iter()
        .zip(&d.e_interf)
        .map(|(s, i)| (s + i) * (s + i))
        .sum();
    Ok(SeparationMetrics {
        sdr_db: ratio_db(target, distortion),
        sir_db: ratio_db(target, interf),
        sar_db: ratio_db(signal, artif),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairMetrics {
    pub vocal: SeparationMetrics,
    pub non_vocal: SeparationMetrics,
    /// Across-source arithmetic mean of the dB values.
    pub mean: SeparationMetrics,
}

fn fit(signal: &[f64], len: usize) -> Vec<f64> {
    let mut v = signal.to_vec();
    v.resize(len, 0.0);
    v
}

/// Scores both estimates against both references. Estimates are trimmed or
/// zero-padded to the reference length.
pub fn evaluate_pair(
    est_vocal: &[f64],
    est_non_vocal: &[f64],
    ref_vocal: &[f64],
    ref_non_vocal: &[f64],
) -> Result<PairMetrics> {
    let n = ref_vocal.len();
    if ref_non_vocal.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: ref_non_vocal.len(),
        });
    }
    let refs = [ref_vocal, ref_non_vocal];
    let vocal = metrics(&decompose(&fit(est_vocal, n), &refs, 0)?)?;
    let non_vocal = metrics(&decompose(&fit(est_non_vocal, n), &refs, 1)?)?;
    Ok(PairMetrics {
        vocal,
        non_vocal,
        mean: SeparationMetrics::mean(&vocal, &non_vocal),
    })
}
