use maskforge_core::bss_eval::{decompose, metrics};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Least-squares projection by modified Gram-Schmidt: an independent route
/// to the span projection.
fn gram_schmidt_projection(refs: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for r in refs {
        let mut v = r.clone();
        for q in &basis {
            let c = dot(&v, q);
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= c * qi;
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-12 {
            basis.push(v.iter().map(|vi| vi / norm).collect());
        }
    }
    let mut p = vec![0.0; x.len()];
    for q in &basis {
        let c = dot(x, q);
        for (pi, qi) in p.iter_mut().zip(q) {
            *pi += c * qi;
        }
    }
    p
}

fn random_problem(rng: &mut ChaCha8Rng, n: usize, k: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let refs: Vec<Vec<f64>> = (0..k).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let est = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    (refs, est)
}

#[test]
fn agrees_with_least_squares_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    for _ in 0..200 {
        let k = rng.gen_range(1..5);
        let (refs, est) = random_problem(&mut rng, 64, k);
        let views: Vec<&[f64]> = refs.iter().map(Vec::as_slice).collect();
        let target = rng.gen_range(0..k);
        let d = decompose(&est, &views, target).unwrap();
        let p = gram_schmidt_projection(&refs, &est);
        let gain = dot(&est, &refs[target]) / dot(&refs[target], &refs[target]);
        for t in 0..64 {
            assert!((d.s_target[t] - gain * refs[target][t]).abs() < 1e-8);
            assert!((d.s_target[t] + d.e_interf[t] - p[t]).abs() < 1e-8);
            assert!((d.e_artif[t] - (est[t] - p[t])).abs() < 1e-8);
        }
    }
}

proptest! {
    #[test]
    fn decomposition_is_additive_and_orthogonal(seed in any::<u64>(), n in 16usize..300) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (refs, est) = random_problem(&mut rng, n, 2);
        let views: Vec<&[f64]> = refs.iter().map(Vec::as_slice).collect();
        let d = decompose(&est, &views, 0).unwrap();
        let scale = dot(&est, &est).sqrt();
        for t in 0..n {
            let sum = d.s_target[t] + d.e_interf[t] + d.e_artif[t];
            prop_assert!((sum - est[t]).abs() <= 1e-9 * scale);
        }
        for r in &refs {
            let rn = dot(r, r).sqrt();
            prop_assert!(dot(&d.e_artif, r).abs() <= 1e-9 * rn * scale);
        }
        prop_assert!(dot(&d.e_interf, &d.s_target).abs() <= 1e-9 * scale * scale);
    }

    #[test]
    fn metrics_are_scale_invariant(seed in any::<u64>(), c in 0.01f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (refs, est) = random_problem(&mut rng, 128, 2);
        let views: Vec<&[f64]> = refs.iter().map(Vec::as_slice).collect();
        let scaled: Vec<f64> = est.iter().map(|x| c * x).collect();
        let a = metrics(&decompose(&est, &views, 1).unwrap()).unwrap();
        let b = metrics(&decompose(&scaled, &views, 1).unwrap()).unwrap();
        prop_assert!((a.sdr_db - b.sdr_db).abs() < 1e-9);
        prop_assert!((a.sir_db - b.sir_db).abs() < 1e-9);
        prop_assert!((a.sar_db - b.sar_db).abs() < 1e-9);
    }
}
