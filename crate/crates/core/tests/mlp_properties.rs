use maskforge_core::grid::Grid;
use maskforge_core::mlp::{
    forward, init_model, loss_and_gradient, predict_masks, train_sgd, Layer, Loss, MlpModel,
    TrainConfig, TrainingPair,
};
use maskforge_core::patching::{extract_patches, repack_mean, PatchKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Plain matrix arithmetic, written without the crate's helpers.
fn oracle_forward(model: &MlpModel, input: &[f64]) -> Vec<f64> {
    let mut x = input.to_vec();
    for layer in model.layers() {
        let mut y = vec![0.0; layer.outputs];
        for o in 0..layer.outputs {
            let mut z = layer.biases[o];
            for i in 0..layer.inputs {
                z += layer.weights[o * layer.inputs + i] * x[i];
            }
            y[o] = 1.0 / (1.0 + (-z).exp());
        }
        x = y;
    }
    x
}

fn oracle_loss(model: &MlpModel, input: &[f64], target: &[f64], loss: Loss) -> f64 {
    let y = oracle_forward(model, input);
    y.iter()
        .zip(target)
        .map(|(&y, &t)| match loss {
            Loss::CrossEntropy => -(t * y.ln() + (1.0 - t) * (1.0 - y).ln()),
            Loss::MeanSquared => 0.5 * (y - t) * (y - t),
        })
        .sum()
}

fn perturbed(model: &MlpModel, layer: usize, weight: Option<usize>, bias: Option<usize>, eps: f64) -> MlpModel {
    let mut layers: Vec<Layer> = model.layers().to_vec();
    if let Some(w) = weight {
        layers[layer].weights[w] += eps;
    }
    if let Some(b) = bias {
        layers[layer].biases[b] += eps;
    }
    // Output bias must stay zero for from_layers; only hidden biases are perturbed.
    MlpModel::from_layers(layers, model.seed()).unwrap()
}

fn random_case(rng: &mut ChaCha8Rng, sizes: &[usize]) -> (MlpModel, Vec<f64>, Vec<f64>) {
    let mut model = init_model(sizes, rng.gen()).unwrap();
    // Non-zero hidden biases exercise their gradients too.
    let mut layers = model.layers().to_vec();
    let last = layers.len() - 1;
    for (l, layer) in layers.iter_mut().enumerate() {
        if l != last {
            for b in &mut layer.biases {
                *b = rng.gen_range(-0.5..0.5);
            }
        }
    }
    model = MlpModel::from_layers(layers, model.seed()).unwrap();
    let input = (0..sizes[0]).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let target = (0..*sizes.last().unwrap()).map(|_| if rng.gen() { 1.0 } else { 0.0 }).collect();
    (model, input, target)
}

fn max_fd_relative_error(model: &MlpModel, input: &[f64], target: &[f64], loss: Loss) -> f64 {
    let eps = 1e-5;
    let (_, grads) = loss_and_gradient(model, input, target, loss).unwrap();
    let mut worst: f64 = 0.0;
    let depth = model.layers().len();
    let mut check = |analytic: f64, plus: f64, minus: f64| {
        let numeric = (plus - minus) / (2.0 * eps);
        let denom = analytic.abs().max(numeric.abs()).max(1e-7);
        worst = worst.max((analytic - numeric).abs() / denom);
    };
    for l in 0..depth {
        let layer = &model.layers()[l];
        for w in 0..layer.weights.len() {
            let p = oracle_loss(&perturbed(model, l, Some(w), None, eps), input, target, loss);
            let m = oracle_loss(&perturbed(model, l, Some(w), None, -eps), input, target, loss);
            check(grads.layers[l].weights[w], p, m);
        }
        if l + 1 < depth {
            for b in 0..layer.biases.len() {
                let p = oracle_loss(&perturbed(model, l, None, Some(b), eps), input, target, loss);
                let m = oracle_loss(&perturbed(model, l, None, Some(b), -eps), input, target, loss);
                check(grads.layers[l].biases[b], p, m);
            }
        } else {
            assert!(grads.layers[l].biases.iter().all(|&g| g == 0.0));
        }
    }
    worst
}

#[test]
fn gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for loss in [Loss::CrossEntropy, Loss::MeanSquared] {
        for _ in 0..20 {
            let (model, input, target) = random_case(&mut rng, &[6, 5, 6]);
            let err = max_fd_relative_error(&model, &input, &target, loss);
            assert!(err < 1e-4, "{loss:?}: {err}");
        }
    }
    let (model, input, target) = random_case(&mut rng, &[4, 6, 3, 5]);
    assert!(max_fd_relative_error(&model, &input, &target, Loss::CrossEntropy) < 1e-4);
}

#[test]
fn forward_matches_matrix_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let (model, input, _) = random_case(&mut rng, &[7, 9, 4, 7]);
        let got = forward(&model, &input).unwrap();
        for (a, b) in got.iter().zip(oracle_forward(&model, &input)) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn huge_inputs_stay_inside_unit_interval() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let model = init_model(&[10, 8, 10], 4).unwrap();
    for _ in 0..50 {
        let x: Vec<f64> = (0..10).map(|_| rng.gen_range(-1e6..1e6)).collect();
        let y = forward(&model, &x).unwrap();
        assert!(y.iter().all(|&v| v > 0.0 && v < 1.0));
    }
}

fn toy_dataset(seed: u64, n: usize, dim: usize) -> Vec<TrainingPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| TrainingPair {
            input: (0..dim).map(|_| rng.gen::<f64>()).collect(),
            target: (0..dim).map(|_| if rng.gen() { 1.0 } else { 0.0 }).collect(),
        })
        .collect()
}

#[test]
fn overfits_a_toy_dataset() {
    let data = toy_dataset(1, 10, 8);
    let model = init_model(&[8, 16, 8], 1).unwrap();
    let cfg = TrainConfig {
        epochs: 200,
        learning_rate: 1.0,
        loss: Loss::CrossEntropy,
        shuffle_seed: 1,
    };
    let (trained, trace) = train_sgd(model, &data, &cfg).unwrap();
    assert_eq!(trace.len(), 200);
    assert!(trace[199] < 0.01 * trace[0], "{} vs {}", trace[199], trace[0]);
    assert!(trained.layers().last().unwrap().biases.iter().all(|&b| b == 0.0));
}

#[test]
fn zero_learning_rate_leaves_model_unchanged() {
    let data = toy_dataset(2, 6, 4);
    let model = init_model(&[4, 3, 4], 2).unwrap();
    let cfg = TrainConfig {
        epochs: 5,
        learning_rate: 0.0,
        ..TrainConfig::default()
    };
    let (trained, trace) = train_sgd(model.clone(), &data, &cfg).unwrap();
    assert_eq!(trained, model);
    assert!(trace.iter().all(|&l| l == trace[0]));
}

#[test]
fn training_is_deterministic() {
    let data = toy_dataset(3, 12, 6);
    let cfg = TrainConfig {
        epochs: 7,
        learning_rate: 0.2,
        loss: Loss::MeanSquared,
        shuffle_seed: 99,
    };
    let a = train_sgd(init_model(&[6, 5, 6], 5).unwrap(), &data, &cfg).unwrap();
    let b = train_sgd(init_model(&[6, 5, 6], 5).unwrap(), &data, &cfg).unwrap();
    assert_eq!(a, b);
    let c = train_sgd(
        init_model(&[6, 5, 6], 5).unwrap(),
        &data,
        &TrainConfig { shuffle_seed: 100, ..cfg },
    )
    .unwrap();
    assert_ne!(a.1, c.1);
}

#[test]
fn training_rejects_bad_data() {
    let model = init_model(&[2, 2], 0).unwrap();
    assert!(train_sgd(model.clone(), &[], &TrainConfig::default()).is_err());
    let bad = [TrainingPair {
        input: vec![0.0, 1.0],
        target: vec![0.2, 1.0],
    }];
    assert!(train_sgd(model, &bad, &TrainConfig::default()).is_err());
}

#[test]
fn predictions_feed_repacking() {
    let model = init_model(&[6, 4, 6], 12).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let grid = Grid::from_fn(3, 9, |_, _| rng.gen::<f64>());
    let set = extract_patches(&grid, 2, 1, PatchKind::MixtureInput).unwrap();
    let preds = predict_masks(&model, &set).unwrap();
    assert_eq!(preds.kind, PatchKind::Prediction);
    // Batch equals individual calls.
    for (p, input) in preds.patches.iter().zip(&set.patches) {
        assert_eq!(p.as_slice(), forward(&model, input.as_slice()).unwrap().as_slice());
    }
    let mean = repack_mean(&preds).unwrap();
    // Per-patch oracle: element (f, t) averages the outputs of windows t-1 and t.
    for t in 0..9usize {
        for f in 0..3 {
            let mut acc = Vec::new();
            for start in t.saturating_sub(1)..=t.min(7) {
                acc.push(forward(&model, set.patches[start].as_slice()).unwrap()[(t - start) * 3 + f]);
            }
            let expected = acc.iter().sum::<f64>() / acc.len() as f64;
            assert!((mean.values.get(f, t) - expected).abs() < 1e-15);
        }
    }
    let wrong = extract_patches(&grid, 3, 1, PatchKind::MixtureInput).unwrap();
    assert!(predict_masks(&model, &wrong).is_err());
}

#[test]
fn zero_model_predicts_one_half() {
    let layers = vec![
        Layer { inputs: 4, outputs: 2, weights: vec![0.0; 8], biases: vec![0.0; 2] },
        Layer { inputs: 2, outputs: 4, weights: vec![0.0; 8], biases: vec![0.0; 4] },
    ];
    let model = MlpModel::from_layers(layers, 0).unwrap();
    let set = extract_patches(&Grid::filled(2, 5, 0.3), 2, 1, PatchKind::MixtureInput).unwrap();
    let preds = predict_masks(&model, &set).unwrap();
    assert!(preds.patches.iter().all(|p| p.iter().all(|&v| v == 0.5)));
}
