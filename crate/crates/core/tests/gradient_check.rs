//! Analytic LSTM gradients against central finite differences.

use iob_core::nncore::{lstm_backward, lstm_forward, ModelConfig, ModelState, TENSOR_NAMES};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEP: f64 = 1e-5;
const TOLERANCE: f64 = 1e-4;
/// Gradients smaller than this are compared absolutely; finite differences
/// cannot resolve their relative error.
const FLOOR: f64 = 1e-6;

fn squared_error(state: &ModelState, window: &[f64], target: f64) -> f64 {
    let (pred, _) = lstm_forward(state, window).unwrap();
    (pred - target).powi(2)
}

/// Worst relative error per tensor for one random instance.
fn check_instance(seed: u64, hidden: usize, input: usize, lookback: usize) -> Vec<(&'static str, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = ModelConfig {
        hidden_size: hidden,
        input_size: input,
        lookback,
        ..ModelConfig::default()
    };
    let mut state = ModelState::new(config, &mut rng).unwrap();
    // Spread parameters wider than the default init so gates are not all near 0.5.
    for t in state.params.tensors_mut() {
        for v in t.iter_mut() {
            *v *= 2.0;
        }
    }
    let window: Vec<f64> = (0..lookback * input).map(|_| rng.random_range(-1.0..1.0)).collect();
    let target: f64 = rng.random_range(-1.0..1.0);

    let (pred, cache) = lstm_forward(&state, &window).unwrap();
    let analytic = lstm_backward(&state, &cache, 2.0 * (pred - target)).unwrap();

    let mut worst = Vec::new();
    for (k, name) in TENSOR_NAMES.iter().enumerate() {
        let len = state.params.tensors()[k].len();
        let mut max_rel: f64 = 0.0;
        for i in 0..len {
            let original = state.params.tensors()[k][i];
            state.params.tensors_mut()[k][i] = original + STEP;
            let up = squared_error(&state, &window, target);
            state.params.tensors_mut()[k][i] = original - STEP;
            let down = squared_error(&state, &window, target);
            state.params.tensors_mut()[k][i] = original;

            let numeric = (up - down) / (2.0 * STEP);
            let exact = analytic.tensors()[k][i];
            let rel = (exact - numeric).abs() / exact.abs().max(numeric.abs()).max(FLOOR);
            max_rel = max_rel.max(rel);
        }
        worst.push((*name, max_rel));
    }
    worst
}

#[test]
fn analytic_gradients_match_finite_differences() {
    for seed in 0..10 {
        let hidden = 2 + (seed as usize % 4);
        let input = 1 + (seed as usize % 2);
        let lookback = 1 + (seed as usize % 4);
        for (tensor, rel) in check_instance(seed, hidden, input, lookback) {
            assert!(
                rel < TOLERANCE,
                "seed {seed} (hidden {hidden}, input {input}, lookback {lookback}): {tensor} relative error {rel:e}"
            );
        }
    }
}

#[test]
fn hidden_four_lookback_three() {
    for (tensor, rel) in check_instance(1234, 4, 1, 3) {
        assert!(rel < TOLERANCE, "{tensor}: {rel:e}");
    }
}
