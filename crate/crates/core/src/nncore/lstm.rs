//! Single-layer LSTM followed by a dense map of the final hidden state to
//! one scalar, with backpropagation through time.

#![allow(clippy::needless_range_loop)]

use super::params::{ModelState, Params};
use super::NnError;

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Activations of one timestep.
#[derive(Debug, Clone)]
pub struct StepCache {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    /// Gate activations in input, forget, output, candidate order.
    pub gates: [Vec<f64>; 4],
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
    pub h: Vec<f64>,
}

/// Everything the backward pass needs from a forward call.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub steps: Vec<StepCache>,
    pub prediction: f64,
    /// Optimizer step of the state that produced this cache.
    state_step: u64,
    hidden_size: usize,
    input_size: usize,
}

/// Runs the window (`lookback x input_size`, row-major by timestep)
/// through the network.
pub fn lstm_forward(state: &ModelState, window: &[f64]) -> Result<(f64, ForwardCache), NnError> {
    let cfg = &state.config;
    let (hs, is) = (cfg.hidden_size, cfg.input_size);
    if window.len() != cfg.lookback * is {
        return Err(NnError::Shape(format!(
            "window has {} values, expected lookback {} x input {}",
            window.len(),
            cfg.lookback,
            is
        )));
    }
    let p = &state.params;
    let mut h = vec![0.0; hs];
    let mut c = vec![0.0; hs];
    let mut steps = Vec::with_capacity(cfg.lookback);
    for (t, x) in window.chunks_exact(is).enumerate() {
        let mut gates: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; hs]);
        for (k, gate) in gates.iter_mut().enumerate() {
            let w_x = &p.w_x[k];
            let w_h = &p.w_h[k];
            for j in 0..hs {
                let mut z = p.bias[k][j];
                let row = &w_x[j * is..(j + 1) * is];
                z += row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
                // The initial hidden state is zero, so the recurrent term vanishes.
                if t > 0 {
                    let row = &w_h[j * hs..(j + 1) * hs];
                    z += row.iter().zip(&h).map(|(w, v)| w * v).sum::<f64>();
                }
                gate[j] = if k == 3 { z.tanh() } else { sigmoid(z) };
            }
        }
        let [ig, fg, og, gg] = &gates;
        let c_next: Vec<f64> = (0..hs).map(|j| fg[j] * c[j] + ig[j] * gg[j]).collect();
        let tanh_c: Vec<f64> = c_next.iter().map(|v| v.tanh()).collect();
        let h_next: Vec<f64> = (0..hs).map(|j| og[j] * tanh_c[j]).collect();
        steps.push(StepCache {
            x: x.to_vec(),
            h_prev: std::mem::replace(&mut h, h_next.clone()),
            c_prev: std::mem::replace(&mut c, c_next.clone()),
            gates,
            c: c_next,
            tanh_c,
            h: h_next,
        });
    }
    let prediction = p.dense_b[0] + p.dense_w.iter().zip(&h).map(|(w, v)| w * v).sum::<f64>();
    Ok((
        prediction,
        ForwardCache {
            steps,
            prediction,
            state_step: state.step,
            hidden_size: hs,
            input_size: is,
        },
    ))
}

/// Gradients of the loss with respect to every parameter, given
/// `loss_gradient = dLoss/dPrediction`.
pub fn lstm_backward(
    state: &ModelState,
    cache: &ForwardCache,
    loss_gradient: f64,
) -> Result<Params, NnError> {
    let mut grads = Params::zeros(&state.config);
    lstm_backward_into(state, cache, loss_gradient, &mut grads)?;
    Ok(grads)
}

/// Like [`lstm_backward`] but adds into an existing gradient buffer.
pub fn lstm_backward_into(
    state: &ModelState,
    cache: &ForwardCache,
    loss_gradient: f64,
    grads: &mut Params,
) -> Result<(), NnError> {
    let cfg = &state.config;
    let (hs, is) = (cfg.hidden_size, cfg.input_size);
    if cache.state_step != state.step
        || cache.hidden_size != hs
        || cache.input_size != is
        || cache.steps.len() != cfg.lookback
    {
        return Err(NnError::StaleCache);
    }
    let p = &state.params;
    let last = cache.steps.last().expect("lookback >= 1");

    grads.dense_b[0] += loss_gradient;
    for j in 0..hs {
        grads.dense_w[j] += loss_gradient * last.h[j];
    }
    let mut dh: Vec<f64> = p.dense_w.iter().map(|w| w * loss_gradient).collect();
    let mut dc = vec![0.0; hs];
    let mut dz: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; hs]);

    for (t, step) in cache.steps.iter().enumerate().rev() {
        let [ig, fg, og, gg] = &step.gates;
        for j in 0..hs {
            let d_out = dh[j] * step.tanh_c[j];
            dc[j] += dh[j] * og[j] * (1.0 - step.tanh_c[j] * step.tanh_c[j]);
            let d_in = dc[j] * gg[j];
            let d_cand = dc[j] * ig[j];
            let d_forget = dc[j] * step.c_prev[j];
            dz[0][j] = d_in * ig[j] * (1.0 - ig[j]);
            dz[1][j] = d_forget * fg[j] * (1.0 - fg[j]);
            dz[2][j] = d_out * og[j] * (1.0 - og[j]);
            dz[3][j] = d_cand * (1.0 - gg[j] * gg[j]);
            dc[j] *= fg[j];
        }
        for k in 0..4 {
            let gw_x = &mut grads.w_x[k];
            for j in 0..hs {
                let d = dz[k][j];
                grads.bias[k][j] += d;
                for (g, x) in gw_x[j * is..(j + 1) * is].iter_mut().zip(&step.x) {
                    *g += d * x;
                }
            }
        }
        // h_prev is zero at t = 0: no recurrent gradient and nothing further back.
        if t > 0 {
            dh.iter_mut().for_each(|v| *v = 0.0);
            for k in 0..4 {
                let w_h = &p.w_h[k];
                let gw_h = &mut grads.w_h[k];
                for j in 0..hs {
                    let d = dz[k][j];
                    let row = j * hs..(j + 1) * hs;
                    for ((g, hp), (w, dhl)) in gw_h[row.clone()]
                        .iter_mut()
                        .zip(&step.h_prev)
                        .zip(w_h[row].iter().zip(dh.iter_mut()))
                    {
                        *g += d * hp;
                        *dhl += w * d;
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nncore::params::ModelConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn config(hidden: usize, input: usize, lookback: usize) -> ModelConfig {
        ModelConfig {
            hidden_size: hidden,
            input_size: input,
            lookback,
            ..ModelConfig::default()
        }
    }

    #[test]
    fn zero_parameters_predict_zero() {
        let cfg = config(5, 2, 3);
        let state = ModelState::from_params(cfg.clone(), Params::zeros(&cfg));
        let (pred, cache) = lstm_forward(&state, &[0.3, -1.0, 2.0, 0.5, 0.1, 0.9]).unwrap();
        assert_eq!(pred, 0.0);
        for step in &cache.steps {
            assert!(step.c.iter().chain(&step.h).all(|&v| v == 0.0));
        }
    }

    #[test]
    fn scalar_hand_computation() {
        let cfg = config(1, 1, 1);
        let mut params = Params::zeros(&cfg);
        params.w_x = [vec![0.5], vec![-0.3], vec![0.8], vec![1.2]];
        params.bias = [vec![0.1], vec![0.2], vec![-0.1], vec![0.05]];
        params.dense_w = vec![1.5];
        params.dense_b = vec![0.25];
        let state = ModelState::from_params(cfg, params);
        let x = 0.7;

        let s = |z: f64| 1.0 / (1.0 + (-z).exp());
        let i = s(0.5 * x + 0.1);
        let g = (1.2 * x + 0.05f64).tanh();
        let o = s(0.8 * x - 0.1);
        // c_prev = 0, so the forget gate does not contribute.
        let c = i * g;
        let h = o * c.tanh();
        let expected = 1.5 * h + 0.25;

        let (pred, _) = lstm_forward(&state, &[x]).unwrap();
        assert!((pred - expected).abs() < 1e-15, "{pred} vs {expected}");
    }

    #[test]
    fn forward_is_deterministic() {
        let cfg = config(6, 1, 4);
        let state = ModelState::new(cfg, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let window = [0.1, 0.4, 0.35, 0.8];
        let a = lstm_forward(&state, &window).unwrap().0;
        let b = lstm_forward(&state, &window).unwrap().0;
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn window_shape_checked() {
        let cfg = config(2, 1, 3);
        let state = ModelState::new(cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(matches!(lstm_forward(&state, &[1.0, 2.0]), Err(NnError::Shape(_))));
    }

    #[test]
    fn zero_loss_gradient_gives_zero_gradients() {
        let cfg = config(4, 2, 3);
        let state = ModelState::new(cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let (_, cache) = lstm_forward(&state, &[0.2, 0.1, 0.9, 0.3, 0.5, 0.5]).unwrap();
        let grads = lstm_backward(&state, &cache, 0.0).unwrap();
        assert_eq!(grads.max_abs(), 0.0);
    }

    #[test]
    fn dense_bias_gradient_is_loss_gradient() {
        let cfg = config(3, 1, 2);
        let state = ModelState::new(cfg, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let (_, cache) = lstm_forward(&state, &[0.4, 0.6]).unwrap();
        let grads = lstm_backward(&state, &cache, -0.731).unwrap();
        assert_eq!(grads.dense_b[0], -0.731);
    }

    #[test]
    fn stale_cache_rejected() {
        let cfg = config(3, 1, 2);
        let mut state = ModelState::new(cfg.clone(), &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let (_, cache) = lstm_forward(&state, &[0.4, 0.6]).unwrap();
        state.step += 1;
        assert!(matches!(lstm_backward(&state, &cache, 1.0), Err(NnError::StaleCache)));

        let other = ModelState::new(config(4, 1, 2), &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let (_, cache) = lstm_forward(&other, &[0.4, 0.6]).unwrap();
        state.step = 0;
        assert!(matches!(lstm_backward(&state, &cache, 1.0), Err(NnError::StaleCache)));
    }
}
