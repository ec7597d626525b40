use super::params::{ModelConfig, ModelState, Params, TENSOR_NAMES};
use super::NnError;

/// One bias-corrected Adam update of every parameter.
///
/// Gradients are checked for finiteness before anything is modified, so a
/// rejected step leaves the state untouched.
pub fn adam_step(state: &mut ModelState, grads: &Params, config: &ModelConfig) -> Result<(), NnError> {
    grads.check_shapes(&state.config)?;
    if let Some((tensor, index)) = grads.first_non_finite() {
        let value = grads.tensors()[TENSOR_NAMES.iter().position(|n| *n == tensor).unwrap()][index];
        return Err(NnError::NonFiniteGradient {
            tensor,
            index,
            value,
            step: state.step,
        });
    }

    state.step += 1;
    let t = state.step as i32;
    let (b1, b2) = (config.beta1, config.beta2);
    let correction1 = 1.0 - b1.powi(t);
    let correction2 = 1.0 - b2.powi(t);
    let lr = config.learning_rate;
    let eps = config.epsilon;

    let params = state.params.tensors_mut();
    let m = state.moment1.tensors_mut();
    let v = state.moment2.tensors_mut();
    for (((p, m), v), g) in params.into_iter().zip(m).zip(v).zip(grads.tensors()) {
        for k in 0..p.len() {
            m[k] = b1 * m[k] + (1.0 - b1) * g[k];
            v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
            let m_hat = m[k] / correction1;
            let v_hat = v[k] / correction2;
            p[k] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_state() -> (ModelState, ModelConfig) {
        let cfg = ModelConfig {
            hidden_size: 1,
            ..ModelConfig::default()
        };
        let mut params = Params::zeros(&cfg);
        params.dense_b[0] = 1.0;
        (ModelState::from_params(cfg.clone(), params), cfg)
    }

    #[test]
    fn zero_gradients_leave_parameters() {
        let (mut state, cfg) = scalar_state();
        state.params.fill(0.37);
        let before = state.params.clone();
        adam_step(&mut state, &Params::zeros(&cfg), &cfg).unwrap();
        assert_eq!(state.params, before);
        assert_eq!(state.step, 1);
    }

    #[test]
    fn first_step_by_hand() {
        let (mut state, cfg) = scalar_state();
        let mut g = Params::zeros(&cfg);
        g.dense_b[0] = 2.0;
        adam_step(&mut state, &g, &cfg).unwrap();
        // m = 0.1 * 2 = 0.2, v = 0.001 * 4 = 0.004; corrected: m_hat = 2, v_hat = 4.
        let expected = 1.0 - 0.001 * 2.0 / (2.0 + 1e-8);
        assert!((state.params.dense_b[0] - expected).abs() < 1e-15);
        assert!((state.params.dense_b[0] - 0.999).abs() < 1e-8);
        assert!((state.moment1.dense_b[0] - 0.2).abs() < 1e-15);
        assert!((state.moment2.dense_b[0] - 0.004).abs() < 1e-15);
    }

    #[test]
    fn constant_positive_gradient_decreases_monotonically() {
        let (mut state, cfg) = scalar_state();
        let mut g = Params::zeros(&cfg);
        g.dense_b[0] = 0.5;
        let mut last = state.params.dense_b[0];
        for _ in 0..50 {
            adam_step(&mut state, &g, &cfg).unwrap();
            assert!(state.params.dense_b[0] < last);
            last = state.params.dense_b[0];
        }
    }

    #[test]
    fn non_finite_gradient_aborts_without_mutation() {
        let (mut state, cfg) = scalar_state();
        let before = state.clone();
        let mut g = Params::zeros(&cfg);
        g.bias[1][0] = f64::NAN;
        let err = adam_step(&mut state, &g, &cfg).unwrap_err();
        assert!(matches!(
            err,
            NnError::NonFiniteGradient { tensor: "lstm.forget.bias", index: 0, .. }
        ));
        assert_eq!(state, before);
    }

    #[test]
    fn shape_mismatch() {
        let (mut state, _) = scalar_state();
        let wide = ModelConfig {
            hidden_size: 2,
            ..ModelConfig::default()
        };
        assert!(matches!(
            adam_step(&mut state, &Params::zeros(&wide), &wide),
            Err(NnError::Shape(_))
        ));
    }
}
