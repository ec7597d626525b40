use rand::Rng;
use serde::{Deserialize, Serialize};

use super::NnError;

/// Gate order used for every per-gate tensor.
pub const GATES: [&str; 4] = ["input", "forget", "output", "candidate"];

pub const TENSOR_COUNT: usize = 14;

/// Names of the parameter tensors, in storage order.
pub const TENSOR_NAMES: [&str; TENSOR_COUNT] = [
    "lstm.input.w_x",
    "lstm.forget.w_x",
    "lstm.output.w_x",
    "lstm.candidate.w_x",
    "lstm.input.w_h",
    "lstm.forget.w_h",
    "lstm.output.w_h",
    "lstm.candidate.w_h",
    "lstm.input.bias",
    "lstm.forget.bias",
    "lstm.output.bias",
    "lstm.candidate.bias",
    "dense.weight",
    "dense.bias",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Features per timestep.
    pub input_size: usize,
    /// LSTM units.
    pub hidden_size: usize,
    /// Input window length in hours.
    pub lookback: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            input_size: 1,
            hidden_size: 50,
            lookback: 1,
            epochs: 20,
            batch_size: 32,
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 42,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), NnError> {
        let bad = |msg: &str| Err(NnError::InvalidConfig(msg.to_string()));
        if self.input_size == 0 || self.hidden_size == 0 || self.lookback == 0 {
            return bad("input_size, hidden_size and lookback must be at least 1");
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return bad("epochs and batch_size must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(self.beta1 > 0.0 && self.beta1 < 1.0 && self.beta2 > 0.0 && self.beta2 < 1.0) {
            return bad("beta1 and beta2 must lie in (0, 1)");
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return bad("epsilon must be positive");
        }
        Ok(())
    }

    /// `(rows, cols)` of each tensor, in [`TENSOR_NAMES`] order.
    pub fn tensor_shapes(&self) -> [(usize, usize); TENSOR_COUNT] {
        let h = self.hidden_size;
        let i = self.input_size;
        [
            (h, i),
            (h, i),
            (h, i),
            (h, i),
            (h, h),
            (h, h),
            (h, h),
            (h, h),
            (h, 1),
            (h, 1),
            (h, 1),
            (h, 1),
            (1, h),
            (1, 1),
        ]
    }
}

/// LSTM and dense parameters. Matrices are row-major with one row per
/// hidden unit. Also used for gradients and optimizer moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Per-gate input weights, `hidden x input`.
    pub w_x: [Vec<f64>; 4],
    /// Per-gate recurrent weights, `hidden x hidden`.
    pub w_h: [Vec<f64>; 4],
    pub bias: [Vec<f64>; 4],
    pub dense_w: Vec<f64>,
    /// Stored as a one-element vector so every tensor is a slice.
    pub dense_b: Vec<f64>,
}

impl Params {
    pub fn zeros(config: &ModelConfig) -> Self {
        let h = config.hidden_size;
        let i = config.input_size;
        Params {
            w_x: std::array::from_fn(|_| vec![0.0; h * i]),
            w_h: std::array::from_fn(|_| vec![0.0; h * h]),
            bias: std::array::from_fn(|_| vec![0.0; h]),
            dense_w: vec![0.0; h],
            dense_b: vec![0.0],
        }
    }

    /// Every entry uniform in `[-k, k]` with `k = 1 / sqrt(hidden_size)`.
    pub fn init_uniform<R: Rng>(config: &ModelConfig, rng: &mut R) -> Self {
        let k = 1.0 / (config.hidden_size as f64).sqrt();
        let mut params = Params::zeros(config);
        for tensor in params.tensors_mut() {
            for v in tensor.iter_mut() {
                *v = rng.random_range(-k..=k);
            }
        }
        params
    }

    pub fn tensors(&self) -> [&Vec<f64>; TENSOR_COUNT] {
        let [wx0, wx1, wx2, wx3] = &self.w_x;
        let [wh0, wh1, wh2, wh3] = &self.w_h;
        let [b0, b1, b2, b3] = &self.bias;
        [wx0, wx1, wx2, wx3, wh0, wh1, wh2, wh3, b0, b1, b2, b3, &self.dense_w, &self.dense_b]
    }

    pub fn tensors_mut(&mut self) -> [&mut Vec<f64>; TENSOR_COUNT] {
        let [wx0, wx1, wx2, wx3] = &mut self.w_x;
        let [wh0, wh1, wh2, wh3] = &mut self.w_h;
        let [b0, b1, b2, b3] = &mut self.bias;
        [
            wx0,
            wx1,
            wx2,
            wx3,
            wh0,
            wh1,
            wh2,
            wh3,
            b0,
            b1,
            b2,
            b3,
            &mut self.dense_w,
            &mut self.dense_b,
        ]
    }

    pub fn fill(&mut self, value: f64) {
        for tensor in self.tensors_mut() {
            tensor.iter_mut().for_each(|v| *v = value);
        }
    }

    pub fn check_shapes(&self, config: &ModelConfig) -> Result<(), NnError> {
        for ((name, tensor), (rows, cols)) in TENSOR_NAMES
            .iter()
            .zip(self.tensors())
            .zip(config.tensor_shapes())
        {
            if tensor.len() != rows * cols {
                return Err(NnError::Shape(format!(
                    "tensor {name} has {} entries, expected {rows}x{cols}",
                    tensor.len()
                )));
            }
        }
        Ok(())
    }

    /// First non-finite entry as `(tensor name, flat index)`.
    pub fn first_non_finite(&self) -> Option<(&'static str, usize)> {
        TENSOR_NAMES.iter().zip(self.tensors()).find_map(|(name, t)| {
            t.iter().position(|v| !v.is_finite()).map(|i| (*name, i))
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.tensors()
            .iter()
            .flat_map(|t| t.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Trainable model: parameters plus Adam moments and the step counter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelState {
    pub config: ModelConfig,
    pub params: Params,
    /// Adam first moments.
    pub moment1: Params,
    /// Adam second moments.
    pub moment2: Params,
    /// Number of Adam updates applied.
    pub step: u64,
}

impl ModelState {
    /// Freshly initialized state drawn from `rng`.
    pub fn new<R: Rng>(config: ModelConfig, rng: &mut R) -> Result<Self, NnError> {
        config.validate()?;
        let params = Params::init_uniform(&config, rng);
        Ok(Self::from_params(config, params))
    }

    pub fn from_params(config: ModelConfig, params: Params) -> Self {
        let zeros = Params::zeros(&config);
        ModelState {
            moment1: zeros.clone(),
            moment2: zeros,
            params,
            config,
            step: 0,
        }
    }

    /// Errors on any shape inconsistency or non-finite entry.
    pub fn validate(&self) -> Result<(), NnError> {
        self.config.validate()?;
        for p in [&self.params, &self.moment1, &self.moment2] {
            p.check_shapes(&self.config)?;
            if let Some((tensor, index)) = p.first_non_finite() {
                return Err(NnError::NonFiniteState { tensor, index });
            }
        }
        Ok(())
    }
}
