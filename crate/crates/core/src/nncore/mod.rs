//! Sequential LSTM regressor trained from scratch with Adam on mean
//! squared error.

mod adam;
mod lstm;
mod params;
mod train;

use thiserror::Error;

pub use adam::adam_step;
pub use lstm::{lstm_backward, lstm_backward_into, lstm_forward, ForwardCache, StepCache};
pub use params::{ModelConfig, ModelState, Params, GATES, TENSOR_COUNT, TENSOR_NAMES};
pub use train::{
    evaluate_mse, make_sequences, make_sequences_multi, mse, predict_sequences, predict_series,
    train, PredictionPair, Sequences, TrainReport,
};

#[derive(Debug, Error)]
pub enum NnError {
    #[error("invalid model config: {0}")]
    InvalidConfig(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("series of length {len} is too short for lookback {lookback}")]
    SeriesTooShort { len: usize, lookback: usize },
    #[error("forward cache does not match the current model state")]
    StaleCache,
    #[error("non-finite gradient {value} in {tensor}[{index}] at step {step}")]
    NonFiniteGradient {
        tensor: &'static str,
        index: usize,
        value: f64,
        step: u64,
    },
    #[error("non-finite entry in {tensor}[{index}]")]
    NonFiniteState { tensor: &'static str, index: usize },
    #[error("loss became non-finite in epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
}
