use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::adam_step;
use super::lstm::{lstm_backward_into, lstm_forward};
use super::params::{ModelConfig, ModelState, Params};
use super::NnError;

/// Input windows paired with next-step targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequences {
    /// Each window is `lookback x input_size`, row-major by timestep.
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    pub lookback: usize,
    pub input_size: usize,
    /// Column of each row that holds the target feature.
    pub target_column: usize,
}

impl Sequences {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Target-feature value of the last timestep of window `i`.
    pub fn last_input(&self, i: usize) -> f64 {
        let w = &self.inputs[i];
        w[w.len() - self.input_size + self.target_column]
    }
}

/// Windows over a univariate series: pair `i` maps
/// `series[i..i + lookback]` to `series[i + lookback]`.
pub fn make_sequences(series: &[f64], lookback: usize) -> Result<Sequences, NnError> {
    let rows: Vec<Vec<f64>> = series.iter().map(|&v| vec![v]).collect();
    make_sequences_multi(&rows, 0, lookback)
}

/// Multivariate windows; the target is column `target_column` of the row
/// following each window.
pub fn make_sequences_multi(
    rows: &[Vec<f64>],
    target_column: usize,
    lookback: usize,
) -> Result<Sequences, NnError> {
    if lookback == 0 {
        return Err(NnError::InvalidConfig("lookback must be at least 1".into()));
    }
    if rows.len() <= lookback {
        return Err(NnError::SeriesTooShort {
            len: rows.len(),
            lookback,
        });
    }
    let input_size = rows[0].len();
    if input_size == 0 || target_column >= input_size || rows.iter().any(|r| r.len() != input_size) {
        return Err(NnError::Shape(format!(
            "rows must share a width covering target column {target_column}"
        )));
    }
    let count = rows.len() - lookback;
    let inputs = (0..count).map(|i| rows[i..i + lookback].concat()).collect();
    let targets = (0..count).map(|i| rows[i + lookback][target_column]).collect();
    Ok(Sequences {
        inputs,
        targets,
        lookback,
        input_size,
        target_column,
    })
}

/// Per-epoch losses (mean squared error on scaled values) and timings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub train_loss: Vec<f64>,
    pub test_loss: Vec<f64>,
    pub epoch_seconds: Vec<f64>,
}

impl TrainReport {
    pub fn final_train_loss(&self) -> Option<f64> {
        self.train_loss.last().copied()
    }

    pub fn final_test_loss(&self) -> Option<f64> {
        self.test_loss.last().copied()
    }
}

fn check_sequences(state: &ModelState, seqs: &Sequences) -> Result<(), NnError> {
    let cfg = &state.config;
    if seqs.lookback != cfg.lookback || seqs.input_size != cfg.input_size {
        return Err(NnError::Shape(format!(
            "sequences are lookback {} x input {}, model expects {} x {}",
            seqs.lookback, seqs.input_size, cfg.lookback, cfg.input_size
        )));
    }
    Ok(())
}

/// Mean squared error over all sequences in order.
pub fn evaluate_mse(state: &ModelState, seqs: &Sequences) -> Result<f64, NnError> {
    check_sequences(state, seqs)?;
    if seqs.is_empty() {
        return Err(NnError::SeriesTooShort {
            len: 0,
            lookback: state.config.lookback,
        });
    }
    let mut total = 0.0;
    for (input, target) in seqs.inputs.iter().zip(&seqs.targets) {
        let (pred, _) = lstm_forward(state, input)?;
        let err = pred - target;
        total += err * err;
    }
    Ok(total / seqs.len() as f64)
}

/// Trains a fresh model with seeded minibatch Adam and records full-set
/// train and test MSE after every epoch.
pub fn train(
    train_seqs: &Sequences,
    test_seqs: &Sequences,
    config: &ModelConfig,
) -> Result<(ModelState, TrainReport), NnError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = ModelState::new(config.clone(), &mut rng)?;
    check_sequences(&state, train_seqs)?;
    check_sequences(&state, test_seqs)?;
    if train_seqs.is_empty() || test_seqs.is_empty() {
        return Err(NnError::SeriesTooShort {
            len: 0,
            lookback: config.lookback,
        });
    }

    let mut order: Vec<usize> = (0..train_seqs.len()).collect();
    let mut grads = Params::zeros(config);
    let mut report = TrainReport::default();
    for epoch in 0..config.epochs {
        let started = Instant::now();
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            grads.fill(0.0);
            let scale = 2.0 / batch.len() as f64;
            for &i in batch {
                let (pred, cache) = lstm_forward(&state, &train_seqs.inputs[i])?;
                let err = pred - train_seqs.targets[i];
                lstm_backward_into(&state, &cache, scale * err, &mut grads)?;
            }
            adam_step(&mut state, &grads, config)?;
        }
        if let Some((tensor, index)) = state.params.first_non_finite() {
            return Err(NnError::NonFiniteState { tensor, index });
        }
        let train_loss = evaluate_mse(&state, train_seqs)?;
        let test_loss = evaluate_mse(&state, test_seqs)?;
        if !train_loss.is_finite() || !test_loss.is_finite() {
            return Err(NnError::NonFiniteLoss { epoch });
        }
        report.train_loss.push(train_loss);
        report.test_loss.push(test_loss);
        report.epoch_seconds.push(started.elapsed().as_secs_f64());
    }
    Ok((state, report))
}

/// One prediction with its actual value and the last observed input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionPair {
    pub input_last: f64,
    pub predicted: f64,
    pub actual: f64,
}

pub fn predict_sequences(state: &ModelState, seqs: &Sequences) -> Result<Vec<PredictionPair>, NnError> {
    state.validate()?;
    check_sequences(state, seqs)?;
    seqs.inputs
        .iter()
        .zip(&seqs.targets)
        .enumerate()
        .map(|(i, (input, &actual))| {
            let (predicted, _) = lstm_forward(state, input)?;
            Ok(PredictionPair {
                input_last: seqs.last_input(i),
                predicted,
                actual,
            })
        })
        .collect()
}

/// Predictions for every target of a univariate scaled series; the count
/// is `series.len() - lookback`.
pub fn predict_series(state: &ModelState, series: &[f64]) -> Result<Vec<PredictionPair>, NnError> {
    let seqs = make_sequences(series, state.config.lookback)?;
    predict_sequences(state, &seqs)
}

pub fn mse(pairs: &[PredictionPair]) -> f64 {
    pairs.iter().map(|p| (p.predicted - p.actual).powi(2)).sum::<f64>() / pairs.len() as f64
}
