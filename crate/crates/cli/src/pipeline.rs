//! Stage orchestration: ingest through report.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use chrono::NaiveDateTime;
use iob_core::decision::{build_baseline, cost_saving, decide_with, run_window};
use iob_core::explain::{annotate_data, annotate_model, answer, ExplainContext, ExplanationAnswer, QuestionKind};
use iob_core::ingest::{load_dataset, Feature, IngestSummary};
use iob_core::nncore::{
    lstm_forward, make_sequences_multi, predict_sequences, train, ModelConfig, PredictionPair, Sequences,
    TrainReport,
};
use iob_core::preprocess::{
    fit_minmax, impute_missing, resample_hourly, HourlyRecord, ImputationReport, NormalizationParams, SplitSpec,
};
use iob_core::store::{Checkpoint, StoreLayout};
use iob_core::{BaselineTable, DecisionRecord, Money, SavingsBasis, SavingsReport};

use crate::report::Report;

pub const TARGET: Feature = Feature::GlobalActivePower;

/// Everything that shapes the trained model.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOptions {
    pub model: ModelConfig,
    pub train_fraction: f64,
}

/// Which test hours the decision report covers and how savings are priced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowOptions {
    pub window: usize,
    pub offset: usize,
    pub tariff: f64,
    pub basis: SavingsBasis,
}

impl Default for WindowOptions {
    fn default() -> Self {
        WindowOptions {
            window: 200,
            offset: 0,
            tariff: 0.182,
            basis: SavingsBasis::Actual,
        }
    }
}

fn stage<T, E>(name: &str, result: std::result::Result<T, E>) -> Result<T>
where
    E: std::error::Error + Send + Sync + 'static,
{
    result.with_context(|| format!("{name} stage failed"))
}

/// Wall-clock seconds per stage, in execution order.
#[derive(Debug, Clone, Default)]
pub struct Timings(pub Vec<(&'static str, f64)>);

impl Timings {
    fn time<T>(&mut self, name: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let started = Instant::now();
        let out = f()?;
        let secs = started.elapsed().as_secs_f64();
        eprintln!("[{name}] {secs:.2}s");
        self.0.push((name, secs));
        Ok(out)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub ingest: IngestSummary,
    pub imputation: ImputationReport,
    pub hourly_count: usize,
    pub split: SplitSpec,
    pub train_report: TrainReport,
    pub window: WindowOutcome,
    pub reports: Vec<PathBuf>,
    pub timings: Timings,
}

/// Persisted state every report is recomputed from.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub hourly: Vec<HourlyRecord>,
    pub checkpoint: Checkpoint,
    pub baseline: BaselineTable,
}

impl Artifacts {
    pub fn load(layout: &StoreLayout) -> Result<Self> {
        let hourly = layout.load_hourly().context("loading hourly series")?;
        let checkpoint = layout.load_checkpoint().context("loading checkpoint")?;
        let baseline = layout.load_baseline().context("loading baseline")?;
        if checkpoint.split.boundary_index >= hourly.len() {
            bail!(
                "checkpoint split boundary {} lies outside the {}-hour series",
                checkpoint.split.boundary_index,
                hourly.len()
            );
        }
        Ok(Artifacts {
            hourly,
            checkpoint,
            baseline,
        })
    }

    pub fn test_slice(&self) -> &[HourlyRecord] {
        &self.hourly[self.checkpoint.split.boundary_index..]
    }

    fn target_column(&self) -> Result<usize> {
        target_column(&self.checkpoint.input_features, self.checkpoint.target)
    }

    /// Scaled windows over `series` built the same way as at training time.
    pub fn sequences(&self, series: &[HourlyRecord]) -> Result<Sequences> {
        let c = &self.checkpoint;
        sequences(&c.normalization, &c.input_features, c.target, c.state.config.lookback, series)
    }

    /// Predictions in consumption units for every predictable test hour,
    /// aligned with the hour they forecast.
    pub fn test_predictions(&self) -> Result<Vec<HourPrediction>> {
        let test = self.test_slice();
        let seqs = self.sequences(test)?;
        let pairs = predict_sequences(&self.checkpoint.state, &seqs)?;
        let lookback = self.checkpoint.state.config.lookback;
        pairs
            .into_iter()
            .enumerate()
            .map(|(k, pair)| self.hour_prediction(&test[k + lookback], pair))
            .collect()
    }

    fn hour_prediction(&self, hour: &HourlyRecord, pair: PredictionPair) -> Result<HourPrediction> {
        let target = self.checkpoint.target;
        let raw = self.checkpoint.normalization.inverse_scale(target, pair.predicted)?;
        Ok(HourPrediction {
            hour_start: hour.hour_start,
            pair,
            // The regressor is unbounded; negative consumption is not physical.
            predicted: raw.max(0.0),
            actual: hour.get(target),
        })
    }

    /// Prediction for one hour of the stored series from the hours before it.
    pub fn predict_hour(&self, hour_start: NaiveDateTime) -> Result<HourPrediction> {
        let lookback = self.checkpoint.state.config.lookback;
        let i = self
            .hourly
            .iter()
            .position(|h| h.hour_start == hour_start)
            .ok_or_else(|| anyhow!("no hourly record starts at {hour_start}"))?;
        if i < lookback {
            bail!("hour {hour_start} has fewer than {lookback} preceding hours to predict from");
        }
        let rows = self
            .checkpoint
            .normalization
            .scale_rows(&self.hourly[i - lookback..=i], &self.checkpoint.input_features)?;
        let input = rows[..lookback].concat();
        let (predicted, _) = lstm_forward(&self.checkpoint.state, &input)?;
        let col = self.target_column()?;
        let pair = PredictionPair {
            input_last: input[input.len() - rows[0].len() + col],
            predicted,
            actual: rows[lookback][col],
        };
        self.hour_prediction(&self.hourly[i], pair)
    }
}

fn target_column(features: &[Feature], target: Feature) -> Result<usize> {
    features
        .iter()
        .position(|&f| f == target)
        .ok_or_else(|| anyhow!("target {target} is not among the model inputs"))
}

fn sequences(
    normalization: &NormalizationParams,
    features: &[Feature],
    target: Feature,
    lookback: usize,
    series: &[HourlyRecord],
) -> Result<Sequences> {
    let rows = normalization.scale_rows(series, features)?;
    let col = target_column(features, target)?;
    Ok(make_sequences_multi(&rows, col, lookback)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HourPrediction {
    pub hour_start: NaiveDateTime,
    /// Scaled values as seen by the model.
    pub pair: PredictionPair,
    /// De-normalized prediction, floored at zero.
    pub predicted: f64,
    pub actual: f64,
}

#[derive(Debug, Clone)]
pub struct WindowOutcome {
    pub predictions: Vec<HourPrediction>,
    pub decisions: Vec<DecisionRecord>,
    pub savings: SavingsReport,
    pub cost: Money,
    pub answers: Vec<ExplanationAnswer>,
}

/// Decisions, savings and explanations for a window of test hours.
pub fn evaluate_window(artifacts: &Artifacts, opts: &WindowOptions) -> Result<WindowOutcome> {
    let all = artifacts.test_predictions()?;
    let end = opts.offset.checked_add(opts.window).filter(|&e| e <= all.len()).ok_or_else(|| {
        anyhow!(
            "window of {} hours at offset {} exceeds the {} predictable test hours",
            opts.window,
            opts.offset,
            all.len()
        )
    })?;
    let predictions = all[opts.offset..end].to_vec();
    let hours: Vec<_> = predictions.iter().map(|p| p.hour_start).collect();
    let predicted: Vec<_> = predictions.iter().map(|p| p.predicted).collect();
    let actual: Vec<_> = predictions.iter().map(|p| p.actual).collect();
    let (decisions, savings) = run_window(&hours, &predicted, &actual, &artifacts.baseline, opts.basis)?;
    let cost = cost_saving(savings.total_saved, opts.tariff)?;

    let ctx = ExplainContext {
        decisions: &decisions,
        hourly: artifacts.test_slice(),
    };
    let mut answers = Vec::new();
    for d in decisions.iter().filter(|d| d.warning) {
        for kind in QuestionKind::ALL {
            answers.push(answer(kind, d.hour_start, &ctx)?);
        }
    }
    Ok(WindowOutcome {
        predictions,
        decisions,
        savings,
        cost,
        answers,
    })
}

/// Answers one question about one stored hour.
pub fn explain_hour(
    artifacts: &Artifacts,
    hour_start: NaiveDateTime,
    kind: QuestionKind,
    basis: SavingsBasis,
) -> Result<(DecisionRecord, ExplanationAnswer)> {
    let p = artifacts.predict_hour(hour_start)?;
    let decision = decide_with(p.predicted, p.actual, hour_start, &artifacts.baseline, basis)?;
    let ctx = ExplainContext {
        decisions: std::slice::from_ref(&decision),
        hourly: &artifacts.hourly,
    };
    let a = answer(kind, hour_start, &ctx)?;
    Ok((decision, a))
}

/// Writes the window reports and returns their paths.
pub fn write_window_reports(layout: &StoreLayout, outcome: &WindowOutcome, opts: &WindowOptions) -> Result<Vec<PathBuf>> {
    let reports = [
        crate::reports::predictions(outcome),
        crate::reports::decisions(outcome, opts),
        crate::reports::explanations(outcome),
    ];
    write_reports(layout, &reports)
}

fn write_reports(layout: &StoreLayout, reports: &[Report]) -> Result<Vec<PathBuf>> {
    reports
        .iter()
        .map(|r| {
            layout
                .write_report(&r.file_name(), &r.render())
                .with_context(|| format!("writing report {}", r.name))
        })
        .collect()
}

/// Runs every stage on the dataset at `data`, persisting artifacts and
/// reports under `layout`.
pub fn run_pipeline(
    data: &Path,
    layout: &StoreLayout,
    train_opts: &TrainOptions,
    window: &WindowOptions,
) -> Result<PipelineOutcome> {
    let mut timings = Timings::default();
    let (minutes, ingest) = timings.time("ingest", || {
        stage("ingest", load_dataset(data)).with_context(|| format!("reading {}", data.display()))
    })?;
    let (minutes, imputation) = timings.time("impute", || stage("impute", impute_missing(minutes)))?;
    let hourly = timings.time("resample", || stage("resample", resample_hourly(&minutes)))?;
    drop(minutes);

    let split = stage("split", SplitSpec::new(hourly.len(), train_opts.train_fraction))?;
    let (train_part, test_part) = hourly.split_at(split.boundary_index);
    let normalization = stage("normalize", fit_minmax(train_part, &[TARGET]))?;

    let features = vec![TARGET];
    let mut model = train_opts.model.clone();
    model.input_size = features.len();
    let (state, train_report) = timings.time("train", || {
        let seqs = |part| {
            sequences(&normalization, &features, TARGET, model.lookback, part).context("train stage failed")
        };
        let (train_seqs, test_seqs) = (seqs(train_part)?, seqs(test_part)?);
        stage("train", train(&train_seqs, &test_seqs, &model))
    })?;
    let checkpoint = Checkpoint {
        state,
        normalization,
        split,
        input_features: features,
        target: TARGET,
    };
    let baseline = stage("baseline", build_baseline(train_part))?;

    timings.time("persist", || {
        layout.save_hourly(&hourly).context("persist stage failed")?;
        layout.save_checkpoint(&checkpoint).context("persist stage failed")?;
        layout.save_baseline(&baseline).context("persist stage failed")?;
        Ok(())
    })?;

    let (window_outcome, reports) = timings.time("report", || {
        let artifacts = Artifacts::load(layout).context("report stage failed")?;
        let test_pairs: Vec<PredictionPair> = artifacts
            .test_predictions()
            .context("predict stage failed")?
            .into_iter()
            .map(|p| p.pair)
            .collect();
        let data_annotation = stage("explain", annotate_data(&artifacts.hourly))?;
        let model_annotation = stage("explain", annotate_model(&train_report, &test_pairs))?;
        let outcome = evaluate_window(&artifacts, window).context("decide stage failed")?;

        let mut paths = write_reports(
            layout,
            &[
                crate::reports::ingest(&ingest, &imputation, artifacts.hourly.len()),
                crate::reports::loss_curve(&train_report),
                crate::reports::data_summary(&data_annotation),
                crate::reports::correlation(&data_annotation),
                crate::reports::model_annotation(&model_annotation),
            ],
        )
        .context("report stage failed")?;
        paths.extend(write_window_reports(layout, &outcome, window).context("report stage failed")?);
        Ok((outcome, paths))
    })?;

    Ok(PipelineOutcome {
        ingest,
        imputation,
        hourly_count: hourly.len(),
        split,
        train_report,
        window: window_outcome,
        reports,
        timings,
    })
}
