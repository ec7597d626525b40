//! Explanations: statistical annotations of the data and the model, and
//! templated answers to consumer questions about a decision.

pub mod stats;

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decision::DecisionRecord;
use crate::ingest::Feature;
use crate::nncore::{PredictionPair, TrainReport};
use crate::preprocess::HourlyRecord;
use stats::Histogram;

pub const HISTOGRAM_BINS: usize = 20;
/// Values further than this many standard deviations from the mean are flagged.
pub const OUTLIER_SIGMAS: f64 = 3.0;

#[derive(Debug, Error, PartialEq)]
pub enum ExplainError {
    #[error("cannot annotate an empty series")]
    EmptySeries,
    #[error("cannot annotate a model without prediction pairs")]
    EmptyPairs,
    #[error("no decision record for hour {0}")]
    NoDecision(NaiveDateTime),
    #[error("no hourly record for hour {0}")]
    NoHourlyRecord(NaiveDateTime),
    #[error("unknown question kind {0:?} (expected why_controlled, top_consumer or consumption_breakdown)")]
    UnknownQuestion(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSummary {
    pub feature: Feature,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub histogram: Histogram,
    /// Indices of records beyond [`OUTLIER_SIGMAS`] standard deviations.
    pub outliers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub features: Vec<Feature>,
    /// Row-major, `features.len()` squared.
    pub values: Vec<Vec<f64>>,
    /// Constant features; their off-diagonal entries are 0.
    pub degenerate: Vec<Feature>,
}

impl CorrelationMatrix {
    pub fn get(&self, a: Feature, b: Feature) -> Option<f64> {
        let i = self.features.iter().position(|&f| f == a)?;
        let j = self.features.iter().position(|&f| f == b)?;
        Some(self.values[i][j])
    }
}

/// Distribution and correlation summary of an hourly series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataAnnotation {
    pub record_count: usize,
    pub features: Vec<FeatureSummary>,
    pub correlation: CorrelationMatrix,
}

impl DataAnnotation {
    pub fn summary(&self, feature: Feature) -> Option<&FeatureSummary> {
        self.features.iter().find(|s| s.feature == feature)
    }
}

pub fn annotate_data(series: &[HourlyRecord]) -> Result<DataAnnotation, ExplainError> {
    if series.is_empty() {
        return Err(ExplainError::EmptySeries);
    }
    let columns: Vec<Vec<f64>> = Feature::ALL
        .iter()
        .map(|&f| series.iter().map(|r| r.get(f)).collect())
        .collect();

    let features = Feature::ALL
        .iter()
        .zip(&columns)
        .map(|(&feature, col)| {
            let sorted = stats::sorted(col);
            let mean = stats::mean(col);
            let std = stats::std_dev(col);
            let outliers = if std > 0.0 {
                col.iter()
                    .enumerate()
                    .filter(|(_, v)| (*v - mean).abs() > OUTLIER_SIGMAS * std)
                    .map(|(i, _)| i)
                    .collect()
            } else {
                Vec::new()
            };
            FeatureSummary {
                feature,
                min: sorted[0],
                max: sorted[sorted.len() - 1],
                mean,
                std,
                q1: stats::quantile_sorted(&sorted, 0.25),
                median: stats::quantile_sorted(&sorted, 0.5),
                q3: stats::quantile_sorted(&sorted, 0.75),
                histogram: stats::histogram(col, HISTOGRAM_BINS),
                outliers,
            }
        })
        .collect();

    let n = Feature::ALL.len();
    let mut values = vec![vec![0.0; n]; n];
    let mut degenerate = Vec::new();
    for i in 0..n {
        values[i][i] = 1.0;
        if columns[i].iter().all(|&v| v == columns[i][0]) {
            degenerate.push(Feature::ALL[i]);
        }
        for j in 0..i {
            let r = stats::pearson(&columns[i], &columns[j]).unwrap_or(0.0);
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(DataAnnotation {
        record_count: series.len(),
        features,
        correlation: CorrelationMatrix {
            features: Feature::ALL.to_vec(),
            values,
            degenerate,
        },
    })
}

/// Loss curves plus residual statistics of `predicted - actual`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelAnnotation {
    pub train_loss: Vec<f64>,
    pub test_loss: Vec<f64>,
    pub pair_count: usize,
    pub residual_mean: f64,
    /// Population standard deviation, so `std^2 + mean^2` is the MSE.
    pub residual_std: f64,
    pub max_abs_error: f64,
    /// 5% residual quantile.
    pub band_low: f64,
    /// 95% residual quantile.
    pub band_high: f64,
    /// Correlation between |residual| and |last input|; 0 when undefined.
    pub bias_indicator: f64,
    pub bias_degenerate: bool,
}

impl ModelAnnotation {
    pub fn final_test_loss(&self) -> Option<f64> {
        self.test_loss.last().copied()
    }

    pub fn residual_mse(&self) -> f64 {
        self.residual_std * self.residual_std + self.residual_mean * self.residual_mean
    }
}

pub fn annotate_model(report: &TrainReport, pairs: &[PredictionPair]) -> Result<ModelAnnotation, ExplainError> {
    if pairs.is_empty() {
        return Err(ExplainError::EmptyPairs);
    }
    let residuals: Vec<f64> = pairs.iter().map(|p| p.predicted - p.actual).collect();
    let sorted = stats::sorted(&residuals);
    let magnitude: Vec<f64> = residuals.iter().map(|r| r.abs()).collect();
    let inputs: Vec<f64> = pairs.iter().map(|p| p.input_last.abs()).collect();
    let bias = stats::pearson(&magnitude, &inputs);
    Ok(ModelAnnotation {
        train_loss: report.train_loss.clone(),
        test_loss: report.test_loss.clone(),
        pair_count: pairs.len(),
        residual_mean: stats::mean(&residuals),
        residual_std: stats::std_dev(&residuals),
        max_abs_error: magnitude.iter().copied().fold(0.0, f64::max),
        band_low: stats::quantile_sorted(&sorted, 0.05),
        band_high: stats::quantile_sorted(&sorted, 0.95),
        bias_indicator: bias.unwrap_or(0.0),
        bias_degenerate: bias.is_none(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionKind {
    WhyControlled,
    TopConsumer,
    ConsumptionBreakdown,
}

impl QuestionKind {
    pub const ALL: [QuestionKind; 3] = [
        QuestionKind::WhyControlled,
        QuestionKind::TopConsumer,
        QuestionKind::ConsumptionBreakdown,
    ];

    pub fn name(self) -> &'static str {
        match self {
            QuestionKind::WhyControlled => "why_controlled",
            QuestionKind::TopConsumer => "top_consumer",
            QuestionKind::ConsumptionBreakdown => "consumption_breakdown",
        }
    }

    pub fn question(self) -> &'static str {
        match self {
            QuestionKind::WhyControlled => "Why is power consumption controlled?",
            QuestionKind::TopConsumer => "What appliance consumes the most energy?",
            QuestionKind::ConsumptionBreakdown => "How was energy consumption distributed during this decision?",
        }
    }
}

impl fmt::Display for QuestionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QuestionKind {
    type Err = ExplainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        QuestionKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ExplainError::UnknownQuestion(s.to_string()))
    }
}

/// Appliance groups behind the three sub-meters.
pub const APPLIANCES: [&str; 3] = ["kitchen", "laundry room", "water heater and air conditioner"];

/// A number bound into an answer, with the text it renders as.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub name: String,
    pub value: f64,
    pub unit: String,
    pub rendered: String,
}

impl Evidence {
    fn new(name: impl Into<String>, value: f64, unit: &str) -> Self {
        Evidence {
            name: name.into(),
            value,
            unit: unit.to_string(),
            rendered: format_number(value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationAnswer {
    pub kind: QuestionKind,
    pub hour_start: NaiveDateTime,
    pub evidence: Vec<Evidence>,
    pub sentence: String,
}

/// Rounds to two decimals and drops trailing zeros: `100.0` renders as
/// `100`, `54.125` as `54.13`.
pub fn format_number(value: f64) -> String {
    let s = format!("{:.2}", value);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// Index of the largest sub-meter; ties go to the lowest index.
pub fn top_consumer(sub_meters: [f64; 3]) -> usize {
    let mut best = 0;
    for k in 1..3 {
        if sub_meters[k] > sub_meters[best] {
            best = k;
        }
    }
    best
}

/// What an answer may draw on.
#[derive(Debug, Clone, Copy)]
pub struct ExplainContext<'a> {
    pub decisions: &'a [DecisionRecord],
    pub hourly: &'a [HourlyRecord],
}

pub fn answer(
    kind: QuestionKind,
    hour_start: NaiveDateTime,
    ctx: &ExplainContext<'_>,
) -> Result<ExplanationAnswer, ExplainError> {
    let decision = ctx
        .decisions
        .iter()
        .find(|d| d.hour_start == hour_start)
        .ok_or(ExplainError::NoDecision(hour_start))?;
    let hourly = || {
        ctx.hourly
            .iter()
            .find(|h| h.hour_start == hour_start)
            .ok_or(ExplainError::NoHourlyRecord(hour_start))
    };

    let (evidence, sentence) = match kind {
        QuestionKind::WhyControlled => {
            let p = Evidence::new("predicted", decision.predicted, "kW");
            let b = Evidence::new("historical_average", decision.baseline, "kW");
            let sentence = if decision.warning {
                format!(
                    "Power consumption is controlled because the predicted power consumption is {} kW, your historical average is {} kW.",
                    p.rendered, b.rendered
                )
            } else {
                format!(
                    "Power consumption is not controlled because the predicted power consumption is {} kW, which does not exceed your historical average of {} kW.",
                    p.rendered, b.rendered
                )
            };
            (vec![p, b], sentence)
        }
        QuestionKind::TopConsumer => {
            let meters = hourly()?.sub_meters();
            let k = top_consumer(meters);
            let e = Evidence::new(format!("sub_metering_{}", k + 1), meters[k], "Wh");
            let sentence = format!(
                "The {} consumed the most energy during this hour: {} Wh.",
                APPLIANCES[k], e.rendered
            );
            (vec![e], sentence)
        }
        QuestionKind::ConsumptionBreakdown => {
            let meters = hourly()?.sub_meters();
            let ev: Vec<Evidence> = meters
                .iter()
                .enumerate()
                .map(|(k, &v)| Evidence::new(format!("sub_metering_{}", k + 1), v, "Wh"))
                .collect();
            let sentence = format!(
                "During this decision the {} consumed {} Wh, the {} consumed {} Wh, and the {} consumed {} Wh.",
                APPLIANCES[0], ev[0].rendered, APPLIANCES[1], ev[1].rendered, APPLIANCES[2], ev[2].rendered
            );
            (ev, sentence)
        }
    };
    Ok(ExplanationAnswer {
        kind,
        hour_start,
        evidence,
        sentence,
    })
}
