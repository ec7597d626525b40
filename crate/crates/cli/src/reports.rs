//! Builders for each emitted report.
//!
//! Numbers are written in shortest round-trip form so every value reads
//! back exactly.

use iob_core::explain::{DataAnnotation, ModelAnnotation, HISTOGRAM_BINS, OUTLIER_SIGMAS};
use iob_core::ingest::{Feature, IngestSummary};
use iob_core::nncore::TrainReport;
use iob_core::preprocess::ImputationReport;
use chrono::NaiveDateTime;

use crate::pipeline::{WindowOptions, WindowOutcome};
use crate::report::Report;

pub const TIME_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

pub fn time(ts: NaiveDateTime) -> String {
    ts.format(TIME_FORMAT).to_string()
}

fn opt_time(ts: Option<NaiveDateTime>) -> String {
    ts.map(time).unwrap_or_default()
}

/// Per-column missing and imputed cell counts.
pub fn ingest(summary: &IngestSummary, imputation: &ImputationReport, hourly_count: usize) -> Report {
    let mut r = Report::new("ingest", &["feature", "missing", "imputed"]);
    for f in Feature::ALL {
        r.row(vec![
            f.name().into(),
            summary.missing_for(f).to_string(),
            imputation.imputed[f.index()].to_string(),
        ]);
    }
    r.aggregate("rows", summary.row_count);
    r.aggregate("fully_missing_rows", summary.fully_missing_rows);
    r.aggregate("timestamp_gaps", summary.gaps);
    r.aggregate("first", opt_time(summary.first));
    r.aggregate("last", opt_time(summary.last));
    r.aggregate("imputed_cells", imputation.total());
    r.aggregate("hourly_records", hourly_count);
    r.aggregate("outlier_filtering", "none");
    r
}

/// Per-epoch train and test loss.
pub fn loss_curve(report: &TrainReport) -> Report {
    let mut r = Report::new("loss_curve", &["epoch", "train_loss", "test_loss"]);
    for (i, (tr, te)) in report.train_loss.iter().zip(&report.test_loss).enumerate() {
        r.row(vec![(i + 1).to_string(), tr.to_string(), te.to_string()]);
    }
    r.aggregate("epochs", report.train_loss.len());
    if let (Some(first), Some(tr), Some(te)) = (
        report.train_loss.first(),
        report.final_train_loss(),
        report.final_test_loss(),
    ) {
        r.aggregate("first_train_loss", first);
        r.aggregate("final_train_loss", tr);
        r.aggregate("final_test_loss", te);
    }
    r
}

pub fn data_summary(ann: &DataAnnotation) -> Report {
    let mut r = Report::new(
        "data_summary",
        &["feature", "min", "q1", "median", "q3", "max", "mean", "std", "outliers", "histogram"],
    );
    for s in &ann.features {
        let histogram: Vec<String> = s.histogram.counts.iter().map(|c| c.to_string()).collect();
        r.row(vec![
            s.feature.name().into(),
            s.min.to_string(),
            s.q1.to_string(),
            s.median.to_string(),
            s.q3.to_string(),
            s.max.to_string(),
            s.mean.to_string(),
            s.std.to_string(),
            s.outliers.len().to_string(),
            histogram.join(" "),
        ]);
    }
    r.aggregate("records", ann.record_count);
    r.aggregate("histogram_bins", HISTOGRAM_BINS);
    r.aggregate("outlier_sigmas", OUTLIER_SIGMAS);
    r
}

/// Pearson correlation matrix over the hourly features.
pub fn correlation(ann: &DataAnnotation) -> Report {
    let c = &ann.correlation;
    let mut columns = vec!["feature"];
    columns.extend(c.features.iter().map(|f| f.name()));
    let mut r = Report::new("correlation", &columns);
    for (f, values) in c.features.iter().zip(&c.values) {
        let mut row = vec![f.name().to_string()];
        row.extend(values.iter().map(|v| v.to_string()));
        r.row(row);
    }
    r.aggregate("records", ann.record_count);
    if let Some(v) = c.get(Feature::GlobalActivePower, Feature::GlobalIntensity) {
        r.aggregate("global_active_power~global_intensity", v);
    }
    let degenerate: Vec<&str> = c.degenerate.iter().map(|f| f.name()).collect();
    r.aggregate("degenerate", degenerate.join(" "));
    r
}

pub fn model_annotation(ann: &ModelAnnotation) -> Report {
    let mut r = Report::new("model_annotation", &["statistic", "value"]);
    for (k, v) in [
        ("residual_mean", ann.residual_mean),
        ("residual_std", ann.residual_std),
        ("residual_mse", ann.residual_mse()),
        ("max_abs_error", ann.max_abs_error),
        ("band_low_5", ann.band_low),
        ("band_high_95", ann.band_high),
        ("bias_indicator", ann.bias_indicator),
    ] {
        r.row(vec![k.into(), v.to_string()]);
    }
    r.aggregate("pairs", ann.pair_count);
    r.aggregate("bias_degenerate", ann.bias_degenerate);
    if let Some(v) = ann.final_test_loss() {
        r.aggregate("final_test_loss", v);
    }
    r
}

/// Actual against predicted consumption over the window.
pub fn predictions(w: &WindowOutcome) -> Report {
    let mut r = Report::new(
        "predictions",
        &["hour_start", "actual", "predicted", "actual_scaled", "predicted_scaled"],
    );
    for p in &w.predictions {
        r.row(vec![
            time(p.hour_start),
            p.actual.to_string(),
            p.predicted.to_string(),
            p.pair.actual.to_string(),
            p.pair.predicted.to_string(),
        ]);
    }
    let n = w.predictions.len();
    let mse = if n == 0 {
        0.0
    } else {
        w.predictions
            .iter()
            .map(|p| (p.pair.predicted - p.pair.actual).powi(2))
            .sum::<f64>()
            / n as f64
    };
    r.aggregate("samples", n);
    r.aggregate("scaled_mse", mse);
    r
}

/// One row per window hour with the rule's outcome, then savings and cost.
pub fn decisions(w: &WindowOutcome, opts: &WindowOptions) -> Report {
    let mut r = Report::new(
        "decisions",
        &["hour_start", "predicted", "baseline", "baseline_level", "actual", "warning", "cap", "saved"],
    );
    for d in &w.decisions {
        r.row(vec![
            time(d.hour_start),
            d.predicted.to_string(),
            d.baseline.to_string(),
            d.baseline_level.name().into(),
            d.actual.to_string(),
            u8::from(d.warning).to_string(),
            d.cap.map(|c| c.to_string()).unwrap_or_default(),
            d.saved.to_string(),
        ]);
    }
    r.aggregate("hours", w.savings.hours);
    r.aggregate("warnings", w.savings.warnings);
    r.aggregate("total_saved", w.savings.total_saved);
    r.aggregate("savings_basis", w.savings.basis.name());
    r.aggregate("window_offset", opts.offset);
    r.aggregate("tariff", opts.tariff);
    r.aggregate("cost", w.cost);
    r
}

/// The three standard questions answered for every warning hour.
pub fn explanations(w: &WindowOutcome) -> Report {
    let mut r = Report::new("explanations", &["hour_start", "question", "evidence", "answer"]);
    for a in &w.answers {
        let evidence: Vec<String> = a
            .evidence
            .iter()
            .map(|e| format!("{}={} {}", e.name, e.value, e.unit))
            .collect();
        r.row(vec![time(a.hour_start), a.kind.name().into(), evidence.join("; "), a.sentence.clone()]);
    }
    r.aggregate("answers", w.answers.len());
    r
}
