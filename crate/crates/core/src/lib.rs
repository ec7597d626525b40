//! Household power consumption forecasting with an LSTM, a historical
//! average decision rule for capping consumption, and templated
//! explanations of each decision.
//!
//! The pipeline runs
//! [`ingest`] → [`preprocess`] → [`nncore`] → [`decision`] → [`explain`],
//! with [`store`] persisting intermediate artifacts.

pub mod decision;
pub mod explain;
pub mod ingest;
pub mod nncore;
pub mod preprocess;
pub mod store;
pub mod synthetic;

pub use decision::{
    build_baseline, cost_saving, decide, run_window, BaselineTable, DecisionRecord, Money, SavingsBasis,
    SavingsReport,
};
pub use explain::{annotate_data, annotate_model, answer, DataAnnotation, ExplanationAnswer, ModelAnnotation, QuestionKind};
pub use ingest::{load_dataset, parse_minute_record, Feature, IngestSummary, MinuteRecord};
pub use nncore::{ModelConfig, ModelState, PredictionPair, TrainReport};
pub use preprocess::{
    fit_minmax, impute_missing, resample_hourly, split_chronological, HourlyRecord, NormalizationParams, SplitSpec,
};
pub use store::{Checkpoint, StoreLayout};
