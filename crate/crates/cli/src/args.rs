use std::path::PathBuf;

use chrono::NaiveDateTime;
use clap::{Args, Parser, Subcommand, ValueEnum};
use iob_core::explain::QuestionKind;
use iob_core::nncore::ModelConfig;
use iob_core::SavingsBasis;

use crate::pipeline::{TrainOptions, WindowOptions};

#[derive(Debug, Parser)]
#[command(name = "iob", version, about = "Household power forecasting, consumption capping and explanations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ingest a minute-level dataset, train, decide and write all reports.
    Pipeline(PipelineArgs),
    /// Recompute the decision, savings and explanation reports from stored artifacts.
    Report(ReportArgs),
    /// Answer one question about one stored hour.
    Explain(ExplainArgs),
    /// Write a synthetic minute-level dataset in the public file's layout.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Minute-level dataset (semicolon-delimited text).
    #[arg(long)]
    pub data: PathBuf,
    /// Directory for artifacts, reports and the manifest.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub train: TrainArgs,
    #[command(flatten)]
    pub window: WindowArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub epochs: usize,
    /// LSTM units.
    #[arg(long, default_value_t = 50)]
    pub hidden: usize,
    /// Past hours per prediction.
    #[arg(long, default_value_t = 1)]
    pub lookback: usize,
    #[arg(long, default_value_t = 32)]
    pub batch: usize,
    #[arg(long, default_value_t = 0.001)]
    pub lr: f64,
    /// Leading share of hours used for training.
    #[arg(long, default_value_t = 0.5)]
    pub train_fraction: f64,
}

impl TrainArgs {
    pub fn options(&self) -> TrainOptions {
        TrainOptions {
            model: ModelConfig {
                hidden_size: self.hidden,
                lookback: self.lookback,
                epochs: self.epochs,
                batch_size: self.batch,
                learning_rate: self.lr,
                seed: self.seed,
                ..ModelConfig::default()
            },
            train_fraction: self.train_fraction,
        }
    }
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    /// Currency per unit of saved consumption.
    #[arg(long, default_value_t = 0.182)]
    pub tariff: f64,
    /// Test hours covered by the decision report.
    #[arg(long, default_value_t = 200)]
    pub window: usize,
    /// First test hour of the window.
    #[arg(long, default_value_t = 0)]
    pub window_offset: usize,
    #[arg(long, value_enum, default_value_t = Basis::Actual)]
    pub savings_basis: Basis,
}

impl WindowArgs {
    pub fn options(&self) -> WindowOptions {
        WindowOptions {
            window: self.window,
            offset: self.window_offset,
            tariff: self.tariff,
            basis: self.savings_basis.into(),
        }
    }
}

/// What a warning hour counts as saved above its baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Basis {
    Actual,
    Predicted,
}

impl From<Basis> for SavingsBasis {
    fn from(b: Basis) -> Self {
        match b {
            Basis::Actual => SavingsBasis::Actual,
            Basis::Predicted => SavingsBasis::Predicted,
        }
    }
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory written by `pipeline`.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub window: WindowArgs,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    /// Directory written by `pipeline`.
    #[arg(long)]
    pub out: PathBuf,
    /// Hour start, e.g. 2009-01-10T19:00.
    #[arg(long, value_parser = parse_hour)]
    pub hour: NaiveDateTime,
    /// why_controlled, top_consumer or consumption_breakdown.
    #[arg(long, value_parser = parse_question)]
    pub question: QuestionKind,
    #[arg(long, value_enum, default_value_t = Basis::Actual)]
    pub savings_basis: Basis,
    /// Also print the evidence as a report block.
    #[arg(long)]
    pub verbose: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output file.
    #[arg(long)]
    pub out: PathBuf,
    /// Length in days; the full public span when omitted.
    #[arg(long)]
    pub days: Option<usize>,
    #[arg(long, default_value_t = 2006)]
    pub seed: u64,
}

pub fn parse_hour(s: &str) -> Result<NaiveDateTime, String> {
    const FORMATS: [&str; 4] = ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M:%S", "%Y-%m-%d %H:%M"];
    FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .ok_or_else(|| format!("expected a timestamp like 2009-01-10T19:00, got {s:?}"))
}

fn parse_question(s: &str) -> Result<QuestionKind, String> {
    s.parse().map_err(|e: iob_core::explain::ExplainError| e.to_string())
}
