//! Command-line front end: runs the forecasting and decision pipeline and
//! writes plot-ready reports.

pub mod args;
pub mod manifest;
pub mod pipeline;
pub mod report;
pub mod reports;

use std::path::Path;

use anyhow::{Context, Result};
use iob_core::store::{digest_file, StoreLayout};
use iob_core::synthetic::{write_surrogate_dataset, SurrogateConfig};

use args::{Cli, Command, ExplainArgs, PipelineArgs, ReportArgs, SynthArgs};
use manifest::RunManifest;
use pipeline::{explain_hour, Artifacts, TrainOptions, WindowOptions};
use report::Report;

pub const MANIFEST_FILE: &str = "manifest.txt";
pub const REPORT_MANIFEST_FILE: &str = "manifest-report.txt";

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Pipeline(a) => cmd_pipeline(&a),
        Command::Report(a) => cmd_report(&a),
        Command::Explain(a) => cmd_explain(&a),
        Command::Synth(a) => cmd_synth(&a),
    }
}

fn record_window(m: &mut RunManifest, w: &WindowOptions) {
    m.set("window", w.window);
    m.set("window_offset", w.offset);
    m.set("tariff", w.tariff);
    m.set("savings_basis", w.basis.name());
}

fn record_artifacts(m: &mut RunManifest, layout: &StoreLayout) -> Result<()> {
    for (name, path) in [
        ("hourly", layout.hourly_path()),
        ("checkpoint", layout.checkpoint_path()),
        ("baseline", layout.baseline_path()),
    ] {
        m.set(&format!("artifact.{name}"), path.display());
    }
    for (name, digest) in layout.digests()? {
        m.set(&format!("artifact.{name}.sha256"), digest);
    }
    Ok(())
}

fn record_reports(m: &mut RunManifest, paths: &[std::path::PathBuf]) {
    for p in paths {
        let name = p.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
        m.set(&format!("report.{name}"), p.display());
    }
}

pub fn cmd_pipeline(a: &PipelineArgs) -> Result<()> {
    let train_opts: TrainOptions = a.train.options();
    let window: WindowOptions = a.window.options();
    let layout = StoreLayout::new(&a.out);

    let mut m = RunManifest::new("pipeline");
    m.set("data", a.data.display());
    let digest = digest_file(&a.data).context("ingest stage failed")?;
    m.set("data.sha256", digest);
    let model = &train_opts.model;
    m.set("seed", model.seed);
    m.set("epochs", model.epochs);
    m.set("hidden_size", model.hidden_size);
    m.set("lookback", model.lookback);
    m.set("batch_size", model.batch_size);
    m.set("learning_rate", model.learning_rate);
    m.set("beta1", model.beta1);
    m.set("beta2", model.beta2);
    m.set("epsilon", model.epsilon);
    m.set("train_fraction", train_opts.train_fraction);
    m.set("target", pipeline::TARGET.name());
    record_window(&mut m, &window);

    let outcome = pipeline::run_pipeline(&a.data, &layout, &train_opts, &window)?;
    record_artifacts(&mut m, &layout)?;
    record_reports(&mut m, &outcome.reports);
    for (stage, secs) in &outcome.timings.0 {
        m.set(&format!("seconds.{stage}"), format!("{secs:.3}"));
    }
    m.stamp("finished_at");
    m.write(&a.out.join(MANIFEST_FILE))?;

    let s = &outcome.window.savings;
    println!("rows {} hourly {}", outcome.ingest.row_count, outcome.hourly_count);
    if let Some(te) = outcome.train_report.final_test_loss() {
        println!("final test loss {te}");
    }
    println!(
        "window {} hours: {} warnings, saved {:.1}, cost {}",
        s.hours, s.warnings, s.total_saved, outcome.window.cost
    );
    println!("reports in {}", layout.reports_dir().display());
    Ok(())
}

pub fn cmd_report(a: &ReportArgs) -> Result<()> {
    let window = a.window.options();
    let layout = StoreLayout::new(&a.out);
    let mut m = RunManifest::new("report");
    record_window(&mut m, &window);
    let artifacts = Artifacts::load(&layout).context("report stage failed")?;
    let outcome = pipeline::evaluate_window(&artifacts, &window).context("decide stage failed")?;
    let paths = pipeline::write_window_reports(&layout, &outcome, &window).context("report stage failed")?;
    record_artifacts(&mut m, &layout)?;
    record_reports(&mut m, &paths);
    m.stamp("finished_at");
    m.write(&a.out.join(REPORT_MANIFEST_FILE))?;
    let s = &outcome.savings;
    println!(
        "window {} hours: {} warnings, saved {:.1}, cost {}",
        s.hours, s.warnings, s.total_saved, outcome.cost
    );
    Ok(())
}

pub fn cmd_explain(a: &ExplainArgs) -> Result<()> {
    let layout = StoreLayout::new(&a.out);
    let artifacts = Artifacts::load(&layout).context("explain stage failed")?;
    let (decision, answer) =
        explain_hour(&artifacts, a.hour, a.question, a.savings_basis.into()).context("explain stage failed")?;
    let mut r = Report::new("explanation", &["name", "value", "unit"]);
    for e in &answer.evidence {
        r.row(vec![e.name.clone(), e.value.to_string(), e.unit.clone()]);
    }
    r.aggregate("hour_start", reports::time(answer.hour_start));
    r.aggregate("question", answer.kind.name());
    r.aggregate("warning", u8::from(decision.warning));
    r.aggregate("answer", &answer.sentence);
    println!("{}", answer.kind.question());
    println!("{}", answer.sentence);
    if a.verbose {
        print!("{}", r.render());
    }
    Ok(())
}

pub fn cmd_synth(a: &SynthArgs) -> Result<()> {
    let cfg = match a.days {
        Some(days) => SurrogateConfig::with_days(days, a.seed),
        None => SurrogateConfig {
            seed: a.seed,
            ..SurrogateConfig::default()
        },
    };
    write_surrogate(&a.out, &cfg)?;
    println!("wrote {} rows to {}", cfg.minutes, a.out.display());
    Ok(())
}

fn write_surrogate(path: &Path, cfg: &SurrogateConfig) -> Result<()> {
    write_surrogate_dataset(path, cfg).with_context(|| format!("writing {}", path.display()))
}
