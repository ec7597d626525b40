use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use iob_bench::{hourly_rows, minute_rows};
use iob_core::nncore::{lstm_backward, lstm_forward, make_sequences, train, ModelConfig, ModelState};
use iob_core::{build_baseline, impute_missing, parse_minute_record, resample_hourly, Feature};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn parsing(c: &mut Criterion) {
    let line = "16/12/2006;17:24:00;4.216;0.418;234.840;18.400;0.000;1.000;17.000";
    c.bench_function("parse_minute_record", |b| {
        b.iter(|| parse_minute_record(black_box(line), 0).unwrap())
    });
}

fn preprocessing(c: &mut Criterion) {
    let rows = minute_rows(30);
    c.bench_function("impute_and_resample_30_days", |b| {
        b.iter_batched(
            || rows.clone(),
            |rows| {
                let (complete, _) = impute_missing(rows).unwrap();
                resample_hourly(&complete).unwrap()
            },
            BatchSize::LargeInput,
        )
    });
    let hours = hourly_rows(365);
    c.bench_function("build_baseline_one_year", |b| b.iter(|| build_baseline(black_box(&hours)).unwrap()));
}

fn network(c: &mut Criterion) {
    for (hidden, lookback) in [(50, 1), (50, 24)] {
        let config = ModelConfig {
            hidden_size: hidden,
            lookback,
            ..ModelConfig::default()
        };
        let state = ModelState::new(config, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let window: Vec<f64> = (0..lookback).map(|i| (i as f64 * 0.1).sin().abs()).collect();
        c.bench_function(&format!("forward_backward_h{hidden}_l{lookback}"), |b| {
            b.iter(|| {
                let (pred, cache) = lstm_forward(&state, black_box(&window)).unwrap();
                lstm_backward(&state, &cache, pred - 0.5).unwrap()
            })
        });
    }

    let hours = hourly_rows(120);
    let series: Vec<f64> = hours.iter().map(|h| h.get(Feature::GlobalActivePower) / 400.0).collect();
    let (tr, te) = series.split_at(series.len() / 2);
    let (tr, te) = (make_sequences(tr, 1).unwrap(), make_sequences(te, 1).unwrap());
    let config = ModelConfig {
        epochs: 1,
        ..ModelConfig::default()
    };
    let mut group = c.benchmark_group("training");
    group.sample_size(10);
    group.bench_function("one_epoch_1440_hours", |b| b.iter(|| train(&tr, &te, &config).unwrap()));
    group.finish();
}

criterion_group!(benches, parsing, preprocessing, network);
criterion_main!(benches);
