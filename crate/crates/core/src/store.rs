//! On-disk artifact store: hourly series, model checkpoints, baseline
//! tables and report files under one root directory.
//!
//! Every artifact starts with a metadata line
//!
//! ```text
//! #iob;kind=<kind>;version=<n>;sha256=<hex digest of everything after this line>
//! ```
//!
//! and is written to a temporary file in the same directory, then renamed
//! into place.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::decision::{BaselineLevel, BaselineTable, GroupKey, GroupStat};
use crate::ingest::Feature;
use crate::nncore::{ModelConfig, ModelState, Params, TENSOR_NAMES};
use crate::preprocess::{HourlyRecord, NormalizationParams, SplitSpec};

pub const FORMAT_VERSION: u32 = 1;

const HOURLY_COLUMNS: &str = "hour_start,global_active_power,global_reactive_power,voltage,global_intensity,sub_metering_1,sub_metering_2,sub_metering_3,minute_count";
const BASELINE_COLUMNS: &str = "level,hour,month,weekday,mean,count";
const TIME_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("io error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: content digest mismatch (expected {expected}, found {found})")]
    Digest {
        path: PathBuf,
        expected: String,
        found: String,
    },
    #[error("{path}: expected a {expected} artifact of version {FORMAT_VERSION}, found {found}")]
    Version {
        path: PathBuf,
        expected: &'static str,
        found: String,
    },
    #[error("{path}, line {line}: {reason}")]
    Format {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("{path}: shape mismatch: {reason}")]
    Shape { path: PathBuf, reason: String },
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest of a whole file, streamed.
pub fn digest_file(path: &Path) -> Result<String, StoreError> {
    let mut file = fs::File::open(path).map_err(|source| io_error(path, source))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = std::io::Read::read(&mut file, &mut buf).map_err(|source| io_error(path, source))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

fn io_error(path: &Path, source: std::io::Error) -> StoreError {
    StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `contents` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), StoreError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_error(dir, e))?;
    tmp.write_all(contents).map_err(|e| io_error(path, e))?;
    tmp.as_file().sync_all().map_err(|e| io_error(path, e))?;
    tmp.persist(path).map_err(|e| io_error(path, e.error))?;
    Ok(())
}

fn write_artifact(path: &Path, kind: &str, body: &str) -> Result<String, StoreError> {
    let digest = sha256_hex(body.as_bytes());
    let contents = format!("#iob;kind={kind};version={FORMAT_VERSION};sha256={digest}\n{body}");
    write_atomic(path, contents.as_bytes())?;
    Ok(digest)
}

/// Reads an artifact, checks kind, version and digest, and returns its body.
fn read_artifact(path: &Path, kind: &'static str) -> Result<String, StoreError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let (meta, body) = text.split_once('\n').unwrap_or((text.as_str(), ""));
    let expected_prefix = format!("#iob;kind={kind};version={FORMAT_VERSION};sha256=");
    let Some(expected) = meta.strip_prefix(&expected_prefix) else {
        return Err(StoreError::Version {
            path: path.to_path_buf(),
            expected: kind,
            found: meta.chars().take(80).collect(),
        });
    };
    let found = sha256_hex(body.as_bytes());
    if found != expected {
        return Err(StoreError::Digest {
            path: path.to_path_buf(),
            expected: expected.to_string(),
            found,
        });
    }
    Ok(body.to_string())
}

/// Digest recorded in an artifact's metadata line, without verifying it.
pub fn recorded_digest(path: &Path) -> Result<String, StoreError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let meta = text.lines().next().unwrap_or("");
    meta.split(';')
        .find_map(|part| part.strip_prefix("sha256="))
        .map(str::to_string)
        .ok_or_else(|| StoreError::Format {
            path: path.to_path_buf(),
            line: 1,
            reason: "no digest in metadata line".into(),
        })
}

fn format_error(path: &Path, line: usize, reason: impl Into<String>) -> StoreError {
    StoreError::Format {
        path: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

pub fn save_hourly(path: &Path, series: &[HourlyRecord]) -> Result<String, StoreError> {
    use std::fmt::Write as _;
    let mut body = String::with_capacity(series.len() * 120 + HOURLY_COLUMNS.len() + 1);
    body.push_str(HOURLY_COLUMNS);
    body.push('\n');
    for r in series {
        let _ = writeln!(
            body,
            "{},{},{},{},{},{},{},{},{}",
            r.hour_start.format(TIME_FORMAT),
            r.global_active_power,
            r.global_reactive_power,
            r.voltage,
            r.global_intensity,
            r.sub_metering_1,
            r.sub_metering_2,
            r.sub_metering_3,
            r.minute_count
        );
    }
    write_artifact(path, "hourly", &body)
}

pub fn load_hourly(path: &Path) -> Result<Vec<HourlyRecord>, StoreError> {
    let body = read_artifact(path, "hourly")?;
    let mut lines = body.lines();
    if lines.next() != Some(HOURLY_COLUMNS) {
        return Err(format_error(path, 2, "unexpected column header"));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let line_no = i + 3;
            let bad = |what: &str| format_error(path, line_no, format!("bad {what} in {line:?}"));
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 9 {
                return Err(bad("field count"));
            }
            let num = |k: usize| fields[k].parse::<f64>().map_err(|_| bad("number"));
            Ok(HourlyRecord {
                hour_start: NaiveDateTime::parse_from_str(fields[0], TIME_FORMAT)
                    .map_err(|_| bad("timestamp"))?,
                global_active_power: num(1)?,
                global_reactive_power: num(2)?,
                voltage: num(3)?,
                global_intensity: num(4)?,
                sub_metering_1: num(5)?,
                sub_metering_2: num(6)?,
                sub_metering_3: num(7)?,
                minute_count: fields[8].parse().map_err(|_| bad("minute count"))?,
            })
        })
        .collect()
}

/// Everything needed to reproduce predictions from a trained model.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub state: ModelState,
    pub normalization: NormalizationParams,
    pub split: SplitSpec,
    /// Model input columns, in order.
    pub input_features: Vec<Feature>,
    pub target: Feature,
}

#[derive(Serialize, Deserialize)]
struct CheckpointMeta {
    input_features: Vec<Feature>,
    target: Feature,
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("plain data serializes")
}

fn write_tensor(body: &mut String, name: &str, rows: usize, cols: usize, data: &[f64]) {
    use std::fmt::Write as _;
    let _ = write!(body, "tensor {name} {rows} {cols}");
    for v in data {
        let _ = write!(body, " {v}");
    }
    body.push('\n');
}

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<String, StoreError> {
    let mut body = String::new();
    body.push_str(&format!("config {}\n", json(&ckpt.state.config)));
    body.push_str(&format!("normalization {}\n", json(&ckpt.normalization)));
    body.push_str(&format!("split {}\n", json(&ckpt.split)));
    body.push_str(&format!(
        "features {}\n",
        json(&CheckpointMeta {
            input_features: ckpt.input_features.clone(),
            target: ckpt.target,
        })
    ));
    body.push_str(&format!("step {}\n", ckpt.state.step));
    let shapes = ckpt.state.config.tensor_shapes();
    for (prefix, params) in [
        ("", &ckpt.state.params),
        ("adam.m.", &ckpt.state.moment1),
        ("adam.v.", &ckpt.state.moment2),
    ] {
        for ((name, tensor), (rows, cols)) in TENSOR_NAMES.iter().zip(params.tensors()).zip(shapes) {
            write_tensor(&mut body, &format!("{prefix}{name}"), rows, cols, tensor);
        }
    }
    write_artifact(path, "checkpoint", &body)
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, StoreError> {
    let body = read_artifact(path, "checkpoint")?;
    let mut sections: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    let mut tensors: BTreeMap<&str, (usize, Vec<&str>)> = BTreeMap::new();
    for (i, line) in body.lines().enumerate() {
        let line_no = i + 2;
        let (key, rest) = line
            .split_once(' ')
            .ok_or_else(|| format_error(path, line_no, "missing payload"))?;
        if key == "tensor" {
            let mut parts = rest.split(' ');
            let name = parts.next().unwrap_or("");
            tensors.insert(name, (line_no, parts.collect()));
        } else {
            sections.insert(key, (line_no, rest));
        }
    }
    fn section<T: serde::de::DeserializeOwned>(
        path: &Path,
        sections: &BTreeMap<&str, (usize, &str)>,
        key: &str,
    ) -> Result<T, StoreError> {
        let (line, text) = sections
            .get(key)
            .ok_or_else(|| format_error(path, 0, format!("missing {key} section")))?;
        serde_json::from_str(text).map_err(|e| format_error(path, *line, format!("{key}: {e}")))
    }
    let config: ModelConfig = section(path, &sections, "config")?;
    let normalization: NormalizationParams = section(path, &sections, "normalization")?;
    let split: SplitSpec = section(path, &sections, "split")?;
    let meta: CheckpointMeta = section(path, &sections, "features")?;
    let step: u64 = section(path, &sections, "step")?;
    config.validate().map_err(|e| StoreError::Shape {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    if meta.input_features.len() != config.input_size {
        return Err(StoreError::Shape {
            path: path.to_path_buf(),
            reason: format!(
                "{} input features for input_size {}",
                meta.input_features.len(),
                config.input_size
            ),
        });
    }

    let shapes = config.tensor_shapes();
    let mut read_params = |prefix: &str| -> Result<Params, StoreError> {
        let mut params = Params::zeros(&config);
        for ((name, slot), (rows, cols)) in TENSOR_NAMES.iter().zip(params.tensors_mut()).zip(shapes) {
            let full = format!("{prefix}{name}");
            let (line, parts) = tensors
                .remove(full.as_str())
                .ok_or_else(|| format_error(path, 0, format!("missing tensor {full}")))?;
            if parts.len() < 2 {
                return Err(format_error(path, line, format!("tensor {full} lacks a shape")));
            }
            let shape = (parts[0].parse::<usize>(), parts[1].parse::<usize>());
            if shape != (Ok(rows), Ok(cols)) || parts.len() - 2 != rows * cols {
                return Err(StoreError::Shape {
                    path: path.to_path_buf(),
                    reason: format!(
                        "tensor {full} is {}x{} with {} values, config requires {rows}x{cols}",
                        parts[0],
                        parts[1],
                        parts.len() - 2
                    ),
                });
            }
            for (dst, src) in slot.iter_mut().zip(&parts[2..]) {
                *dst = src
                    .parse()
                    .map_err(|_| format_error(path, line, format!("bad number {src:?} in {full}")))?;
            }
        }
        Ok(params)
    };
    let params = read_params("")?;
    let moment1 = read_params("adam.m.")?;
    let moment2 = read_params("adam.v.")?;
    Ok(Checkpoint {
        state: ModelState {
            config,
            params,
            moment1,
            moment2,
            step,
        },
        normalization,
        split,
        input_features: meta.input_features,
        target: meta.target,
    })
}

pub fn save_baseline(path: &Path, table: &BaselineTable) -> Result<String, StoreError> {
    let mut body = format!("{BASELINE_COLUMNS}\n");
    let row = |level: BaselineLevel, h: Option<u8>, m: Option<u8>, w: Option<u8>, s: &GroupStat| {
        let o = |v: Option<u8>| v.map(|x| x.to_string()).unwrap_or_default();
        format!("{},{},{},{},{},{}\n", level.name(), o(h), o(m), o(w), s.mean, s.count)
    };
    for (k, s) in &table.by_hour_month_weekday {
        body.push_str(&row(BaselineLevel::HourMonthWeekday, Some(k.hour), Some(k.month), Some(k.weekday), s));
    }
    for (&(h, w), s) in &table.by_hour_weekday {
        body.push_str(&row(BaselineLevel::HourWeekday, Some(h), None, Some(w), s));
    }
    for (&h, s) in &table.by_hour {
        body.push_str(&row(BaselineLevel::Hour, Some(h), None, None, s));
    }
    body.push_str(&row(BaselineLevel::Global, None, None, None, &table.global));
    write_artifact(path, "baseline", &body)
}

pub fn load_baseline(path: &Path) -> Result<BaselineTable, StoreError> {
    let body = read_artifact(path, "baseline")?;
    let mut lines = body.lines();
    if lines.next() != Some(BASELINE_COLUMNS) {
        return Err(format_error(path, 2, "unexpected column header"));
    }
    let mut table = BaselineTable {
        by_hour_month_weekday: BTreeMap::new(),
        by_hour_weekday: BTreeMap::new(),
        by_hour: BTreeMap::new(),
        global: GroupStat { mean: 0.0, count: 0 },
    };
    let mut saw_global = false;
    for (i, line) in lines.enumerate() {
        let line_no = i + 3;
        let bad = || format_error(path, line_no, format!("bad baseline row {line:?}"));
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(bad());
        }
        let key = |k: usize| f[k].parse::<u8>().map_err(|_| bad());
        let stat = GroupStat {
            mean: f[4].parse().map_err(|_| bad())?,
            count: f[5].parse().map_err(|_| bad())?,
        };
        match BaselineLevel::from_name(f[0]).ok_or_else(bad)? {
            BaselineLevel::HourMonthWeekday => {
                let k = GroupKey {
                    hour: key(1)?,
                    month: key(2)?,
                    weekday: key(3)?,
                };
                table.by_hour_month_weekday.insert(k, stat);
            }
            BaselineLevel::HourWeekday => {
                table.by_hour_weekday.insert((key(1)?, key(3)?), stat);
            }
            BaselineLevel::Hour => {
                table.by_hour.insert(key(1)?, stat);
            }
            BaselineLevel::Global => {
                table.global = stat;
                saw_global = true;
            }
        }
    }
    if !saw_global {
        return Err(format_error(path, 0, "missing global baseline row"));
    }
    Ok(table)
}

/// Named artifacts under one root directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoreLayout {
    pub root: PathBuf,
}

impl StoreLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        StoreLayout { root: root.into() }
    }

    pub fn hourly_path(&self) -> PathBuf {
        self.root.join("hourly.csv")
    }

    pub fn checkpoint_path(&self) -> PathBuf {
        self.root.join("model.ckpt")
    }

    pub fn baseline_path(&self) -> PathBuf {
        self.root.join("baseline.csv")
    }

    pub fn reports_dir(&self) -> PathBuf {
        self.root.join("reports")
    }

    pub fn report_path(&self, name: &str) -> PathBuf {
        self.reports_dir().join(name)
    }

    /// Recorded digests of the artifacts that exist, by artifact name.
    pub fn digests(&self) -> Result<BTreeMap<String, String>, StoreError> {
        let mut out = BTreeMap::new();
        for (name, path) in [
            ("hourly", self.hourly_path()),
            ("checkpoint", self.checkpoint_path()),
            ("baseline", self.baseline_path()),
        ] {
            if path.exists() {
                out.insert(name.to_string(), recorded_digest(&path)?);
            }
        }
        Ok(out)
    }

    pub fn save_hourly(&self, series: &[HourlyRecord]) -> Result<String, StoreError> {
        save_hourly(&self.hourly_path(), series)
    }

    pub fn load_hourly(&self) -> Result<Vec<HourlyRecord>, StoreError> {
        load_hourly(&self.hourly_path())
    }

    pub fn save_checkpoint(&self, ckpt: &Checkpoint) -> Result<String, StoreError> {
        save_checkpoint(&self.checkpoint_path(), ckpt)
    }

    pub fn load_checkpoint(&self) -> Result<Checkpoint, StoreError> {
        load_checkpoint(&self.checkpoint_path())
    }

    pub fn save_baseline(&self, table: &BaselineTable) -> Result<String, StoreError> {
        save_baseline(&self.baseline_path(), table)
    }

    pub fn load_baseline(&self) -> Result<BaselineTable, StoreError> {
        load_baseline(&self.baseline_path())
    }

    pub fn write_report(&self, name: &str, contents: &str) -> Result<PathBuf, StoreError> {
        let path = self.report_path(name);
        write_atomic(&path, contents.as_bytes())?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decision::build_baseline;
    use crate::nncore::{lstm_forward, ModelState};
    use crate::preprocess::fit_minmax;
    use chrono::{NaiveDate, TimeDelta};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn series(n: usize) -> Vec<HourlyRecord> {
        let start = NaiveDate::from_ymd_opt(2006, 12, 16).unwrap().and_hms_opt(17, 0, 0).unwrap();
        (0..n)
            .map(|i| {
                let x = i as f64;
                HourlyRecord {
                    hour_start: start + TimeDelta::hours(i as i64),
                    global_active_power: 0.1 * x + 1.0 / 3.0,
                    global_reactive_power: (x * 0.7).sin().abs(),
                    voltage: 240.0 + (x * 0.01).cos(),
                    global_intensity: x * 4.2 + 1e-9,
                    sub_metering_1: x.sqrt(),
                    sub_metering_2: 1.0 / (x + 1.0),
                    sub_metering_3: 17.0,
                    minute_count: if i == 0 { 36 } else { 60 },
                }
            })
            .collect()
    }

    fn checkpoint(hidden: usize, seed: u64) -> Checkpoint {
        let config = ModelConfig {
            hidden_size: hidden,
            lookback: 2,
            ..ModelConfig::default()
        };
        let mut state = ModelState::new(config, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        state.moment1.fill(0.125);
        state.moment2.fill(1e-7 / 3.0);
        state.step = 17;
        let hours = series(20);
        Checkpoint {
            state,
            normalization: fit_minmax(&hours, &[Feature::GlobalActivePower]).unwrap(),
            split: SplitSpec {
                train_fraction: 0.5,
                boundary_index: 10,
            },
            input_features: vec![Feature::GlobalActivePower],
            target: Feature::GlobalActivePower,
        }
    }

    #[test]
    fn hourly_round_trip_empty_and_full() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.csv");
        save_hourly(&path, &[]).unwrap();
        assert!(load_hourly(&path).unwrap().is_empty());
        let s = series(500);
        save_hourly(&path, &s).unwrap();
        assert_eq!(load_hourly(&path).unwrap(), s);
    }

    #[test]
    fn tampered_hourly_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.csv");
        save_hourly(&path, &series(5)).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, text.replacen(",60\n", ",59\n", 1)).unwrap();
        assert!(matches!(load_hourly(&path), Err(StoreError::Digest { .. })));
    }

    #[test]
    fn wrong_kind_or_version() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.csv");
        save_hourly(&path, &series(3)).unwrap();
        assert!(matches!(load_baseline(&path), Err(StoreError::Version { .. })));
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, text.replacen("version=1", "version=2", 1)).unwrap();
        assert!(matches!(load_hourly(&path), Err(StoreError::Version { .. })));
    }

    #[test]
    fn checkpoint_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        let ckpt = checkpoint(5, 1);
        save_checkpoint(&path, &ckpt).unwrap();
        let back = load_checkpoint(&path).unwrap();
        assert_eq!(back, ckpt);

        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let w = [rand::Rng::random::<f64>(&mut rng), rand::Rng::random::<f64>(&mut rng)];
            let a = lstm_forward(&ckpt.state, &w).unwrap().0;
            let b = lstm_forward(&back.state, &w).unwrap().0;
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn checkpoint_with_wrong_hidden_size_is_a_shape_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        save_checkpoint(&path, &checkpoint(3, 2)).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let (_, body) = text.split_once('\n').unwrap();
        let body = body.replacen("\"hidden_size\":3", "\"hidden_size\":4", 1);
        let forged = format!(
            "#iob;kind=checkpoint;version=1;sha256={}\n{body}",
            sha256_hex(body.as_bytes())
        );
        fs::write(&path, forged).unwrap();
        assert!(matches!(load_checkpoint(&path), Err(StoreError::Shape { .. })));
    }

    #[test]
    fn baseline_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let layout = StoreLayout::new(dir.path());
        let table = build_baseline(&series(24 * 40)).unwrap();
        layout.save_baseline(&table).unwrap();
        assert_eq!(layout.load_baseline().unwrap(), table);
        assert!(layout.digests().unwrap().contains_key("baseline"));
    }

    #[test]
    fn layout_digests_match_content() {
        let dir = tempfile::tempdir().unwrap();
        let layout = StoreLayout::new(dir.path().join("nested"));
        let digest = layout.save_hourly(&series(10)).unwrap();
        assert_eq!(layout.digests().unwrap()["hourly"], digest);
        let text = fs::read_to_string(layout.hourly_path()).unwrap();
        let (_, body) = text.split_once('\n').unwrap();
        assert_eq!(sha256_hex(body.as_bytes()), digest);
    }

    #[test]
    fn atomic_write_leaves_no_temp_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn random_hourly_round_trip(values in prop::collection::vec(
            (0.0f64..1e4, 0.0f64..1e3, 1.0f64..300.0, 0.0f64..1e5, 0.0f64..1e4, 1u32..=60), 0..50)) {
            let start = NaiveDate::from_ymd_opt(2008, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
            let s: Vec<_> = values.iter().enumerate().map(|(i, v)| HourlyRecord {
                hour_start: start + TimeDelta::hours(i as i64 * 3),
                global_active_power: v.0,
                global_reactive_power: v.1,
                voltage: v.2,
                global_intensity: v.3,
                sub_metering_1: v.4,
                sub_metering_2: v.4 / 7.0,
                sub_metering_3: v.0 / 3.0,
                minute_count: v.5,
            }).collect();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("h.csv");
            save_hourly(&path, &s).unwrap();
            prop_assert_eq!(load_hourly(&path).unwrap(), s);
        }

        #[test]
        fn random_checkpoint_round_trip(hidden in 1usize..6, seed in 0u64..1000) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("m.ckpt");
            let ckpt = checkpoint(hidden, seed);
            save_checkpoint(&path, &ckpt).unwrap();
            prop_assert_eq!(load_checkpoint(&path).unwrap(), ckpt);
        }
    }
}
