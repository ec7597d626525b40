//! Reader for the minute-resolution household power consumption file.
//!
//! The file is plain ASCII: one fixed header line followed by
//! semicolon-separated rows of `date;time;` plus seven measurements, where
//! `?` marks a missing reading.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use chrono::{NaiveDate, NaiveDateTime, NaiveTime, Timelike};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact header line of the dataset file.
pub const HEADER: &str = "Date;Time;Global_active_power;Global_reactive_power;Voltage;Global_intensity;Sub_metering_1;Sub_metering_2;Sub_metering_3";

/// Marker used by the dataset for a missing reading.
pub const MISSING_MARKER: &str = "?";

const FIELD_COUNT: usize = 9;

/// The seven electrical measurements, in file column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    GlobalActivePower,
    GlobalReactivePower,
    Voltage,
    GlobalIntensity,
    SubMetering1,
    SubMetering2,
    SubMetering3,
}

impl Feature {
    pub const ALL: [Feature; 7] = [
        Feature::GlobalActivePower,
        Feature::GlobalReactivePower,
        Feature::Voltage,
        Feature::GlobalIntensity,
        Feature::SubMetering1,
        Feature::SubMetering2,
        Feature::SubMetering3,
    ];

    /// Position of the feature among the measurement columns.
    pub fn index(self) -> usize {
        self as usize
    }

    /// Snake-case identifier used in reports and persisted files.
    pub fn name(self) -> &'static str {
        match self {
            Feature::GlobalActivePower => "global_active_power",
            Feature::GlobalReactivePower => "global_reactive_power",
            Feature::Voltage => "voltage",
            Feature::GlobalIntensity => "global_intensity",
            Feature::SubMetering1 => "sub_metering_1",
            Feature::SubMetering2 => "sub_metering_2",
            Feature::SubMetering3 => "sub_metering_3",
        }
    }

    /// Column name as it appears in the dataset header.
    pub fn header_name(self) -> &'static str {
        match self {
            Feature::GlobalActivePower => "Global_active_power",
            Feature::GlobalReactivePower => "Global_reactive_power",
            Feature::Voltage => "Voltage",
            Feature::GlobalIntensity => "Global_intensity",
            Feature::SubMetering1 => "Sub_metering_1",
            Feature::SubMetering2 => "Sub_metering_2",
            Feature::SubMetering3 => "Sub_metering_3",
        }
    }

    pub fn from_name(name: &str) -> Option<Feature> {
        Feature::ALL.into_iter().find(|f| f.name() == name)
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One raw dataset row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinuteRecord {
    pub timestamp: NaiveDateTime,
    /// Kilowatts.
    pub global_active_power: Option<f64>,
    /// Kilowatts.
    pub global_reactive_power: Option<f64>,
    /// Volts.
    pub voltage: Option<f64>,
    /// Amperes.
    pub global_intensity: Option<f64>,
    /// Watt-hours, kitchen.
    pub sub_metering_1: Option<f64>,
    /// Watt-hours, laundry room.
    pub sub_metering_2: Option<f64>,
    /// Watt-hours, water heater and air conditioner.
    pub sub_metering_3: Option<f64>,
}

impl MinuteRecord {
    pub fn missing_at(timestamp: NaiveDateTime) -> Self {
        MinuteRecord {
            timestamp,
            global_active_power: None,
            global_reactive_power: None,
            voltage: None,
            global_intensity: None,
            sub_metering_1: None,
            sub_metering_2: None,
            sub_metering_3: None,
        }
    }

    pub fn get(&self, feature: Feature) -> Option<f64> {
        match feature {
            Feature::GlobalActivePower => self.global_active_power,
            Feature::GlobalReactivePower => self.global_reactive_power,
            Feature::Voltage => self.voltage,
            Feature::GlobalIntensity => self.global_intensity,
            Feature::SubMetering1 => self.sub_metering_1,
            Feature::SubMetering2 => self.sub_metering_2,
            Feature::SubMetering3 => self.sub_metering_3,
        }
    }

    pub fn set(&mut self, feature: Feature, value: Option<f64>) {
        let slot = match feature {
            Feature::GlobalActivePower => &mut self.global_active_power,
            Feature::GlobalReactivePower => &mut self.global_reactive_power,
            Feature::Voltage => &mut self.voltage,
            Feature::GlobalIntensity => &mut self.global_intensity,
            Feature::SubMetering1 => &mut self.sub_metering_1,
            Feature::SubMetering2 => &mut self.sub_metering_2,
            Feature::SubMetering3 => &mut self.sub_metering_3,
        };
        *slot = value;
    }

    pub fn is_complete(&self) -> bool {
        Feature::ALL.iter().all(|&f| self.get(f).is_some())
    }

    /// Renders the record in the dataset's row format.
    ///
    /// Numbers use the shortest representation that parses back to the same
    /// value, so a parse/format/parse cycle is lossless.
    pub fn to_line(&self) -> String {
        let mut line = format!(
            "{}/{}/{};{:02}:{:02}:{:02}",
            chrono::Datelike::day(&self.timestamp),
            chrono::Datelike::month(&self.timestamp),
            chrono::Datelike::year(&self.timestamp),
            self.timestamp.hour(),
            self.timestamp.minute(),
            self.timestamp.second()
        );
        for feature in Feature::ALL {
            line.push(';');
            match self.get(feature) {
                Some(v) => line.push_str(&v.to_string()),
                None => line.push_str(MISSING_MARKER),
            }
        }
        line
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("failed to read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("header mismatch in {path}: found {found:?}")]
    Header { path: PathBuf, found: String },
    #[error("row {row}: wrong field count (expected {FIELD_COUNT}, found {found})")]
    FieldCount { row: usize, found: usize },
    #[error("row {row}, field {field}: {reason}")]
    Field {
        row: usize,
        field: &'static str,
        reason: String,
    },
    #[error("row {row}: timestamp {timestamp} does not follow previous row {previous}")]
    OutOfOrder {
        row: usize,
        timestamp: NaiveDateTime,
        previous: NaiveDateTime,
    },
}

impl IngestError {
    fn field(row: usize, field: &'static str, reason: impl Into<String>) -> Self {
        IngestError::Field {
            row,
            field,
            reason: reason.into(),
        }
    }
}

fn parse_date(text: &str, row: usize) -> Result<NaiveDate, IngestError> {
    let mut parts = text.split('/');
    let mut next = |what: &str| -> Result<u32, IngestError> {
        parts
            .next()
            .filter(|p| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|p| p.parse::<u32>().ok())
            .ok_or_else(|| IngestError::field(row, "Date", format!("bad {what} in {text:?}")))
    };
    let day = next("day")?;
    let month = next("month")?;
    let year = next("year")?;
    if parts.next().is_some() {
        return Err(IngestError::field(row, "Date", format!("trailing data in {text:?}")));
    }
    NaiveDate::from_ymd_opt(year as i32, month, day)
        .ok_or_else(|| IngestError::field(row, "Date", format!("no such date {text:?}")))
}

fn parse_time(text: &str, row: usize) -> Result<NaiveTime, IngestError> {
    let bad = || IngestError::field(row, "Time", format!("expected hh:mm:ss, found {text:?}"));
    let mut parts = text.split(':');
    let mut fields = [0u32; 3];
    for slot in fields.iter_mut() {
        let part = parts.next().ok_or_else(bad)?;
        if part.len() != 2 || !part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        *slot = part.parse().map_err(|_| bad())?;
    }
    if parts.next().is_some() {
        return Err(bad());
    }
    let [h, m, s] = fields;
    if s != 0 {
        return Err(IngestError::field(row, "Time", format!("seconds must be 00, found {text:?}")));
    }
    NaiveTime::from_hms_opt(h, m, s).ok_or_else(bad)
}

fn parse_measurement(text: &str, row: usize, feature: Feature) -> Result<Option<f64>, IngestError> {
    if text == MISSING_MARKER {
        return Ok(None);
    }
    let field = feature.header_name();
    if text.is_empty() {
        return Err(IngestError::field(row, field, "empty field"));
    }
    let value: f64 = text
        .parse()
        .map_err(|_| IngestError::field(row, field, format!("not a number: {text:?}")))?;
    if !value.is_finite() {
        return Err(IngestError::field(row, field, format!("non-finite value {text:?}")));
    }
    if value < 0.0 {
        return Err(IngestError::field(row, field, format!("negative value {text:?}")));
    }
    if feature == Feature::Voltage && value == 0.0 {
        return Err(IngestError::field(row, field, "voltage must be positive"));
    }
    Ok(Some(value))
}

/// Parses one data row (header already skipped). `row_index` is carried
/// into any error for context.
pub fn parse_minute_record(line: &str, row_index: usize) -> Result<MinuteRecord, IngestError> {
    let line = line.strip_suffix('\r').unwrap_or(line);
    let fields: Vec<&str> = line.split(';').collect();
    if fields.len() != FIELD_COUNT {
        return Err(IngestError::FieldCount {
            row: row_index,
            found: fields.len(),
        });
    }
    let date = parse_date(fields[0], row_index)?;
    let time = parse_time(fields[1], row_index)?;
    let mut record = MinuteRecord::missing_at(NaiveDateTime::new(date, time));
    for (feature, text) in Feature::ALL.into_iter().zip(&fields[2..]) {
        record.set(feature, parse_measurement(text, row_index, feature)?);
    }
    Ok(record)
}

/// Counts gathered while loading a dataset file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub row_count: usize,
    /// Missing cells per measurement column, in [`Feature::ALL`] order.
    pub missing: [usize; 7],
    /// Rows where every measurement is missing.
    pub fully_missing_rows: usize,
    /// Places where consecutive rows are more than one minute apart.
    pub gaps: usize,
    pub first: Option<NaiveDateTime>,
    pub last: Option<NaiveDateTime>,
}

impl IngestSummary {
    pub fn missing_for(&self, feature: Feature) -> usize {
        self.missing[feature.index()]
    }
}

/// Streams a dataset file into memory, validating every row.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<(Vec<MinuteRecord>, IngestSummary), IngestError> {
    let path = path.as_ref();
    let io_err = |source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::open(path).map_err(io_err)?;
    let mut reader = BufReader::with_capacity(1 << 20, file);
    let mut line = String::new();

    reader.read_line(&mut line).map_err(io_err)?;
    let header = line.trim_end_matches(['\n', '\r']);
    if header != HEADER {
        return Err(IngestError::Header {
            path: path.to_path_buf(),
            found: header.to_string(),
        });
    }

    let mut records = Vec::new();
    let mut summary = IngestSummary::default();
    let mut row = 0usize;
    loop {
        line.clear();
        if reader.read_line(&mut line).map_err(io_err)? == 0 {
            break;
        }
        let text = line.trim_end_matches(['\n', '\r']);
        if text.is_empty() {
            continue;
        }
        let record = parse_minute_record(text, row)?;
        if let Some(prev) = summary.last {
            if record.timestamp <= prev {
                return Err(IngestError::OutOfOrder {
                    row,
                    timestamp: record.timestamp,
                    previous: prev,
                });
            }
            if record.timestamp - prev != chrono::TimeDelta::minutes(1) {
                summary.gaps += 1;
            }
        } else {
            summary.first = Some(record.timestamp);
        }
        summary.last = Some(record.timestamp);
        let mut missing_here = 0;
        for feature in Feature::ALL {
            if record.get(feature).is_none() {
                summary.missing[feature.index()] += 1;
                missing_here += 1;
            }
        }
        if missing_here == Feature::ALL.len() {
            summary.fully_missing_rows += 1;
        }
        records.push(record);
        row += 1;
    }
    summary.row_count = records.len();
    Ok((records, summary))
}
