//! Historical-average decision rule.
//!
//! A predicted hour that strictly exceeds the household's average for the
//! same hour of day, month and weekday triggers a warning and is capped at
//! that average. The amount above the cap is counted as saved.

use std::collections::BTreeMap;
use std::fmt;

use chrono::{Datelike, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::preprocess::HourlyRecord;

#[derive(Debug, Error, PartialEq)]
pub enum DecisionError {
    #[error("cannot build a baseline from an empty history")]
    EmptyHistory,
    #[error("{what} must be a finite non-negative number, got {value}")]
    InvalidInput { what: &'static str, value: f64 },
    #[error("window inputs differ in length: {hours} hours, {predicted} predictions, {actual} actuals")]
    LengthMismatch {
        hours: usize,
        predicted: usize,
        actual: usize,
    },
}

/// Mean and sample count of one baseline group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupStat {
    pub mean: f64,
    pub count: usize,
}

#[derive(Default)]
struct Accumulator {
    sum: f64,
    count: usize,
}

impl Accumulator {
    fn add(&mut self, v: f64) {
        self.sum += v;
        self.count += 1;
    }

    fn stat(&self) -> GroupStat {
        GroupStat {
            mean: self.sum / self.count as f64,
            count: self.count,
        }
    }
}

/// Key of the finest baseline level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroupKey {
    /// 0-23.
    pub hour: u8,
    /// 1-12.
    pub month: u8,
    /// 0 = Monday .. 6 = Sunday.
    pub weekday: u8,
}

impl GroupKey {
    pub fn of(ts: NaiveDateTime) -> Self {
        GroupKey {
            hour: ts.hour() as u8,
            month: ts.month() as u8,
            weekday: ts.weekday().num_days_from_monday() as u8,
        }
    }
}

/// Which level of the fallback chain produced a baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineLevel {
    HourMonthWeekday,
    HourWeekday,
    Hour,
    Global,
}

impl BaselineLevel {
    pub fn name(self) -> &'static str {
        match self {
            BaselineLevel::HourMonthWeekday => "hour_month_weekday",
            BaselineLevel::HourWeekday => "hour_weekday",
            BaselineLevel::Hour => "hour",
            BaselineLevel::Global => "global",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            BaselineLevel::HourMonthWeekday,
            BaselineLevel::HourWeekday,
            BaselineLevel::Hour,
            BaselineLevel::Global,
        ]
        .into_iter()
        .find(|l| l.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedBaseline {
    pub mean: f64,
    pub count: usize,
    pub level: BaselineLevel,
}

/// Mean hourly global active power per (hour, month, weekday) group, with
/// coarser fallbacks for groups absent from the history.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineTable {
    pub by_hour_month_weekday: BTreeMap<GroupKey, GroupStat>,
    pub by_hour_weekday: BTreeMap<(u8, u8), GroupStat>,
    pub by_hour: BTreeMap<u8, GroupStat>,
    pub global: GroupStat,
}

impl BaselineTable {
    pub fn resolve(&self, hour_start: NaiveDateTime) -> ResolvedBaseline {
        let key = GroupKey::of(hour_start);
        let found = |s: &GroupStat, level| ResolvedBaseline {
            mean: s.mean,
            count: s.count,
            level,
        };
        if let Some(s) = self.by_hour_month_weekday.get(&key) {
            return found(s, BaselineLevel::HourMonthWeekday);
        }
        if let Some(s) = self.by_hour_weekday.get(&(key.hour, key.weekday)) {
            return found(s, BaselineLevel::HourWeekday);
        }
        if let Some(s) = self.by_hour.get(&key.hour) {
            return found(s, BaselineLevel::Hour);
        }
        found(&self.global, BaselineLevel::Global)
    }
}

/// Builds the baseline from training history only.
pub fn build_baseline(train: &[HourlyRecord]) -> Result<BaselineTable, DecisionError> {
    if train.is_empty() {
        return Err(DecisionError::EmptyHistory);
    }
    let mut fine: BTreeMap<GroupKey, Accumulator> = BTreeMap::new();
    let mut hour_weekday: BTreeMap<(u8, u8), Accumulator> = BTreeMap::new();
    let mut hour: BTreeMap<u8, Accumulator> = BTreeMap::new();
    let mut global = Accumulator::default();
    for r in train {
        let key = GroupKey::of(r.hour_start);
        let v = r.global_active_power;
        fine.entry(key).or_default().add(v);
        hour_weekday.entry((key.hour, key.weekday)).or_default().add(v);
        hour.entry(key.hour).or_default().add(v);
        global.add(v);
    }
    Ok(BaselineTable {
        by_hour_month_weekday: fine.into_iter().map(|(k, a)| (k, a.stat())).collect(),
        by_hour_weekday: hour_weekday.into_iter().map(|(k, a)| (k, a.stat())).collect(),
        by_hour: hour.into_iter().map(|(k, a)| (k, a.stat())).collect(),
        global: global.stat(),
    })
}

/// Quantity counted as saved on a warning hour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SavingsBasis {
    /// `max(actual - baseline, 0)`: what the household would have used above the cap.
    #[default]
    Actual,
    /// `max(predicted - baseline, 0)`.
    Predicted,
}

impl SavingsBasis {
    pub fn name(self) -> &'static str {
        match self {
            SavingsBasis::Actual => "actual",
            SavingsBasis::Predicted => "predicted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub hour_start: NaiveDateTime,
    pub predicted: f64,
    pub baseline: f64,
    pub baseline_level: BaselineLevel,
    pub actual: f64,
    pub warning: bool,
    /// Consumption cap, present only on warning hours.
    pub cap: Option<f64>,
    pub saved: f64,
}

fn check_input(what: &'static str, value: f64) -> Result<f64, DecisionError> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(DecisionError::InvalidInput { what, value })
    }
}

/// Applies the rule with savings measured on actual consumption.
pub fn decide(
    predicted: f64,
    actual: f64,
    hour_start: NaiveDateTime,
    table: &BaselineTable,
) -> Result<DecisionRecord, DecisionError> {
    decide_with(predicted, actual, hour_start, table, SavingsBasis::Actual)
}

pub fn decide_with(
    predicted: f64,
    actual: f64,
    hour_start: NaiveDateTime,
    table: &BaselineTable,
    basis: SavingsBasis,
) -> Result<DecisionRecord, DecisionError> {
    let predicted = check_input("predicted consumption", predicted)?;
    let actual = check_input("actual consumption", actual)?;
    let resolved = table.resolve(hour_start);
    let baseline = resolved.mean;
    let warning = predicted > baseline;
    let saved = if warning {
        let measured = match basis {
            SavingsBasis::Actual => actual,
            SavingsBasis::Predicted => predicted,
        };
        (measured - baseline).max(0.0)
    } else {
        0.0
    };
    Ok(DecisionRecord {
        hour_start,
        predicted,
        baseline,
        baseline_level: resolved.level,
        actual,
        warning,
        cap: warning.then_some(baseline),
        saved,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SavingsReport {
    pub hours: usize,
    pub warnings: usize,
    pub total_saved: f64,
    pub basis: SavingsBasis,
}

/// Decides every hour of an aligned window and totals the savings.
pub fn run_window(
    hour_starts: &[NaiveDateTime],
    predicted: &[f64],
    actual: &[f64],
    table: &BaselineTable,
    basis: SavingsBasis,
) -> Result<(Vec<DecisionRecord>, SavingsReport), DecisionError> {
    if hour_starts.len() != predicted.len() || predicted.len() != actual.len() {
        return Err(DecisionError::LengthMismatch {
            hours: hour_starts.len(),
            predicted: predicted.len(),
            actual: actual.len(),
        });
    }
    let records = hour_starts
        .iter()
        .zip(predicted.iter().zip(actual))
        .map(|(&h, (&p, &a))| decide_with(p, a, h, table, basis))
        .collect::<Result<Vec<_>, _>>()?;
    let report = SavingsReport {
        hours: records.len(),
        warnings: records.iter().filter(|r| r.warning).count(),
        // Explicit zero start: an empty float sum is -0.0.
        total_saved: records.iter().map(|r| r.saved).fold(0.0, |a, b| a + b),
        basis,
    };
    Ok((records, report))
}

/// An amount of currency held in whole cents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Money {
    pub cents: i64,
}

impl Money {
    pub fn as_f64(self) -> f64 {
        self.cents as f64 / 100.0
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.cents < 0 { "-" } else { "" };
        let c = self.cents.unsigned_abs();
        write!(f, "{sign}{}.{:02}", c / 100, c % 100)
    }
}

/// Cost of `saved_total` units at `tariff` per unit, rounded half-up to
/// whole cents.
pub fn cost_saving(saved_total: f64, tariff: f64) -> Result<Money, DecisionError> {
    let saved_total = check_input("saved total", saved_total)?;
    if !(tariff.is_finite() && tariff > 0.0) {
        return Err(DecisionError::InvalidInput {
            what: "tariff",
            value: tariff,
        });
    }
    let cents = saved_total * tariff * 100.0;
    // Snap away binary noise (e.g. 0.5 stored as 0.49999999999) before the
    // half-up step.
    let snapped = (cents * 1e6).round() / 1e6;
    Ok(Money {
        cents: (snapped + 0.5).floor() as i64,
    })
}
