//! Cleaning and shaping of the minute stream: gap filling, hourly
//! aggregation, chronological splitting and min-max scaling.

use chrono::{NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{Feature, MinuteRecord};

#[derive(Debug, Error, PartialEq)]
pub enum PreprocessError {
    #[error("column {0} is entirely missing and cannot be imputed")]
    Unimputable(Feature),
    #[error("record {index} ({timestamp}) still has a missing {feature}")]
    MissingValue {
        index: usize,
        timestamp: NaiveDateTime,
        feature: Feature,
    },
    #[error("record {index} ({timestamp}) is not after its predecessor")]
    Unordered {
        index: usize,
        timestamp: NaiveDateTime,
    },
    #[error("train fraction {0} must lie strictly between 0 and 1")]
    BadFraction(f64),
    #[error("split of {len} records at fraction {fraction} leaves one side empty")]
    DegenerateSplit { len: usize, fraction: f64 },
    #[error("cannot fit scaling parameters on an empty training series")]
    EmptyTrain,
    #[error("feature {0} was not fitted")]
    UnfittedFeature(Feature),
}

/// Cells filled per column, in [`Feature::ALL`] order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImputationReport {
    pub imputed: [usize; 7],
}

impl ImputationReport {
    pub fn total(&self) -> usize {
        self.imputed.iter().sum()
    }
}

/// Fills each missing cell with the mean of the nearest earlier and later
/// observed values of the same column. Leading and trailing gaps copy the
/// single available neighbour.
pub fn impute_missing(
    mut records: Vec<MinuteRecord>,
) -> Result<(Vec<MinuteRecord>, ImputationReport), PreprocessError> {
    let mut report = ImputationReport::default();
    if records.is_empty() {
        return Ok((records, report));
    }
    for feature in Feature::ALL {
        let mut previous: Option<f64> = None;
        let mut gap_start: Option<usize> = None;
        for i in 0..records.len() {
            match records[i].get(feature) {
                None => {
                    gap_start.get_or_insert(i);
                }
                Some(value) => {
                    if let Some(start) = gap_start.take() {
                        let fill = match previous {
                            Some(p) => (p + value) / 2.0,
                            None => value,
                        };
                        for r in &mut records[start..i] {
                            r.set(feature, Some(fill));
                        }
                        report.imputed[feature.index()] += i - start;
                    }
                    previous = Some(value);
                }
            }
        }
        if let Some(start) = gap_start {
            let fill = previous.ok_or(PreprocessError::Unimputable(feature))?;
            for r in &mut records[start..] {
                r.set(feature, Some(fill));
            }
            report.imputed[feature.index()] += records.len() - start;
        }
    }
    Ok((records, report))
}

/// Aggregate of one calendar hour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HourlyRecord {
    pub hour_start: NaiveDateTime,
    /// Sum of the minute kilowatt readings.
    pub global_active_power: f64,
    pub global_reactive_power: f64,
    /// Mean volts over the contributing minutes.
    pub voltage: f64,
    /// Sum of the minute ampere readings.
    pub global_intensity: f64,
    pub sub_metering_1: f64,
    pub sub_metering_2: f64,
    pub sub_metering_3: f64,
    pub minute_count: u32,
}

impl HourlyRecord {
    pub fn get(&self, feature: Feature) -> f64 {
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

    pub fn sub_meters(&self) -> [f64; 3] {
        [self.sub_metering_1, self.sub_metering_2, self.sub_metering_3]
    }
}

pub fn truncate_to_hour(ts: NaiveDateTime) -> NaiveDateTime {
    ts.date().and_hms_opt(ts.hour(), 0, 0).expect("hour is valid")
}

struct HourAccumulator {
    hour_start: NaiveDateTime,
    sums: [f64; 7],
    minutes: u32,
}

impl HourAccumulator {
    fn new(hour_start: NaiveDateTime) -> Self {
        HourAccumulator {
            hour_start,
            sums: [0.0; 7],
            minutes: 0,
        }
    }

    fn finish(self) -> HourlyRecord {
        let s = self.sums;
        HourlyRecord {
            hour_start: self.hour_start,
            global_active_power: s[0],
            global_reactive_power: s[1],
            voltage: s[2] / self.minutes as f64,
            global_intensity: s[3],
            sub_metering_1: s[4],
            sub_metering_2: s[5],
            sub_metering_3: s[6],
            minute_count: self.minutes,
        }
    }
}

/// Bins complete minute records by their calendar hour (floor). Every hour
/// holding at least one minute yields a record; partial hours keep their
/// actual minute count.
pub fn resample_hourly(records: &[MinuteRecord]) -> Result<Vec<HourlyRecord>, PreprocessError> {
    let mut out = Vec::with_capacity(records.len() / 60 + 2);
    let mut current: Option<HourAccumulator> = None;
    let mut previous: Option<NaiveDateTime> = None;
    for (index, record) in records.iter().enumerate() {
        if previous.is_some_and(|p| record.timestamp <= p) {
            return Err(PreprocessError::Unordered {
                index,
                timestamp: record.timestamp,
            });
        }
        previous = Some(record.timestamp);
        let hour = truncate_to_hour(record.timestamp);
        if current.as_ref().is_none_or(|acc| acc.hour_start != hour) {
            if let Some(done) = current.replace(HourAccumulator::new(hour)) {
                out.push(done.finish());
            }
        }
        let acc = current.as_mut().expect("accumulator present");
        for feature in Feature::ALL {
            let value = record.get(feature).ok_or(PreprocessError::MissingValue {
                index,
                timestamp: record.timestamp,
                feature,
            })?;
            acc.sums[feature.index()] += value;
        }
        acc.minutes += 1;
    }
    if let Some(done) = current {
        out.push(done.finish());
    }
    Ok(out)
}

/// Where a series was cut into train and test parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub boundary_index: usize,
}

impl SplitSpec {
    pub fn new(len: usize, train_fraction: f64) -> Result<Self, PreprocessError> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(PreprocessError::BadFraction(train_fraction));
        }
        let boundary_index = (train_fraction * len as f64).floor() as usize;
        if boundary_index == 0 || boundary_index >= len {
            return Err(PreprocessError::DegenerateSplit {
                len,
                fraction: train_fraction,
            });
        }
        Ok(SplitSpec {
            train_fraction,
            boundary_index,
        })
    }
}

/// Cuts `series` into a leading train part and trailing test part.
pub fn split_chronological<T>(
    series: &[T],
    train_fraction: f64,
) -> Result<(&[T], &[T], SplitSpec), PreprocessError> {
    let spec = SplitSpec::new(series.len(), train_fraction)?;
    let (train, test) = series.split_at(spec.boundary_index);
    Ok((train, test, spec))
}

/// Min/max of one feature over the training slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureRange {
    pub feature: Feature,
    pub min: f64,
    pub max: f64,
    /// Set when `max == min`; such a feature always scales to 0.
    pub constant: bool,
}

impl FeatureRange {
    pub fn scale(&self, value: f64) -> f64 {
        if self.constant {
            0.0
        } else {
            (value - self.min) / (self.max - self.min)
        }
    }

    pub fn inverse_scale(&self, scaled: f64) -> f64 {
        if self.constant {
            self.min
        } else {
            scaled * (self.max - self.min) + self.min
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub ranges: Vec<FeatureRange>,
    /// Number of training records the ranges were fitted on.
    pub fitted_rows: usize,
}

impl NormalizationParams {
    pub fn range(&self, feature: Feature) -> Result<&FeatureRange, PreprocessError> {
        self.ranges
            .iter()
            .find(|r| r.feature == feature)
            .ok_or(PreprocessError::UnfittedFeature(feature))
    }

    pub fn constant_features(&self) -> Vec<Feature> {
        self.ranges.iter().filter(|r| r.constant).map(|r| r.feature).collect()
    }

    /// Test values outside the fitted range are not clamped.
    pub fn scale(&self, feature: Feature, value: f64) -> Result<f64, PreprocessError> {
        Ok(self.range(feature)?.scale(value))
    }

    pub fn inverse_scale(&self, feature: Feature, scaled: f64) -> Result<f64, PreprocessError> {
        Ok(self.range(feature)?.inverse_scale(scaled))
    }

    /// Scales one feature across a series.
    pub fn scale_series(
        &self,
        series: &[HourlyRecord],
        feature: Feature,
    ) -> Result<Vec<f64>, PreprocessError> {
        let range = self.range(feature)?;
        Ok(series.iter().map(|r| range.scale(r.get(feature))).collect())
    }

    /// Scales the given features of every record into row vectors.
    pub fn scale_rows(
        &self,
        series: &[HourlyRecord],
        features: &[Feature],
    ) -> Result<Vec<Vec<f64>>, PreprocessError> {
        let ranges = features
            .iter()
            .map(|&f| self.range(f))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(series
            .iter()
            .map(|r| ranges.iter().map(|range| range.scale(r.get(range.feature))).collect())
            .collect())
    }
}

/// Fits per-feature min/max on the training series only.
pub fn fit_minmax(
    train: &[HourlyRecord],
    features: &[Feature],
) -> Result<NormalizationParams, PreprocessError> {
    if train.is_empty() {
        return Err(PreprocessError::EmptyTrain);
    }
    let ranges = features
        .iter()
        .map(|&feature| {
            let (min, max) = train
                .iter()
                .map(|r| r.get(feature))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            FeatureRange {
                feature,
                min,
                max,
                constant: max == min,
            }
        })
        .collect();
    Ok(NormalizationParams {
        ranges,
        fitted_rows: train.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{NaiveDate, TimeDelta};
    use proptest::prelude::*;

    fn ts(h: u32, m: u32) -> NaiveDateTime {
        NaiveDate::from_ymd_opt(2006, 12, 16).unwrap().and_hms_opt(h, m, 0).unwrap()
    }

    fn minute(t: NaiveDateTime, gap: Option<f64>) -> MinuteRecord {
        MinuteRecord {
            timestamp: t,
            global_active_power: gap,
            global_reactive_power: Some(0.1),
            voltage: Some(240.0),
            global_intensity: Some(4.0),
            sub_metering_1: Some(0.0),
            sub_metering_2: Some(1.0),
            sub_metering_3: Some(17.0),
        }
    }

    fn hourly(gap: f64, voltage: f64) -> HourlyRecord {
        HourlyRecord {
            hour_start: ts(0, 0),
            global_active_power: gap,
            global_reactive_power: 0.0,
            voltage,
            global_intensity: 0.0,
            sub_metering_1: 0.0,
            sub_metering_2: 0.0,
            sub_metering_3: 0.0,
            minute_count: 60,
        }
    }

    fn column(records: &[MinuteRecord]) -> Vec<f64> {
        records.iter().map(|r| r.global_active_power.unwrap()).collect()
    }

    #[test]
    fn impute_midpoint() {
        let recs = vec![
            minute(ts(0, 0), Some(2.0)),
            minute(ts(0, 1), None),
            minute(ts(0, 2), Some(4.0)),
        ];
        let (out, report) = impute_missing(recs).unwrap();
        assert_eq!(column(&out), [2.0, 3.0, 4.0]);
        assert_eq!(report.imputed, [1, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn impute_identity() {
        let recs = vec![minute(ts(0, 0), Some(2.0)), minute(ts(0, 1), Some(7.0))];
        let (out, report) = impute_missing(recs.clone()).unwrap();
        assert_eq!(out, recs);
        assert_eq!(report.total(), 0);
    }

    #[test]
    fn impute_boundaries() {
        let recs = vec![
            minute(ts(0, 0), None),
            minute(ts(0, 1), None),
            minute(ts(0, 2), Some(5.0)),
            minute(ts(0, 3), Some(1.0)),
            minute(ts(0, 4), None),
        ];
        let (out, report) = impute_missing(recs).unwrap();
        assert_eq!(column(&out), [5.0, 5.0, 5.0, 1.0, 1.0]);
        assert_eq!(report.imputed[0], 3);
    }

    #[test]
    fn impute_long_gap_uses_gap_neighbours() {
        let recs = vec![
            minute(ts(0, 0), Some(1.0)),
            minute(ts(0, 1), None),
            minute(ts(0, 2), None),
            minute(ts(0, 3), None),
            minute(ts(0, 4), Some(2.0)),
        ];
        let (out, _) = impute_missing(recs).unwrap();
        assert_eq!(column(&out), [1.0, 1.5, 1.5, 1.5, 2.0]);
    }

    #[test]
    fn impute_entirely_missing_column() {
        let recs = vec![minute(ts(0, 0), None), minute(ts(0, 1), None)];
        assert_eq!(
            impute_missing(recs).unwrap_err(),
            PreprocessError::Unimputable(Feature::GlobalActivePower)
        );
    }

    #[test]
    fn resample_constant_hour() {
        let recs: Vec<_> = (0..60).map(|m| minute(ts(3, m), Some(1.0))).collect();
        let hours = resample_hourly(&recs).unwrap();
        assert_eq!(hours.len(), 1);
        assert_eq!(hours[0].global_active_power, 60.0);
        assert_eq!(hours[0].minute_count, 60);
        assert_eq!(hours[0].voltage, 240.0);
        assert_eq!(hours[0].hour_start, ts(3, 0));
    }

    #[test]
    fn resample_ninety_minutes_against_loop() {
        // 17:24 through 18:53 inclusive.
        let start = ts(17, 24);
        let recs: Vec<_> = (0..90)
            .map(|i| {
                let mut r = minute(start + TimeDelta::minutes(i), Some(0.5 + (i % 7) as f64 * 0.25));
                r.voltage = Some(230.0 + (i % 5) as f64);
                r.sub_metering_3 = Some((i % 3) as f64);
                r
            })
            .collect();
        let hours = resample_hourly(&recs).unwrap();
        assert_eq!(hours.len(), 2);
        assert_eq!((hours[0].minute_count, hours[1].minute_count), (36, 54));
        assert_eq!(hours[1].hour_start, ts(18, 0));

        for (k, hour) in hours.iter().enumerate() {
            let (lo, hi) = if k == 0 { (0, 36) } else { (36, 90) };
            let mut gap = 0.0;
            let mut volts = 0.0;
            let mut sm3 = 0.0;
            for r in &recs[lo..hi] {
                gap += r.global_active_power.unwrap();
                volts += r.voltage.unwrap();
                sm3 += r.sub_metering_3.unwrap();
            }
            assert_eq!(hour.global_active_power, gap);
            assert_eq!(hour.voltage, volts / (hi - lo) as f64);
            assert_eq!(hour.sub_metering_3, sm3);
        }
    }

    #[test]
    fn resample_rejects_missing_and_empty_is_ok() {
        assert!(resample_hourly(&[]).unwrap().is_empty());
        let recs = vec![minute(ts(0, 0), None)];
        assert!(matches!(
            resample_hourly(&recs),
            Err(PreprocessError::MissingValue { index: 0, .. })
        ));
    }

    #[test]
    fn resample_skips_empty_hours() {
        let recs = vec![minute(ts(1, 59), Some(1.0)), minute(ts(4, 0), Some(2.0))];
        let hours = resample_hourly(&recs).unwrap();
        assert_eq!(hours.len(), 2);
        assert_eq!(hours[0].hour_start, ts(1, 0));
        assert_eq!(hours[1].hour_start, ts(4, 0));
    }

    #[test]
    fn split_counts() {
        let series: Vec<u32> = (0..34_589).collect();
        let (train, test, spec) = split_chronological(&series, 0.5).unwrap();
        assert_eq!((train.len(), test.len()), (17_294, 17_295));
        assert_eq!(spec.boundary_index, 17_294);

        let (a, b, _) = split_chronological(&[1, 2], 0.5).unwrap();
        assert_eq!((a, b), (&[1][..], &[2][..]));

        let ten: Vec<u32> = (0..10).collect();
        let (a, b, _) = split_chronological(&ten, 0.3).unwrap();
        assert_eq!((a.len(), b.len()), (3, 7));
        assert_eq!([a, b].concat(), ten);
    }

    #[test]
    fn split_errors() {
        assert!(matches!(split_chronological(&[1], 0.5), Err(PreprocessError::DegenerateSplit { .. })));
        assert!(matches!(split_chronological(&[1, 2, 3], 0.2), Err(PreprocessError::DegenerateSplit { .. })));
        assert!(matches!(split_chronological(&[1, 2], 1.0), Err(PreprocessError::BadFraction(_))));
        assert!(matches!(split_chronological(&[1, 2], 0.0), Err(PreprocessError::BadFraction(_))));
        assert!(matches!(split_chronological(&[1, 2], f64::NAN), Err(PreprocessError::BadFraction(_))));
    }

    #[test]
    fn fit_simple_and_constant() {
        let train: Vec<_> = [2.0, 4.0, 10.0].iter().map(|&v| hourly(v, 7.0)).collect();
        let params = fit_minmax(&train, &[Feature::GlobalActivePower, Feature::Voltage]).unwrap();
        let gap = params.range(Feature::GlobalActivePower).unwrap();
        assert_eq!((gap.min, gap.max, gap.constant), (2.0, 10.0, false));
        assert_eq!(params.constant_features(), vec![Feature::Voltage]);
        assert_eq!(params.scale(Feature::Voltage, 123.0).unwrap(), 0.0);
        assert_eq!(params.fitted_rows, 3);
        assert_eq!(fit_minmax(&[], &[Feature::Voltage]).unwrap_err(), PreprocessError::EmptyTrain);
        assert_eq!(
            params.scale(Feature::SubMetering1, 1.0).unwrap_err(),
            PreprocessError::UnfittedFeature(Feature::SubMetering1)
        );
    }

    #[test]
    fn fit_against_linear_scan() {
        let values = [(3.5, 231.0), (1.25, 244.5), (9.0, 238.0), (0.75, 229.25), (4.0, 250.0)];
        let train: Vec<_> = values.iter().map(|&(g, v)| hourly(g, v)).collect();
        let params = fit_minmax(&train, &[Feature::GlobalActivePower, Feature::Voltage]).unwrap();
        let mut lo = [f64::MAX; 2];
        let mut hi = [f64::MIN; 2];
        for &(g, v) in &values {
            for (k, x) in [g, v].into_iter().enumerate() {
                if x < lo[k] {
                    lo[k] = x;
                }
                if x > hi[k] {
                    hi[k] = x;
                }
            }
        }
        for (k, f) in [Feature::GlobalActivePower, Feature::Voltage].into_iter().enumerate() {
            let r = params.range(f).unwrap();
            assert_eq!((r.min, r.max), (lo[k], hi[k]));
        }
    }

    #[test]
    fn scale_endpoints_and_passthrough() {
        let r = FeatureRange {
            feature: Feature::GlobalActivePower,
            min: 2.0,
            max: 10.0,
            constant: false,
        };
        assert_eq!(r.scale(2.0), 0.0);
        assert_eq!(r.scale(10.0), 1.0);
        assert_eq!(r.scale(4.0), 0.25);
        assert_eq!(r.scale(12.0), 1.25);
        assert_eq!(r.scale(0.0), -0.25);
    }

    #[test]
    fn params_ignore_test_slice() {
        let mut series: Vec<_> = (0..10).map(|i| hourly(i as f64, 230.0 + i as f64)).collect();
        let (train, _, _) = split_chronological(&series, 0.5).unwrap();
        let before = fit_minmax(train, &Feature::ALL).unwrap();
        series[7].global_active_power = 1e6;
        series[9].voltage = 1.0;
        let (train, _, _) = split_chronological(&series, 0.5).unwrap();
        assert_eq!(fit_minmax(train, &Feature::ALL).unwrap(), before);
    }

    proptest! {
        #[test]
        fn scale_round_trip(
            min in -1e3f64..1e3,
            width in 1e-3f64..1e4,
            values in prop::collection::vec(-1e4f64..1e4, 1000),
        ) {
            let r = FeatureRange { feature: Feature::GlobalActivePower, min, max: min + width, constant: false };
            for v in values {
                let back = r.inverse_scale(r.scale(v));
                prop_assert!((v - back).abs() < 1e-12 * v.abs().max(1.0), "{v} -> {back}");
            }
        }

        #[test]
        fn resample_conserves_minutes_and_power(
            gaps in prop::collection::vec((1i64..200, prop::option::of(0.0f64..8.0)), 1..400),
        ) {
            let mut t = ts(0, 0);
            let mut recs = Vec::new();
            for (step, value) in gaps {
                t += TimeDelta::minutes(step);
                recs.push(minute(t, value));
            }
            let Ok((recs, _)) = impute_missing(recs) else { return Ok(()); };
            let hours = resample_hourly(&recs).unwrap();
            let minutes: u32 = hours.iter().map(|h| h.minute_count).sum();
            prop_assert_eq!(minutes as usize, recs.len());
            prop_assert!(hours.iter().all(|h| (1..=60).contains(&h.minute_count)));
            prop_assert!(hours.windows(2).all(|w| w[0].hour_start < w[1].hour_start));
            let total_minutes: f64 = recs.iter().map(|r| r.global_active_power.unwrap()).sum();
            let total_hours: f64 = hours.iter().map(|h| h.global_active_power).sum();
            prop_assert!((total_minutes - total_hours).abs() <= 1e-6 * total_minutes.abs().max(1.0));
            prop_assert_eq!(resample_hourly(&recs).unwrap(), hours);
        }
    }
}
