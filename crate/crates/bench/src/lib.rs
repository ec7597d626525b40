//! Shared fixtures for the benchmarks.

use iob_core::synthetic::{surrogate_records, SurrogateConfig};
use iob_core::{impute_missing, resample_hourly, HourlyRecord, MinuteRecord};

/// `days` of synthetic minute rows.
pub fn minute_rows(days: usize) -> Vec<MinuteRecord> {
    surrogate_records(&SurrogateConfig::with_days(days, 11)).collect()
}

/// `days` of synthetic data resampled to complete hourly records.
pub fn hourly_rows(days: usize) -> Vec<HourlyRecord> {
    let (complete, _) = impute_missing(minute_rows(days)).expect("synthetic data imputes");
    resample_hourly(&complete).expect("complete rows resample")
}
