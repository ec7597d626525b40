//! Synthetic stand-in for the household power file.
//!
//! Produces a file with the same header, calendar span (16/12/2006 17:24 to
//! 26/11/2010 21:02, one row per minute), number formatting and `?` gap
//! rows as the public dataset, with consumption driven by a simple
//! appliance-level household simulation. Used for tests, benchmarks and
//! demos when the real file is not at hand.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::{Datelike, NaiveDate, NaiveDateTime, TimeDelta, Timelike, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ingest::{MinuteRecord, HEADER};

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateConfig {
    pub start: NaiveDateTime,
    /// Number of minute rows to emit.
    pub minutes: usize,
    /// Approximate number of rows to blank out as `?`.
    pub missing_rows: usize,
    pub seed: u64,
}

/// First timestamp of the public dataset.
pub fn dataset_start() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2006, 12, 16)
        .unwrap()
        .and_hms_opt(17, 24, 0)
        .unwrap()
}

/// Rows in the public dataset.
pub const DATASET_ROWS: usize = 2_075_259;

impl Default for SurrogateConfig {
    /// Full-size stand-in matching the public file's span.
    fn default() -> Self {
        SurrogateConfig {
            start: dataset_start(),
            minutes: DATASET_ROWS,
            missing_rows: 25_979,
            seed: 2006,
        }
    }
}

impl SurrogateConfig {
    /// Shorter series with the same start and a proportional gap budget.
    pub fn with_days(days: usize, seed: u64) -> Self {
        let minutes = days * 1440;
        SurrogateConfig {
            minutes,
            missing_rows: minutes / 80,
            seed,
            ..SurrogateConfig::default()
        }
    }
}

struct Appliance {
    remaining: u32,
    level: f64,
}

impl Appliance {
    fn idle() -> Self {
        Appliance {
            remaining: 0,
            level: 0.0,
        }
    }

    fn tick(&mut self) -> f64 {
        if self.remaining == 0 {
            return 0.0;
        }
        self.remaining -= 1;
        self.level
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Presence {
    Asleep,
    Home,
    Out,
}

/// One day's routine, in minutes after midnight.
struct DayPlan {
    wake: u32,
    leave: Option<u32>,
    back: u32,
    sleep: u32,
    /// Multiplier on discretionary load for the whole day.
    intensity: f64,
    laundry_at: Option<u32>,
    /// Minutes of off-peak water heating scheduled for the night.
    heating_minutes: u32,
}

/// Minute-by-minute household simulation.
struct Household {
    rng: ChaCha8Rng,
    /// Slowly varying deviation of discretionary load.
    drift: f64,
    current_day: Option<NaiveDate>,
    plan: DayPlan,
    away_until: Option<NaiveDate>,
    kitchen: Appliance,
    laundry: Appliance,
    heater: Appliance,
    other: Appliance,
    fridge_phase: u32,
}

/// Seasonal multiplier: higher in winter, lower in summer.
fn seasonal(ts: NaiveDateTime) -> f64 {
    let day = ts.ordinal() as f64;
    1.0 + 0.45 * (2.0 * std::f64::consts::PI * (day - 15.0) / 365.25).cos()
}

impl Household {
    fn new(seed: u64) -> Self {
        Household {
            rng: ChaCha8Rng::seed_from_u64(seed),
            drift: 0.0,
            current_day: None,
            plan: DayPlan {
                wake: 420,
                leave: None,
                back: 0,
                sleep: 1380,
                intensity: 1.0,
                laundry_at: None,
                heating_minutes: 0,
            },
            away_until: None,
            kitchen: Appliance::idle(),
            laundry: Appliance::idle(),
            heater: Appliance::idle(),
            other: Appliance::idle(),
            fridge_phase: 0,
        }
    }

    fn normal(&mut self) -> f64 {
        // Box-Muller; one draw per call keeps the stream simple.
        let u1: f64 = self.rng.random_range(f64::EPSILON..1.0);
        let u2: f64 = self.rng.random();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    fn jitter(&mut self, centre: f64, spread: f64) -> u32 {
        (centre + spread * self.normal()).clamp(0.0, 1439.0) as u32
    }

    fn start_day(&mut self, day: NaiveDate) {
        self.current_day = Some(day);
        if self.away_until.is_some_and(|d| day >= d) {
            self.away_until = None;
        }
        if self.away_until.is_none() {
            // Summer holidays in August, occasional short trips otherwise.
            let p = if day.month() == 8 { 0.06 } else { 0.005 };
            if self.rng.random_bool(p) {
                let len = self.rng.random_range(2..if day.month() == 8 { 21 } else { 5 });
                self.away_until = Some(day + TimeDelta::days(len));
            }
        }
        let weekend = matches!(day.weekday(), Weekday::Sat | Weekday::Sun);
        let works = !weekend && self.rng.random_bool(0.7);
        let wake = if weekend { self.jitter(540.0, 45.0) } else { self.jitter(405.0, 25.0) };
        let leave = works.then(|| self.jitter(490.0, 20.0).max(wake + 30));
        let back = self.jitter(1080.0, 60.0);
        let sleep = self.jitter(1390.0, 35.0).max(back + 60).min(1439);
        let intensity = (0.3 * self.normal()).exp();
        let laundry_at = self
            .rng
            .random_bool(if weekend { 0.5 } else { 0.25 })
            .then(|| self.rng.random_range(wake + 30..sleep.max(wake + 31)));
        let heating_minutes = self.rng.random_range(120..300);
        self.plan = DayPlan {
            wake,
            leave,
            back,
            sleep,
            intensity,
            laundry_at,
            heating_minutes,
        };
    }

    fn presence(&self, minute_of_day: u32) -> Presence {
        let p = &self.plan;
        if self.away_until.is_some() {
            Presence::Out
        } else if minute_of_day < p.wake || minute_of_day >= p.sleep {
            Presence::Asleep
        } else if p.leave.is_some_and(|l| minute_of_day >= l && minute_of_day < p.back) {
            Presence::Out
        } else {
            Presence::Home
        }
    }

    fn minute(&mut self, ts: NaiveDateTime) -> MinuteRecord {
        let day = ts.date();
        if self.current_day != Some(day) {
            self.start_day(day);
        }
        let (h, m) = (ts.hour(), ts.minute());
        let minute_of_day = h * 60 + m;
        let presence = self.presence(minute_of_day);
        let season = seasonal(ts);

        // Discretionary load wanders with a memory of a few hours.
        self.drift = 0.995 * self.drift + 0.1 * self.normal();

        let meal = matches!(h, 7 | 12 | 13 | 19 | 20);
        if self.kitchen.remaining == 0 && presence == Presence::Home {
            let p = if meal { 0.0075 } else { 0.0004 };
            if self.rng.random_bool(p) {
                self.kitchen = Appliance {
                    remaining: self.rng.random_range(15..75),
                    level: self.rng.random_range(18.0..38.0),
                };
            }
        }
        if self.laundry.remaining == 0 && self.plan.laundry_at == Some(minute_of_day) {
            self.laundry = Appliance {
                remaining: self.rng.random_range(60..130),
                level: self.rng.random_range(20.0..40.0),
            };
        }
        if self.heater.remaining == 0 {
            // Off-peak water heating from 23:30, daytime reheating after use,
            // air conditioning on summer afternoons.
            let night_slot = !(330..1410).contains(&minute_of_day);
            let summer_afternoon = matches!(ts.month(), 6..=8) && matches!(h, 13..=19);
            let p = if night_slot && self.plan.heating_minutes > 0 {
                0.05
            } else if presence == Presence::Home && summer_afternoon {
                0.01
            } else if presence == Presence::Home {
                0.006
            } else {
                0.001
            };
            if self.rng.random_bool(p) {
                let len = self.rng.random_range(20..90);
                if night_slot {
                    self.plan.heating_minutes = self.plan.heating_minutes.saturating_sub(len);
                }
                self.heater = Appliance {
                    remaining: len,
                    level: self.rng.random_range(16.5..18.5),
                };
            }
        }

        self.fridge_phase = (self.fridge_phase + 1) % 47;
        let fridge = if self.fridge_phase < 18 { 1.0 } else { 0.0 };
        let sm1 = self.kitchen.tick().round();
        let sm2 = (self.laundry.tick() + fridge).round();
        // Thermostat electronics show as 1 Wh whenever the heater idles at home.
        let standby = if presence == Presence::Out { 0.0 } else { 1.0 };
        let sm3 = match self.heater.tick() {
            0.0 => standby,
            v => v.round(),
        };

        // Unmetered loads: lighting and electronics while home, plus bursts
        // from ovens, heaters, vacuum cleaners and the like.
        let evening = (1020..1380).contains(&minute_of_day);
        if self.other.remaining == 0 && presence == Presence::Home {
            let p = if evening { 0.036 } else { 0.024 } * self.plan.intensity;
            if self.rng.random_bool(p.min(1.0)) {
                self.other = Appliance {
                    remaining: self.rng.random_range(3..40),
                    level: self.rng.random_range(0.6..2.6) * season,
                };
            }
        }
        let background = match presence {
            Presence::Home => {
                let lights = if evening { 0.25 } else { 0.1 };
                (0.1 + lights * season) * (1.0 + 0.3 * self.drift).max(0.2)
            }
            Presence::Asleep => 0.04 * season,
            Presence::Out => 0.0,
        };
        let unmetered = 0.19 + background + self.other.tick() + 0.03 * self.normal().abs();
        let active = unmetered + (sm1 + sm2 + sm3) * 60.0 / 1000.0;
        let active = (active * 1000.0).round() / 1000.0;
        let motor = if self.laundry.remaining > 0 || self.fridge_phase < 18 { 0.12 } else { 0.0 };
        let reactive = (0.05 + motor + 0.04 * self.normal()).max(0.0);
        let reactive = (reactive * 1000.0).round() / 1000.0;

        let daily_swing = 2.0 * (2.0 * std::f64::consts::PI * (h as f64 + m as f64 / 60.0 - 4.0) / 24.0).cos();
        let voltage = 241.8 + daily_swing - 0.8 * active + 2.5 * self.normal();
        let voltage = (voltage * 100.0).round() / 100.0;
        let apparent = (active * active + reactive * reactive).sqrt();
        let intensity = ((apparent * 1000.0 / voltage) / 0.2).round() * 0.2;
        let intensity = (intensity * 10.0).round() / 10.0;

        MinuteRecord {
            timestamp: ts,
            global_active_power: Some(active),
            global_reactive_power: Some(reactive),
            voltage: Some(voltage),
            global_intensity: Some(intensity),
            sub_metering_1: Some(sm1),
            sub_metering_2: Some(sm2),
            sub_metering_3: Some(sm3),
        }
    }
}

/// Start offsets and lengths of blanked-out row blocks.
fn missing_blocks(cfg: &SurrogateConfig) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_9a95);
    let mut blocks = Vec::new();
    let mut budget = cfg.missing_rows.min(cfg.minutes / 4);
    while budget > 0 {
        // Mostly short dropouts with the occasional multi-day outage.
        let len = if rng.random_bool(0.1) {
            rng.random_range(600..6000)
        } else {
            rng.random_range(1..120)
        }
        .min(budget);
        let start = rng.random_range(0..cfg.minutes.saturating_sub(len).max(1));
        blocks.push((start, len));
        budget -= len;
    }
    blocks.sort_unstable();
    blocks
}

/// Iterator over the rows of a stand-in dataset.
pub fn surrogate_records(cfg: &SurrogateConfig) -> impl Iterator<Item = MinuteRecord> + '_ {
    let mut household = Household::new(cfg.seed);
    let mut missing = vec![false; cfg.minutes];
    for (start, len) in missing_blocks(cfg) {
        for flag in &mut missing[start..(start + len).min(cfg.minutes)] {
            *flag = true;
        }
    }
    (0..cfg.minutes).map(move |i| {
        let ts = cfg.start + TimeDelta::minutes(i as i64);
        // The simulation always advances so gaps do not shift later values.
        let record = household.minute(ts);
        if missing[i] {
            MinuteRecord::missing_at(ts)
        } else {
            record
        }
    })
}

fn format_row(r: &MinuteRecord, out: &mut String) {
    use std::fmt::Write as _;
    let ts = r.timestamp;
    let _ = write!(
        out,
        "{}/{}/{};{:02}:{:02}:00",
        ts.day(),
        ts.month(),
        ts.year(),
        ts.hour(),
        ts.minute()
    );
    let fields = [
        (r.global_active_power, 3),
        (r.global_reactive_power, 3),
        (r.voltage, 3),
        (r.global_intensity, 3),
        (r.sub_metering_1, 3),
        (r.sub_metering_2, 3),
        (r.sub_metering_3, 3),
    ];
    for (v, decimals) in fields {
        match v {
            Some(v) => {
                let _ = write!(out, ";{v:.decimals$}");
            }
            None => out.push_str(";?"),
        }
    }
    out.push('\n');
}

/// Writes a stand-in dataset file in the public file's format.
pub fn write_surrogate_dataset(path: &Path, cfg: &SurrogateConfig) -> std::io::Result<()> {
    let mut w = BufWriter::with_capacity(1 << 20, File::create(path)?);
    writeln!(w, "{HEADER}")?;
    let mut line = String::with_capacity(96);
    for record in surrogate_records(cfg) {
        line.clear();
        format_row(&record, &mut line);
        w.write_all(line.as_bytes())?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{load_dataset, Feature};

    #[test]
    fn small_file_parses_and_matches_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.txt");
        let cfg = SurrogateConfig::with_days(3, 1);
        write_surrogate_dataset(&path, &cfg).unwrap();
        let (records, summary) = load_dataset(&path).unwrap();
        assert_eq!(summary.row_count, 3 * 1440);
        assert_eq!(records[0].timestamp, dataset_start());
        assert_eq!(summary.gaps, 0);
        let gap = summary.missing_for(Feature::GlobalActivePower);
        assert!(gap > 0);
        assert!(summary.missing.iter().all(|&m| m == gap));
        assert_eq!(summary.fully_missing_rows, gap);
        let first = std::fs::read_to_string(&path).unwrap();
        assert!(first.lines().nth(1).unwrap().starts_with("16/12/2006;17:24:00;"));
    }

    #[test]
    fn deterministic_for_a_seed() {
        let cfg = SurrogateConfig::with_days(1, 7);
        let a: Vec<_> = surrogate_records(&cfg).collect();
        let b: Vec<_> = surrogate_records(&cfg).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn full_span_ends_where_the_public_file_ends() {
        let cfg = SurrogateConfig::default();
        let last = cfg.start + TimeDelta::minutes(cfg.minutes as i64 - 1);
        let expected = NaiveDate::from_ymd_opt(2010, 11, 26).unwrap().and_hms_opt(21, 2, 0).unwrap();
        assert_eq!(last, expected);
    }
}
