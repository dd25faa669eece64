//! Inputs shared by the benchmarks.

use chrono::{Duration, NaiveDate, NaiveDateTime};
use daylite_core::io::building_from_json;
use daylite_core::{Building, WeatherRecord};

/// 3.9 m × 3.5 m test cell with a glazed door on its north wall, at
/// Saint-Pierre (Réunion).
pub const REFERENCE_BUILDING: &str = include_str!("../../core/tests/fixtures/reference_building.json");

pub fn reference_building() -> Building {
    building_from_json(REFERENCE_BUILDING).expect("reference building is valid")
}

/// Minute records from `start`, a clear-sky bell between 06:00 and 18:00.
pub fn clear_days(start: NaiveDateTime, minutes: i64) -> Vec<WeatherRecord> {
    (0..minutes)
        .map(|m| {
            let t = start + Duration::minutes(m);
            let hour = (m % 1440) as f64 / 60.0;
            let s = ((hour - 6.0) / 12.0 * std::f64::consts::PI).sin().max(0.0);
            WeatherRecord::irradiance_only(t, 1000.0 * s, 120.0 * s).expect("valid record")
        })
        .collect()
}

pub fn midwinter_noon() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2009, 6, 21)
        .and_then(|d| d.and_hms_opt(12, 0, 0))
        .expect("valid date")
}
