//! Subset of the NREL TMY2 fixed-width format: the station header and, per
//! hourly record, the date, the global and diffuse horizontal irradiances
//! and the matching illuminances.

use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use chrono::{Duration, NaiveDate, NaiveDateTime};
use serde::Serialize;

use super::{open, IoError};
use crate::solar::WeatherRecord;

pub const TMY2_RECORD_LENGTH: usize = 142;
const HEADER_LENGTH: usize = 59;
const MISSING: u32 = 9999;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tmy2Header {
    pub wban: String,
    pub city: String,
    pub state: String,
    /// Hours from UTC.
    pub timezone: f64,
    pub latitude: f64,
    pub longitude: f64,
    /// Meters.
    pub elevation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tmy2Data {
    pub header: Tmy2Header,
    pub records: Vec<WeatherRecord>,
}

pub fn parse_tmy2_subset(path: &Path) -> Result<Vec<WeatherRecord>, IoError> {
    Ok(read_tmy2(open(path, "weather file")?)?.records)
}

/// Hour `h` of a TMY2 day is the hour ending at `h`:00, so hour 24 maps to
/// midnight of the next day. Two-digit years below 50 are 20xx. Missing or
/// unknown illuminance (flag `?` or value 9999) leaves the field empty;
/// missing irradiance is an error.
pub fn read_tmy2<R: Read>(reader: R) -> Result<Tmy2Data, IoError> {
    let mut lines = BufReader::new(reader).lines();
    let header_line = match lines.next() {
        Some(l) => l.map_err(|e| IoError::io(Path::new("<tmy2>"), e))?,
        None => {
            return Err(IoError::Parse {
                line: 1,
                message: "empty file".into(),
            })
        }
    };
    let header = parse_header(strip_cr(&header_line))?;

    let mut records = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx as u64 + 2;
        let line = line.map_err(|e| IoError::io(Path::new("<tmy2>"), e))?;
        let line = strip_cr(&line);
        if line.is_empty() {
            continue;
        }
        let rec = parse_record(line, line_no)?;
        if let Some(prev) = records.last().map(|r: &WeatherRecord| r.timestamp) {
            if rec.timestamp <= prev {
                return Err(IoError::Data {
                    line: line_no,
                    message: format!("record at {} is not after the previous one", rec.timestamp),
                });
            }
        }
        records.push(rec);
    }
    Ok(Tmy2Data { header, records })
}

fn strip_cr(s: &str) -> &str {
    s.strip_suffix('\r').unwrap_or(s)
}

/// 1-based inclusive column range.
fn cols(line: &str, from: usize, to: usize) -> &str {
    &line[from - 1..to]
}

fn parse_header(line: &str) -> Result<Tmy2Header, IoError> {
    let bad = |message: String| IoError::Parse { line: 1, message };
    if !line.is_ascii() || line.len() < HEADER_LENGTH {
        return Err(bad(format!(
            "header must be {HEADER_LENGTH} ASCII characters, found {}",
            line.len()
        )));
    }
    let number = |from, to, name: &str| -> Result<f64, IoError> {
        let raw = cols(line, from, to).trim();
        raw.parse::<f64>().map_err(|_| bad(format!("invalid {name} `{raw}`")))
    };
    let angle = |from, to, name: &str, negative: char| -> Result<f64, IoError> {
        let raw = cols(line, from, to);
        let mut parts = raw.split_whitespace();
        let sign = match parts.next() {
            Some(h) if h.len() == 1 && h.starts_with(negative) => -1.0,
            Some(h) if h.len() == 1 => 1.0,
            _ => return Err(bad(format!("invalid {name} `{raw}`"))),
        };
        let deg: f64 = parts
            .next()
            .and_then(|p| p.parse().ok())
            .ok_or_else(|| bad(format!("invalid {name} `{raw}`")))?;
        let min: f64 = parts
            .next()
            .and_then(|p| p.parse().ok())
            .ok_or_else(|| bad(format!("invalid {name} `{raw}`")))?;
        Ok(sign * (deg + min / 60.0))
    };
    Ok(Tmy2Header {
        wban: cols(line, 2, 6).trim().to_string(),
        city: cols(line, 8, 29).trim().to_string(),
        state: cols(line, 31, 32).trim().to_string(),
        timezone: number(34, 36, "time zone")?,
        latitude: angle(38, 44, "latitude", 'S')?,
        longitude: angle(46, 53, "longitude", 'W')?,
        elevation: number(56, 59, "elevation")?,
    })
}

fn parse_record(line: &str, line_no: u64) -> Result<WeatherRecord, IoError> {
    let bad = |message: String| IoError::Parse { line: line_no, message };
    if !line.is_ascii() || line.len() != TMY2_RECORD_LENGTH {
        return Err(bad(format!(
            "record must be {TMY2_RECORD_LENGTH} ASCII characters, found {}",
            line.chars().count()
        )));
    }
    let int = |from, to, name: &str| -> Result<u32, IoError> {
        let raw = cols(line, from, to).trim();
        raw.parse::<u32>().map_err(|_| bad(format!("invalid {name} `{raw}`")))
    };
    let year = int(2, 3, "year")?;
    let (month, day, hour) = (int(4, 5, "month")?, int(6, 7, "day")?, int(8, 9, "hour")?);
    let year = if year < 50 { 2000 + year } else { 1900 + year } as i32;
    let date = NaiveDate::from_ymd_opt(year, month, day)
        .ok_or_else(|| bad(format!("invalid date {year}-{month:02}-{day:02}")))?;
    if !(1..=24).contains(&hour) {
        return Err(bad(format!("hour {hour} outside 1-24")));
    }
    let timestamp: NaiveDateTime = date.and_hms_opt(0, 0, 0).expect("midnight exists") + Duration::hours(hour.into());

    // (value columns, flag column)
    let field = |from, to, flag: usize, name: &str| -> Result<Option<f64>, IoError> {
        let v = int(from, to, name)?;
        let missing = v == MISSING || cols(line, flag, flag) == "?";
        Ok((!missing).then_some(f64::from(v)))
    };
    let ghi = field(18, 21, 22, "global horizontal radiation")?.ok_or_else(|| IoError::Data {
        line: line_no,
        message: "missing global horizontal radiation".into(),
    })?;
    let dhi = field(30, 33, 34, "diffuse horizontal radiation")?.ok_or_else(|| IoError::Data {
        line: line_no,
        message: "missing diffuse horizontal radiation".into(),
    })?;
    let global_lux = field(36, 39, 40, "global horizontal illuminance")?.map(|v| v * 100.0);
    let diffuse_lux = field(48, 51, 52, "diffuse horizontal illuminance")?.map(|v| v * 100.0);

    WeatherRecord::new(timestamp, ghi, dhi, global_lux, diffuse_lux).map_err(|e| IoError::Data {
        line: line_no,
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = include_str!("../../tests/fixtures/sample.tm2");

    fn header() -> &'static str {
        FIXTURE.lines().next().unwrap()
    }

    fn row() -> &'static str {
        FIXTURE.lines().nth(1).unwrap()
    }

    #[test]
    fn fixture_lengths() {
        assert_eq!(header().len(), 59);
        assert_eq!(row().len(), TMY2_RECORD_LENGTH);
    }

    #[test]
    fn decodes_header_and_row() {
        let data = read_tmy2(format!("{}\n{}\n", header(), row()).as_bytes()).unwrap();
        assert_eq!(data.header.wban, "41415");
        assert_eq!(data.header.timezone, 4.0);
        assert!((data.header.latitude + (21.0 + 20.0 / 60.0)).abs() < 1e-12);
        assert!((data.header.longitude - (55.0 + 29.0 / 60.0)).abs() < 1e-12);
        let r = &data.records[0];
        assert_eq!((r.global_horizontal, r.diffuse_horizontal), (500.0, 100.0));
        assert_eq!(r.global_illuminance, Some(49200.0));
        assert_eq!(r.diffuse_illuminance, Some(12000.0));
        assert_eq!(r.timestamp.to_string(), "2009-03-21 12:00:00");
    }

    #[test]
    fn truncated_line_fails_with_its_number() {
        let err = read_tmy2(format!("{}\n{}\n", header(), &row()[..100]).as_bytes()).unwrap_err();
        assert!(matches!(err, IoError::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn missing_illuminance_sentinel() {
        let row = row().replacen(" 492A3", "9999?9", 1);
        let data = read_tmy2(format!("{}\n{row}\n", header()).as_bytes()).unwrap();
        assert_eq!(data.records[0].global_illuminance, None);
        assert_eq!(data.records[0].diffuse_illuminance, Some(12000.0));
    }
}
