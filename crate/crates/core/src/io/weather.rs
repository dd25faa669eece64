use std::io::{Read, Write};
use std::path::Path;

use chrono::{NaiveDateTime, Timelike};

use super::{open, IoError};
use crate::solar::{SolarError, WeatherRecord};

const TIMESTAMP: &str = "timestamp";
const GLOBAL: &str = "Gh_Wm2";
const DIFFUSE: &str = "Dh_Wm2";
const GLOBAL_LUX: &str = "Evg_lux";
const DIFFUSE_LUX: &str = "Evd_lux";

/// Accepts `YYYY-MM-DDTHH:MM` and `YYYY-MM-DDTHH:MM:SS` local civil time.
pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M")
        .or_else(|_| NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S"))
        .ok()
}

/// Minute precision unless the timestamp carries seconds.
pub fn format_timestamp(t: NaiveDateTime) -> String {
    if t.second() == 0 && t.nanosecond() == 0 {
        t.format("%Y-%m-%dT%H:%M").to_string()
    } else {
        t.format("%Y-%m-%dT%H:%M:%S").to_string()
    }
}

pub fn parse_weather_csv(path: &Path) -> Result<Vec<WeatherRecord>, IoError> {
    read_weather_csv(open(path, "weather file")?)
}

/// Reads a weather CSV. Rows come back sorted by time; duplicated
/// timestamps, malformed cells and inconsistent irradiances are errors
/// carrying the 1-based line number (the header is line 1).
pub fn read_weather_csv<R: Read>(reader: R) -> Result<Vec<WeatherRecord>, IoError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_error(e, 1))?.clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    if let Some(unknown) = headers
        .iter()
        .find(|h| ![TIMESTAMP, GLOBAL, DIFFUSE, GLOBAL_LUX, DIFFUSE_LUX].contains(h))
    {
        return Err(IoError::Parse {
            line: 1,
            message: format!("unknown column `{unknown}`"),
        });
    }
    let required = |name: &str| {
        column(name).ok_or_else(|| IoError::Parse {
            line: 1,
            message: format!("missing column `{name}`"),
        })
    };
    let (ts_col, g_col, d_col) = (required(TIMESTAMP)?, required(GLOBAL)?, required(DIFFUSE)?);
    let (gl_col, dl_col) = (column(GLOBAL_LUX), column(DIFFUSE_LUX));

    let mut rows: Vec<(u64, WeatherRecord)> = Vec::new();
    for result in rdr.records() {
        let record = result.map_err(|e| csv_error(e, 0))?;
        let line = record.position().map_or(0, |p| p.line());
        let cell = |i: usize| record.get(i).unwrap_or("");
        let stamp = cell(ts_col);
        let timestamp = parse_timestamp(stamp).ok_or_else(|| IoError::Parse {
            line,
            message: format!("invalid timestamp `{stamp}`"),
        })?;
        let number = |i: usize, name: &str| -> Result<f64, IoError> {
            let raw = cell(i);
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| IoError::Parse {
                    line,
                    message: format!("invalid {name} value `{raw}`"),
                })
        };
        let optional = |col: Option<usize>, name: &str| -> Result<Option<f64>, IoError> {
            match col {
                Some(i) if !cell(i).is_empty() => number(i, name).map(Some),
                _ => Ok(None),
            }
        };
        let rec = WeatherRecord::new(
            timestamp,
            number(g_col, GLOBAL)?,
            number(d_col, DIFFUSE)?,
            optional(gl_col, GLOBAL_LUX)?,
            optional(dl_col, DIFFUSE_LUX)?,
        )
        .map_err(|e| data_error(e, line))?;
        rows.push((line, rec));
    }

    rows.sort_by_key(|(_, r)| r.timestamp);
    if let Some(w) = rows.windows(2).find(|w| w[0].1.timestamp == w[1].1.timestamp) {
        let line = w[0].0.max(w[1].0);
        return Err(IoError::Data {
            line,
            message: format!("duplicate timestamp {}", format_timestamp(w[1].1.timestamp)),
        });
    }
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

/// Writes records in the format read by [`read_weather_csv`]. Illuminance
/// columns appear when any record has a value. Numbers use the shortest
/// representation that reads back to the same `f64`.
pub fn write_weather_csv<W: Write>(records: &[WeatherRecord], writer: W) -> Result<(), IoError> {
    let with_lux = records
        .iter()
        .any(|r| r.global_illuminance.is_some() || r.diffuse_illuminance.is_some());
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![TIMESTAMP, GLOBAL, DIFFUSE];
    if with_lux {
        header.extend([GLOBAL_LUX, DIFFUSE_LUX]);
    }
    let io_err = |e: csv::Error| IoError::io(Path::new("<weather output>"), e.into());
    w.write_record(&header).map_err(io_err)?;
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for r in records {
        let mut row = vec![
            format_timestamp(r.timestamp),
            r.global_horizontal.to_string(),
            r.diffuse_horizontal.to_string(),
        ];
        if with_lux {
            row.push(opt(r.global_illuminance));
            row.push(opt(r.diffuse_illuminance));
        }
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush().map_err(|e| IoError::io(Path::new("<weather output>"), e))
}

fn csv_error(e: csv::Error, fallback_line: u64) -> IoError {
    let line = e.position().map_or(fallback_line, |p| p.line());
    let message = match e.kind() {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            format!("expected {expected_len} fields, found {len}")
        }
        _ => e.to_string(),
    };
    IoError::Parse { line, message }
}

fn data_error(e: SolarError, line: u64) -> IoError {
    IoError::Data {
        line,
        message: e.to_string(),
    }
}
