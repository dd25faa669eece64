use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDateTime;

use super::weather::format_timestamp;
use super::IoError;
use crate::daylight::PeriodResult;
use crate::geometry::GridMesh;

/// Leading columns of the summary CSV; probe columns follow.
pub const SUMMARY_COLUMNS: [&str; 5] = ["timestamp", "E_out_G", "E_out_dif", "E_out_Dir_S", "S_TS"];

/// Fixed-point text with six significant digits (at least one digit
/// before the point): 100 → `100.000`, 0 → `0.00000`, 123456.7 → `123457`.
pub fn format_sig6(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let int_digits = |a: f64| format!("{:.0}", a.abs().trunc()).len();
    let mut decimals = 6usize.saturating_sub(int_digits(v));
    let mut s = format!("{v:.decimals$}");
    // Rounding up can add an integer digit (999.9996 → 1000.000).
    let rounded_int = s.trim_start_matches('-').split('.').next().map_or(0, str::len);
    if rounded_int > int_digits(v) && decimals > 0 {
        decimals -= 1;
        s = format!("{v:.decimals$}");
    }
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s.remove(0);
    }
    s
}

/// One labelled matrix in a field file.
#[derive(Debug, Clone, Copy)]
pub struct FieldBlock<'a> {
    pub label: &'a str,
    /// One value per grid point, in grid order.
    pub values: &'a [f64],
}

/// Plain-text field file: a `# nu nv timestamp` line, then for each block a
/// `# label` line and `nv` rows of `nu` values (row `j` holds the points at
/// y index `j`, increasing y). Cells outside the floor are `-`.
pub fn write_field_file<W: Write>(
    mut w: W,
    grid: &GridMesh,
    timestamp: Option<NaiveDateTime>,
    blocks: &[FieldBlock<'_>],
) -> io::Result<()> {
    let stamp = timestamp.map_or_else(|| "static".to_string(), format_timestamp);
    writeln!(w, "# {} {} {}", grid.nu(), grid.nv(), stamp)?;
    let layout = grid.layout();
    for block in blocks {
        if block.values.len() != grid.len() {
            return Err(io::Error::new(
                io::ErrorKind::InvalidInput,
                format!("{} values for a {}-point grid", block.values.len(), grid.len()),
            ));
        }
        writeln!(w, "# {}", block.label)?;
        for row in layout.chunks(grid.nu()) {
            let cells: Vec<String> = row
                .iter()
                .map(|c| c.map_or_else(|| "-".to_string(), |k| format_sig6(block.values[k])))
                .collect();
            writeln!(w, "{}", cells.join(" "))?;
        }
    }
    Ok(())
}

pub fn write_summary_csv<W: Write>(w: W, result: &PeriodResult) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let header: Vec<&str> = SUMMARY_COLUMNS
        .iter()
        .copied()
        .chain(result.probe_names.iter().map(String::as_str))
        .collect();
    out.write_record(&header)?;
    for row in &result.rows {
        let mut cells = vec![
            format_timestamp(row.timestamp),
            format_sig6(row.outdoor.global),
            format_sig6(row.outdoor.diffuse),
            format_sig6(row.outdoor.direct),
            format_sig6(row.sun_patch_area),
        ];
        cells.extend(row.probes.iter().map(|v| format_sig6(*v)));
        out.write_record(&cells)?;
    }
    out.flush()
}

/// `<prefix>_field_<YYYYMMDDTHHMM>.txt`
pub fn field_file_name(prefix: &Path, timestamp: NaiveDateTime) -> PathBuf {
    suffixed(prefix, &format!("_field_{}.txt", timestamp.format("%Y%m%dT%H%M")))
}

fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = OsString::from(prefix.as_os_str());
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes `<prefix>_summary.csv` and one field file per kept field, with the
/// daylight-factor map (percent) appended when `with_df` is set. Returns the
/// paths written.
pub fn write_results(result: &PeriodResult, prefix: &Path, with_df: bool) -> Result<Vec<PathBuf>, IoError> {
    let create = |path: &Path| File::create(path).map(BufWriter::new).map_err(|e| IoError::io(path, e));
    let mut written = Vec::new();

    let summary = suffixed(prefix, "_summary.csv");
    let mut w = create(&summary)?;
    write_summary_csv(&mut w, result)
        .and_then(|_| w.flush())
        .map_err(|e| IoError::io(&summary, e))?;
    written.push(summary);

    for field in &result.fields {
        let path = field_file_name(prefix, field.timestamp);
        let df: Vec<f64> = field.daylight.iter().map(|d| d.df * 100.0).collect();
        let mut blocks = vec![FieldBlock {
            label: "E_glo lux",
            values: &field.global,
        }];
        if with_df {
            blocks.push(FieldBlock {
                label: "DF %",
                values: &df,
            });
        }
        let mut w = create(&path)?;
        write_field_file(&mut w, &field.grid, Some(field.timestamp), &blocks)
            .and_then(|_| w.flush())
            .map_err(|e| IoError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_workplane_grid, Polygon3};

    #[test]
    fn six_significant_digits() {
        assert_eq!(format_sig6(100.0), "100.000");
        assert_eq!(format_sig6(0.0), "0.00000");
        assert_eq!(format_sig6(-0.0), "0.00000");
        assert_eq!(format_sig6(1.5), "1.50000");
        assert_eq!(format_sig6(123456.7), "123457");
        assert_eq!(format_sig6(54000.0), "54000.0");
        assert_eq!(format_sig6(999.9996), "1000.00");
        assert_eq!(format_sig6(-12.345678), "-12.3457");
        assert_eq!(format_sig6(0.0123456), "0.01235");
    }

    #[test]
    fn two_by_two_field() {
        let floor = Polygon3::horizontal_rectangle(0.0, 0.0, 1.0, 1.0, 0.0).unwrap();
        let grid = make_workplane_grid(&floor, 0.5, 0.01).unwrap();
        let mut buf = Vec::new();
        let values = [100.0; 4];
        write_field_file(
            &mut buf,
            &grid,
            None,
            &[FieldBlock {
                label: "E_glo lux",
                values: &values,
            }],
        )
        .unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "# 2 2 static\n# E_glo lux\n100.000 100.000\n100.000 100.000\n"
        );
        let short = [1.0; 3];
        assert!(write_field_file(
            Vec::new(),
            &grid,
            None,
            &[FieldBlock {
                label: "x",
                values: &short
            }]
        )
        .is_err());
    }

    #[test]
    fn results_on_disk() {
        use crate::daylight::testing::reference_building;
        use crate::daylight::{simulate_period, PeriodOptions, Probe, Simulator};
        use crate::solar::WeatherRecord;

        let t0 = chrono::NaiveDate::from_ymd_opt(2009, 3, 21)
            .unwrap()
            .and_hms_opt(12, 0, 0)
            .unwrap();
        let weather: Vec<WeatherRecord> = (0..3)
            .map(|m| WeatherRecord::irradiance_only(t0 + chrono::Duration::minutes(m), 600.0, 100.0).unwrap())
            .collect();
        let sim = Simulator::new(reference_building())
            .unwrap()
            .with_probes(vec![Probe::new("P1", 1.95, 2.0)])
            .unwrap();
        let opts = PeriodOptions {
            field_times: vec![t0 + chrono::Duration::minutes(1)],
            ..PeriodOptions::new(t0, t0 + chrono::Duration::minutes(2), 1)
        };
        let result = simulate_period(&sim, &weather, &opts).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let prefix = dir.path().join("run");
        let written = write_results(&result, &prefix, true).unwrap();
        assert_eq!(
            written,
            vec![
                dir.path().join("run_summary.csv"),
                dir.path().join("run_field_20090321T1201.txt")
            ]
        );
        let summary = std::fs::read_to_string(&written[0]).unwrap();
        assert_eq!(summary.lines().count(), 4);
        assert!(summary.starts_with("timestamp,E_out_G,E_out_dif,E_out_Dir_S,S_TS,P1\n2009-03-21T12:00,"));
        let field = std::fs::read_to_string(&written[1]).unwrap();
        let labels: Vec<&str> = field.lines().filter(|l| l.starts_with('#')).collect();
        assert_eq!(labels, ["# 39 35 2009-03-21T12:01", "# E_glo lux", "# DF %"]);
        assert_eq!(field.lines().count(), 3 + 2 * 35);

        let blocked = dir.path().join("missing").join("run");
        assert!(matches!(
            write_results(&result, &blocked, false),
            Err(IoError::Io { .. })
        ));
    }

    #[test]
    fn file_names() {
        let t = chrono::NaiveDate::from_ymd_opt(2009, 3, 21)
            .unwrap()
            .and_hms_opt(12, 0, 0)
            .unwrap();
        assert_eq!(
            field_file_name(Path::new("out/run"), t),
            PathBuf::from("out/run_field_20090321T1200.txt")
        );
    }
}
