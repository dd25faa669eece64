use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const ROOM: &str = include_str!("../../core/tests/fixtures/reference_building.json");

fn daylite(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_daylite"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

/// One day of minute records starting 2009-03-21T00:00. `overcast` sets
/// Dh = Gh.
fn day_weather(overcast: bool) -> String {
    let mut s = String::from("timestamp,Gh_Wm2,Dh_Wm2\n");
    for m in 0..1440 {
        let (h, mm) = (m / 60, m % 60);
        let x = ((m as f64 / 60.0 - 6.0) / 12.0 * std::f64::consts::PI).sin().max(0.0);
        let g = 800.0 * x;
        let d = if overcast { g } else { 0.15 * g };
        s.push_str(&format!("2009-03-21T{h:02}:{mm:02},{g},{d}\n"));
    }
    s
}

fn read_field(p: &Path) -> Vec<Option<f64>> {
    fs::read_to_string(p)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .flat_map(|l| l.split(' ').map(|c| c.parse::<f64>().ok()).collect::<Vec<_>>())
        .collect()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn overcast_day_gives_one_row_per_minute() {
    let dir = TempDir::new().unwrap();
    let building = write(&dir, "room.json", ROOM);
    let weather = write(&dir, "w.csv", &day_weather(true));
    let prefix = dir.path().join("run");
    let o = daylite(&[
        "simulate",
        "--building",
        path(&building),
        "--weather",
        path(&weather),
        "--step",
        "1",
        "--out",
        path(&prefix),
        "--probes",
        "1.95,1.0;1.95,3.0",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 1);
    assert!(stdout(&o).contains("1440 steps on 1365 points"), "{}", stdout(&o));

    let summary = fs::read_to_string(dir.path().join("run_summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(
        lines.next().unwrap(),
        "timestamp,E_out_G,E_out_dif,E_out_Dir_S,S_TS,P1,P2"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 1440);
    assert!(rows.iter().all(|r| r.split(',').nth(4) == Some("0.00000")));
}

#[test]
fn missing_weather_file_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let building = write(&dir, "room.json", ROOM);
    let o = daylite(&[
        "simulate",
        "--building",
        path(&building),
        "--weather",
        path(&dir.path().join("absent.csv")),
        "--out",
        path(&dir.path().join("run")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("weather file not found"), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
}

#[test]
fn bad_building_is_an_input_error_naming_the_field() {
    let dir = TempDir::new().unwrap();
    let building = write(&dir, "room.json", &ROOM.replace("\"MF\": 0.9", "\"MF\": 1.9"));
    let o = daylite(&[
        "dfmap",
        "--building",
        path(&building),
        "--out",
        path(&dir.path().join("df.txt")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("room.apertures[0].MF"), "{}", stderr(&o));
}

#[test]
fn field_at_emits_one_field_file() {
    let dir = TempDir::new().unwrap();
    let building = write(&dir, "room.json", ROOM);
    let weather = write(&dir, "w.csv", &day_weather(false));
    let prefix = dir.path().join("run");
    let o = daylite(&[
        "simulate",
        "--building",
        path(&building),
        "--weather",
        path(&weather),
        "--start",
        "2009-03-21T11:00",
        "--end",
        "2009-03-21T13:00",
        "--out",
        path(&prefix),
        "--field-at",
        "2009-03-21T12:00",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut fields: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.contains("_field_"))
        .collect();
    fields.sort();
    assert_eq!(fields, ["run_field_20090321T1200.txt"]);
    let text = fs::read_to_string(dir.path().join(&fields[0])).unwrap();
    assert!(text.starts_with("# 39 35 2009-03-21T12:00\n# E_glo lux\n"));
    let values = read_field(&dir.path().join(&fields[0]));
    assert_eq!(values.len(), 1365);
    assert!(values.iter().all(|v| v.is_some_and(|v| v > 0.0)));
}

#[test]
fn tmy2_weather_is_recognised_by_extension() {
    let dir = TempDir::new().unwrap();
    let building = write(&dir, "room.json", ROOM);
    let tm2 = include_str!("../../core/tests/fixtures/sample.tm2");
    let weather = write(&dir, "site.tm2", tm2);
    let o = daylite(&[
        "simulate",
        "--building",
        path(&building),
        "--weather",
        path(&weather),
        "--start",
        "2009-03-21T12:00",
        "--end",
        "2009-03-21T14:00",
        "--step",
        "60",
        "--out",
        path(&dir.path().join("run")),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = fs::read_to_string(dir.path().join("run_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 4);
    assert!(
        summary.contains("2009-03-21T12:00,49200.0,12000.0,37200.0,"),
        "{summary}"
    );
}

#[test]
fn simulation_output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let building = write(&dir, "room.json", ROOM);
    let weather = write(&dir, "w.csv", &day_weather(false));
    let run = |name: &str| {
        let prefix = dir.path().join(name);
        let o = daylite(&[
            "simulate",
            "--building",
            path(&building),
            "--weather",
            path(&weather),
            "--start",
            "2009-03-21T08:00",
            "--end",
            "2009-03-21T10:00",
            "--out",
            path(&prefix),
            "--probes",
            "1.0,1.0;2.0,3.0",
            "--field-at",
            "2009-03-21T09:30",
            "--with-df",
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        (
            fs::read(dir.path().join(format!("{name}_summary.csv"))).unwrap(),
            fs::read(dir.path().join(format!("{name}_field_20090321T0930.txt"))).unwrap(),
        )
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn identical_series_validate_perfectly() {
    let dir = TempDir::new().unwrap();
    let text = "timestamp,P1\n2009-03-21T12:00,100\n2009-03-21T12:01,250\n2009-03-21T12:02,300\n";
    let sim = write(&dir, "sim.csv", text);
    let reference = write(&dir, "ref.csv", text);
    let o = daylite(&["validate", "--sim", path(&sim), "--reference", path(&reference)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    let header: Vec<&str> = lines.next().unwrap().split('\t').collect();
    let row: Vec<&str> = lines.next().unwrap().split('\t').collect();
    let col = |name: &str| row[header.iter().position(|h| *h == name).unwrap()];
    assert_eq!(col("test"), "P1");
    assert_eq!(col("rsd_mode"), "error");
    assert_eq!(col("rmsd").parse::<f64>().unwrap(), 0.0);
    assert_eq!(col("rsd_pct").parse::<f64>().unwrap(), 100.0);
}

#[test]
fn margin_mode_counts_points_in_band() {
    let dir = TempDir::new().unwrap();
    let sim = write(
        &dir,
        "sim.csv",
        "timestamp,P1\n2009-03-21T12:00,100\n2009-03-21T12:01,210\n2009-03-21T12:02,290\n2009-03-21T12:03,500\n",
    );
    let reference = write(
        &dir,
        "ref.csv",
        "timestamp,P1\n2009-03-21T12:00,100\n2009-03-21T12:01,200\n2009-03-21T12:02,300\n2009-03-21T12:03,400\n",
    );
    let report = dir.path().join("report.tsv");
    let o = daylite(&[
        "validate",
        "--sim",
        path(&sim),
        "--reference",
        path(&reference),
        "--mode",
        "margin",
        "--error",
        "0.15",
        "--out",
        path(&report),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("lowest RSD 75.00 %"), "{}", stdout(&o));
    let table = fs::read_to_string(&report).unwrap();
    let header: Vec<&str> = table.lines().next().unwrap().split('\t').collect();
    let row: Vec<&str> = table.lines().nth(1).unwrap().split('\t').collect();
    let rsd = row[header.iter().position(|h| *h == "rsd_pct").unwrap()];
    assert_eq!(rsd.parse::<f64>().unwrap(), 75.0);
}

#[test]
fn require_rsd_gates_the_exit_code() {
    let dir = TempDir::new().unwrap();
    let mut sim = String::from("timestamp,P1\n");
    let mut reference = String::from("timestamp,P1\n");
    for (i, s) in [100, 100, 200, 200, 200].iter().enumerate() {
        sim.push_str(&format!("2009-03-21T12:0{i},{s}\n"));
        reference.push_str(&format!("2009-03-21T12:0{i},100\n"));
    }
    let sim = write(&dir, "sim.csv", &sim);
    let reference = write(&dir, "ref.csv", &reference);
    let args = |threshold: &'static str| {
        vec![
            "validate".to_string(),
            "--sim".into(),
            path(&sim).into(),
            "--reference".into(),
            path(&reference).into(),
            "--mode".into(),
            "margin".into(),
            "--require-rsd".into(),
            threshold.into(),
        ]
    };
    let run = |a: Vec<String>| Command::new(env!("CARGO_BIN_EXE_daylite")).args(a).output().unwrap();
    let failed = run(args("50"));
    assert_eq!(failed.status.code(), Some(1), "{}", stderr(&failed));
    assert!(stderr(&failed).contains("RSD 40.00 %"));
    assert!(run(args("40")).status.success());
}

#[test]
fn misaligned_series_need_resampling() {
    let dir = TempDir::new().unwrap();
    let mut minutes = String::from("timestamp,P1\n");
    for m in 0..120 {
        minutes.push_str(&format!(
            "2009-03-21T{:02}:{:02},{}\n",
            10 + m / 60,
            m % 60,
            100 + m / 60 * 50
        ));
    }
    let sim = write(&dir, "sim.csv", &minutes);
    let reference = write(
        &dir,
        "ref.csv",
        "timestamp,P1\n2009-03-21T10:00,100\n2009-03-21T11:00,150\n",
    );
    let o = daylite(&["validate", "--sim", path(&sim), "--reference", path(&reference)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("timestamp mismatch"), "{}", stderr(&o));

    let o = daylite(&[
        "validate",
        "--sim",
        path(&sim),
        "--reference",
        path(&reference),
        "--resample",
        "hourly",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("lowest RSD 100.00 %"), "{}", stderr(&o));
}

#[test]
fn dfmap_is_positive_and_linear_in_the_window_factors() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str, json: &str| {
        let building = write(&dir, &format!("{name}.json"), json);
        let out = dir.path().join(format!("{name}.txt"));
        let o = daylite(&["dfmap", "--building", path(&building), "--out", path(&out)]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(fs::read_to_string(&out)
            .unwrap()
            .starts_with("# 39 35 static\n# DF %\n"));
        read_field(&out).into_iter().map(Option::unwrap).collect::<Vec<f64>>()
    };
    let base = run("base", ROOM);
    assert_eq!(base.len(), 1365);
    assert!(base.iter().all(|v| *v > 0.0));

    let half = run("half", &ROOM.replace("\"MF\": 0.9", "\"MF\": 0.45"));
    let argmax = |v: &[f64]| (0..v.len()).max_by(|a, b| v[*a].total_cmp(&v[*b])).unwrap();
    assert_eq!(argmax(&base), argmax(&half));
    for (b, h) in base.iter().zip(&half) {
        // Six significant digits in the file.
        assert!((b - 2.0 * h).abs() <= 2e-5 * b, "{b} vs 2 × {h}");
    }

    let dark = run("dark", &ROOM.replace("\"tau_vitre\": 0.9", "\"tau_vitre\": 1e-9"));
    assert!(dark.iter().all(|v| *v < 1e-8));
}
