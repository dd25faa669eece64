use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use chrono::NaiveDateTime;
use clap::{Parser, Subcommand, ValueEnum};

use daylite_core::daylight::{simulate_period, Probe};
use daylite_core::io::{
    format_timestamp, parse_building, parse_timestamp, parse_tmy2_subset, parse_weather_csv, write_field_file,
    write_results, FieldBlock,
};
use daylite_core::metrics::{build_margins, resample_hourly, write_report_table};
use daylite_core::{PatchScope, PeriodOptions, RsdMode, SeriesPair, Simulator, ValidationReport, WeatherRecord};

#[derive(Parser)]
#[command(name = "daylite", version, about = "Workplane daylighting simulation and validation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a period and write the summary CSV and field files.
    Simulate(SimulateArgs),
    /// Compare simulated and reference series and report agreement statistics.
    Validate(ValidateArgs),
    /// Write the daylight-factor map (%) of a building.
    Dfmap(DfmapArgs),
}

#[derive(Parser)]
struct SimulateArgs {
    #[arg(long)]
    building: PathBuf,
    /// Weather CSV, or TMY2 when the extension is .tm2 or .tmy2.
    #[arg(long)]
    weather: PathBuf,
    /// First step (YYYY-MM-DDTHH:MM); defaults to the first weather record.
    #[arg(long, value_parser = timestamp_arg)]
    start: Option<NaiveDateTime>,
    /// Last step; defaults to the last weather record.
    #[arg(long, value_parser = timestamp_arg)]
    end: Option<NaiveDateTime>,
    /// Step in minutes.
    #[arg(long, default_value_t = 1)]
    step: i64,
    /// Output path prefix.
    #[arg(long)]
    out: PathBuf,
    /// Keep the full field at this timestamp (repeatable).
    #[arg(long = "field-at", value_parser = timestamp_arg)]
    field_at: Vec<NaiveDateTime>,
    /// Probe positions as `x,y;x,y;...`, named P1, P2, ...
    #[arg(long)]
    probes: Option<String>,
    #[arg(long = "patch-scope", value_enum)]
    patch_scope: Option<ScopeArg>,
    /// Append the daylight-factor map to each field file.
    #[arg(long = "with-df")]
    with_df: bool,
}

#[derive(Parser)]
struct ValidateArgs {
    /// Simulated series (CSV with a timestamp column).
    #[arg(long)]
    sim: PathBuf,
    /// Reference series (CSV with a timestamp column).
    #[arg(long)]
    reference: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Error)]
    mode: ModeArg,
    /// Total error fraction for the margins in margin mode.
    #[arg(long, default_value_t = 0.15)]
    error: f64,
    #[arg(long, value_enum)]
    resample: Option<ResampleArg>,
    /// Exit with status 1 when any compared column has an RSD below this.
    #[arg(long = "require-rsd")]
    require_rsd: Option<f64>,
    /// Column to compare (repeatable); defaults to every shared column.
    #[arg(long)]
    column: Vec<String>,
    /// Report file; the table goes to standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Parser)]
struct DfmapArgs {
    #[arg(long)]
    building: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    Patch,
    Room,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Margin,
    Error,
}

#[derive(Clone, Copy, ValueEnum)]
enum ResampleArg {
    Hourly,
}

/// Exit statuses: 0 success, 1 validation threshold missed, 2 bad input,
/// 3 internal failure.
enum Failure {
    Threshold(String),
    Input(anyhow::Error),
    Internal(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Threshold(_) => 1,
            Failure::Input(_) => 2,
            Failure::Internal(_) => 3,
        }
    }
}

trait InputContext<T> {
    fn input(self) -> Result<T, Failure>;
    fn internal(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> InputContext<T> for Result<T, E> {
    fn input(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Input(e.into()))
    }

    fn internal(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Internal(e.into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Validate(args) => validate(args),
        Command::Dfmap(args) => dfmap(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Threshold(msg) => eprintln!("daylite: {msg}"),
                Failure::Input(e) | Failure::Internal(e) => eprintln!("daylite: {e:#}"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn timestamp_arg(s: &str) -> Result<NaiveDateTime, String> {
    parse_timestamp(s).ok_or_else(|| format!("expected YYYY-MM-DDTHH:MM, got `{s}`"))
}

fn parse_probes(spec: &str) -> anyhow::Result<Vec<Probe>> {
    spec.split(';')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .enumerate()
        .map(|(i, p)| {
            let (x, y) = p.split_once(',').ok_or_else(|| anyhow!("probe `{p}` is not `x,y`"))?;
            let x: f64 = x.trim().parse().with_context(|| format!("probe `{p}`: bad x"))?;
            let y: f64 = y.trim().parse().with_context(|| format!("probe `{p}`: bad y"))?;
            Ok(Probe::new(format!("P{}", i + 1), x, y))
        })
        .collect()
}

fn read_weather(path: &Path) -> anyhow::Result<Vec<WeatherRecord>> {
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    let records = match ext.as_deref() {
        Some("tm2") | Some("tmy2") => parse_tmy2_subset(path),
        _ => parse_weather_csv(path),
    };
    records.with_context(|| format!("reading {}", path.display()))
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    if !args.weather.exists() {
        return Err(Failure::Input(anyhow!(
            "weather file not found: {}",
            args.weather.display()
        )));
    }
    let mut building = parse_building(&args.building)
        .with_context(|| format!("reading {}", args.building.display()))
        .input()?;
    if let Some(scope) = args.patch_scope {
        building.patch_scope = match scope {
            ScopeArg::Patch => PatchScope::PatchOnly,
            ScopeArg::Room => PatchScope::WholeRoom,
        };
    }
    let weather = read_weather(&args.weather).input()?;
    let (Some(first), Some(last)) = (weather.first(), weather.last()) else {
        return Err(Failure::Input(anyhow!(
            "weather file {} has no records",
            args.weather.display()
        )));
    };
    let probes = match &args.probes {
        Some(spec) => parse_probes(spec).input()?,
        None => Vec::new(),
    };

    let clock = Instant::now();
    let sim = Simulator::new(building)
        .and_then(|s| s.with_probes(probes))
        .context("preparing the simulation")
        .input()?;
    let opts = PeriodOptions {
        field_times: args.field_at.clone(),
        ..PeriodOptions::new(
            args.start.unwrap_or(first.timestamp),
            args.end.unwrap_or(last.timestamp),
            args.step,
        )
    };
    let result = simulate_period(&sim, &weather, &opts).input()?;
    let written = write_results(&result, &args.out, args.with_df).internal()?;
    println!(
        "simulated {} steps on {} points in {:.2} s; wrote {} files",
        result.rows.len(),
        sim.grid().len(),
        clock.elapsed().as_secs_f64(),
        written.len()
    );
    Ok(())
}

fn dfmap(args: DfmapArgs) -> Result<(), Failure> {
    let building = parse_building(&args.building)
        .with_context(|| format!("reading {}", args.building.display()))
        .input()?;
    let sim = Simulator::new(building).input()?;
    let df: Vec<f64> = sim.daylight().iter().map(|d| d.df * 100.0).collect();
    let file = File::create(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))
        .internal()?;
    let mut w = BufWriter::new(file);
    write_field_file(
        &mut w,
        sim.grid(),
        None,
        &[FieldBlock {
            label: "DF %",
            values: &df,
        }],
    )
    .and_then(|_| w.flush())
    .with_context(|| format!("writing {}", args.out.display()))
    .internal()?;
    let (lo, hi) = df.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(*v), hi.max(*v))
    });
    println!("DF over {} points: min {lo:.3} %, max {hi:.3} %", df.len());
    Ok(())
}

/// Timestamp-indexed numeric columns of a CSV file. Empty cells are absent.
struct Table {
    columns: Vec<String>,
    values: BTreeMap<String, BTreeMap<NaiveDateTime, f64>>,
    timestamps: BTreeSet<NaiveDateTime>,
}

fn read_table(path: &Path) -> anyhow::Result<Table> {
    let file = File::open(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => anyhow!("file not found: {}", path.display()),
        _ => anyhow!("{}: {e}", path.display()),
    })?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = rdr
        .headers()
        .with_context(|| format!("{}: line 1", path.display()))?
        .clone();
    let ts_col = headers
        .iter()
        .position(|h| h == "timestamp")
        .ok_or_else(|| anyhow!("{}: line 1: missing column `timestamp`", path.display()))?;
    let columns: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != ts_col)
        .map(|(_, h)| h.to_string())
        .collect();
    let mut values: BTreeMap<String, BTreeMap<NaiveDateTime, f64>> =
        columns.iter().map(|c| (c.clone(), BTreeMap::new())).collect();
    let mut timestamps = BTreeSet::new();
    for rec in rdr.records() {
        let rec = rec.with_context(|| format!("{}", path.display()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let raw = rec.get(ts_col).unwrap_or("");
        let t = parse_timestamp(raw)
            .ok_or_else(|| anyhow!("{}: line {line}: invalid timestamp `{raw}`", path.display()))?;
        if !timestamps.insert(t) {
            return Err(anyhow!("{}: line {line}: duplicate timestamp {raw}", path.display()));
        }
        for (i, name) in headers.iter().enumerate() {
            if i == ts_col {
                continue;
            }
            let cell = rec.get(i).unwrap_or("");
            if cell.is_empty() {
                continue;
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| anyhow!("{}: line {line}: invalid {name} value `{cell}`", path.display()))?;
            values.get_mut(name).expect("column registered").insert(t, v);
        }
    }
    Ok(Table {
        columns,
        values,
        timestamps,
    })
}

fn validate(args: ValidateArgs) -> Result<(), Failure> {
    let sim = read_table(&args.sim).input()?;
    let reference = read_table(&args.reference).input()?;
    let hourly = args.resample.is_some();
    if !hourly && sim.timestamps != reference.timestamps {
        let missing = sim
            .timestamps
            .symmetric_difference(&reference.timestamps)
            .next()
            .copied();
        return Err(Failure::Input(anyhow!(
            "timestamp mismatch between {} and {} (first at {}); use --resample hourly to compare hourly means",
            args.sim.display(),
            args.reference.display(),
            missing.map(format_timestamp).unwrap_or_default()
        )));
    }
    let names: Vec<String> = if args.column.is_empty() {
        sim.columns
            .iter()
            .filter(|c| reference.values.contains_key(*c))
            .cloned()
            .collect()
    } else {
        args.column.clone()
    };
    if names.is_empty() {
        return Err(Failure::Input(anyhow!("no shared columns to compare")));
    }
    let mode = match args.mode {
        ModeArg::Margin => RsdMode::Margin,
        ModeArg::Error => RsdMode::Error,
    };

    let mut reports = Vec::with_capacity(names.len());
    for name in &names {
        let (Some(s), Some(r)) = (sim.values.get(name), reference.values.get(name)) else {
            return Err(Failure::Input(anyhow!("column `{name}` is not in both files")));
        };
        let (s, r) = if hourly {
            (hourly_map(s), hourly_map(r))
        } else {
            (s.clone(), r.clone())
        };
        let (model, refs): (Vec<f64>, Vec<f64>) = s.iter().filter_map(|(t, v)| r.get(t).map(|rv| (*v, *rv))).unzip();
        let pair = SeriesPair::new(model, refs)
            .with_context(|| format!("column `{name}`"))
            .input()?;
        let pair = if mode == RsdMode::Margin {
            let margins = build_margins(pair.reference(), args.error).input()?;
            pair.with_margins(margins).input()?
        } else {
            pair
        };
        let report = ValidationReport::compute(name.clone(), &pair, mode)
            .with_context(|| format!("column `{name}`"))
            .input()?;
        reports.push(report);
    }

    match &args.out {
        Some(path) => {
            let file = File::create(path)
                .with_context(|| format!("creating {}", path.display()))
                .internal()?;
            let mut w = BufWriter::new(file);
            write_report_table(&reports, &mut w)
                .and_then(|_| w.flush())
                .with_context(|| format!("writing {}", path.display()))
                .internal()?;
        }
        None => write_report_table(&reports, io::stdout().lock()).internal()?,
    }
    let worst = reports
        .iter()
        .min_by(|a, b| a.rsd.total_cmp(&b.rsd))
        .expect("at least one report");
    let summary = format!(
        "compared {} column(s); lowest RSD {:.2} % ({}, {} mode)",
        reports.len(),
        worst.rsd,
        worst.name,
        worst.rsd_mode.as_str()
    );
    if args.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    if let Some(threshold) = args.require_rsd {
        if worst.rsd < threshold {
            return Err(Failure::Threshold(format!(
                "RSD {:.2} % for `{}` is below the required {threshold} %",
                worst.rsd, worst.name
            )));
        }
    }
    Ok(())
}

fn hourly_map(series: &BTreeMap<NaiveDateTime, f64>) -> BTreeMap<NaiveDateTime, f64> {
    let samples: Vec<(NaiveDateTime, f64)> = series.iter().map(|(t, v)| (*t, *v)).collect();
    resample_hourly(&samples).into_iter().collect()
}
