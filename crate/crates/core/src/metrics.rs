//! Agreement statistics between simulated and reference illuminance series.

use std::collections::BTreeMap;
use std::io::{self, Write};

use chrono::{NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Report annotation threshold: an RSD at or above this is called reliable.
pub const RSD_RELIABLE_THRESHOLD: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("series is empty")]
    Empty,
    #[error("model has {model} values but reference has {reference}")]
    LengthMismatch { model: usize, reference: usize },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("reference mean is zero")]
    ZeroMean,
    #[error("reference series is constant")]
    ConstantReference,
    #[error("every reference value is zero")]
    AllReferencesZero,
    #[error("margin mode needs margins")]
    MissingMargins,
    #[error("margin {index} has lower bound above upper bound")]
    InvalidMargin { index: usize },
    #[error("{0}")]
    InvalidArgument(String),
}

/// Paired model and reference values, optionally with per-point acceptance
/// margins on the reference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesPair {
    model: Vec<f64>,
    reference: Vec<f64>,
    margins: Option<Vec<(f64, f64)>>,
}

impl SeriesPair {
    pub fn new(model: Vec<f64>, reference: Vec<f64>) -> Result<Self, MetricsError> {
        if model.len() != reference.len() {
            return Err(MetricsError::LengthMismatch {
                model: model.len(),
                reference: reference.len(),
            });
        }
        if model.is_empty() {
            return Err(MetricsError::Empty);
        }
        if let Some(i) = model
            .iter()
            .zip(&reference)
            .position(|(m, r)| !m.is_finite() || !r.is_finite())
        {
            return Err(MetricsError::NonFinite(i));
        }
        Ok(SeriesPair {
            model,
            reference,
            margins: None,
        })
    }

    pub fn with_margins(mut self, margins: Vec<(f64, f64)>) -> Result<Self, MetricsError> {
        if margins.len() != self.reference.len() {
            return Err(MetricsError::LengthMismatch {
                model: self.model.len(),
                reference: margins.len(),
            });
        }
        if let Some(index) = margins.iter().position(|(lo, hi)| !(lo <= hi)) {
            return Err(MetricsError::InvalidMargin { index });
        }
        self.margins = Some(margins);
        Ok(self)
    }

    pub fn model(&self) -> &[f64] {
        &self.model
    }

    pub fn reference(&self) -> &[f64] {
        &self.reference
    }

    pub fn margins(&self) -> Option<&[(f64, f64)]> {
        self.margins.as_deref()
    }

    pub fn len(&self) -> usize {
        self.model.len()
    }

    pub fn is_empty(&self) -> bool {
        self.model.is_empty()
    }

    /// E_mean, the mean of the reference values.
    pub fn reference_mean(&self) -> f64 {
        self.reference.iter().sum::<f64>() / self.len() as f64
    }

    fn differences(&self) -> impl Iterator<Item = f64> + '_ {
        self.model.iter().zip(&self.reference).map(|(m, r)| m - r)
    }

    fn nonzero_mean(&self) -> Result<f64, MetricsError> {
        let mean = self.reference_mean();
        if mean == 0.0 {
            Err(MetricsError::ZeroMean)
        } else {
            Ok(mean)
        }
    }
}

/// Root mean square deviation normalised by the reference mean:
/// sqrt(Σ(mod − ref)² / N) / E_mean.
pub fn rmsd(s: &SeriesPair) -> Result<f64, MetricsError> {
    let mean = s.nonzero_mean()?;
    let sq: f64 = s.differences().map(|d| d * d).sum();
    Ok((sq / s.len() as f64).sqrt() / mean)
}

/// Mean bias deviation in percent: 100 Σ(mod − ref) / (N E_mean).
pub fn mbd(s: &SeriesPair) -> Result<f64, MetricsError> {
    let mean = s.nonzero_mean()?;
    let sum: f64 = s.differences().sum();
    Ok(sum / (s.len() as f64 * mean) * 100.0)
}

/// `(printed, standard)` where printed = Σ(mod − ref)² / Σ(ref − E_mean)²
/// and standard = 1 − printed.
pub fn r2(s: &SeriesPair) -> Result<(f64, f64), MetricsError> {
    let mean = s.reference_mean();
    let spread: f64 = s.reference.iter().map(|r| (r - mean) * (r - mean)).sum();
    if spread == 0.0 {
        return Err(MetricsError::ConstantReference);
    }
    let printed = s.differences().map(|d| d * d).sum::<f64>() / spread;
    Ok((printed, 1.0 - printed))
}

/// Relative errors, as fractions. Points whose reference is zero are left
/// out and counted in `excluded`; the means run over the remaining points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelativeErrors {
    /// (index in the series, ε_i).
    pub per_point: Vec<(usize, f64)>,
    pub mean: f64,
    pub mean_abs: f64,
    pub excluded: usize,
}

impl RelativeErrors {
    pub fn mean_percent(&self) -> f64 {
        self.mean * 100.0
    }

    pub fn mean_abs_percent(&self) -> f64 {
        self.mean_abs * 100.0
    }
}

/// ε_i = (sim − ref) / |ref| with global mean and mean absolute value.
pub fn relative_errors(s: &SeriesPair) -> Result<RelativeErrors, MetricsError> {
    let per_point: Vec<(usize, f64)> = s
        .model
        .iter()
        .zip(&s.reference)
        .enumerate()
        .filter(|(_, (_, r))| **r != 0.0)
        .map(|(i, (m, r))| (i, (m - r) / r.abs()))
        .collect();
    if per_point.is_empty() {
        return Err(MetricsError::AllReferencesZero);
    }
    let n = per_point.len() as f64;
    Ok(RelativeErrors {
        mean: per_point.iter().map(|e| e.1).sum::<f64>() / n,
        mean_abs: per_point.iter().map(|e| e.1.abs()).sum::<f64>() / n,
        excluded: s.len() - per_point.len(),
        per_point,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RsdMode {
    /// Share of simulated values inside the reference margins.
    #[default]
    Margin,
    /// 100 minus the mean absolute relative error.
    Error,
}

impl RsdMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RsdMode::Margin => "margin",
            RsdMode::Error => "error",
        }
    }
}

/// Reliability of the software degree, percent in [0, 100].
pub fn rsd(s: &SeriesPair, mode: RsdMode) -> Result<f64, MetricsError> {
    match mode {
        RsdMode::Margin => {
            let margins = s.margins().ok_or(MetricsError::MissingMargins)?;
            let inside = s
                .model
                .iter()
                .zip(margins)
                .filter(|(v, (lo, hi))| lo <= *v && *v <= hi)
                .count();
            Ok(100.0 * inside as f64 / s.len() as f64)
        }
        RsdMode::Error => {
            let e = relative_errors(s)?;
            Ok((100.0 - e.mean_abs_percent()).clamp(0.0, 100.0))
        }
    }
}

/// Margins ref·(1 − e) .. ref·(1 + e) for a total error fraction `e`.
pub fn build_margins(reference: &[f64], error_fraction: f64) -> Result<Vec<(f64, f64)>, MetricsError> {
    if !(0.0..=1.0).contains(&error_fraction) {
        return Err(MetricsError::InvalidArgument(format!(
            "error fraction {error_fraction} outside [0, 1]"
        )));
    }
    Ok(reference
        .iter()
        .map(|r| {
            let (a, b) = (r * (1.0 - error_fraction), r * (1.0 + error_fraction));
            (a.min(b), a.max(b))
        })
        .collect())
}

/// Arithmetic mean per clock hour, keyed by the start of the hour, in time
/// order. Hours without samples do not appear.
pub fn resample_hourly(samples: &[(NaiveDateTime, f64)]) -> Vec<(NaiveDateTime, f64)> {
    let mut bins: BTreeMap<NaiveDateTime, (f64, usize)> = BTreeMap::new();
    for &(t, v) in samples {
        let hour = t
            .with_minute(0)
            .and_then(|t| t.with_second(0))
            .and_then(|t| t.with_nanosecond(0))
            .expect("zero minute is always valid");
        let bin = bins.entry(hour).or_insert((0.0, 0));
        bin.0 += v;
        bin.1 += 1;
    }
    bins.into_iter().map(|(h, (sum, n))| (h, sum / n as f64)).collect()
}

/// All statistics for one compared series. Metrics that are undefined for
/// the data (zero mean, constant reference) are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub name: String,
    pub rmsd: Option<f64>,
    /// Percent.
    pub mbd: Option<f64>,
    pub r2_printed: Option<f64>,
    pub r2_standard: Option<f64>,
    pub relative: RelativeErrors,
    /// Percent.
    pub rsd: f64,
    pub rsd_mode: RsdMode,
    pub n: usize,
}

impl ValidationReport {
    pub fn compute(name: impl Into<String>, s: &SeriesPair, mode: RsdMode) -> Result<Self, MetricsError> {
        let relative = relative_errors(s)?;
        let r2 = r2(s).ok();
        Ok(ValidationReport {
            name: name.into(),
            rmsd: rmsd(s).ok(),
            mbd: mbd(s).ok(),
            r2_printed: r2.map(|r| r.0),
            r2_standard: r2.map(|r| r.1),
            rsd: rsd(s, mode)?,
            rsd_mode: mode,
            n: s.len(),
            relative,
        })
    }

    pub fn is_reliable(&self) -> bool {
        self.rsd >= RSD_RELIABLE_THRESHOLD
    }

    pub fn observation(&self) -> &'static str {
        if self.is_reliable() {
            "reliable (RSD >= 50%)"
        } else {
            "not reliable (RSD < 50%)"
        }
    }
}

pub const REPORT_COLUMNS: [&str; 12] = [
    "test",
    "relative_error_pct",
    "mean_abs_relative_error_pct",
    "rsd_pct",
    "rsd_mode",
    "rmsd",
    "mbd_pct",
    "r2_printed",
    "r2_standard",
    "n",
    "excluded",
    "observation",
];

/// Tab-delimited table, one row per report.
pub fn write_report_table<W: Write>(reports: &[ValidationReport], mut w: W) -> io::Result<()> {
    let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |v| format!("{v:.6}"));
    writeln!(w, "{}", REPORT_COLUMNS.join("\t"))?;
    for r in reports {
        let cells = [
            r.name.clone(),
            format!("{:.3}", r.relative.mean_percent()),
            format!("{:.3}", r.relative.mean_abs_percent()),
            format!("{:.3}", r.rsd),
            r.rsd_mode.as_str().to_string(),
            opt(r.rmsd),
            opt(r.mbd),
            opt(r.r2_printed),
            opt(r.r2_standard),
            r.n.to_string(),
            r.relative.excluded.to_string(),
            r.observation().to_string(),
        ];
        writeln!(w, "{}", cells.join("\t"))?;
    }
    Ok(())
}
