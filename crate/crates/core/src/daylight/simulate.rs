use std::collections::HashMap;
use std::sync::Arc;

use chrono::{Duration, NaiveDateTime};
use rayon::prelude::*;
use serde::Serialize;

use super::factor::{compute_point_daylight, DfBreakdown, PointDaylight};
use super::irc::compute_irc;
use super::patch::{lifted_floor, sun_patch_on_plane, SunPatch};
use super::sky::SkyIntegration;
use super::{Aperture, Building, DaylightError, PatchScope, Room};
use crate::geometry::{make_workplane_grid, GridMesh, Point3, Polygon3, Vec3};
use crate::metrics::resample_hourly;
use crate::solar::{reconstruct_illuminance, sun_position, OutdoorIlluminance, SolarState, WeatherRecord};

/// Diffuse light re-emitted by one sun patch at `p`:
/// E_out_Dir_S × ρ_sol × S_TS / S_T when `p` is in scope, else 0.
pub fn patch_diffuse_term(
    p: Point3,
    out: &OutdoorIlluminance,
    patch: &SunPatch,
    room: &Room,
    scope: PatchScope,
) -> Result<f64, DaylightError> {
    let floor = room.floor_area();
    if !(floor > 0.0) {
        return Err(DaylightError::Configuration("floor area is zero".into()));
    }
    if patch.is_empty() || out.direct <= 0.0 {
        return Ok(0.0);
    }
    if scope == PatchScope::WholeRoom || patch.contains(p) {
        Ok(out.direct * room.optics().floor * patch.area() / floor)
    } else {
        Ok(0.0)
    }
}

/// Indoor diffuse illuminance at `p` due to one aperture: DF × E_out_G plus
/// the sun-patch term.
pub fn diffuse_at_point(
    p: Point3,
    df: &DfBreakdown,
    out: &OutdoorIlluminance,
    patch: &SunPatch,
    room: &Room,
    scope: PatchScope,
) -> Result<f64, DaylightError> {
    Ok(df.df * out.global + patch_diffuse_term(p, out, patch, room, scope)?)
}

/// Direct sunlight at `p`: E_out_Dir_S × τ inside the patch, 0 elsewhere.
pub fn direct_at_point(p: Point3, patch: &SunPatch, out: &OutdoorIlluminance, ap: &Aperture) -> f64 {
    if patch.contains(p) {
        out.direct * ap.transmission
    } else {
        0.0
    }
}

/// Named point where dense time series are recorded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Probe {
    pub name: String,
    pub position: Point3,
}

impl Probe {
    pub fn new(name: impl Into<String>, x: f64, y: f64) -> Self {
        Probe {
            name: name.into(),
            position: Vec3::new(x, y, 0.0),
        }
    }
}

/// Illuminance over the workplane at one instant, lux. Point order follows
/// `grid.points()`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IlluminanceField {
    pub timestamp: NaiveDateTime,
    pub sun: SolarState,
    pub outdoor: OutdoorIlluminance,
    /// One patch per aperture.
    pub patches: Vec<SunPatch>,
    pub diffuse: Vec<f64>,
    pub direct: Vec<f64>,
    pub global: Vec<f64>,
    #[serde(skip)]
    pub grid: Arc<GridMesh>,
    #[serde(skip)]
    pub daylight: Arc<Vec<PointDaylight>>,
}

impl IlluminanceField {
    /// Total S_TS over all apertures.
    pub fn sun_patch_area(&self) -> f64 {
        self.patches.iter().map(SunPatch::area).sum()
    }

    pub fn len(&self) -> usize {
        self.global.len()
    }

    pub fn is_empty(&self) -> bool {
        self.global.is_empty()
    }
}

/// A building with its daylight factors precomputed on the workplane grid
/// and at the probes. Geometry is fixed once built; each timestep only
/// re-evaluates the outdoor-dependent terms.
#[derive(Debug, Clone)]
pub struct Simulator {
    building: Building,
    grid: Arc<GridMesh>,
    lifted_floor: Vec<Polygon3>,
    irc: Vec<f64>,
    daylight: Arc<Vec<PointDaylight>>,
    df: Vec<f64>,
    probes: Vec<Probe>,
    probe_daylight: Vec<PointDaylight>,
}

impl Simulator {
    pub fn new(building: Building) -> Result<Self, DaylightError> {
        Simulator::with_integration(building, &SkyIntegration::default())
    }

    pub fn with_integration(building: Building, cfg: &SkyIntegration) -> Result<Self, DaylightError> {
        building.location.validate()?;
        building.efficacy.validate()?;
        let room = &building.room;
        let grid = make_workplane_grid(room.floor(), building.workplane.cell, building.workplane.height)?;
        let lifted = lifted_floor(room, grid.plane_z())?;
        let irc = room
            .apertures()
            .iter()
            .map(|ap| compute_irc(room, ap, &building.obstructions))
            .collect::<Result<Vec<_>, _>>()?;
        let daylight = grid
            .points()
            .par_iter()
            .map(|gp| compute_point_daylight(gp.position, room, &building.obstructions, &irc, cfg))
            .collect::<Result<Vec<_>, _>>()?;
        let df = daylight.iter().map(|d| d.df).collect();
        Ok(Simulator {
            building,
            grid: Arc::new(grid),
            lifted_floor: lifted,
            irc,
            daylight: Arc::new(daylight),
            df,
            probes: Vec::new(),
            probe_daylight: Vec::new(),
        })
    }

    /// Replaces the probe set. Probe heights are forced onto the workplane.
    pub fn with_probes(mut self, probes: Vec<Probe>) -> Result<Self, DaylightError> {
        let z = self.grid.plane_z();
        let probes: Vec<Probe> = probes
            .into_iter()
            .map(|p| Probe {
                position: Vec3::new(p.position.x, p.position.y, z),
                ..p
            })
            .collect();
        let cfg = SkyIntegration::default();
        self.probe_daylight = probes
            .iter()
            .map(|p| {
                compute_point_daylight(
                    p.position,
                    &self.building.room,
                    &self.building.obstructions,
                    &self.irc,
                    &cfg,
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.probes = probes;
        Ok(self)
    }

    pub fn building(&self) -> &Building {
        &self.building
    }

    pub fn grid(&self) -> &GridMesh {
        &self.grid
    }

    pub fn probes(&self) -> &[Probe] {
        &self.probes
    }

    /// Daylight factors at the grid points, in grid order.
    pub fn daylight(&self) -> &[PointDaylight] {
        &self.daylight
    }

    pub fn probe_daylight(&self) -> &[PointDaylight] {
        &self.probe_daylight
    }

    /// Internally reflected component of each aperture.
    pub fn irc(&self) -> &[f64] {
        &self.irc
    }

    pub fn solar_state(&self, t: NaiveDateTime) -> SolarState {
        sun_position(t, &self.building.location)
    }

    pub fn outdoor(&self, rec: &WeatherRecord) -> Result<(SolarState, OutdoorIlluminance), DaylightError> {
        let sun = self.solar_state(rec.timestamp);
        let out = reconstruct_illuminance(rec, &sun, &self.building.efficacy)?;
        Ok((sun, out))
    }

    /// Sun patch of every aperture. With no direct light the patches are
    /// empty whatever the sun position.
    pub fn sun_patches(&self, sun: &SolarState, out: &OutdoorIlluminance) -> Result<Vec<SunPatch>, DaylightError> {
        let aps = self.building.room.apertures();
        if out.direct <= 0.0 {
            return Ok(vec![SunPatch::empty(); aps.len()]);
        }
        aps.iter()
            .map(|ap| sun_patch_on_plane(&self.lifted_floor, ap, sun, self.grid.plane_z()))
            .collect()
    }

    pub fn simulate_timestep(&self, rec: &WeatherRecord) -> Result<IlluminanceField, DaylightError> {
        let (sun, out) = self.outdoor(rec)?;
        self.evaluate(rec.timestamp, sun, out)
    }

    /// Field for given outdoor conditions, bypassing the weather model.
    pub fn evaluate(
        &self,
        timestamp: NaiveDateTime,
        sun: SolarState,
        out: OutdoorIlluminance,
    ) -> Result<IlluminanceField, DaylightError> {
        let patches = self.sun_patches(&sun, &out)?;
        let terms = self.patch_terms(&out, &patches);
        let n = self.grid.len();
        let (mut diffuse, mut direct, mut global) =
            (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for (gp, &df) in self.grid.points().iter().zip(&self.df) {
            let (d, s) = self.point_values(gp.position, df, &out, &patches, &terms);
            diffuse.push(d);
            direct.push(s);
            global.push(d + s);
        }
        Ok(IlluminanceField {
            timestamp,
            sun,
            outdoor: out,
            patches,
            diffuse,
            direct,
            global,
            grid: Arc::clone(&self.grid),
            daylight: Arc::clone(&self.daylight),
        })
    }

    /// E_glo at each probe.
    pub fn probe_values(&self, out: &OutdoorIlluminance, patches: &[SunPatch]) -> Vec<f64> {
        let terms = self.patch_terms(out, patches);
        self.probes
            .iter()
            .zip(&self.probe_daylight)
            .map(|(p, d)| {
                let (dif, dir) = self.point_values(p.position, d.df, out, patches, &terms);
                dif + dir
            })
            .collect()
    }

    fn patch_terms(&self, out: &OutdoorIlluminance, patches: &[SunPatch]) -> Vec<f64> {
        let room = &self.building.room;
        patches
            .iter()
            .map(|patch| {
                if patch.is_empty() {
                    0.0
                } else {
                    out.direct * room.optics().floor * patch.area() / room.floor_area()
                }
            })
            .collect()
    }

    fn point_values(
        &self,
        p: Point3,
        df: f64,
        out: &OutdoorIlluminance,
        patches: &[SunPatch],
        terms: &[f64],
    ) -> (f64, f64) {
        let mut diffuse = df * out.global;
        let mut direct = 0.0;
        let scope = self.building.patch_scope;
        for ((patch, term), ap) in patches.iter().zip(terms).zip(self.building.room.apertures()) {
            if patch.is_empty() {
                continue;
            }
            let inside = patch.contains(p);
            if inside || scope == PatchScope::WholeRoom {
                diffuse += term;
            }
            if inside {
                direct += out.direct * ap.transmission;
            }
        }
        (diffuse, direct)
    }
}

/// Time window and output cadence of a period run.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodOptions {
    pub start: NaiveDateTime,
    pub end: NaiveDateTime,
    pub step: Duration,
    /// Timestamps at which the full field is kept.
    pub field_times: Vec<NaiveDateTime>,
}

impl PeriodOptions {
    pub fn new(start: NaiveDateTime, end: NaiveDateTime, step_minutes: i64) -> Self {
        PeriodOptions {
            start,
            end,
            step: Duration::minutes(step_minutes),
            field_times: Vec::new(),
        }
    }

    pub fn timestamps(&self) -> Result<Vec<NaiveDateTime>, DaylightError> {
        if self.step < Duration::minutes(1) {
            return Err(DaylightError::InvalidParameter(format!(
                "time step must be at least 1 minute, got {} s",
                self.step.num_seconds()
            )));
        }
        if self.end < self.start {
            return Err(DaylightError::InvalidParameter(format!(
                "period end {} is before start {}",
                self.end, self.start
            )));
        }
        let mut out = Vec::new();
        let mut t = self.start;
        while t <= self.end {
            out.push(t);
            t += self.step;
        }
        Ok(out)
    }
}

/// Per-timestep outdoor conditions and probe values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub timestamp: NaiveDateTime,
    pub sun: SolarState,
    pub outdoor: OutdoorIlluminance,
    pub sun_patch_area: f64,
    /// E_glo at each probe, lux.
    pub probes: Vec<f64>,
    pub grid_mean: f64,
    pub grid_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodResult {
    pub probe_names: Vec<String>,
    pub rows: Vec<SummaryRow>,
    pub fields: Vec<IlluminanceField>,
}

impl PeriodResult {
    /// Series of one probe as (timestamp, lux).
    pub fn probe_series(&self, index: usize) -> Vec<(NaiveDateTime, f64)> {
        self.rows.iter().map(|r| (r.timestamp, r.probes[index])).collect()
    }

    /// Hourly means per probe, keyed by the start of each clock hour.
    pub fn hourly_probe_means(&self) -> Vec<(NaiveDateTime, Vec<f64>)> {
        let per_probe: Vec<_> = (0..self.probe_names.len())
            .map(|k| resample_hourly(&self.probe_series(k)))
            .collect();
        let Some(first) = per_probe.first() else {
            return Vec::new();
        };
        first
            .iter()
            .enumerate()
            .map(|(i, h)| (h.0, per_probe.iter().map(|s| s[i].1).collect()))
            .collect()
    }
}

/// Runs every step of `opts` over the weather series. Steps are evaluated in
/// parallel; rows come back in time order.
pub fn simulate_period(
    sim: &Simulator,
    weather: &[WeatherRecord],
    opts: &PeriodOptions,
) -> Result<PeriodResult, DaylightError> {
    let steps = opts.timestamps()?;
    let by_time: HashMap<NaiveDateTime, &WeatherRecord> = weather.iter().map(|r| (r.timestamp, r)).collect();
    let records = steps
        .iter()
        .map(|t| by_time.get(t).copied().ok_or(DaylightError::MissingWeather(*t)))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(t) = opts
        .field_times
        .iter()
        .find(|t| !by_time.contains_key(t) || !steps.contains(t))
    {
        return Err(DaylightError::Configuration(format!(
            "field time {t} is not a simulated step"
        )));
    }

    let evaluated = records
        .par_iter()
        .map(|rec| {
            let field = sim.simulate_timestep(rec)?;
            let probes = sim.probe_values(&field.outdoor, &field.patches);
            let n = field.global.len() as f64;
            let row = SummaryRow {
                timestamp: rec.timestamp,
                sun: field.sun,
                outdoor: field.outdoor,
                sun_patch_area: field.sun_patch_area(),
                probes,
                grid_mean: field.global.iter().sum::<f64>() / n,
                grid_max: field.global.iter().copied().fold(0.0, f64::max),
            };
            let keep = opts.field_times.contains(&rec.timestamp);
            Ok((row, keep.then_some(field)))
        })
        .collect::<Result<Vec<_>, DaylightError>>()?;

    let mut rows = Vec::with_capacity(evaluated.len());
    let mut fields = Vec::new();
    for (row, field) in evaluated {
        rows.push(row);
        fields.extend(field);
    }
    Ok(PeriodResult {
        probe_names: sim.probes.iter().map(|p| p.name.clone()).collect(),
        rows,
        fields,
    })
}

#[cfg(test)]
mod tests {
    use super::super::testing::{reference_building, reference_room};
    use super::*;
    use chrono::NaiveDate;

    fn at(h: u32, m: u32) -> NaiveDateTime {
        NaiveDate::from_ymd_opt(2009, 6, 21)
            .unwrap()
            .and_hms_opt(h, m, 0)
            .unwrap()
    }

    fn unit_patch() -> SunPatch {
        let room = reference_room();
        let sun = SolarState::from_angles(60.0, 0.0);
        let lifted = lifted_floor(&room, 0.01).unwrap();
        sun_patch_on_plane(&lifted, &room.apertures()[0], &sun, 0.01).unwrap()
    }

    #[test]
    fn diffuse_examples() {
        let room = reference_room();
        let df = DfBreakdown {
            df: 0.02,
            ..DfBreakdown::default()
        };
        let overcast = OutdoorIlluminance::new(10_000.0, 0.0);
        let p = Vec3::new(1.95, 3.0, 0.01);
        let empty = SunPatch::empty();
        assert!(
            (diffuse_at_point(p, &df, &overcast, &empty, &room, PatchScope::PatchOnly).unwrap() - 200.0).abs() < 1e-9
        );

        let patch = unit_patch();
        let sunny = OutdoorIlluminance {
            global: 10_000.0,
            diffuse: 10_000.0,
            direct: 50_000.0,
        };
        let expected = 200.0 + 50_000.0 * 0.2 * patch.area() / 13.65;
        let got = diffuse_at_point(p, &df, &sunny, &patch, &room, PatchScope::PatchOnly).unwrap();
        assert!((got - expected).abs() < 1e-9);
        let far = Vec3::new(0.2, 0.2, 0.01);
        assert!(
            (diffuse_at_point(far, &df, &sunny, &patch, &room, PatchScope::PatchOnly).unwrap() - 200.0).abs() < 1e-9
        );
        assert!(
            (diffuse_at_point(far, &df, &sunny, &patch, &room, PatchScope::WholeRoom).unwrap() - expected).abs() < 1e-9
        );
        // With S_TS = 1 m² the term is 50000 × 0.2 / 13.65 = 732.6 lux.
        assert!((200.0 + 50_000.0 * 0.2 * (1.0f64 / 13.65) - 932.6).abs() < 0.05);
        assert_eq!(
            diffuse_at_point(p, &df, &overcast, &patch, &room, PatchScope::PatchOnly).unwrap(),
            200.0
        );
    }

    #[test]
    fn direct_examples() {
        let room = reference_room();
        let ap = &room.apertures()[0];
        let patch = unit_patch();
        let out = OutdoorIlluminance::new(20_000.0, 60_000.0);
        assert!((direct_at_point(Vec3::new(1.95, 3.0, 0.01), &patch, &out, ap) - 54_000.0).abs() < 1e-9);
        assert_eq!(direct_at_point(Vec3::new(0.2, 0.2, 0.01), &patch, &out, ap), 0.0);
        assert_eq!(
            direct_at_point(Vec3::new(1.95, 3.0, 0.01), &SunPatch::empty(), &out, ap),
            0.0
        );
    }

    #[test]
    fn night_and_overcast_regimes() {
        let sim = Simulator::new(reference_building()).unwrap();
        let night = WeatherRecord::irradiance_only(at(1, 0), 0.0, 0.0).unwrap();
        let f = sim.simulate_timestep(&night).unwrap();
        assert!(f.global.iter().chain(&f.diffuse).chain(&f.direct).all(|v| *v == 0.0));

        let overcast = WeatherRecord::irradiance_only(at(12, 0), 300.0, 300.0).unwrap();
        let f = sim.simulate_timestep(&overcast).unwrap();
        assert_eq!(f.sun_patch_area(), 0.0);
        assert!(f.direct.iter().all(|v| *v == 0.0));
        for (g, d) in f.global.iter().zip(sim.daylight()) {
            assert!((g - d.df * f.outdoor.global).abs() <= 1e-12 * g.abs().max(1.0));
        }
    }

    #[test]
    fn clear_sky_points_match_hand_assembly() {
        let sim = Simulator::new(reference_building()).unwrap();
        let room = &sim.building().room;
        let ap = &room.apertures()[0];
        // Winter at the site: noon sun stands in the north.
        let t = NaiveDate::from_ymd_opt(2009, 6, 21)
            .unwrap()
            .and_hms_opt(12, 0, 0)
            .unwrap();
        let rec = WeatherRecord::irradiance_only(t, 600.0, 100.0).unwrap();
        let f = sim.simulate_timestep(&rec).unwrap();
        assert!(f.sun_patch_area() > 0.0);
        let lit = (0..f.len()).filter(|&i| f.direct[i] > 0.0).count();
        assert!(lit > 0);
        let picks = [
            0,
            f.len() / 4,
            f.len() / 2,
            f.len() - 1,
            (0..f.len()).find(|&i| f.direct[i] > 0.0).unwrap(),
        ];
        for i in picks {
            let p = sim.grid().points()[i].position;
            let df = sim.daylight()[i].df;
            let in_patch = f.patches[0].contains(p);
            let dif = df * f.outdoor.global
                + if in_patch {
                    f.outdoor.direct * 0.2 * f.patches[0].area() / 13.65
                } else {
                    0.0
                };
            let dir = if in_patch {
                f.outdoor.direct * ap.transmission
            } else {
                0.0
            };
            let expected = dif + dir;
            assert!((f.global[i] - expected).abs() <= 1e-9 * expected.max(1.0), "point {i}");
            assert_eq!(f.global[i], f.diffuse[i] + f.direct[i]);
        }
    }

    #[test]
    fn period_runs_and_averages() {
        let sim = Simulator::new(reference_building())
            .unwrap()
            .with_probes(vec![Probe::new("P1", 1.95, 3.27), Probe::new("P2", 1.95, 2.77)])
            .unwrap();
        let day = NaiveDate::from_ymd_opt(2009, 6, 21).unwrap();
        let weather: Vec<WeatherRecord> = (0..24 * 60)
            .map(|m| {
                let t = day.and_hms_opt(0, 0, 0).unwrap() + Duration::minutes(m);
                WeatherRecord::irradiance_only(t, 200.0, 200.0).unwrap()
            })
            .collect();
        let mut opts = PeriodOptions::new(weather[0].timestamp, weather.last().unwrap().timestamp, 1);
        opts.field_times.push(at(12, 0));
        let result = simulate_period(&sim, &weather, &opts).unwrap();
        assert_eq!(result.rows.len(), 1440);
        assert_eq!(result.fields.len(), 1);
        assert_eq!(result.fields[0].timestamp, at(12, 0));
        assert!(Arc::ptr_eq(&result.fields[0].daylight, &sim.daylight));

        let hourly = result.hourly_probe_means();
        assert_eq!(hourly.len(), 24);
        for (k, (hour, means)) in hourly.iter().enumerate() {
            for (j, mean) in means.iter().enumerate() {
                let vals: Vec<f64> = result.rows[k * 60..(k + 1) * 60].iter().map(|r| r.probes[j]).collect();
                assert!(result.rows[k * 60].timestamp == *hour);
                assert!((mean - vals.iter().sum::<f64>() / 60.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn constant_overcast_gives_constant_probes() {
        let sim = Simulator::new(reference_building())
            .unwrap()
            .with_probes(vec![Probe::new("P1", 1.95, 3.27)])
            .unwrap();
        let out = OutdoorIlluminance::new(15_000.0, 0.0);
        let sun = SolarState::from_angles(30.0, 90.0);
        let patches = sim.sun_patches(&sun, &out).unwrap();
        let a = sim.probe_values(&out, &patches);
        let sun2 = SolarState::from_angles(60.0, 10.0);
        let b = sim.probe_values(&out, &sim.sun_patches(&sun2, &out).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn missing_record_is_named() {
        let sim = Simulator::new(reference_building()).unwrap();
        let weather = vec![
            WeatherRecord::irradiance_only(at(10, 0), 100.0, 100.0).unwrap(),
            WeatherRecord::irradiance_only(at(10, 2), 100.0, 100.0).unwrap(),
        ];
        let opts = PeriodOptions::new(at(10, 0), at(10, 2), 1);
        assert_eq!(
            simulate_period(&sim, &weather, &opts).unwrap_err(),
            DaylightError::MissingWeather(at(10, 1))
        );
        let bad = PeriodOptions {
            step: Duration::seconds(30),
            ..opts
        };
        assert!(matches!(
            simulate_period(&sim, &weather, &bad),
            Err(DaylightError::InvalidParameter(_))
        ));
    }
}
