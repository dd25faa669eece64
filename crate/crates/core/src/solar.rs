//! Sun position and reconstruction of outdoor illuminance from irradiance
//! records.

use chrono::{NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec3;

/// Highest irradiance accepted in a weather record, W/m².
pub const MAX_IRRADIANCE: f64 = 1500.0;
/// Relative excess of diffuse over global irradiance that is clamped
/// rather than rejected.
pub const DIFFUSE_EXCESS_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolarError {
    #[error("invalid location: {0}")]
    InvalidLocation(String),
    #[error("invalid weather record: {0}")]
    InvalidRecord(String),
    #[error("diffuse irradiance {diffuse} W/m² exceeds global {global} W/m² by more than 2%")]
    DiffuseExceedsGlobal { global: f64, diffuse: f64 },
    #[error("invalid luminous efficacy: {0}")]
    InvalidEfficacy(String),
}

/// Site of the building. Longitude positive East, timezone in hours ahead of
/// UTC.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoLocation {
    pub latitude: f64,
    pub longitude: f64,
    pub timezone: f64,
    pub albedo: f64,
}

impl GeoLocation {
    pub fn new(latitude: f64, longitude: f64, timezone: f64, albedo: f64) -> Result<Self, SolarError> {
        let loc = GeoLocation {
            latitude,
            longitude,
            timezone,
            albedo,
        };
        loc.validate()?;
        Ok(loc)
    }

    pub fn validate(&self) -> Result<(), SolarError> {
        if !(self.latitude.abs() <= 90.0) {
            return Err(SolarError::InvalidLocation(format!(
                "latitude {} outside [-90, 90]",
                self.latitude
            )));
        }
        if !(self.longitude.abs() <= 180.0) {
            return Err(SolarError::InvalidLocation(format!(
                "longitude {} outside [-180, 180]",
                self.longitude
            )));
        }
        if !(self.timezone.abs() <= 14.0) {
            return Err(SolarError::InvalidLocation(format!(
                "timezone offset {} h out of range",
                self.timezone
            )));
        }
        if !(0.0..=1.0).contains(&self.albedo) {
            return Err(SolarError::InvalidLocation(format!(
                "albedo {} outside [0, 1]",
                self.albedo
            )));
        }
        Ok(())
    }
}

/// Apparent sun position. `direction` is the unit vector of travel of
/// sunlight (from the sun toward the ground) in the x = East, y = North,
/// z = up frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolarState {
    pub altitude: f64,
    pub azimuth: f64,
    pub direction: Vec3,
}

impl SolarState {
    /// Altitude in degrees above the horizon, azimuth in degrees clockwise
    /// from North.
    pub fn from_angles(altitude: f64, azimuth: f64) -> Self {
        let azimuth = azimuth.rem_euclid(360.0);
        let (alt, az) = (altitude.to_radians(), azimuth.to_radians());
        let towards_sun = Vec3::new(alt.cos() * az.sin(), alt.cos() * az.cos(), alt.sin());
        SolarState {
            altitude,
            azimuth,
            direction: -towards_sun,
        }
    }

    pub fn is_above_horizon(&self) -> bool {
        self.altitude > 0.0
    }
}

/// Sun position for a local civil timestamp, following the NOAA solar
/// calculator (Meeus low-precision series, with its atmospheric refraction
/// correction). Intended for years 1950–2100.
pub fn sun_position(t: NaiveDateTime, loc: &GeoLocation) -> SolarState {
    let utc_seconds = t.and_utc().timestamp() as f64 + f64::from(t.nanosecond()) * 1e-9 - loc.timezone * 3600.0;
    let julian_day = utc_seconds / 86_400.0 + 2_440_587.5;
    let jc = (julian_day - 2_451_545.0) / 36_525.0;

    let mean_long = (280.46646 + jc * (36000.76983 + jc * 0.0003032)).rem_euclid(360.0);
    let mean_anom = 357.52911 + jc * (35999.05029 - 0.0001537 * jc);
    let ecc = 0.016708634 - jc * (0.000042037 + 0.0000001267 * jc);
    let m = mean_anom.to_radians();
    let centre = m.sin() * (1.914602 - jc * (0.004817 + 0.000014 * jc))
        + (2.0 * m).sin() * (0.019993 - 0.000101 * jc)
        + (3.0 * m).sin() * 0.000289;
    let true_long = mean_long + centre;
    let omega = (125.04 - 1934.136 * jc).to_radians();
    let app_long = true_long - 0.00569 - 0.00478 * omega.sin();
    let mean_obliq = 23.0 + (26.0 + (21.448 - jc * (46.815 + jc * (0.00059 - jc * 0.001813))) / 60.0) / 60.0;
    let obliq = (mean_obliq + 0.00256 * omega.cos()).to_radians();
    let decl = (obliq.sin() * app_long.to_radians().sin()).asin();

    let y = (obliq / 2.0).tan().powi(2);
    let l0 = mean_long.to_radians();
    let eq_time = 4.0
        * (y * (2.0 * l0).sin() - 2.0 * ecc * m.sin() + 4.0 * ecc * y * m.sin() * (2.0 * l0).cos()
            - 0.5 * y * y * (4.0 * l0).sin()
            - 1.25 * ecc * ecc * (2.0 * m).sin())
        .to_degrees();

    let local_minutes = f64::from(t.num_seconds_from_midnight()) / 60.0;
    let true_solar = (local_minutes + eq_time + 4.0 * loc.longitude - 60.0 * loc.timezone).rem_euclid(1440.0);
    let hour_angle = (true_solar / 4.0 - 180.0).to_radians();

    let lat = loc.latitude.to_radians();
    let cos_zenith = (lat.sin() * decl.sin() + lat.cos() * decl.cos() * hour_angle.cos()).clamp(-1.0, 1.0);
    let elevation = 90.0 - cos_zenith.acos().to_degrees();
    let altitude = elevation + refraction(elevation);

    let azimuth = (-hour_angle.sin() * decl.cos())
        .atan2(decl.sin() * lat.cos() - decl.cos() * lat.sin() * hour_angle.cos())
        .to_degrees();

    SolarState::from_angles(altitude, azimuth)
}

/// Refraction correction in degrees for a geometric elevation in degrees.
fn refraction(elevation: f64) -> f64 {
    let arcsec = if elevation > 85.0 {
        0.0
    } else if elevation > 5.0 {
        let t = elevation.to_radians().tan();
        58.1 / t - 0.07 / t.powi(3) + 0.000086 / t.powi(5)
    } else if elevation > -0.575 {
        1735.0 + elevation * (-518.2 + elevation * (103.4 + elevation * (-12.79 + elevation * 0.711)))
    } else {
        -20.772 / elevation.to_radians().tan()
    };
    arcsec / 3600.0
}

/// One weather sample: horizontal irradiances in W/m² and, when the file
/// carries them, measured horizontal illuminances in lux.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeatherRecord {
    pub timestamp: NaiveDateTime,
    pub global_horizontal: f64,
    pub diffuse_horizontal: f64,
    pub global_illuminance: Option<f64>,
    pub diffuse_illuminance: Option<f64>,
}

impl WeatherRecord {
    pub fn new(
        timestamp: NaiveDateTime,
        global_horizontal: f64,
        diffuse_horizontal: f64,
        global_illuminance: Option<f64>,
        diffuse_illuminance: Option<f64>,
    ) -> Result<Self, SolarError> {
        let rec = WeatherRecord {
            timestamp,
            global_horizontal,
            diffuse_horizontal,
            global_illuminance,
            diffuse_illuminance,
        };
        rec.validate()?;
        Ok(rec)
    }

    pub fn irradiance_only(timestamp: NaiveDateTime, global: f64, diffuse: f64) -> Result<Self, SolarError> {
        WeatherRecord::new(timestamp, global, diffuse, None, None)
    }

    pub fn validate(&self) -> Result<(), SolarError> {
        let (gh, dh) = (self.global_horizontal, self.diffuse_horizontal);
        for (name, v) in [("global", gh), ("diffuse", dh)] {
            if !(0.0..=MAX_IRRADIANCE).contains(&v) {
                return Err(SolarError::InvalidRecord(format!(
                    "{name} irradiance {v} W/m² outside [0, {MAX_IRRADIANCE}]"
                )));
            }
        }
        if dh > gh * (1.0 + DIFFUSE_EXCESS_TOLERANCE) {
            return Err(SolarError::DiffuseExceedsGlobal {
                global: gh,
                diffuse: dh,
            });
        }
        for (name, v) in [
            ("global", self.global_illuminance),
            ("diffuse", self.diffuse_illuminance),
        ] {
            if let Some(v) = v {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(SolarError::InvalidRecord(format!(
                        "{name} illuminance {v} lux is negative"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Beam horizontal irradiance, `max(0, Gh - Dh)`.
    pub fn beam_horizontal(&self) -> f64 {
        (self.global_horizontal - self.diffuse_horizontal).max(0.0)
    }
}

/// Outdoor horizontal illuminance split, in lux. `global` is always
/// `diffuse + direct` as computed.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct OutdoorIlluminance {
    pub global: f64,
    pub diffuse: f64,
    pub direct: f64,
}

impl OutdoorIlluminance {
    pub fn new(diffuse: f64, direct: f64) -> Self {
        OutdoorIlluminance {
            global: diffuse + direct,
            diffuse,
            direct,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        OutdoorIlluminance::new(self.diffuse * factor, self.direct * factor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EfficacyMode {
    /// Illuminance = constant efficacy × irradiance.
    #[default]
    Constant,
    /// Use measured illuminance columns when present, constants otherwise.
    Passthrough,
}

/// Luminous efficacies in lm/W.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficacyModel {
    pub mode: EfficacyMode,
    /// Kg. Validated but not used: global illuminance is diffuse + direct.
    pub global: f64,
    pub diffuse: f64,
    pub beam: f64,
}

impl Default for EfficacyModel {
    fn default() -> Self {
        EfficacyModel {
            mode: EfficacyMode::Constant,
            global: 110.0,
            diffuse: 120.0,
            beam: 93.0,
        }
    }
}

impl EfficacyModel {
    pub fn constant(diffuse: f64, beam: f64) -> Result<Self, SolarError> {
        let m = EfficacyModel {
            diffuse,
            beam,
            ..EfficacyModel::default()
        };
        m.validate()?;
        Ok(m)
    }

    pub fn passthrough() -> Self {
        EfficacyModel {
            mode: EfficacyMode::Passthrough,
            ..EfficacyModel::default()
        }
    }

    pub fn validate(&self) -> Result<(), SolarError> {
        for (name, k) in [("Kg", self.global), ("Kd", self.diffuse), ("Kb", self.beam)] {
            if !(k > 0.0) || !k.is_finite() {
                return Err(SolarError::InvalidEfficacy(format!("{name} = {k} must be positive")));
            }
        }
        if self.mode == EfficacyMode::Constant {
            for (name, k) in [("Kd", self.diffuse), ("Kb", self.beam)] {
                if !(50.0..=200.0).contains(&k) {
                    return Err(SolarError::InvalidEfficacy(format!(
                        "{name} = {k} lm/W outside [50, 200]"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Outdoor horizontal illuminance for one record. Everything is zero with
/// the sun at or below the horizon.
pub fn reconstruct_illuminance(
    rec: &WeatherRecord,
    sun: &SolarState,
    eff: &EfficacyModel,
) -> Result<OutdoorIlluminance, SolarError> {
    rec.validate()?;
    eff.validate()?;
    if !sun.is_above_horizon() {
        return Ok(OutdoorIlluminance::default());
    }
    let diffuse_irr = rec.diffuse_horizontal.min(rec.global_horizontal);
    let beam_irr = rec.global_horizontal - diffuse_irr;
    let modelled_diffuse = eff.diffuse * diffuse_irr;
    let modelled_direct = eff.beam * beam_irr;

    if eff.mode == EfficacyMode::Passthrough {
        match (rec.global_illuminance, rec.diffuse_illuminance) {
            (Some(global), Some(diffuse)) => {
                let diffuse = diffuse.min(global);
                return Ok(OutdoorIlluminance::new(diffuse, global - diffuse));
            }
            (Some(global), None) => {
                let total = modelled_diffuse + modelled_direct;
                let diffuse = if total > 0.0 {
                    global * modelled_diffuse / total
                } else {
                    global
                };
                return Ok(OutdoorIlluminance::new(diffuse, global - diffuse));
            }
            (None, Some(diffuse)) => return Ok(OutdoorIlluminance::new(diffuse, modelled_direct)),
            (None, None) => {}
        }
    }
    Ok(OutdoorIlluminance::new(modelled_diffuse, modelled_direct))
}
