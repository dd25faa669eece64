//! Indoor daylighting on a meshed horizontal workplane.
//!
//! Illuminance at each workplane point is the sum of three parts: the
//! daylight-factor diffuse term, the diffuse light re-emitted by the sun
//! patch, and the direct sunlight transmitted into the patch. The crate also
//! carries the sun-position and weather-reconstruction code feeding that
//! model, file readers and writers, and the validation metrics used to
//! compare simulated and measured illuminance.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod daylight;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod solar;

pub use daylight::{
    Aperture, Building, DaylightError, DfBreakdown, IlluminanceField, Obstruction, PatchScope, PeriodOptions,
    PeriodResult, Room, Simulator, SunPatch, SurfaceOptics,
};
pub use geometry::{GeometryError, GridMesh, Point3, Polygon3, Vec3};
pub use io::{BuildingDescription, IoError};
pub use metrics::{MetricsError, RsdMode, SeriesPair, ValidationReport};
pub use solar::{EfficacyModel, GeoLocation, OutdoorIlluminance, SolarError, SolarState, WeatherRecord};
