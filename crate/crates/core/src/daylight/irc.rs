//! Internally reflected component by the split-flux formula.

use super::sky::mean_obstruction_elevation;
use super::{Aperture, DaylightError, Obstruction, Room};

/// Mean reflectances at or above this value make `1 / (1 - R)` blow up.
pub const DIVERGENCE_LIMIT: f64 = 0.99;

/// Inputs of the split-flux formula. Areas in m², reflectances in 0–1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitFluxInputs {
    /// Glazed area W.
    pub glazed_area: f64,
    /// Total area of all room surfaces A, windows included.
    pub total_area: f64,
    /// Area-weighted mean reflectance of all surfaces.
    pub mean_reflectance: f64,
    /// Mean reflectance of the floor and of the walls below the window mid-height.
    pub lower_reflectance: f64,
    /// Mean reflectance of the ceiling and of the walls above the window mid-height.
    pub upper_reflectance: f64,
    /// Coefficient C depending on the external obstruction (39 when unobstructed).
    pub obstruction_coefficient: f64,
}

/// IRC = 0.85 W / (A (1 − R)) × (C R_fw + 5 R_cw), returned as a fraction.
pub fn split_flux_irc(inp: &SplitFluxInputs) -> Result<f64, DaylightError> {
    if !(inp.total_area > 0.0) || !(inp.glazed_area >= 0.0) {
        return Err(DaylightError::InvalidParameter(format!(
            "split-flux areas W = {}, A = {} must be non-negative with A > 0",
            inp.glazed_area, inp.total_area
        )));
    }
    if inp.mean_reflectance >= DIVERGENCE_LIMIT {
        return Err(DaylightError::Divergent {
            mean_reflectance: inp.mean_reflectance,
        });
    }
    let percent = 0.85 * inp.glazed_area / (inp.total_area * (1.0 - inp.mean_reflectance))
        * (inp.obstruction_coefficient * inp.lower_reflectance + 5.0 * inp.upper_reflectance);
    Ok(percent / 100.0)
}

/// C = 39 (1 − θ / 80) for a mean obstruction angle θ in degrees above the
/// horizon, never negative.
pub fn obstruction_coefficient(mean_obstruction_elevation_deg: f64) -> f64 {
    (39.0 * (1.0 - mean_obstruction_elevation_deg / 80.0)).max(0.0)
}

/// Uniform internally reflected component due to one aperture.
pub fn compute_irc(room: &Room, ap: &Aperture, obstructions: &[Obstruction]) -> Result<f64, DaylightError> {
    let optics = room.optics();
    let floor = room.floor_area();
    let perimeter = room.perimeter();
    let height = room.height();
    let centre = ap.polygon.centroid();
    let mid = (centre.z - room.floor_z()).clamp(0.0, height);

    let lower_walls = perimeter * mid;
    let upper_walls = perimeter * (height - mid);
    let total = 2.0 * floor + perimeter * height;
    let mean = (floor * (optics.floor + optics.ceiling) + perimeter * height * optics.walls) / total;
    let lower = (floor * optics.floor + lower_walls * optics.walls) / (floor + lower_walls);
    let upper = (floor * optics.ceiling + upper_walls * optics.walls) / (floor + upper_walls);
    let theta = mean_obstruction_elevation(centre, ap.outward_normal(), obstructions);

    split_flux_irc(&SplitFluxInputs {
        glazed_area: ap.polygon.area(),
        total_area: total,
        mean_reflectance: mean,
        lower_reflectance: lower,
        upper_reflectance: upper,
        obstruction_coefficient: obstruction_coefficient(theta),
    })
}
