//! Daylight factor, sun patch and the combined workplane illuminance model.

mod factor;
mod irc;
mod patch;
mod simulate;
mod sky;

pub use factor::{compute_df, compute_point_daylight, DfBreakdown, PointDaylight};
pub use irc::{compute_irc, obstruction_coefficient, split_flux_irc, SplitFluxInputs};
pub use patch::{compute_sun_patch, SunPatch};
pub use simulate::{
    diffuse_at_point, direct_at_point, patch_diffuse_term, simulate_period, IlluminanceField, PeriodOptions,
    PeriodResult, Probe, Simulator, SummaryRow,
};
pub use sky::{compute_erc, compute_sc, sky_components, SkyComponents, SkyIntegration};

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{decompose_convex, point_in_polygon, GeometryError, Point3, Polygon3, Vec3};
use crate::solar::{EfficacyModel, GeoLocation, SolarError};

/// Distance tolerance for deciding that an aperture lies on a wall plane.
const WALL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DaylightError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Solar(#[from] SolarError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("aperture {index} does not lie on any wall of the room")]
    ApertureNotOnWall { index: usize },
    #[error("point ({x:.3}, {y:.3}, {z:.3}) is outside the room")]
    PointOutsideRoom { x: f64, y: f64, z: f64 },
    #[error("mean room reflectance {mean_reflectance:.3} is too close to 1 for the inter-reflection formula")]
    Divergent { mean_reflectance: f64 },
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("no weather record for {0}")]
    MissingWeather(NaiveDateTime),
}

impl DaylightError {
    pub(crate) fn outside(p: Point3) -> Self {
        DaylightError::PointOutsideRoom { x: p.x, y: p.y, z: p.z }
    }
}

/// Interior reflectances (0–1) by surface role.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceOptics {
    pub floor: f64,
    pub walls: f64,
    pub ceiling: f64,
}

impl SurfaceOptics {
    pub fn validate(&self) -> Result<(), DaylightError> {
        for (name, r) in [("floor", self.floor), ("walls", self.walls), ("ceiling", self.ceiling)] {
            if !(0.0..=1.0).contains(&r) {
                return Err(DaylightError::InvalidParameter(format!(
                    "{name} reflectance {r} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Sidelight glazing. `transmission` is the glass light transmittance used
/// both in the daylight factor and for direct sunlight; the other factors
/// are the daylight-factor corrections.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aperture {
    pub polygon: Polygon3,
    pub transmission: f64,
    /// Window dirt (MF).
    pub maintenance: f64,
    /// Window framing (FR).
    pub framing: f64,
    /// Activity coefficient of the site (MG).
    pub activity: f64,
    /// Remoteness correction applied to the internally reflected part (FC).
    pub remoteness: f64,
}

impl Aperture {
    /// Clear 6 mm glass, no corrections.
    pub fn with_defaults(polygon: Polygon3) -> Self {
        Aperture {
            polygon,
            transmission: 0.9,
            maintenance: 1.0,
            framing: 1.0,
            activity: 1.0,
            remoteness: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), DaylightError> {
        for (name, f) in [
            ("tau_vitre", self.transmission),
            ("MF", self.maintenance),
            ("FR", self.framing),
            ("MG", self.activity),
            ("FC", self.remoteness),
        ] {
            if !(f > 0.0 && f <= 1.0) {
                return Err(DaylightError::InvalidParameter(format!(
                    "aperture factor {name} = {f} outside (0, 1]"
                )));
            }
        }
        if !self.polygon.is_vertical() {
            return Err(GeometryError::InvalidArgument("aperture polygon must be vertical".into()).into());
        }
        Ok(())
    }

    /// Product MF × FR × GL × MG.
    pub fn correction_product(&self) -> f64 {
        self.maintenance * self.framing * self.transmission * self.activity
    }

    /// Outward horizontal unit normal.
    pub fn outward_normal(&self) -> Vec3 {
        self.polygon.normal()
    }
}

/// External vertical surface masking part of the sky; it reflects
/// `luminance_fraction` of the sky luminance it hides.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Obstruction {
    pub polygon: Polygon3,
    pub luminance_fraction: f64,
}

impl Obstruction {
    pub const DEFAULT_LUMINANCE_FRACTION: f64 = 0.2;

    pub fn new(polygon: Polygon3, luminance_fraction: f64) -> Result<Self, DaylightError> {
        if !polygon.is_vertical() {
            return Err(GeometryError::InvalidArgument("obstruction polygon must be vertical".into()).into());
        }
        if !(0.0..=1.0).contains(&luminance_fraction) {
            return Err(DaylightError::InvalidParameter(format!(
                "obstruction luminance fraction {luminance_fraction} outside [0, 1]"
            )));
        }
        Ok(Obstruction {
            polygon,
            luminance_fraction,
        })
    }
}

/// A prismatic room: horizontal floor extruded by `height`, walls on every
/// floor edge, sidelights on the walls.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Room {
    floor: Polygon3,
    floor_parts: Vec<Polygon3>,
    walls: Vec<Polygon3>,
    height: f64,
    optics: SurfaceOptics,
    apertures: Vec<Aperture>,
}

impl Room {
    /// Validates the room and normalises orientation: the floor becomes
    /// counter-clockwise seen from above, wall and aperture normals point
    /// outdoors. Non-convex floors are split into convex parts.
    pub fn new(
        floor: Polygon3,
        height: f64,
        optics: SurfaceOptics,
        apertures: Vec<Aperture>,
    ) -> Result<Self, DaylightError> {
        if !floor.is_horizontal() {
            return Err(GeometryError::InvalidArgument("floor polygon must be horizontal".into()).into());
        }
        if !(height > 0.0) || !height.is_finite() {
            return Err(DaylightError::InvalidParameter(format!(
                "room height {height} must be positive"
            )));
        }
        optics.validate()?;
        let floor = if floor.normal().z < 0.0 {
            floor.reversed()
        } else {
            floor
        };
        let floor_parts = decompose_convex(&floor)?;

        let up = Vec3::new(0.0, 0.0, height);
        let verts = floor.vertices();
        let walls = (0..verts.len())
            .map(|i| {
                let a = verts[i];
                let b = verts[(i + 1) % verts.len()];
                Polygon3::new(vec![a, b, b + up, a + up])
            })
            .collect::<Result<Vec<_>, _>>()?;

        let mut placed = Vec::with_capacity(apertures.len());
        for (index, mut ap) in apertures.into_iter().enumerate() {
            ap.validate()?;
            let wall = walls
                .iter()
                .find(|w| {
                    ap.polygon.normal().dot(w.normal()).abs() > 1.0 - WALL_TOLERANCE
                        && ap.polygon.vertices().iter().all(|v| point_in_polygon(*v, w))
                })
                .ok_or(DaylightError::ApertureNotOnWall { index })?;
            if ap.polygon.normal().dot(wall.normal()) < 0.0 {
                ap.polygon = ap.polygon.reversed();
            }
            placed.push(ap);
        }

        Ok(Room {
            floor,
            floor_parts,
            walls,
            height,
            optics,
            apertures: placed,
        })
    }

    pub fn floor(&self) -> &Polygon3 {
        &self.floor
    }

    /// Convex pieces covering the floor.
    pub fn floor_parts(&self) -> &[Polygon3] {
        &self.floor_parts
    }

    pub fn walls(&self) -> &[Polygon3] {
        &self.walls
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn floor_z(&self) -> f64 {
        self.floor.vertices()[0].z
    }

    pub fn optics(&self) -> &SurfaceOptics {
        &self.optics
    }

    pub fn apertures(&self) -> &[Aperture] {
        &self.apertures
    }

    pub fn apertures_mut(&mut self) -> &mut [Aperture] {
        &mut self.apertures
    }

    /// Floor area S_T in m².
    pub fn floor_area(&self) -> f64 {
        self.floor.area()
    }

    pub fn perimeter(&self) -> f64 {
        let v = self.floor.vertices();
        (0..v.len()).map(|i| v[i].distance(v[(i + 1) % v.len()])).sum()
    }

    /// Whether `p`, dropped onto the floor plane, falls inside the floor.
    pub fn contains_plan(&self, p: Point3) -> bool {
        point_in_polygon(Vec3::new(p.x, p.y, self.floor_z()), &self.floor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PatchScope {
    /// The sun-patch diffuse term only reaches points inside the patch.
    #[default]
    #[serde(rename = "patch")]
    PatchOnly,
    /// The sun-patch diffuse term is added at every workplane point.
    #[serde(rename = "room")]
    WholeRoom,
}

/// Workplane meshing settings, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkplaneSettings {
    pub cell: f64,
    pub height: f64,
}

impl Default for WorkplaneSettings {
    fn default() -> Self {
        WorkplaneSettings {
            cell: 0.1,
            height: 0.01,
        }
    }
}

/// Everything needed to run a simulation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Building {
    pub location: GeoLocation,
    pub room: Room,
    pub obstructions: Vec<Obstruction>,
    pub workplane: WorkplaneSettings,
    pub efficacy: EfficacyModel,
    pub patch_scope: PatchScope,
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;

    /// 3.9 m × 3.5 m cell, 2.5 m high, glazed door on the north wall
    /// (y = 3.5) spanning x ∈ [1.55, 2.35], z ∈ [0, 2.1].
    pub fn reference_room() -> Room {
        let floor = Polygon3::horizontal_rectangle(0.0, 0.0, 3.9, 3.5, 0.0).unwrap();
        let door = Polygon3::new(vec![
            Vec3::new(1.55, 3.5, 0.0),
            Vec3::new(2.35, 3.5, 0.0),
            Vec3::new(2.35, 3.5, 2.1),
            Vec3::new(1.55, 3.5, 2.1),
        ])
        .unwrap();
        let ap = Aperture {
            maintenance: 0.9,
            framing: 0.8,
            activity: 0.8,
            ..Aperture::with_defaults(door)
        };
        Room::new(
            floor,
            2.5,
            SurfaceOptics {
                floor: 0.2,
                walls: 0.6,
                ceiling: 0.6,
            },
            vec![ap],
        )
        .unwrap()
    }

    pub fn reference_building() -> Building {
        Building {
            location: GeoLocation::new(-21.34, 55.48, 4.0, 0.7).unwrap(),
            room: reference_room(),
            obstructions: Vec::new(),
            workplane: WorkplaneSettings::default(),
            efficacy: EfficacyModel::default(),
            patch_scope: PatchScope::PatchOnly,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::testing::reference_room;
    use super::*;

    #[test]
    fn aperture_normal_points_outdoors() {
        let room = reference_room();
        let n = room.apertures()[0].outward_normal();
        assert!((n.y - 1.0).abs() < 1e-12, "{n:?}");
        for wall in room.walls() {
            let c = wall.centroid();
            let inward = Vec3::new(1.95, 1.75, c.z) - c;
            assert!(wall.normal().dot(inward) < 0.0);
        }
    }

    #[test]
    fn reversed_input_is_normalised() {
        let floor = Polygon3::horizontal_rectangle(0.0, 0.0, 2.0, 2.0, 0.0)
            .unwrap()
            .reversed();
        let window = Polygon3::new(vec![
            Vec3::new(0.5, 0.0, 0.5),
            Vec3::new(0.5, 0.0, 1.5),
            Vec3::new(1.5, 0.0, 1.5),
            Vec3::new(1.5, 0.0, 0.5),
        ])
        .unwrap();
        let optics = SurfaceOptics {
            floor: 0.2,
            walls: 0.5,
            ceiling: 0.7,
        };
        let room = Room::new(floor, 2.5, optics, vec![Aperture::with_defaults(window)]).unwrap();
        assert!(room.floor().normal().z > 0.0);
        assert!(room.apertures()[0].outward_normal().y < -0.999);
    }

    #[test]
    fn aperture_off_the_walls_is_rejected() {
        let floor = Polygon3::horizontal_rectangle(0.0, 0.0, 2.0, 2.0, 0.0).unwrap();
        let floating = Polygon3::new(vec![
            Vec3::new(0.5, 1.0, 0.5),
            Vec3::new(1.5, 1.0, 0.5),
            Vec3::new(1.5, 1.0, 1.5),
            Vec3::new(0.5, 1.0, 1.5),
        ])
        .unwrap();
        let optics = SurfaceOptics {
            floor: 0.2,
            walls: 0.5,
            ceiling: 0.7,
        };
        let err = Room::new(floor, 2.5, optics, vec![Aperture::with_defaults(floating)]).unwrap_err();
        assert_eq!(err, DaylightError::ApertureNotOnWall { index: 0 });
    }

    #[test]
    fn factors_out_of_range_are_rejected() {
        let room = reference_room();
        let mut ap = room.apertures()[0].clone();
        ap.maintenance = 0.0;
        assert!(ap.validate().is_err());
        let optics = SurfaceOptics {
            floor: 1.2,
            walls: 0.5,
            ceiling: 0.5,
        };
        assert!(optics.validate().is_err());
    }

    #[test]
    fn room_measures() {
        let room = reference_room();
        assert!((room.floor_area() - 13.65).abs() < 1e-12);
        assert!((room.perimeter() - 14.8).abs() < 1e-12);
        assert!(room.contains_plan(Vec3::new(1.0, 1.0, 0.01)));
        assert!(!room.contains_plan(Vec3::new(5.0, 1.0, 0.01)));
    }
}
