use serde::Serialize;

use super::{Aperture, DaylightError, Room};
use crate::geometry::{clip_half_space, clip_polygon, point_in_polygon, project_polygon_along_direction, GridMesh};
use crate::geometry::{Point3, Polygon3, Vec3};
use crate::solar::SolarState;

/// Sunlit area on the workplane behind one aperture. Stored as convex-floor
/// pieces, so a non-convex floor may yield several polygons.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SunPatch {
    pieces: Vec<Polygon3>,
    area: f64,
    #[serde(skip)]
    bounds: Option<(Point3, Point3)>,
}

impl SunPatch {
    pub fn empty() -> Self {
        SunPatch::default()
    }

    fn from_pieces(pieces: Vec<Polygon3>) -> Self {
        let area = pieces.iter().map(Polygon3::area).sum();
        let bounds = pieces.iter().map(Polygon3::bounding_box).reduce(|(lo, hi), (l, h)| {
            (
                Vec3::new(lo.x.min(l.x), lo.y.min(l.y), lo.z.min(l.z)),
                Vec3::new(hi.x.max(h.x), hi.y.max(h.y), hi.z.max(h.z)),
            )
        });
        SunPatch { pieces, area, bounds }
    }

    pub fn pieces(&self) -> &[Polygon3] {
        &self.pieces
    }

    /// S_TS in m².
    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Whether the plan position of `p` is sunlit (edges included).
    pub fn contains(&self, p: Point3) -> bool {
        let Some((lo, hi)) = self.bounds else {
            return false;
        };
        const EPS: f64 = 1e-9;
        if p.x < lo.x - EPS || p.x > hi.x + EPS || p.y < lo.y - EPS || p.y > hi.y + EPS {
            return false;
        }
        self.pieces
            .iter()
            .any(|piece| point_in_polygon(Vec3::new(p.x, p.y, piece.vertices()[0].z), piece))
    }
}

/// Sun patch of `ap` on the workplane plane of `workplane`.
pub fn compute_sun_patch(
    room: &Room,
    ap: &Aperture,
    sun: &SolarState,
    workplane: &GridMesh,
) -> Result<SunPatch, DaylightError> {
    let parts = lifted_floor(room, workplane.plane_z())?;
    sun_patch_on_plane(&parts, ap, sun, workplane.plane_z())
}

/// Floor parts translated to height `plane_z`.
pub(crate) fn lifted_floor(room: &Room, plane_z: f64) -> Result<Vec<Polygon3>, DaylightError> {
    room.floor_parts()
        .iter()
        .map(|part| {
            let verts = part.vertices().iter().map(|v| Vec3::new(v.x, v.y, plane_z)).collect();
            Polygon3::new(verts).map_err(DaylightError::from)
        })
        .collect()
}

/// Projects the part of the aperture above the plane along the sunlight
/// direction and clips it by the (convex) floor parts.
pub(crate) fn sun_patch_on_plane(
    floor_parts: &[Polygon3],
    ap: &Aperture,
    sun: &SolarState,
    plane_z: f64,
) -> Result<SunPatch, DaylightError> {
    if !sun.is_above_horizon() || sun.direction.dot(ap.outward_normal()) >= 0.0 {
        return Ok(SunPatch::empty());
    }
    let Some(upper) = clip_half_space(&ap.polygon, Vec3::new(0.0, 0.0, plane_z), Vec3::Z) else {
        return Ok(SunPatch::empty());
    };
    let Some(image) = project_polygon_along_direction(&upper, sun.direction, plane_z)? else {
        return Ok(SunPatch::empty());
    };
    let mut pieces = Vec::new();
    for part in floor_parts {
        if let Some(piece) = clip_polygon(&image, part)? {
            pieces.push(piece);
        }
    }
    Ok(SunPatch::from_pieces(pieces))
}
