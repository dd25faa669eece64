//! Vector and polygon kernel used for the building description, the
//! workplane mesh and the sun-patch projection.
//!
//! World frame: `x` points East, `y` points North, `z` points up; lengths in
//! meters.

mod grid;
mod polygon;
mod vector;

pub use grid::{make_workplane_grid, GridMesh, GridPoint};
pub use polygon::{
    clip_half_space, clip_polygon, decompose_convex, point_in_polygon, polygon_area, project_polygon_along_direction,
    Polygon3,
};
pub use vector::{Point3, Vec3};

use thiserror::Error;

/// Vertices closer than this to their polygon's plane are coplanar.
pub const PLANARITY_TOLERANCE: f64 = 1e-6;
/// Dot products below this magnitude are treated as parallel.
pub const PARALLEL_TOLERANCE: f64 = 1e-9;
/// Distance under which a point counts as lying on a polygon edge.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("polygon needs at least 3 distinct vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon is degenerate (collinear vertices or zero area)")]
    Degenerate,
    #[error("polygon is not planar: vertex {index} is {distance:.3e} m off its plane")]
    NonPlanar { index: usize, distance: f64 },
    #[error("polygon edges {0} and {1} intersect")]
    SelfIntersecting(usize, usize),
    #[error("non-finite vertex coordinate")]
    NonFinite,
    #[error("polygons are not coplanar")]
    NotCoplanar,
    #[error("clip polygon is not convex")]
    NonConvexClip,
    #[error("no grid cell centre falls inside the floor (cell = {cell} m)")]
    DegenerateMesh { cell: f64 },
    #[error("{0}")]
    InvalidArgument(String),
}
