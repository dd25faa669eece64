use serde::Serialize;

use super::{point_in_polygon, GeometryError, Point3, Polygon3, Vec3};

/// One workplane sample: its cell indices and position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub i: usize,
    pub j: usize,
    pub position: Point3,
}

/// Axis-aligned mesh of cell centres over a horizontal floor, lifted to the
/// workplane. Cells run along +x (`i`, `nu` columns) and +y (`j`, `nv` rows).
/// Only centres inside the floor are kept, ordered row by row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridMesh {
    origin: Point3,
    cell: f64,
    nu: usize,
    nv: usize,
    height: f64,
    points: Vec<GridPoint>,
}

impl GridMesh {
    /// Bounding-box minimum corner, at workplane height.
    pub fn origin(&self) -> Point3 {
        self.origin
    }

    pub fn u_axis(&self) -> Vec3 {
        Vec3::X
    }

    pub fn v_axis(&self) -> Vec3 {
        Vec3::Y
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn nv(&self) -> usize {
        self.nv
    }

    /// Workplane height above the floor, in meters.
    pub fn height(&self) -> f64 {
        self.height
    }

    /// Absolute z of the workplane.
    pub fn plane_z(&self) -> f64 {
        self.origin.z
    }

    pub fn points(&self) -> &[GridPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn positions(&self) -> impl Iterator<Item = Point3> + '_ {
        self.points.iter().map(|p| p.position)
    }

    /// Row-major `nv × nu` layout of point indices; `None` where the cell
    /// centre fell outside the floor.
    pub fn layout(&self) -> Vec<Option<usize>> {
        let mut cells = vec![None; self.nu * self.nv];
        for (k, p) in self.points.iter().enumerate() {
            cells[p.j * self.nu + p.i] = Some(k);
        }
        cells
    }
}

/// Meshes a horizontal floor into square cells of side `cell`, first centre at
/// the bounding-box minimum plus half a cell, with the grid plane `height`
/// above the floor. Only whole cells fitting in the bounding box are used.
pub fn make_workplane_grid(floor: &Polygon3, cell: f64, height: f64) -> Result<GridMesh, GeometryError> {
    if !(cell > 0.0) || !cell.is_finite() {
        return Err(GeometryError::InvalidArgument(format!(
            "cell size must be positive, got {cell}"
        )));
    }
    if !(height >= 0.0) || !height.is_finite() {
        return Err(GeometryError::InvalidArgument(format!(
            "workplane height must be non-negative, got {height}"
        )));
    }
    if !floor.is_horizontal() {
        return Err(GeometryError::InvalidArgument(
            "floor polygon must be horizontal".into(),
        ));
    }

    let (lo, hi) = floor.bounding_box();
    let floor_z = floor.vertices()[0].z;
    let count = |extent: f64| ((extent / cell) + 1e-9).floor() as usize;
    let nu = count(hi.x - lo.x);
    let nv = count(hi.y - lo.y);

    let mut points = Vec::with_capacity(nu * nv);
    for j in 0..nv {
        for i in 0..nu {
            let x = lo.x + (i as f64 + 0.5) * cell;
            let y = lo.y + (j as f64 + 0.5) * cell;
            if point_in_polygon(Vec3::new(x, y, floor_z), floor) {
                points.push(GridPoint {
                    i,
                    j,
                    position: Vec3::new(x, y, floor_z + height),
                });
            }
        }
    }
    if points.is_empty() {
        return Err(GeometryError::DegenerateMesh { cell });
    }
    Ok(GridMesh {
        origin: Vec3::new(lo.x, lo.y, floor_z + height),
        cell,
        nu,
        nv,
        height,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_cell_grid_is_39_by_35() {
        let floor = Polygon3::horizontal_rectangle(0.0, 0.0, 3.9, 3.5, 0.0).unwrap();
        let grid = make_workplane_grid(&floor, 0.1, 0.01).unwrap();
        assert_eq!((grid.nu(), grid.nv()), (39, 35));
        assert_eq!(grid.len(), 1365);
        let first = grid.points()[0].position;
        assert!((first.x - 0.05).abs() < 1e-12 && (first.y - 0.05).abs() < 1e-12);
        assert!((first.z - 0.01).abs() < 1e-12);
    }

    #[test]
    fn half_metre_cells_on_unit_floor() {
        let floor = Polygon3::horizontal_rectangle(0.0, 0.0, 1.0, 1.0, 0.0).unwrap();
        let grid = make_workplane_grid(&floor, 0.5, 0.0).unwrap();
        assert_eq!(grid.len(), 4);
    }

    #[test]
    fn oversized_cell_is_degenerate() {
        let floor = Polygon3::horizontal_rectangle(0.0, 0.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(
            make_workplane_grid(&floor, 2.0, 0.01),
            Err(GeometryError::DegenerateMesh { cell: 2.0 })
        );
    }

    #[test]
    fn bad_arguments() {
        let floor = Polygon3::horizontal_rectangle(0.0, 0.0, 1.0, 1.0, 0.0).unwrap();
        assert!(matches!(
            make_workplane_grid(&floor, 0.0, 0.01),
            Err(GeometryError::InvalidArgument(_))
        ));
        assert!(matches!(
            make_workplane_grid(&floor, -0.1, 0.01),
            Err(GeometryError::InvalidArgument(_))
        ));
        let wall = Polygon3::new(vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 1.0),
            Vec3::new(0.0, 0.0, 1.0),
        ])
        .unwrap();
        assert!(matches!(
            make_workplane_grid(&wall, 0.1, 0.01),
            Err(GeometryError::InvalidArgument(_))
        ));
    }

    #[test]
    fn l_shaped_floor_keeps_only_inside_centres() {
        let l = Polygon3::new(vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(4.0, 0.0, 0.0),
            Vec3::new(4.0, 2.0, 0.0),
            Vec3::new(2.0, 2.0, 0.0),
            Vec3::new(2.0, 4.0, 0.0),
            Vec3::new(0.0, 4.0, 0.0),
        ])
        .unwrap();
        let grid = make_workplane_grid(&l, 1.0, 0.0).unwrap();
        assert_eq!((grid.nu(), grid.nv()), (4, 4));
        assert_eq!(grid.len(), 12);
        for p in grid.positions() {
            assert!(point_in_polygon(p, &l));
        }
        assert_eq!(grid.layout().iter().filter(|c| c.is_none()).count(), 4);
    }
}
