use serde::Serialize;

use super::{GeometryError, Point3, Vec3, BOUNDARY_TOLERANCE, PARALLEL_TOLERANCE, PLANARITY_TOLERANCE};

/// Twice-area floor below which a polygon is considered degenerate.
const MIN_TWICE_AREA: f64 = 1e-12;
const DUPLICATE_TOLERANCE: f64 = 1e-12;

/// Planar polygon in 3-D with a unit normal derived from the vertex winding
/// (right-hand rule).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polygon3 {
    vertices: Vec<Point3>,
    normal: Vec3,
    area: f64,
}

impl Polygon3 {
    /// Builds a validated polygon: at least three distinct vertices, non-zero
    /// area, planar within [`PLANARITY_TOLERANCE`], and no crossing edges.
    /// A trailing copy of the first vertex is dropped.
    pub fn new(vertices: Vec<Point3>) -> Result<Self, GeometryError> {
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let vertices = dedup_consecutive(vertices);
        if vertices.len() < 3 {
            return Err(GeometryError::TooFewVertices(vertices.len()));
        }
        let poly = Polygon3::from_raw(vertices).ok_or(GeometryError::Degenerate)?;

        let centre = poly.vertex_mean();
        for (index, v) in poly.vertices.iter().enumerate() {
            let distance = (*v - centre).dot(poly.normal).abs();
            if distance > PLANARITY_TOLERANCE {
                return Err(GeometryError::NonPlanar { index, distance });
            }
        }
        poly.check_simple()?;
        Ok(poly)
    }

    /// Axis-aligned rectangle in the plane `z = z`, counter-clockwise seen
    /// from above.
    pub fn horizontal_rectangle(x0: f64, y0: f64, x1: f64, y1: f64, z: f64) -> Result<Self, GeometryError> {
        Polygon3::new(vec![
            Vec3::new(x0, y0, z),
            Vec3::new(x1, y0, z),
            Vec3::new(x1, y1, z),
            Vec3::new(x0, y1, z),
        ])
    }

    /// Computes normal and area without the simplicity/planarity checks.
    /// Returns `None` for degenerate input.
    pub(crate) fn from_raw(vertices: Vec<Point3>) -> Option<Self> {
        if vertices.len() < 3 {
            return None;
        }
        let newell = newell_normal(&vertices);
        let twice_area = newell.norm();
        if !(twice_area > MIN_TWICE_AREA) {
            return None;
        }
        Some(Polygon3 {
            vertices,
            normal: newell / twice_area,
            area: 0.5 * twice_area,
        })
    }

    /// Like [`Polygon3::from_raw`] but first drops duplicate and collinear
    /// vertices (clipping output).
    fn from_cleaned(vertices: Vec<Point3>) -> Option<Self> {
        let mut v = dedup_consecutive(vertices);
        let mut changed = true;
        while changed && v.len() >= 3 {
            changed = false;
            let n = v.len();
            for i in 0..n {
                let prev = v[(i + n - 1) % n];
                let next = v[(i + 1) % n];
                let e1 = v[i] - prev;
                let e2 = next - v[i];
                if e1.cross(e2).norm() <= 1e-12 * (e1.norm() * e2.norm()).max(1e-300) {
                    v.remove(i);
                    changed = true;
                    break;
                }
            }
        }
        Polygon3::from_raw(v)
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn normal(&self) -> Vec3 {
        self.normal
    }

    /// Planar area in m².
    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Same polygon with the opposite winding (and normal).
    pub fn reversed(&self) -> Polygon3 {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        Polygon3 {
            vertices,
            normal: -self.normal,
            area: self.area,
        }
    }

    /// Area-weighted centroid.
    pub fn centroid(&self) -> Point3 {
        let origin = self.vertices[0];
        let mut acc = Vec3::ZERO;
        let mut weight = 0.0;
        for w in self.vertices[1..].windows(2) {
            let a = w[0] - origin;
            let b = w[1] - origin;
            let tri = a.cross(b).dot(self.normal) * 0.5;
            acc += (a + b) * (tri / 3.0);
            weight += tri;
        }
        if weight.abs() < 1e-300 {
            return self.vertex_mean();
        }
        origin + acc / weight
    }

    fn vertex_mean(&self) -> Point3 {
        let sum = self.vertices.iter().fold(Vec3::ZERO, |acc, v| acc + *v);
        sum / self.vertices.len() as f64
    }

    /// Signed distance from `p` to the polygon's plane, positive on the
    /// normal side.
    pub fn plane_distance(&self, p: Point3) -> f64 {
        (p - self.vertices[0]).dot(self.normal)
    }

    /// True when the normal is vertical (the polygon is horizontal).
    pub fn is_horizontal(&self) -> bool {
        self.normal.z.abs() >= 1.0 - PLANARITY_TOLERANCE
    }

    /// True when the normal is horizontal (the polygon stands on a wall).
    pub fn is_vertical(&self) -> bool {
        self.normal.z.abs() <= PLANARITY_TOLERANCE
    }

    /// Min and max corners of the axis-aligned bounding box.
    pub fn bounding_box(&self) -> (Point3, Point3) {
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for v in &self.vertices[1..] {
            lo = Vec3::new(lo.x.min(v.x), lo.y.min(v.y), lo.z.min(v.z));
            hi = Vec3::new(hi.x.max(v.x), hi.y.max(v.y), hi.z.max(v.z));
        }
        (lo, hi)
    }

    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let c = self.vertices[(i + 2) % n];
            let turn = (b - a).cross(c - b).dot(self.normal);
            turn >= -1e-12 * (b - a).norm() * (c - b).norm()
        })
    }

    /// Vertices projected onto the coordinate plane that drops the normal's
    /// dominant axis. The 2-D winding is counter-clockwise exactly when
    /// `self.normal()[axis] > 0`.
    fn projected(&self) -> (usize, Vec<(f64, f64)>) {
        let axis = self.normal.dominant_axis();
        (axis, self.vertices.iter().map(|p| to_2d(*p, axis)).collect())
    }

    fn check_simple(&self) -> Result<(), GeometryError> {
        let (_, pts) = self.projected();
        let n = pts.len();
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                if segments_intersect(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]) {
                    return Err(GeometryError::SelfIntersecting(i, j));
                }
            }
        }
        Ok(())
    }
}

/// Planar area of `poly` in m² (shoelace formula in the polygon's plane,
/// evaluated through Newell's normal).
pub fn polygon_area(poly: &Polygon3) -> f64 {
    poly.area()
}

/// Closed-region membership test: points on an edge or vertex are inside.
/// Points farther than [`PLANARITY_TOLERANCE`] from the plane are outside.
pub fn point_in_polygon(p: Point3, poly: &Polygon3) -> bool {
    let offset = poly.plane_distance(p);
    if offset.abs() > PLANARITY_TOLERANCE {
        return false;
    }
    let on_plane = p - poly.normal * offset;
    let n = poly.vertices.len();
    for i in 0..n {
        if point_segment_distance(on_plane, poly.vertices[i], poly.vertices[(i + 1) % n]) <= BOUNDARY_TOLERANCE {
            return true;
        }
    }

    let axis = poly.normal.dominant_axis();
    let (px, py) = to_2d(on_plane, axis);
    let mut inside = false;
    for i in 0..n {
        let (ax, ay) = to_2d(poly.vertices[i], axis);
        let (bx, by) = to_2d(poly.vertices[(i + 1) % n], axis);
        if (ay > py) != (by > py) {
            let x = ax + (py - ay) * (bx - ax) / (by - ay);
            if px < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Sutherland–Hodgman clipping of `subject` by the convex polygon `clip`
/// lying in the same plane. Returns `None` when nothing remains.
pub fn clip_polygon(subject: &Polygon3, clip: &Polygon3) -> Result<Option<Polygon3>, GeometryError> {
    if subject
        .vertices
        .iter()
        .any(|v| clip.plane_distance(*v).abs() > PLANARITY_TOLERANCE)
    {
        return Err(GeometryError::NotCoplanar);
    }
    if !clip.is_convex() {
        return Err(GeometryError::NonConvexClip);
    }

    let normal = clip.normal;
    let mut output = subject.vertices.clone();
    let n = clip.vertices.len();
    for i in 0..n {
        if output.is_empty() {
            break;
        }
        let a = clip.vertices[i];
        let edge = clip.vertices[(i + 1) % n] - a;
        // Positive on the interior (left-hand) side of the edge.
        let side = |p: Point3| normal.dot(edge.cross(p - a));
        output = clip_ring(&output, side);
    }
    Ok(Polygon3::from_cleaned(output))
}

/// Keeps the part of `poly` where `(p - point) · normal >= 0`.
pub fn clip_half_space(poly: &Polygon3, point: Point3, normal: Vec3) -> Option<Polygon3> {
    let kept = clip_ring(&poly.vertices, |p| (p - point).dot(normal));
    Polygon3::from_cleaned(kept)
}

fn clip_ring(input: &[Point3], side: impl Fn(Point3) -> f64) -> Vec<Point3> {
    let mut out = Vec::with_capacity(input.len() + 2);
    let Some(&last) = input.last() else {
        return out;
    };
    let mut s = last;
    let mut ds = side(s);
    for &p in input {
        let dp = side(p);
        if dp >= 0.0 {
            if ds < 0.0 {
                out.push(s + (p - s) * (ds / (ds - dp)));
            }
            out.push(p);
        } else if ds >= 0.0 {
            out.push(s + (p - s) * (ds / (ds - dp)));
        }
        s = p;
        ds = dp;
    }
    out
}

/// Translates every vertex of `poly` along `dir` until it meets the plane
/// `z = plane_z`.
///
/// Light travelling along `dir` must reach the polygon on its normal side;
/// otherwise (and when `dir` is parallel to the target plane, points upward,
/// or would have to travel backwards to reach the plane) the result is
/// `None`. The image keeps the vertex count of the input.
pub fn project_polygon_along_direction(
    poly: &Polygon3,
    dir: Vec3,
    plane_z: f64,
) -> Result<Option<Polygon3>, GeometryError> {
    let dir = dir
        .normalized()
        .ok_or_else(|| GeometryError::InvalidArgument("projection direction has zero length".into()))?;
    if dir.z.abs() <= PARALLEL_TOLERANCE || dir.z > 0.0 {
        return Ok(None);
    }
    if dir.dot(poly.normal) >= -PARALLEL_TOLERANCE {
        return Ok(None);
    }
    let mut image = Vec::with_capacity(poly.vertices.len());
    for v in &poly.vertices {
        let t = (plane_z - v.z) / dir.z;
        if t < -PARALLEL_TOLERANCE {
            return Ok(None);
        }
        let p = *v + dir * t;
        image.push(Vec3::new(p.x, p.y, plane_z));
    }
    Ok(Polygon3::from_raw(image))
}

/// Splits a simple polygon into convex parts covering it exactly. Convex
/// input is returned unchanged; otherwise the polygon is ear-clipped and
/// neighbouring triangles are merged while the union stays convex.
pub fn decompose_convex(poly: &Polygon3) -> Result<Vec<Polygon3>, GeometryError> {
    if poly.is_convex() {
        return Ok(vec![poly.clone()]);
    }
    let (axis, mut pts) = poly.projected();
    // Work counter-clockwise in 2-D.
    let flipped = poly.normal[axis] < 0.0;
    if flipped {
        for p in &mut pts {
            *p = (p.1, p.0);
        }
    }

    let mut remaining: Vec<usize> = (0..pts.len()).collect();
    let mut parts: Vec<Vec<usize>> = Vec::new();
    while remaining.len() > 3 {
        let m = remaining.len();
        let ear = (0..m).find(|&k| {
            let (ia, ib, ic) = (remaining[(k + m - 1) % m], remaining[k], remaining[(k + 1) % m]);
            let (a, b, c) = (pts[ia], pts[ib], pts[ic]);
            if cross2(a, b, c) <= 1e-14 {
                return false;
            }
            remaining
                .iter()
                .filter(|&&i| i != ia && i != ib && i != ic)
                .all(|&i| !in_triangle(pts[i], a, b, c))
        });
        let Some(k) = ear else {
            return Err(GeometryError::Degenerate);
        };
        parts.push(vec![remaining[(k + m - 1) % m], remaining[k], remaining[(k + 1) % m]]);
        remaining.remove(k);
    }
    parts.push(remaining);

    // Greedy merge across shared diagonals.
    'merge: loop {
        for i in 0..parts.len() {
            for j in (i + 1)..parts.len() {
                if let Some(merged) = merge_across_edge(&parts[i], &parts[j]) {
                    if is_convex_2d(&merged, &pts) {
                        parts[i] = merged;
                        parts.remove(j);
                        continue 'merge;
                    }
                }
            }
        }
        break;
    }

    parts
        .into_iter()
        .map(|idx| Polygon3::from_raw(idx.iter().map(|&i| poly.vertices[i]).collect()).ok_or(GeometryError::Degenerate))
        .collect()
}

fn merge_across_edge(a: &[usize], b: &[usize]) -> Option<Vec<usize>> {
    let (na, nb) = (a.len(), b.len());
    for i in 0..na {
        let (u, v) = (a[i], a[(i + 1) % na]);
        for j in 0..nb {
            if b[j] == v && b[(j + 1) % nb] == u {
                // a from v around to u, then b's vertices strictly between u and v.
                let mut merged: Vec<usize> = (0..na).map(|k| a[(i + 1 + k) % na]).collect();
                merged.extend((1..nb - 1).map(|k| b[(j + 1 + k) % nb]));
                return Some(merged);
            }
        }
    }
    None
}

fn is_convex_2d(idx: &[usize], pts: &[(f64, f64)]) -> bool {
    let n = idx.len();
    (0..n).all(|k| cross2(pts[idx[k]], pts[idx[(k + 1) % n]], pts[idx[(k + 2) % n]]) >= -1e-14)
}

fn cross2(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - b.1) - (b.1 - a.1) * (c.0 - b.0)
}

fn in_triangle(p: (f64, f64), a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> bool {
    cross2(a, b, p) >= -1e-14 && cross2(b, c, p) >= -1e-14 && cross2(c, a, p) >= -1e-14
}

fn to_2d(p: Point3, drop_axis: usize) -> (f64, f64) {
    match drop_axis {
        0 => (p.y, p.z),
        1 => (p.z, p.x),
        _ => (p.x, p.y),
    }
}

fn newell_normal(vertices: &[Point3]) -> Vec3 {
    let n = vertices.len();
    let mut acc = Vec3::ZERO;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        acc += Vec3::new(
            (a.y - b.y) * (a.z + b.z),
            (a.z - b.z) * (a.x + b.x),
            (a.x - b.x) * (a.y + b.y),
        );
    }
    acc
}

fn dedup_consecutive(mut vertices: Vec<Point3>) -> Vec<Point3> {
    vertices.dedup_by(|a, b| a.distance(*b) <= DUPLICATE_TOLERANCE);
    while vertices.len() > 1 && vertices[0].distance(vertices[vertices.len() - 1]) <= DUPLICATE_TOLERANCE {
        vertices.pop();
    }
    vertices
}

fn point_segment_distance(p: Point3, a: Point3, b: Point3) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

fn segments_intersect(p1: (f64, f64), p2: (f64, f64), q1: (f64, f64), q2: (f64, f64)) -> bool {
    let d1 = cross2(q1, q2, p1);
    let d2 = cross2(q1, q2, p2);
    let d3 = cross2(p1, p2, q1);
    let d4 = cross2(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |a: (f64, f64), b: (f64, f64), p: (f64, f64), d: f64| {
        d == 0.0 && p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}
