//! Sky and externally reflected components under the overcast sky
//! (luminance ∝ (1 + 2 sin β) / 3), for vertical apertures and obstructions.
//!
//! Integration runs over the azimuth seen from the point relative to the
//! aperture normal. For each azimuth the aperture (and each obstruction) cuts
//! a set of elevation intervals, and the elevation integral is exact:
//! ∫ (1 + 2 sin β) sin β cos β dβ = sin²β / 2 + 2 sin³β / 3.

use std::f64::consts::{FRAC_PI_2, PI};

use super::{Aperture, DaylightError, Obstruction};
use crate::geometry::{Point3, Vec3};

/// Azimuth step control for the sky integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkyIntegration {
    /// Largest azimuth step in degrees, in (0, 1].
    pub max_step_deg: f64,
}

impl Default for SkyIntegration {
    fn default() -> Self {
        SkyIntegration { max_step_deg: 0.1 }
    }
}

/// Sky and externally reflected components, as fractions (not percent).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SkyComponents {
    pub sc: f64,
    pub erc: f64,
}

pub fn compute_sc(p: Point3, ap: &Aperture, obstructions: &[Obstruction]) -> Result<f64, DaylightError> {
    Ok(sky_components(p, ap, obstructions, &SkyIntegration::default())?.sc)
}

pub fn compute_erc(p: Point3, ap: &Aperture, obstructions: &[Obstruction]) -> Result<f64, DaylightError> {
    Ok(sky_components(p, ap, obstructions, &SkyIntegration::default())?.erc)
}

/// Sky component through `ap` at `p`, and the externally reflected
/// component from the obstructions hiding part of that sky. The aperture is
/// looked through from whichever side `p` is on.
pub fn sky_components(
    p: Point3,
    ap: &Aperture,
    obstructions: &[Obstruction],
    cfg: &SkyIntegration,
) -> Result<SkyComponents, DaylightError> {
    if !(cfg.max_step_deg > 0.0 && cfg.max_step_deg <= 1.0) {
        return Err(DaylightError::InvalidParameter(format!(
            "sky integration step {} deg outside (0, 1]",
            cfg.max_step_deg
        )));
    }
    let poly = &ap.polygon;
    let mut normal =
        horizontal(poly.normal()).ok_or_else(|| DaylightError::InvalidParameter("aperture must be vertical".into()))?;
    let origin = poly.vertices()[0];
    let mut depth = normal.dot(origin - p);
    if depth < 0.0 {
        normal = -normal;
        depth = -depth;
    }
    if depth <= 1e-9 {
        return Err(DaylightError::outside(p));
    }
    let tangent = Vec3::Z.cross(normal);
    let window = Outline::new(poly.vertices().iter().map(|v| (tangent.dot(*v - p), v.z - p.z)));
    let masks: Vec<Mask> = obstructions.iter().filter_map(|o| Mask::new(o, p)).collect();

    let a0 = window.s_min.atan2(depth);
    let a1 = window.s_max.atan2(depth);
    let steps = (((a1 - a0).to_degrees() / cfg.max_step_deg).ceil() as usize).max(1);
    let da = (a1 - a0) / steps as f64;

    let mut chord = Vec::new();
    let mut visible = Vec::new();
    let mut blocker = Vec::new();
    let mut hits: Vec<(f64, usize)> = Vec::new();
    let (mut sc, mut erc) = (0.0, 0.0);

    for k in 0..steps {
        let alpha = a0 + (k as f64 + 0.5) * da;
        let (sin_a, cos_a) = alpha.sin_cos();
        let rho = depth / cos_a;
        window.chord(depth * sin_a / cos_a, &mut chord);
        visible.clear();
        visible.extend(chord.iter().filter_map(|&(z0, z1)| elevation_span(z0, z1, rho)));
        if visible.is_empty() {
            continue;
        }

        let ray = normal * cos_a + tangent * sin_a;
        hits.clear();
        hits.extend(
            masks
                .iter()
                .enumerate()
                .filter_map(|(i, m)| m.distance(ray, rho).map(|d| (d, i))),
        );
        hits.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut reflected = 0.0;
        for &(dist, i) in &hits {
            let mask = &masks[i];
            mask.outline.chord(mask.s_at(ray, dist), &mut blocker);
            for &(z0, z1) in &blocker {
                let Some((b0, b1)) = elevation_span(z0, z1, dist) else {
                    continue;
                };
                reflected += mask.fraction * overlap_weight(&visible, b0, b1);
                subtract(&mut visible, b0, b1);
            }
            if visible.is_empty() {
                break;
            }
        }
        sc += visible.iter().map(|&(b0, b1)| weight(b0, b1)).sum::<f64>();
        erc += reflected;
    }
    let scale = 3.0 / (7.0 * PI) * da;
    Ok(SkyComponents {
        sc: sc * scale,
        erc: erc * scale,
    })
}

/// Mean elevation in degrees of the obstruction skyline seen from `p`
/// looking out along `outward`, averaged over ±90° of azimuth in 1° steps.
/// Directions with nothing in the way count as 0°.
pub(crate) fn mean_obstruction_elevation(p: Point3, outward: Vec3, obstructions: &[Obstruction]) -> f64 {
    let Some(normal) = horizontal(outward) else {
        return 0.0;
    };
    let masks: Vec<Mask> = obstructions.iter().filter_map(|o| Mask::new(o, p)).collect();
    if masks.is_empty() {
        return 0.0;
    }
    let tangent = Vec3::Z.cross(normal);
    let mut chord = Vec::new();
    let mut total = 0.0;
    for k in 0..180 {
        let alpha = (-89.5 + k as f64).to_radians();
        let ray = normal * alpha.cos() + tangent * alpha.sin();
        let mut top: f64 = 0.0;
        for mask in &masks {
            let Some(dist) = mask.distance(ray, 1e-9) else {
                continue;
            };
            mask.outline.chord(mask.s_at(ray, dist), &mut chord);
            if let Some(z) = chord.iter().map(|c| c.1).reduce(f64::max) {
                top = top.max(z.atan2(dist).to_degrees());
            }
        }
        total += top;
    }
    total / 180.0
}

fn horizontal(v: Vec3) -> Option<Vec3> {
    Vec3::new(v.x, v.y, 0.0).normalized()
}

fn primitive(beta: f64) -> f64 {
    let s = beta.sin();
    s * s / 2.0 + 2.0 * s * s * s / 3.0
}

fn weight(b0: f64, b1: f64) -> f64 {
    primitive(b1) - primitive(b0)
}

/// Elevation interval above the horizon subtended by the vertical segment
/// z ∈ [z0, z1] (relative to the eye) at horizontal distance `rho`.
fn elevation_span(z0: f64, z1: f64, rho: f64) -> Option<(f64, f64)> {
    let b0 = z0.atan2(rho).clamp(0.0, FRAC_PI_2);
    let b1 = z1.atan2(rho).clamp(0.0, FRAC_PI_2);
    (b1 > b0).then_some((b0, b1))
}

fn overlap_weight(visible: &[(f64, f64)], b0: f64, b1: f64) -> f64 {
    visible
        .iter()
        .map(|&(v0, v1)| {
            let (lo, hi) = (v0.max(b0), v1.min(b1));
            if hi > lo {
                weight(lo, hi)
            } else {
                0.0
            }
        })
        .sum()
}

fn subtract(visible: &mut Vec<(f64, f64)>, b0: f64, b1: f64) {
    let mut out = Vec::with_capacity(visible.len() + 1);
    for &(v0, v1) in visible.iter() {
        if b1 <= v0 || b0 >= v1 {
            out.push((v0, v1));
            continue;
        }
        if b0 > v0 {
            out.push((v0, b0));
        }
        if b1 < v1 {
            out.push((b1, v1));
        }
    }
    *visible = out;
}

/// Polygon in a vertical plane, as (s, z) coordinates.
struct Outline {
    pts: Vec<(f64, f64)>,
    s_min: f64,
    s_max: f64,
}

impl Outline {
    fn new(pts: impl Iterator<Item = (f64, f64)>) -> Self {
        let pts: Vec<(f64, f64)> = pts.collect();
        let s_min = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let s_max = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        Outline { pts, s_min, s_max }
    }

    /// z intervals where the vertical line at `s` is inside the polygon.
    fn chord(&self, s: f64, out: &mut Vec<(f64, f64)>) {
        out.clear();
        if s < self.s_min || s > self.s_max {
            return;
        }
        let mut zs: Vec<f64> = Vec::with_capacity(4);
        let n = self.pts.len();
        for i in 0..n {
            let (s0, z0) = self.pts[i];
            let (s1, z1) = self.pts[(i + 1) % n];
            if (s0 <= s) != (s1 <= s) {
                zs.push(z0 + (s - s0) / (s1 - s0) * (z1 - z0));
            }
        }
        zs.sort_by(f64::total_cmp);
        out.extend(zs.chunks_exact(2).map(|c| (c[0], c[1])));
    }
}

/// Obstruction prepared for rays cast from one point.
struct Mask {
    normal: Vec3,
    offset: f64,
    tangent: Vec3,
    s_eye: f64,
    outline: Outline,
    fraction: f64,
}

impl Mask {
    fn new(o: &Obstruction, p: Point3) -> Option<Self> {
        let normal = horizontal(o.polygon.normal())?;
        let origin = o.polygon.vertices()[0];
        let tangent = Vec3::Z.cross(normal);
        Some(Mask {
            normal,
            offset: normal.dot(origin - p),
            tangent,
            s_eye: tangent.dot(p - origin),
            outline: Outline::new(
                o.polygon
                    .vertices()
                    .iter()
                    .map(|v| (tangent.dot(*v - origin), v.z - p.z)),
            ),
            fraction: o.luminance_fraction,
        })
    }

    /// Horizontal distance along `ray` to the obstruction plane, if beyond
    /// `min_distance`.
    fn distance(&self, ray: Vec3, min_distance: f64) -> Option<f64> {
        let denom = self.normal.dot(ray);
        if denom.abs() < 1e-12 {
            return None;
        }
        let d = self.offset / denom;
        (d > min_distance).then_some(d)
    }

    fn s_at(&self, ray: Vec3, dist: f64) -> f64 {
        self.s_eye + dist * self.tangent.dot(ray)
    }
}
