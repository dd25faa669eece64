use std::io::Read;
use std::path::Path;

use serde::Deserialize;

use super::{open, IoError};
use crate::daylight::{
    Aperture, Building, DaylightError, Obstruction, PatchScope, Room, SurfaceOptics, WorkplaneSettings,
};
use crate::geometry::{Polygon3, Vec3};
use crate::solar::{EfficacyMode, EfficacyModel, GeoLocation};

/// A validated building file.
pub type BuildingDescription = Building;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BuildingFile {
    location: LocationSpec,
    room: RoomSpec,
    #[serde(default)]
    obstructions: Vec<ObstructionSpec>,
    #[serde(default)]
    workplane: Option<WorkplaneSpec>,
    #[serde(default)]
    efficacy: Option<EfficacySpec>,
    #[serde(default)]
    patch_scope: PatchScope,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LocationSpec {
    lat: f64,
    lon: f64,
    tz: f64,
    albedo: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RoomSpec {
    floor_vertices: Vec<[f64; 3]>,
    height: f64,
    surfaces: Vec<SurfaceSpec>,
    apertures: Vec<ApertureSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SurfaceSpec {
    role: String,
    reflectance: f64,
}

fn one() -> f64 {
    1.0
}

fn clear_glass() -> f64 {
    0.9
}

fn default_fraction() -> f64 {
    Obstruction::DEFAULT_LUMINANCE_FRACTION
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ApertureSpec {
    vertices: Vec<[f64; 3]>,
    #[serde(default = "clear_glass")]
    tau_vitre: f64,
    #[serde(rename = "MF", default = "one")]
    mf: f64,
    #[serde(rename = "FR", default = "one")]
    fr: f64,
    #[serde(rename = "MG", default = "one")]
    mg: f64,
    #[serde(rename = "FC", default = "one")]
    fc: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ObstructionSpec {
    vertices: Vec<[f64; 3]>,
    #[serde(default = "default_fraction")]
    luminance_fraction: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WorkplaneSpec {
    cell: Option<f64>,
    height: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EfficacySpec {
    #[serde(default)]
    mode: EfficacyMode,
    #[serde(rename = "Kd")]
    kd: Option<f64>,
    #[serde(rename = "Kb")]
    kb: Option<f64>,
}

pub fn parse_building(path: &Path) -> Result<BuildingDescription, IoError> {
    let mut text = String::new();
    open(path, "building file")?
        .read_to_string(&mut text)
        .map_err(|e| IoError::io(path, e))?;
    building_from_json(&text)
}

/// Parses and validates a building description. Errors name the offending
/// field with its JSON path, e.g. `room.surfaces[1].reflectance`.
pub fn building_from_json(text: &str) -> Result<BuildingDescription, IoError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let file: BuildingFile = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { "building".to_string() } else { path };
        IoError::schema(field, e.into_inner().to_string())
    })?;

    let loc = &file.location;
    let location = GeoLocation {
        latitude: loc.lat,
        longitude: loc.lon,
        timezone: loc.tz,
        albedo: loc.albedo,
    };
    for (field, ok) in [
        ("location.lat", loc.lat.abs() <= 90.0),
        ("location.lon", loc.lon.abs() <= 180.0),
        ("location.tz", loc.tz.abs() <= 14.0),
        ("location.albedo", (0.0..=1.0).contains(&loc.albedo)),
    ] {
        if !ok {
            return Err(IoError::schema(field, "value out of range"));
        }
    }

    let optics = surfaces(&file.room.surfaces)?;
    let floor = polygon(&file.room.floor_vertices, "room.floor_vertices")?;
    if !(file.room.height > 0.0 && file.room.height.is_finite()) {
        return Err(IoError::schema(
            "room.height",
            format!("{} must be positive", file.room.height),
        ));
    }

    let mut apertures = Vec::with_capacity(file.room.apertures.len());
    for (i, spec) in file.room.apertures.iter().enumerate() {
        let field = |name: &str| format!("room.apertures[{i}].{name}");
        for (name, v) in [
            ("tau_vitre", spec.tau_vitre),
            ("MF", spec.mf),
            ("FR", spec.fr),
            ("MG", spec.mg),
            ("FC", spec.fc),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(IoError::schema(field(name), format!("{v} outside (0, 1]")));
            }
        }
        let poly = polygon(&spec.vertices, &field("vertices"))?;
        if !poly.is_vertical() {
            return Err(IoError::Geometry {
                field: field("vertices"),
                source: DaylightError::ApertureNotOnWall { index: i },
            });
        }
        apertures.push(Aperture {
            polygon: poly,
            transmission: spec.tau_vitre,
            maintenance: spec.mf,
            framing: spec.fr,
            activity: spec.mg,
            remoteness: spec.fc,
        });
    }
    let room = Room::new(floor, file.room.height, optics, apertures).map_err(|e| {
        let field = match &e {
            DaylightError::ApertureNotOnWall { index } => format!("room.apertures[{index}].vertices"),
            _ => "room".to_string(),
        };
        IoError::Geometry { field, source: e }
    })?;

    let mut obstructions = Vec::with_capacity(file.obstructions.len());
    for (i, spec) in file.obstructions.iter().enumerate() {
        let field = |name: &str| format!("obstructions[{i}].{name}");
        if !(0.0..=1.0).contains(&spec.luminance_fraction) {
            return Err(IoError::schema(
                field("luminance_fraction"),
                format!("{} outside [0, 1]", spec.luminance_fraction),
            ));
        }
        let poly = polygon(&spec.vertices, &field("vertices"))?;
        let obs = Obstruction::new(poly, spec.luminance_fraction).map_err(|e| IoError::Geometry {
            field: field("vertices"),
            source: e,
        })?;
        obstructions.push(obs);
    }

    let defaults = WorkplaneSettings::default();
    let workplane = match &file.workplane {
        Some(w) => WorkplaneSettings {
            cell: w.cell.unwrap_or(defaults.cell),
            height: w.height.unwrap_or(defaults.height),
        },
        None => defaults,
    };
    if !(workplane.cell > 0.0 && workplane.cell.is_finite()) {
        return Err(IoError::schema(
            "workplane.cell",
            format!("{} must be positive", workplane.cell),
        ));
    }
    if !(workplane.height >= 0.0 && workplane.height < file.room.height) {
        return Err(IoError::schema(
            "workplane.height",
            format!("{} must lie between the floor and the ceiling", workplane.height),
        ));
    }

    let mut efficacy = EfficacyModel::default();
    if let Some(e) = &file.efficacy {
        efficacy.mode = e.mode;
        efficacy.diffuse = e.kd.unwrap_or(efficacy.diffuse);
        efficacy.beam = e.kb.unwrap_or(efficacy.beam);
    }
    efficacy
        .validate()
        .map_err(|e| IoError::schema("efficacy", e.to_string()))?;

    Ok(Building {
        location,
        room,
        obstructions,
        workplane,
        efficacy,
        patch_scope: file.patch_scope,
    })
}

fn polygon(vertices: &[[f64; 3]], field: &str) -> Result<Polygon3, IoError> {
    Polygon3::new(vertices.iter().map(|&v| Vec3::from(v)).collect()).map_err(|e| IoError::Geometry {
        field: field.to_string(),
        source: e.into(),
    })
}

fn surfaces(specs: &[SurfaceSpec]) -> Result<SurfaceOptics, IoError> {
    let mut found: [Option<f64>; 3] = [None; 3];
    for (i, s) in specs.iter().enumerate() {
        let slot = match s.role.as_str() {
            "floor" => 0,
            "wall" => 1,
            "ceiling" => 2,
            other => {
                return Err(IoError::schema(
                    format!("room.surfaces[{i}].role"),
                    format!("unknown role `{other}` (expected floor, wall or ceiling)"),
                ))
            }
        };
        if !(0.0..=1.0).contains(&s.reflectance) {
            return Err(IoError::schema(
                format!("room.surfaces[{i}].reflectance"),
                format!("{} outside [0, 1]", s.reflectance),
            ));
        }
        if found[slot].replace(s.reflectance).is_some() {
            return Err(IoError::schema(
                format!("room.surfaces[{i}].role"),
                format!("role `{}` given twice", s.role),
            ));
        }
    }
    let get = |slot: usize, role: &str| {
        found[slot].ok_or_else(|| IoError::schema("room.surfaces", format!("missing `{role}` surface")))
    };
    Ok(SurfaceOptics {
        floor: get(0, "floor")?,
        walls: get(1, "wall")?,
        ceiling: get(2, "ceiling")?,
    })
}
