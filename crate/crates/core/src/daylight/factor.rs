use serde::Serialize;

use super::irc::compute_irc;
use super::sky::{sky_components, SkyIntegration};
use super::{Aperture, DaylightError, Obstruction, Room};
use crate::geometry::Point3;

/// Daylight factor of one aperture at one point, all fractions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct DfBreakdown {
    pub sc: f64,
    pub erc: f64,
    pub irc: f64,
    pub df: f64,
}

impl DfBreakdown {
    /// DF = (SC + ERC + IRC·FC)·MF·FR·GL·MG.
    pub fn assemble(sc: f64, erc: f64, irc: f64, ap: &Aperture) -> Self {
        let df = (sc + erc + irc * ap.remoteness) * ap.maintenance * ap.framing * ap.transmission * ap.activity;
        DfBreakdown { sc, erc, irc, df }
    }

    pub fn df_percent(&self) -> f64 {
        self.df * 100.0
    }
}

/// Per-aperture breakdowns at one point plus their summed DF.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PointDaylight {
    pub apertures: Vec<DfBreakdown>,
    pub df: f64,
}

impl PointDaylight {
    fn from_breakdowns(apertures: Vec<DfBreakdown>) -> Self {
        let df = apertures.iter().map(|b| b.df).sum();
        PointDaylight { apertures, df }
    }
}

pub fn compute_df(
    p: Point3,
    room: &Room,
    ap: &Aperture,
    obstructions: &[Obstruction],
) -> Result<DfBreakdown, DaylightError> {
    if !room.contains_plan(p) {
        return Err(DaylightError::outside(p));
    }
    let sky = sky_components(p, ap, obstructions, &SkyIntegration::default())?;
    let irc = compute_irc(room, ap, obstructions)?;
    Ok(DfBreakdown::assemble(sky.sc, sky.erc, irc, ap))
}

/// Daylight factor from every aperture of `room` at `p`. `irc` holds the
/// precomputed internally reflected component of each aperture.
pub fn compute_point_daylight(
    p: Point3,
    room: &Room,
    obstructions: &[Obstruction],
    irc: &[f64],
    cfg: &SkyIntegration,
) -> Result<PointDaylight, DaylightError> {
    if !room.contains_plan(p) {
        return Err(DaylightError::outside(p));
    }
    if irc.len() != room.apertures().len() {
        return Err(DaylightError::InvalidParameter(format!(
            "{} IRC values for {} apertures",
            irc.len(),
            room.apertures().len()
        )));
    }
    let breakdowns = room
        .apertures()
        .iter()
        .zip(irc)
        .map(|(ap, &irc)| {
            let sky = sky_components(p, ap, obstructions, cfg)?;
            Ok(DfBreakdown::assemble(sky.sc, sky.erc, irc, ap))
        })
        .collect::<Result<Vec<_>, DaylightError>>()?;
    Ok(PointDaylight::from_breakdowns(breakdowns))
}
