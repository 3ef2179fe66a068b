//! Bias flux density against the thickness of the two PM rings.

use rayon::prelude::*;

use crate::config::MachineConfig;
use crate::error::{EmcmError, Result};
use crate::flux::solve_bias;
use crate::geometry::Pose;
use crate::model::Emcm;
use crate::units;

/// Bias flux densities (T) at the centred pose for one pair of ring
/// thicknesses (mm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmStudyRow {
    pub upper_mm: f64,
    pub lower_mm: f64,
    pub radial_inner: f64,
    pub radial_outer: f64,
    pub pm_pole: f64,
    pub axial: f64,
}

/// Evaluates every `(upper, lower)` combination, upper thickness varying
/// slowest.
pub fn pm_thickness_study(cfg: &MachineConfig, upper_mm: &[f64], lower_mm: &[f64]) -> Result<Vec<PmStudyRow>> {
    for (key, list) in [("magnets.upper.thickness_mm", upper_mm), ("magnets.lower.thickness_mm", lower_mm)] {
        if let Some(t) = list.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(EmcmError::schema(key, format!("magnet thickness must be positive, got {t}")));
        }
    }
    let pairs: Vec<(f64, f64)> = upper_mm.iter().flat_map(|&u| lower_mm.iter().map(move |&l| (u, l))).collect();
    pairs
        .par_iter()
        .map(|&(u, l)| {
            let mut c = cfg.clone();
            c.pm_upper.thickness = units::mm_to_m(u);
            c.pm_lower.thickness = units::mm_to_m(l);
            let model = Emcm::new(c)?;
            let r = model.reluctances(&Pose::CENTERED)?;
            let bias = solve_bias(&r, &model.config().pm_upper, &model.config().pm_lower)?;
            let b = bias.component.fluxes.flux_density(model.layout());
            Ok(PmStudyRow {
                upper_mm: u,
                lower_mm: l,
                radial_inner: b.radial_inner[0],
                radial_outer: b.radial_outer[0],
                pm_pole: b.pm[0],
                axial: b.axial_inner[0],
            })
        })
        .collect()
}
