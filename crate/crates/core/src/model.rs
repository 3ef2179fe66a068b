//! One-call solve of a pose and an excitation.

use crate::config::{CommandMap, Layout, MachineConfig};
use crate::error::{EmcmError, PoleId, Result};
use crate::flux::{self, map_with, CoilMmf, Excitation, FluxState, PoleFluxes};
use crate::force::{net_wrench, Wrench};
use crate::geometry::{layout_domains, Pose, QuadDomain};
use crate::quadrature::{GaussLegendre, DEFAULT_ORDER};
use crate::reluctance::{assemble_with, ReluctanceSet};

/// A validated machine ready to solve. Cheap to share across threads.
#[derive(Debug, Clone)]
pub struct Emcm {
    cfg: MachineConfig,
    layout: Layout,
    domains: Vec<QuadDomain>,
    map: CommandMap,
    rule: GaussLegendre,
}

/// Everything one solve produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub pose: Pose,
    pub mmf: CoilMmf,
    pub reluctances: ReluctanceSet,
    pub flux: FluxState,
    /// Flux density of the total flux per pole, T.
    pub flux_density: PoleFluxes,
    pub wrench: Wrench,
    /// Poles whose flux density exceeds the bearing steel saturation.
    pub saturated: Vec<PoleId>,
}

impl Emcm {
    pub fn new(cfg: MachineConfig) -> Result<Self> {
        Self::with_quad_order(cfg, DEFAULT_ORDER)
    }

    pub fn with_quad_order(cfg: MachineConfig, order: usize) -> Result<Self> {
        let layout = cfg.layout()?;
        let map = cfg.command_map()?;
        Ok(Self { domains: layout_domains(&layout), rule: GaussLegendre::new(order)?, cfg, layout, map })
    }

    pub fn config(&self) -> &MachineConfig {
        &self.cfg
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn domains(&self) -> &[QuadDomain] {
        &self.domains
    }

    pub fn command_map(&self) -> &CommandMap {
        &self.map
    }

    pub fn rule(&self) -> &GaussLegendre {
        &self.rule
    }

    pub fn quad_order(&self) -> usize {
        self.rule.order()
    }

    pub fn mmf(&self, ex: &Excitation) -> Result<CoilMmf> {
        map_with(ex, &self.map, &self.cfg)
    }

    pub fn reluctances(&self, pose: &Pose) -> Result<ReluctanceSet> {
        assemble_with(&self.cfg, &self.layout, &self.domains, pose, &self.rule)
    }

    pub fn solve(&self, pose: &Pose, ex: &Excitation) -> Result<Solution> {
        let mmf = self.mmf(ex)?;
        self.solve_mmf(pose, &mmf)
    }

    /// Solves with coil MMFs given directly. Amplifier limits are still
    /// enforced.
    pub fn solve_mmf(&self, pose: &Pose, mmf: &CoilMmf) -> Result<Solution> {
        flux::check_limits(mmf, &self.cfg.coils)?;
        let reluctances = self.reluctances(pose)?;
        let flux = flux::solve_all(&reluctances, &self.cfg.pm_upper, &self.cfg.pm_lower, mmf)?;
        let wrench = net_wrench(
            &flux.total,
            &reluctances,
            &self.layout,
            &self.domains,
            self.cfg.axial_gap,
            pose,
            &self.rule,
        )?;
        if !wrench.is_finite() {
            return Err(EmcmError::Consistency("non-finite wrench".into()));
        }
        let flux_density = flux.total.flux_density(&self.layout);
        let limit = self.cfg.bearing_material.saturation_flux_density;
        let saturated = flux_density.entries().into_iter().filter(|(_, b)| b.abs() > limit).map(|(p, _)| p).collect();
        Ok(Solution { pose: *pose, mmf: *mmf, reluctances, flux, flux_density, wrench, saturated })
    }

    /// Wrench only.
    pub fn wrench(&self, pose: &Pose, ex: &Excitation) -> Result<Wrench> {
        Ok(self.solve(pose, ex)?.wrench)
    }

    pub fn wrench_mmf(&self, pose: &Pose, mmf: &CoilMmf) -> Result<Wrench> {
        Ok(self.solve_mmf(pose, mmf)?.wrench)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::reference_config;
    use crate::geometry::PoseAxis;

    #[test]
    fn centered_wrench_is_pure_lift() {
        let m = Emcm::new(reference_config()).unwrap();
        let w = m.wrench(&Pose::CENTERED, &Excitation::ZERO).unwrap();
        assert!(w.fx.abs() <= 1e-9 * w.fz && w.fy.abs() <= 1e-9 * w.fz);
        let r_out = m.layout().axial_outer[0].r_out;
        assert!(w.mx.abs() <= 1e-9 * w.fz * r_out && w.my.abs() <= 1e-9 * w.fz * r_out);
    }

    #[test]
    fn mirrored_pose_mirrors_radial_force() {
        let m = Emcm::new(reference_config()).unwrap();
        let a = m.wrench(&Pose::from_boundary(0.2, 0.05, 0.0, 0.0, 0.0), &Excitation::ZERO).unwrap();
        let b = m.wrench(&Pose::from_boundary(-0.2, 0.05, 0.0, 0.0, 0.0), &Excitation::ZERO).unwrap();
        assert!((a.fx + b.fx).abs() <= 1e-9 * a.fx.abs());
        assert!((a.fy - b.fy).abs() <= 1e-9 * a.fy.abs().max(1.0));
        assert!((a.fz - b.fz).abs() <= 1e-12 * a.fz);
    }

    #[test]
    fn lift_falls_as_gap_opens() {
        let m = Emcm::new(reference_config()).unwrap();
        let mut last = f64::INFINITY;
        for k in -8..=8 {
            let pose = Pose::CENTERED.with(PoseAxis::Z, k as f64 * 1e-4);
            let fz = m.wrench(&pose, &Excitation::ZERO).unwrap().fz;
            assert!(fz < last);
            last = fz;
        }
    }

    #[test]
    fn contact_is_reported() {
        let m = Emcm::new(reference_config()).unwrap();
        let err = m.solve(&Pose::from_boundary(2.0, 0.0, 0.0, 0.0, 0.0), &Excitation::ZERO).unwrap_err();
        assert!(matches!(err, EmcmError::Contact { .. }));
    }
}
