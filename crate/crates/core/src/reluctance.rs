//! Gap, sector and PM reluctances, assembled into the pose-dependent set
//! every flux solve works on.

use crate::config::{Layout, MachineConfig, PmRingSpec, QUADRANTS, RADIAL_PAIRS};
use crate::error::{EmcmError, PoleId, Result};
use crate::geometry::{layout_domains, radial_gaps_with, tilt_gap, Pose, QuadDomain};
use crate::quadrature::GaussLegendre;
use crate::units::MU0;

/// Uniform-gap reluctance `gap / (mu0 area)`.
pub fn radial_reluctance(gap: f64, area: f64) -> Result<f64> {
    if !(gap > 0.0) {
        return Err(EmcmError::NonPositiveGap { gap });
    }
    Ok(gap / (MU0 * area))
}

/// Permeance of an annular-sector gap, `∫∫ mu0 / (z0 + g) r dr dpsi`.
pub fn sector_permeance(domain: &QuadDomain, z0: f64, pose: &Pose, rule: &GaussLegendre) -> Result<f64> {
    domain.check_gap(z0, pose)?;
    let mut p = 0.0;
    rule.for_each_polar_node((domain.r_in, domain.r_out), (domain.psi_start, domain.psi_end), |r, psi, w| {
        p += w * r / (z0 + tilt_gap(r, psi, pose));
    });
    Ok(MU0 * p)
}

pub fn sector_reluctance(domain: &QuadDomain, z0: f64, pose: &Pose, rule: &GaussLegendre) -> Result<f64> {
    Ok(1.0 / sector_permeance(domain, z0, pose, rule)?)
}

/// Internal reluctance of a full PM ring.
pub fn pm_ring_reluctance(spec: &PmRingSpec) -> f64 {
    spec.internal_reluctance()
}

/// Parallel combination.
pub fn parallel(values: &[f64]) -> f64 {
    1.0 / values.iter().map(|r| 1.0 / r).sum::<f64>()
}

/// Every reluctance of the network at one pose, AT/Wb.
///
/// `axial_inner` and `axial_outer` are the two axial pole rings (the a1 and
/// a2 poles of each quadrant), `pm_pole` the PM pole gaps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReluctanceSet {
    pub radial_inner: [f64; RADIAL_PAIRS],
    pub radial_outer: [f64; RADIAL_PAIRS],
    pub pm_pole: [f64; QUADRANTS],
    pub axial_inner: [f64; QUADRANTS],
    pub axial_outer: [f64; QUADRANTS],
    pub pm_upper: f64,
    pub pm_lower: f64,
    pub flywheel_axial: f64,
    pub flywheel_radial: f64,
}

impl ReluctanceSet {
    /// All 16 radial poles in parallel.
    pub fn radial_total(&self) -> f64 {
        1.0 / self.radial_inner.iter().chain(&self.radial_outer).map(|r| 1.0 / r).sum::<f64>()
    }

    pub fn pm_pole_total(&self) -> f64 {
        parallel(&self.pm_pole)
    }

    /// Both axial poles of quadrant `i` in parallel.
    pub fn axial_quadrant(&self, i: usize) -> f64 {
        1.0 / (1.0 / self.axial_inner[i] + 1.0 / self.axial_outer[i])
    }

    pub fn axial_inner_total(&self) -> f64 {
        parallel(&self.axial_inner)
    }

    pub fn axial_outer_total(&self) -> f64 {
        parallel(&self.axial_outer)
    }

    pub fn axial_total(&self) -> f64 {
        1.0 / self.axial_inner.iter().chain(&self.axial_outer).map(|r| 1.0 / r).sum::<f64>()
    }

    /// Axial branch: axial poles plus the flywheel path to the PM poles.
    pub fn alpha(&self) -> f64 {
        self.axial_total() + self.flywheel_axial
    }

    /// PM-pole branch: PM pole gaps plus the lower ring.
    pub fn beta(&self) -> f64 {
        self.pm_pole_total() + self.pm_lower
    }

    /// Radial branch: radial poles, upper ring and flywheel radial path.
    pub fn gamma(&self) -> f64 {
        self.radial_total() + self.pm_upper + self.flywheel_radial
    }

    pub fn l(&self) -> f64 {
        let (a, b, c) = (self.alpha(), self.beta(), self.gamma());
        a * b + b * c + c * a
    }

    /// Reluctance closing the radial control flux outside the radial poles:
    /// the upper ring and flywheel radial path in series with the axial and
    /// PM-pole branches in parallel.
    pub fn non_radial(&self) -> f64 {
        let (a, b) = (self.alpha(), self.beta());
        self.pm_upper + self.flywheel_radial + a * b / (a + b)
    }

    pub(crate) fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let fields = self
            .radial_inner
            .iter()
            .chain(&self.radial_outer)
            .chain(&self.pm_pole)
            .chain(&self.axial_inner)
            .chain(&self.axial_outer)
            .chain([&self.pm_upper, &self.pm_lower, &self.flywheel_axial, &self.flywheel_radial]);
        for v in fields {
            for byte in v.to_bits().to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        h
    }
}

/// Assembles the reluctance set of `cfg` at `pose`.
pub fn assemble(cfg: &MachineConfig, pose: &Pose, quad_order: usize) -> Result<ReluctanceSet> {
    let layout = cfg.layout()?;
    let rule = GaussLegendre::new(quad_order)?;
    assemble_with(cfg, &layout, &layout_domains(&layout), pose, &rule)
}

pub(crate) fn assemble_with(
    cfg: &MachineConfig,
    layout: &Layout,
    domains: &[QuadDomain],
    pose: &Pose,
    rule: &GaussLegendre,
) -> Result<ReluctanceSet> {
    let z1 = cfg.radial_gap;
    let directions = layout.radial.map(|p| p.direction);
    let outer_gaps = radial_gaps_with(&directions, pose, z1)?;
    let mut radial_inner = [0.0; RADIAL_PAIRS];
    let mut radial_outer = [0.0; RADIAL_PAIRS];
    for (j, pair) in layout.radial.iter().enumerate() {
        radial_outer[j] = radial_reluctance(outer_gaps[j], pair.outer_area)
            .map_err(|_| EmcmError::Contact { pole: PoleId::RadialOuter(j), gap: outer_gaps[j] })?;
        let gi = 2.0 * z1 - outer_gaps[j];
        radial_inner[j] = radial_reluctance(gi, pair.inner_area)
            .map_err(|_| EmcmError::Contact { pole: PoleId::RadialInner(j), gap: gi })?;
    }
    let mut sectors = [0.0; 3 * QUADRANTS];
    for (k, d) in domains.iter().enumerate() {
        sectors[k] = sector_reluctance(d, cfg.axial_gap, pose, rule)?;
    }
    let quad = |k: usize| -> [f64; QUADRANTS] { [sectors[k], sectors[k + 1], sectors[k + 2], sectors[k + 3]] };
    Ok(ReluctanceSet {
        radial_inner,
        radial_outer,
        pm_pole: quad(0),
        axial_inner: quad(QUADRANTS),
        axial_outer: quad(2 * QUADRANTS),
        pm_upper: pm_ring_reluctance(&cfg.pm_upper),
        pm_lower: pm_ring_reluctance(&cfg.pm_lower),
        flywheel_axial: cfg.flywheel_axial_reluctance,
        flywheel_radial: cfg.flywheel_radial_reluctance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::reference_config;
    use crate::geometry::{radial_gaps, PoseAxis};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn quadrant(r_in: f64, r_out: f64) -> QuadDomain {
        QuadDomain { r_in, r_out, psi_start: 0.0, psi_end: PI / 2.0, pole: PoleId::AxialInner(0) }
    }

    #[test]
    fn radial_hand_value() {
        let r = radial_reluctance(1.143e-3, 0.01).unwrap();
        assert!((r - 1.143e-3 / (4e-7 * PI * 0.01)).abs() < 1e-9);
        assert!((r - 9.0957e4).abs() < 1.0);
        assert_eq!(radial_reluctance(2.286e-3, 0.01).unwrap(), 2.0 * r);
        assert!(matches!(radial_reluctance(0.0, 0.01), Err(EmcmError::NonPositiveGap { .. })));
    }

    #[test]
    fn flat_sector_is_closed_form() {
        let rule = GaussLegendre::new(16).unwrap();
        let d = quadrant(0.35, 0.45);
        let area = PI / 2.0 * (0.45f64.powi(2) - 0.35f64.powi(2)) / 2.0;
        assert!((area - 0.06283).abs() < 1e-5);
        let r = sector_reluctance(&d, 1.143e-3, &Pose::CENTERED, &rule).unwrap();
        let want = 1.143e-3 / (MU0 * area);
        assert!((r - want).abs() / want < 1e-14);
        assert!((r - 1.4476e4).abs() < 1.0);
    }

    #[test]
    fn pm_ring_hand_value() {
        let pm = PmRingSpec { thickness: 0.010, pole_area: 0.05, remanence: 1.4, recoil_permeability: 1.05 };
        let r = pm_ring_reluctance(&pm);
        assert!((r - 0.010 / (MU0 * 1.05 * 0.05)).abs() < 1e-9);
        assert!((r - 1.516e5).abs() < 50.0);
        let doubled = PmRingSpec { pole_area: 0.1, ..pm };
        assert!((pm_ring_reluctance(&doubled) - r / 2.0).abs() < 1e-9);
        let vacuum = PmRingSpec { recoil_permeability: 1.0, ..pm };
        assert!((pm_ring_reluctance(&vacuum) - 0.010 / (MU0 * 0.05)).abs() < 1e-9);
    }

    #[test]
    fn contact_inside_a_sector() {
        let rule = GaussLegendre::new(8).unwrap();
        let d = quadrant(0.35, 0.45);
        let pose = Pose::new(0.0, 0.0, 0.0, -0.2f64.to_radians(), 0.0);
        match sector_reluctance(&d, 1.143e-3, &pose, &rule) {
            Err(EmcmError::Contact { pole, .. }) => assert_eq!(pole, PoleId::AxialInner(0)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn centered_reference_is_symmetric() {
        let set = assemble(&reference_config(), &Pose::CENTERED, 16).unwrap();
        for i in 1..4 {
            assert_eq!(set.pm_pole[i].to_bits(), set.pm_pole[0].to_bits());
            assert!((set.axial_inner[i] - set.axial_inner[0]).abs() < 1e-12 * set.axial_inner[0]);
        }
        for j in 1..8 {
            assert_eq!(set.radial_inner[j], set.radial_inner[0]);
            assert_eq!(set.radial_outer[j], set.radial_outer[0]);
        }
    }

    #[test]
    fn radial_reluctance_follows_gap_order() {
        let cfg = reference_config();
        let pose = Pose::from_boundary(0.2, 0.0, 0.0, 0.0, 0.0);
        let set = assemble(&cfg, &pose, 16).unwrap();
        let gaps = radial_gaps(&pose, cfg.radial_gap).unwrap();
        for a in 0..8 {
            for b in 0..8 {
                if gaps[a] < gaps[b] - 1e-12 {
                    assert!(set.radial_outer[a] < set.radial_outer[b]);
                    assert!(set.radial_inner[a] > set.radial_inner[b]);
                }
            }
        }
    }

    #[test]
    fn totals_are_parallel_combinations() {
        let pose = Pose::from_boundary(0.1, -0.05, 0.02, 0.01, 0.015);
        let set = assemble(&reference_config(), &pose, 16).unwrap();
        let inv: f64 = set.pm_pole.iter().map(|r| 1.0 / r).sum();
        assert!((1.0 / set.pm_pole_total() - inv).abs() <= 1e-14 * inv);
        assert_eq!(set.alpha(), set.axial_total() + set.flywheel_axial);
        assert_eq!(set.beta(), set.pm_pole_total() + set.pm_lower);
        assert_eq!(set.gamma(), set.radial_total() + set.pm_upper + set.flywheel_radial);
    }

    #[test]
    fn sector_reluctance_grows_with_gap() {
        let rule = GaussLegendre::new(16).unwrap();
        let d = quadrant(0.3, 0.5);
        let mut last = 0.0;
        for k in -5..=5 {
            let pose = Pose::CENTERED.with(PoseAxis::Z, k as f64 * 1e-4);
            let r = sector_reluctance(&d, 1.143e-3, &pose, &rule).unwrap();
            assert!(r > last);
            last = r;
        }
    }

    proptest! {
        #[test]
        fn quadrature_converges(tx in -0.04f64..0.04, ty in -0.04f64..0.04, z in -3e-4f64..3e-4) {
            let d = quadrant(0.3, 0.55);
            let pose = Pose::from_boundary(0.0, 0.0, 0.0, tx, ty).with(PoseAxis::Z, z);
            for k in [8usize, 12, 16] {
                let a = sector_reluctance(&d, 1.143e-3, &pose, &GaussLegendre::new(k).unwrap()).unwrap();
                let b = sector_reluctance(&d, 1.143e-3, &pose, &GaussLegendre::new(2 * k).unwrap()).unwrap();
                prop_assert!((a - b).abs() / b <= 1e-8);
            }
        }
    }
}
