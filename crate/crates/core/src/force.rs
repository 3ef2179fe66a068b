//! Pole forces, pole moments and the net wrench on the flywheel.

use crate::config::{Layout, QUADRANTS};
use crate::error::{PoleId, Result};
use crate::flux::PoleFluxes;
use crate::geometry::{tilt_gap, Pose, QuadDomain};
use crate::quadrature::GaussLegendre;
use crate::reluctance::ReluctanceSet;
use crate::units::MU0;

/// Projection factor of the curved radial pole faces onto the pair axis.
pub const RADIAL_PROJECTION: f64 = 0.765;

/// Net force (N) and moment (N·m) on the flywheel.
///
/// `fz` is positive when lifting. The moments are conjugate to the tilt
/// angles of [`Pose`]: `mx = -∫ p r sinψ dA`, `my = ∫ p r cosψ dA`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Wrench {
    pub fx: f64,
    pub fy: f64,
    pub fz: f64,
    pub mx: f64,
    pub my: f64,
}

/// Wrench components, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WrenchAxis {
    Fx,
    Fy,
    Fz,
    Mx,
    My,
}

impl WrenchAxis {
    pub const ALL: [WrenchAxis; 5] = [WrenchAxis::Fx, WrenchAxis::Fy, WrenchAxis::Fz, WrenchAxis::Mx, WrenchAxis::My];

    /// Column name with unit, e.g. `fz_n`.
    pub fn name(self) -> &'static str {
        match self {
            WrenchAxis::Fx => "fx_n",
            WrenchAxis::Fy => "fy_n",
            WrenchAxis::Fz => "fz_n",
            WrenchAxis::Mx => "mx_nm",
            WrenchAxis::My => "my_nm",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let s = s.to_ascii_lowercase();
        Self::ALL.into_iter().find(|a| a.name() == s || a.name().split('_').next() == Some(s.as_str()))
    }
}

impl Wrench {
    pub fn get(&self, axis: WrenchAxis) -> f64 {
        match axis {
            WrenchAxis::Fx => self.fx,
            WrenchAxis::Fy => self.fy,
            WrenchAxis::Fz => self.fz,
            WrenchAxis::Mx => self.mx,
            WrenchAxis::My => self.my,
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.fx, self.fy, self.fz, self.mx, self.my].iter().all(|v| v.is_finite())
    }
}

/// Attraction of one radial pole face.
pub fn radial_pole_force(flux: f64, area: f64) -> f64 {
    RADIAL_PROJECTION * flux * flux / (2.0 * MU0 * area)
}

/// Lift of one sector pole carrying the gap MMF `mmf`.
pub fn axial_pole_force(mmf: f64, domain: &QuadDomain, z0: f64, pose: &Pose, rule: &GaussLegendre) -> Result<f64> {
    Ok(sector_loads(mmf, domain, z0, pose, rule)?.0)
}

/// Moments `(mx, my)` of one sector pole carrying the gap MMF `mmf`.
pub fn pole_moment(mmf: f64, domain: &QuadDomain, z0: f64, pose: &Pose, rule: &GaussLegendre) -> Result<(f64, f64)> {
    let (_, mx, my) = sector_loads(mmf, domain, z0, pose, rule)?;
    Ok((mx, my))
}

/// Force and both moments from one pass over the quadrature nodes.
pub fn sector_loads(
    mmf: f64,
    domain: &QuadDomain,
    z0: f64,
    pose: &Pose,
    rule: &GaussLegendre,
) -> Result<(f64, f64, f64)> {
    domain.check_gap(z0, pose)?;
    let k = 0.5 * MU0 * mmf * mmf;
    let (mut f, mut mx, mut my) = (0.0, 0.0, 0.0);
    rule.for_each_polar_node((domain.r_in, domain.r_out), (domain.psi_start, domain.psi_end), |r, psi, w| {
        let g = z0 + tilt_gap(r, psi, pose);
        let p = w * r * k / (g * g);
        let (s, c) = psi.sin_cos();
        f += p;
        mx -= p * r * s;
        my += p * r * c;
    });
    Ok((f, mx, my))
}

/// Net wrench of a solved flux distribution at `pose`.
///
/// Radial pair `j` acts along its direction cosines `c(j)`: the inner pole
/// pulls the rotor ring along `+c(j)`, the outer pole along `-c(j)`. Every
/// sector pole lifts.
pub fn net_wrench(
    flux: &PoleFluxes,
    r: &ReluctanceSet,
    layout: &Layout,
    domains: &[QuadDomain],
    z0: f64,
    pose: &Pose,
    rule: &GaussLegendre,
) -> Result<Wrench> {
    let mut w = Wrench::default();
    for (j, pair) in layout.radial.iter().enumerate() {
        let f = radial_pole_force(flux.radial_inner[j], pair.inner_area)
            - radial_pole_force(flux.radial_outer[j], pair.outer_area);
        w.fx += f * pair.direction[0];
        w.fy += f * pair.direction[1];
    }
    for d in domains {
        let (phi, rel) = match d.pole {
            PoleId::Pm(i) => (flux.pm[i], r.pm_pole[i]),
            PoleId::AxialInner(i) => (flux.axial_inner[i], r.axial_inner[i]),
            PoleId::AxialOuter(i) => (flux.axial_outer[i], r.axial_outer[i]),
            _ => continue,
        };
        let (f, mx, my) = sector_loads(phi * rel, d, z0, pose, rule)?;
        w.fz += f;
        w.mx += mx;
        w.my += my;
    }
    debug_assert_eq!(domains.len(), 3 * QUADRANTS);
    Ok(w)
}

/// Kinetic energy `I ω² / 2`, J.
pub fn stored_energy(inertia: f64, speed: f64) -> f64 {
    0.5 * inertia * speed * speed
}

/// Moment of inertia of a solid disc about its axis, kg·m².
pub fn disc_inertia(mass: f64, radius: f64) -> f64 {
    0.5 * mass * radius * radius
}

/// Speed at which `inertia` stores `energy`, rad/s.
pub fn speed_for_energy(inertia: f64, energy: f64) -> f64 {
    (2.0 * energy / inertia).sqrt()
}
