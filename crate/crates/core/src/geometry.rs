//! Flywheel pose and the air gaps it produces at every pole face.

use crate::config::{Layout, MachineConfig, PoleKind, SectorShape, QUADRANTS, RADIAL_PAIRS};
use crate::error::{EmcmError, PoleId, Result};
use crate::units;

/// Direction cosines of the eight radial pairs, in pole order, with the
/// printed two-decimal coefficients. Pair `j` and pair `j + 4` are opposite.
pub const RADIAL_DIRECTIONS: [[f64; 2]; RADIAL_PAIRS] = [
    [0.38, -0.92],
    [-0.38, -0.92],
    [-0.92, 0.38],
    [-0.92, -0.38],
    [-0.38, 0.92],
    [0.38, 0.92],
    [0.92, -0.38],
    [0.92, 0.38],
];

/// Index of the pair facing pair `j` across the rotor.
pub fn opposite(j: usize) -> usize {
    (j + RADIAL_PAIRS / 2) % RADIAL_PAIRS
}

/// Rigid-body state of the flywheel relative to the stator. Translations in
/// metres, tilts in radians. Positive `z` opens every axial gap.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub theta_x: f64,
    pub theta_y: f64,
}

/// Pose coordinates, in the order used by sweeps and stiffness reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PoseAxis {
    X,
    Y,
    Z,
    ThetaX,
    ThetaY,
}

impl PoseAxis {
    pub const ALL: [PoseAxis; 5] = [PoseAxis::X, PoseAxis::Y, PoseAxis::Z, PoseAxis::ThetaX, PoseAxis::ThetaY];

    pub fn is_angle(self) -> bool {
        matches!(self, PoseAxis::ThetaX | PoseAxis::ThetaY)
    }

    pub fn name(self) -> &'static str {
        match self {
            PoseAxis::X => "x",
            PoseAxis::Y => "y",
            PoseAxis::Z => "z",
            PoseAxis::ThetaX => "theta_x",
            PoseAxis::ThetaY => "theta_y",
        }
    }

    /// Converts a boundary value (mm or degrees) to SI.
    pub fn to_si(self, v: f64) -> f64 {
        if self.is_angle() {
            units::deg_to_rad(v)
        } else {
            units::mm_to_m(v)
        }
    }

    /// Converts an SI value to the boundary unit (mm or degrees).
    pub fn to_boundary(self, v: f64) -> f64 {
        if self.is_angle() {
            units::rad_to_deg(v)
        } else {
            v * 1.0e3
        }
    }
}

impl Pose {
    pub const CENTERED: Pose = Pose { x: 0.0, y: 0.0, z: 0.0, theta_x: 0.0, theta_y: 0.0 };

    pub fn new(x: f64, y: f64, z: f64, theta_x: f64, theta_y: f64) -> Self {
        Self { x, y, z, theta_x, theta_y }
    }

    /// Pose from millimetres and degrees.
    pub fn from_boundary(x_mm: f64, y_mm: f64, z_mm: f64, theta_x_deg: f64, theta_y_deg: f64) -> Self {
        Self {
            x: units::mm_to_m(x_mm),
            y: units::mm_to_m(y_mm),
            z: units::mm_to_m(z_mm),
            theta_x: units::deg_to_rad(theta_x_deg),
            theta_y: units::deg_to_rad(theta_y_deg),
        }
    }

    pub fn get(&self, axis: PoseAxis) -> f64 {
        match axis {
            PoseAxis::X => self.x,
            PoseAxis::Y => self.y,
            PoseAxis::Z => self.z,
            PoseAxis::ThetaX => self.theta_x,
            PoseAxis::ThetaY => self.theta_y,
        }
    }

    pub fn with(mut self, axis: PoseAxis, value: f64) -> Self {
        match axis {
            PoseAxis::X => self.x = value,
            PoseAxis::Y => self.y = value,
            PoseAxis::Z => self.z = value,
            PoseAxis::ThetaX => self.theta_x = value,
            PoseAxis::ThetaY => self.theta_y = value,
        }
        self
    }

    pub fn offset(self, axis: PoseAxis, delta: f64) -> Self {
        let v = self.get(axis);
        self.with(axis, v + delta)
    }
}

/// Axial translation plus the tilt-induced gap change at `(r, psi)`.
pub fn tilt_gap(r: f64, psi: f64, pose: &Pose) -> f64 {
    pose.z + r * (pose.theta_x.sin() * psi.sin() - pose.theta_y.sin() * psi.cos())
}

/// Gaps `z1 + c(j) . (x, y)` for the printed direction pattern.
pub fn radial_gaps(pose: &Pose, z1: f64) -> Result<[f64; RADIAL_PAIRS]> {
    radial_gaps_with(&RADIAL_DIRECTIONS, pose, z1)
}

/// Gaps `z1 + c(j) . (x, y)` for arbitrary pair directions.
///
/// These are the gaps at the outer poles. The inner gap of the same pair is
/// `2 z1 - gap(j)`, which equals the outer gap of the opposite pair.
pub fn radial_gaps_with(directions: &[[f64; 2]; RADIAL_PAIRS], pose: &Pose, z1: f64) -> Result<[f64; RADIAL_PAIRS]> {
    let mut gaps = [0.0; RADIAL_PAIRS];
    for (j, c) in directions.iter().enumerate() {
        let g = z1 + c[0] * pose.x + c[1] * pose.y;
        if !(g > 0.0) {
            return Err(EmcmError::Contact { pole: PoleId::RadialOuter(j), gap: g });
        }
        if !(2.0 * z1 - g > 0.0) {
            return Err(EmcmError::Contact { pole: PoleId::RadialInner(j), gap: 2.0 * z1 - g });
        }
        gaps[j] = g;
    }
    Ok(gaps)
}

/// One annular-sector integration domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadDomain {
    pub r_in: f64,
    pub r_out: f64,
    pub psi_start: f64,
    pub psi_end: f64,
    pub pole: PoleId,
}

impl QuadDomain {
    pub fn new(shape: &SectorShape, pole: PoleId) -> Self {
        Self { r_in: shape.r_in, r_out: shape.r_out, psi_start: shape.psi_start, psi_end: shape.psi_end, pole }
    }

    pub fn area(&self) -> f64 {
        0.5 * (self.psi_end - self.psi_start) * (self.r_out * self.r_out - self.r_in * self.r_in)
    }

    /// Smallest air gap over the closed domain. The tilt term is linear in
    /// `r` and sinusoidal in `psi`, so the minimum sits on a corner or at the
    /// stationary angle of the sinusoid on the inner or outer arc.
    pub fn min_gap(&self, z0: f64, pose: &Pose) -> f64 {
        let (a, b) = (pose.theta_x.sin(), -pose.theta_y.sin());
        let mut angles = vec![self.psi_start, self.psi_end];
        if a != 0.0 || b != 0.0 {
            let base = a.atan2(b);
            for k in -4..=4 {
                let psi = base + 0.5 * std::f64::consts::PI * k as f64;
                if psi > self.psi_start && psi < self.psi_end {
                    angles.push(psi);
                }
            }
        }
        angles
            .iter()
            .flat_map(|&psi| [self.r_in, self.r_out].map(|r| z0 + tilt_gap(r, psi, pose)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Contact error when the gap closes anywhere on the face.
    pub fn check_gap(&self, z0: f64, pose: &Pose) -> Result<()> {
        let g = self.min_gap(z0, pose);
        if g > 0.0 {
            Ok(())
        } else {
            Err(EmcmError::Contact { pole: self.pole, gap: g })
        }
    }
}

/// Integration domains of the sector poles: the four PM quadrants, then the
/// inner and outer axial quadrants.
pub fn pole_domains(cfg: &MachineConfig) -> Result<Vec<QuadDomain>> {
    Ok(layout_domains(&cfg.layout()?))
}

pub(crate) fn layout_domains(layout: &Layout) -> Vec<QuadDomain> {
    let mut out = Vec::with_capacity(3 * QUADRANTS);
    for (kind, ring) in [
        (PoleKind::Pm, &layout.pm),
        (PoleKind::AxialInner, &layout.axial_inner),
        (PoleKind::AxialOuter, &layout.axial_outer),
    ] {
        for (i, s) in ring.iter().enumerate() {
            let pole = match kind {
                PoleKind::Pm => PoleId::Pm(i),
                PoleKind::AxialInner => PoleId::AxialInner(i),
                _ => PoleId::AxialOuter(i),
            };
            out.push(QuadDomain::new(s, pole));
        }
    }
    out
}
