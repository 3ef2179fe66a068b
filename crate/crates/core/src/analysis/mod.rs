//! Sweeps, stiffness extraction, coupling maps, the PM-thickness study,
//! calibration to design targets and the virtual measurement rig.

pub mod calibrate;
pub mod coupling;
pub mod pm_study;
pub mod rig;
pub mod stiffness;
pub mod sweep;

use std::fmt;

use crate::config::CoilRole;
use crate::error::{EmcmError, Result};
use crate::flux::{Excitation, RadialCommand, TiltCommand};
use crate::force::WrenchAxis;
use crate::geometry::{Pose, PoseAxis};
use crate::model::Emcm;

pub use calibrate::{calibrate_to_targets, CalibrationResult, Calibrator, DesignTargets, SingleGap};
pub use coupling::{coupling_current, coupling_position, Baseline, CouplingMap};
pub use pm_study::{pm_thickness_study, PmStudyRow};
pub use rig::{virtual_measurement, RigMode, RigRecord, RigSample, RigSpec};
pub use stiffness::{extract_stiffness, fd_stiffness, linear_regression, Regression, StiffnessKind, StiffnessReport};
pub use sweep::{sweep, SweepSpec, SweepTable};

/// A swept or probed quantity: a pose coordinate, or the control command of
/// the axis (ampere-turns at the boundary, amperes of coil current in SI).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepAxis {
    Pose(PoseAxis),
    Current(PoseAxis),
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 10] = [
        SweepAxis::Pose(PoseAxis::X),
        SweepAxis::Pose(PoseAxis::Y),
        SweepAxis::Pose(PoseAxis::Z),
        SweepAxis::Pose(PoseAxis::ThetaX),
        SweepAxis::Pose(PoseAxis::ThetaY),
        SweepAxis::Current(PoseAxis::X),
        SweepAxis::Current(PoseAxis::Y),
        SweepAxis::Current(PoseAxis::Z),
        SweepAxis::Current(PoseAxis::ThetaX),
        SweepAxis::Current(PoseAxis::ThetaY),
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Pose(PoseAxis::X) => "x",
            SweepAxis::Pose(PoseAxis::Y) => "y",
            SweepAxis::Pose(PoseAxis::Z) => "z",
            SweepAxis::Pose(PoseAxis::ThetaX) => "theta_x",
            SweepAxis::Pose(PoseAxis::ThetaY) => "theta_y",
            SweepAxis::Current(PoseAxis::X) => "radial_x",
            SweepAxis::Current(PoseAxis::Y) => "radial_y",
            SweepAxis::Current(PoseAxis::Z) => "i_axial",
            SweepAxis::Current(PoseAxis::ThetaX) => "tilt_x",
            SweepAxis::Current(PoseAxis::ThetaY) => "tilt_y",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == s)
    }

    /// Boundary unit of the swept value.
    pub fn unit(self) -> &'static str {
        match self {
            SweepAxis::Pose(a) if a.is_angle() => "deg",
            SweepAxis::Pose(_) => "mm",
            SweepAxis::Current(_) => "AT",
        }
    }

    pub fn pose_axis(self) -> PoseAxis {
        match self {
            SweepAxis::Pose(a) | SweepAxis::Current(a) => a,
        }
    }

    /// Converts a boundary value to SI (m, rad, or coil amperes).
    pub fn to_si(self, model: &Emcm, v: f64) -> f64 {
        match self {
            SweepAxis::Pose(a) => a.to_si(v),
            SweepAxis::Current(a) => v / control_turns(model, a),
        }
    }

    /// Pose and excitation with this axis set to the boundary value `v`.
    pub fn apply(self, model: &Emcm, pose: &Pose, ex: &Excitation, v: f64) -> Result<(Pose, Excitation)> {
        match self {
            SweepAxis::Pose(a) => Ok((pose.with(a, a.to_si(v)), *ex)),
            SweepAxis::Current(a) => Ok((*pose, set_command(model, ex, a, v)?)),
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Wrench component controlled along a pose axis.
pub fn component(axis: PoseAxis) -> WrenchAxis {
    match axis {
        PoseAxis::X => WrenchAxis::Fx,
        PoseAxis::Y => WrenchAxis::Fy,
        PoseAxis::Z => WrenchAxis::Fz,
        PoseAxis::ThetaX => WrenchAxis::Mx,
        PoseAxis::ThetaY => WrenchAxis::My,
    }
}

/// Sign relating `d(component)/d(coordinate)` to the reported position
/// stiffness. Lift acts against increasing `z`, so the axial stiffness is
/// the plain derivative; the other axes are reported as its negative.
pub fn position_sign(axis: PoseAxis) -> f64 {
    match axis {
        PoseAxis::Z => 1.0,
        _ => -1.0,
    }
}

/// Turns of the coils driven by the command of `axis`.
pub fn control_turns(model: &Emcm, axis: PoseAxis) -> f64 {
    let role = match axis {
        PoseAxis::Z => CoilRole::Axial,
        PoseAxis::ThetaX | PoseAxis::ThetaY => CoilRole::Tilt,
        PoseAxis::X | PoseAxis::Y => CoilRole::Radial,
    };
    model.config().turns(role)
}

/// Sets the command of `axis` to `at` ampere-turns, keeping the others.
pub fn set_command(model: &Emcm, ex: &Excitation, axis: PoseAxis, at: f64) -> Result<Excitation> {
    let mut out = *ex;
    match axis {
        PoseAxis::Z => out.i_axial = at / control_turns(model, axis),
        PoseAxis::ThetaX | PoseAxis::ThetaY => {
            let TiltCommand::Axes { mx, my } = ex.tilt else {
                return Err(EmcmError::InvalidInput("cannot sweep a tilt command over explicit coil MMFs".into()));
            };
            out.tilt = if axis == PoseAxis::ThetaX {
                TiltCommand::Axes { mx: at, my }
            } else {
                TiltCommand::Axes { mx, my: at }
            };
        }
        PoseAxis::X | PoseAxis::Y => {
            let RadialCommand::Axes { fx, fy } = ex.radial else {
                return Err(EmcmError::InvalidInput("cannot sweep a radial command over explicit coil MMFs".into()));
            };
            out.radial = if axis == PoseAxis::X {
                RadialCommand::Axes { fx: at, fy }
            } else {
                RadialCommand::Axes { fx, fy: at }
            };
        }
    }
    Ok(out)
}

/// `n` evenly spaced values from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}
