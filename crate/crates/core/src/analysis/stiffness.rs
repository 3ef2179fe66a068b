//! Current and position stiffness by regression over sweeps, and by
//! central differences.

use std::f64::consts::PI;

use super::{component, control_turns, position_sign, set_command, SweepAxis, SweepTable};
use crate::error::{EmcmError, Result};
use crate::flux::Excitation;
use crate::geometry::{Pose, PoseAxis};
use crate::model::Emcm;

/// Ordinary least-squares line `y = slope x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regression {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl Regression {
    pub fn predict(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

pub fn linear_regression(x: &[f64], y: &[f64]) -> Result<Regression> {
    if x.len() != y.len() {
        return Err(EmcmError::Regression(format!("{} abscissae but {} ordinates", x.len(), y.len())));
    }
    let mut distinct: Vec<f64> = x.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(EmcmError::Regression(format!("need at least 3 distinct abscissae, got {}", distinct.len())));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(EmcmError::Regression("abscissae have no spread".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) } else { 1.0 };
    Ok(Regression { slope, intercept, r_squared })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StiffnessKind {
    Current,
    Position,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Regression,
    FiniteDifference,
}

/// One stiffness coefficient. `value` is SI: N/A or N·m/A for current
/// stiffness, N/m or N·m/rad for position stiffness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StiffnessReport {
    pub axis: PoseAxis,
    pub kind: StiffnessKind,
    pub value: f64,
    /// Goodness of fit; `None` for finite differences.
    pub r_squared: Option<f64>,
    pub method: Method,
}

impl StiffnessReport {
    /// Value in the reporting units: N/A, Nm/A, N/mm, Nm/deg.
    pub fn boundary_value(&self) -> f64 {
        to_boundary(self.axis, self.kind, self.value)
    }

    pub fn unit(&self) -> &'static str {
        unit(self.axis, self.kind)
    }
}

pub fn to_boundary(axis: PoseAxis, kind: StiffnessKind, si: f64) -> f64 {
    match (kind, axis.is_angle()) {
        (StiffnessKind::Current, _) => si,
        (StiffnessKind::Position, false) => si / 1.0e3,
        (StiffnessKind::Position, true) => si * PI / 180.0,
    }
}

pub fn unit(axis: PoseAxis, kind: StiffnessKind) -> &'static str {
    match (kind, axis.is_angle()) {
        (StiffnessKind::Current, false) => "N/A",
        (StiffnessKind::Current, true) => "Nm/A",
        (StiffnessKind::Position, false) => "N/mm",
        (StiffnessKind::Position, true) => "Nm/deg",
    }
}

/// Regression stiffness of the component controlled along `axis`.
///
/// The table must sweep either that pose coordinate (position stiffness)
/// or that axis's command (current stiffness).
pub fn extract_stiffness(table: &SweepTable, axis: PoseAxis) -> Result<StiffnessReport> {
    let kind = match table.axis {
        SweepAxis::Pose(a) if a == axis => StiffnessKind::Position,
        SweepAxis::Current(a) if a == axis => StiffnessKind::Current,
        other => {
            return Err(EmcmError::InvalidInput(format!(
                "a {other} sweep does not determine a stiffness along {axis:?}"
            )))
        }
    };
    let c = component(axis);
    let y: Vec<f64> = table.wrenches.iter().map(|w| w.get(c)).collect();
    let fit = linear_regression(&table.si, &y)?;
    let value = match kind {
        StiffnessKind::Current => fit.slope,
        StiffnessKind::Position => position_sign(axis) * fit.slope,
    };
    Ok(StiffnessReport { axis, kind, value, r_squared: Some(fit.r_squared), method: Method::Regression })
}

/// Central-difference stiffness at `pose`/`ex`. `step` is SI (m, rad, or A).
pub fn fd_stiffness(
    model: &Emcm,
    pose: &Pose,
    ex: &Excitation,
    axis: PoseAxis,
    kind: StiffnessKind,
    step: f64,
) -> Result<StiffnessReport> {
    let c = component(axis);
    let value = match kind {
        StiffnessKind::Position => {
            let hi = model.wrench(&pose.offset(axis, step), ex)?.get(c);
            let lo = model.wrench(&pose.offset(axis, -step), ex)?.get(c);
            position_sign(axis) * (hi - lo) / (2.0 * step)
        }
        StiffnessKind::Current => {
            let turns = control_turns(model, axis);
            let base = command(ex, axis, turns);
            let hi = model.wrench(pose, &set_command(model, ex, axis, base + step * turns)?)?.get(c);
            let lo = model.wrench(pose, &set_command(model, ex, axis, base - step * turns)?)?.get(c);
            (hi - lo) / (2.0 * step)
        }
    };
    Ok(StiffnessReport { axis, kind, value, r_squared: None, method: Method::FiniteDifference })
}

/// Present command of `axis` in ampere-turns.
pub(crate) fn command(ex: &Excitation, axis: PoseAxis, turns: f64) -> f64 {
    use crate::flux::{RadialCommand, TiltCommand};
    match (axis, ex.tilt, ex.radial) {
        (PoseAxis::Z, _, _) => ex.i_axial * turns,
        (PoseAxis::ThetaX, TiltCommand::Axes { mx, .. }, _) => mx,
        (PoseAxis::ThetaY, TiltCommand::Axes { my, .. }, _) => my,
        (PoseAxis::X, _, RadialCommand::Axes { fx, .. }) => fx,
        (PoseAxis::Y, _, RadialCommand::Axes { fy, .. }) => fy,
        _ => 0.0,
    }
}

/// Half-widths of the linear region used for regression/derivative
/// agreement: 0.25 mm radial, 0.05 mm axial, 0.02° tilt.
pub fn linear_half_width(axis: PoseAxis) -> f64 {
    match axis {
        PoseAxis::X | PoseAxis::Y => 0.25,
        PoseAxis::Z => 0.05,
        PoseAxis::ThetaX | PoseAxis::ThetaY => 0.02,
    }
}

/// Command half-width (AT) for current-stiffness sweeps.
pub fn current_half_width(axis: PoseAxis) -> f64 {
    match axis {
        PoseAxis::Z => 500.0,
        PoseAxis::ThetaX | PoseAxis::ThetaY => 400.0,
        PoseAxis::X | PoseAxis::Y => 1000.0,
    }
}

/// Target model stiffnesses of the reference machine, in reporting units:
/// `(axis, kind, value)`.
pub const TARGET_STIFFNESS: [(PoseAxis, StiffnessKind, f64); 6] = [
    (PoseAxis::Z, StiffnessKind::Current, 4114.0),
    (PoseAxis::ThetaX, StiffnessKind::Current, 576.0),
    (PoseAxis::X, StiffnessKind::Current, 390.0),
    (PoseAxis::Z, StiffnessKind::Position, -28_211.0),
    (PoseAxis::ThetaX, StiffnessKind::Position, -77_134.0),
    (PoseAxis::X, StiffnessKind::Position, -2_023.0),
];

/// Target for `axis`; the y and θy axes share the x and θx values.
pub fn target_stiffness(axis: PoseAxis, kind: StiffnessKind) -> f64 {
    let axis = match axis {
        PoseAxis::Y => PoseAxis::X,
        PoseAxis::ThetaY => PoseAxis::ThetaX,
        a => a,
    };
    TARGET_STIFFNESS.iter().find(|(a, k, _)| *a == axis && *k == kind).map(|(_, _, v)| *v).expect("target for every axis")
}

/// Regression stiffness over the linear region (position) or the command
/// range (current), both centred on the nominal pose at zero current.
pub fn stiffness_at_center(model: &Emcm, axis: PoseAxis, kind: StiffnessKind, samples: usize) -> Result<StiffnessReport> {
    let (sweep_axis, h) = match kind {
        StiffnessKind::Position => (SweepAxis::Pose(axis), linear_half_width(axis)),
        StiffnessKind::Current => (SweepAxis::Current(axis), current_half_width(axis)),
    };
    let spec = super::SweepSpec::new(sweep_axis, -h, h, samples);
    extract_stiffness(&super::sweep(&spec, model)?, axis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::reference_config;
    use crate::force::Wrench;

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
        let r = linear_regression(&x, &y).unwrap();
        assert!((r.slope - 2.5).abs() < 1e-14 && (r.intercept + 1.0).abs() < 1e-14);
        assert_eq!(r.r_squared, 1.0);
    }

    #[test]
    fn degenerate_abscissae() {
        assert!(matches!(linear_regression(&[1.0, 1.0, 2.0], &[0.0, 1.0, 2.0]), Err(EmcmError::Regression(_))));
        assert!(matches!(linear_regression(&[1.0, 2.0], &[0.0, 1.0]), Err(EmcmError::Regression(_))));
    }

    #[test]
    fn r_squared_of_noisy_data_is_below_one() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [0.0, 1.2, 1.8, 3.1];
        let r = linear_regression(&x, &y).unwrap();
        assert!(r.r_squared > 0.9 && r.r_squared < 1.0);
    }

    #[test]
    fn synthetic_table_recovers_slope() {
        let si = vec![-1e-4, 0.0, 1e-4, 2e-4];
        let table = SweepTable {
            axis: SweepAxis::Pose(PoseAxis::X),
            values: si.iter().map(|v| v * 1e3).collect(),
            wrenches: si.iter().map(|&x| Wrench { fx: 3.0e6 * x, ..Wrench::default() }).collect(),
            si,
        };
        let r = extract_stiffness(&table, PoseAxis::X).unwrap();
        assert!((r.value + 3.0e6).abs() < 1e-6);
        assert!((r.boundary_value() + 3.0e3).abs() < 1e-9);
        assert_eq!(r.unit(), "N/mm");
        assert!(extract_stiffness(&table, PoseAxis::Y).is_err());
    }

    #[test]
    fn boundary_units() {
        assert_eq!(unit(PoseAxis::ThetaX, StiffnessKind::Position), "Nm/deg");
        let v = to_boundary(PoseAxis::ThetaX, StiffnessKind::Position, 180.0 / PI);
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn axial_position_stiffness_is_negative() {
        let m = Emcm::new(reference_config()).unwrap();
        let k = fd_stiffness(&m, &Pose::CENTERED, &Excitation::ZERO, PoseAxis::Z, StiffnessKind::Position, 1e-6).unwrap();
        assert!(k.value < 0.0);
        let half = fd_stiffness(&m, &Pose::CENTERED, &Excitation::ZERO, PoseAxis::Z, StiffnessKind::Position, 5e-7).unwrap();
        assert!((k.value - half.value).abs() <= 1e-4 * k.value.abs());
    }

    #[test]
    fn current_sweep_slope_matches_derivative() {
        let m = Emcm::new(reference_config()).unwrap();
        let reg = stiffness_at_center(&m, PoseAxis::Z, StiffnessKind::Current, 11).unwrap();
        let fd = fd_stiffness(&m, &Pose::CENTERED, &Excitation::ZERO, PoseAxis::Z, StiffnessKind::Current, 1e-3).unwrap();
        assert!((reg.value - fd.value).abs() <= 1e-3 * fd.value.abs());
    }
}
