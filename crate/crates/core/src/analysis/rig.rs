//! Virtual load-cell rig: identifies current and position stiffness from
//! simulated force, current and position records.
//!
//! In the current run the rotor is held at its operating point while an
//! external force is applied; the controller answers with the current
//! increment that balances it, so `f = K_i Δi`. In the position run the
//! rotor is displaced, the controller drives `Δi = -gain Δp`, and
//! `f = K_i Δi + K_p Δp` is solved with `K_i` from a preceding current run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::stiffness::{command, current_half_width, fd_stiffness, Method};
use super::{component, control_turns, linear_regression, position_sign, set_command, StiffnessKind, StiffnessReport};
use crate::config::CoilRole;
use crate::error::{EmcmError, Result};
use crate::flux::Excitation;
use crate::geometry::{Pose, PoseAxis};
use crate::model::Emcm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RigMode {
    CurrentStiffness,
    PositionStiffness,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RigSpec {
    pub axis: PoseAxis,
    pub mode: RigMode,
    /// Current mode: applied forces, N or N·m. Position mode: displacement
    /// increments, mm or deg.
    pub probes: Vec<f64>,
    /// Forces for the current run that precedes a position run. Empty
    /// selects half the force reachable over the axis command range.
    pub force_probes: Vec<f64>,
    /// Standard deviation of the recorded channels relative to their full
    /// scale.
    pub noise: f64,
    pub seed: u64,
    /// Position-run controller gain, amperes per metre or per radian.
    pub gain: f64,
    pub pose: Pose,
    pub excitation: Excitation,
}

impl RigSpec {
    pub fn current(axis: PoseAxis, forces: Vec<f64>) -> Self {
        Self::new(axis, RigMode::CurrentStiffness, forces)
    }

    pub fn position(axis: PoseAxis, displacements: Vec<f64>) -> Self {
        Self::new(axis, RigMode::PositionStiffness, displacements)
    }

    fn new(axis: PoseAxis, mode: RigMode, probes: Vec<f64>) -> Self {
        Self {
            axis,
            mode,
            probes,
            force_probes: Vec::new(),
            noise: 0.0,
            seed: 0,
            gain: 0.0,
            pose: Pose::CENTERED,
            excitation: Excitation::ZERO,
        }
    }

    pub fn with_noise(mut self, noise: f64, seed: u64) -> Self {
        self.noise = noise;
        self.seed = seed;
        self
    }

    pub fn with_gain(mut self, gain: f64) -> Self {
        self.gain = gain;
        self
    }
}

/// One recorded probe in SI: force (N or N·m), current increment (A) and
/// position increment (m or rad).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigSample {
    pub force: f64,
    pub current: f64,
    pub position: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RigRecord {
    pub axis: PoseAxis,
    pub mode: RigMode,
    pub seed: u64,
    pub noise: f64,
    pub samples: Vec<RigSample>,
    /// `K_i` used to separate the current term in a position run.
    pub current_stiffness: Option<f64>,
}

/// Runs the rig against the model and fits the stiffness of `spec.mode`.
pub fn virtual_measurement(model: &Emcm, spec: &RigSpec) -> Result<(RigRecord, StiffnessReport)> {
    if !(spec.noise >= 0.0 && spec.noise.is_finite()) {
        return Err(EmcmError::InvalidInput(format!("noise level must be non-negative, got {}", spec.noise)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let axis = spec.axis;
    match spec.mode {
        RigMode::CurrentStiffness => {
            let samples = current_run(model, spec, &spec.probes, &mut rng)?;
            let report = fit_current(axis, &samples)?;
            let record = record(spec, samples, None);
            Ok((record, report))
        }
        RigMode::PositionStiffness => {
            let forces = if spec.force_probes.is_empty() {
                default_forces(model, spec, spec.probes.len().max(3))?
            } else {
                spec.force_probes.clone()
            };
            let ki = fit_current(axis, &current_run(model, spec, &forces, &mut rng)?)?.value;
            let samples = position_run(model, spec, &mut rng)?;
            let x: Vec<f64> = samples.iter().map(|s| s.position).collect();
            let y: Vec<f64> = samples.iter().map(|s| s.force - ki * s.current).collect();
            let fit = linear_regression(&x, &y)?;
            let report = StiffnessReport {
                axis,
                kind: StiffnessKind::Position,
                value: position_sign(axis) * fit.slope,
                r_squared: Some(fit.r_squared),
                method: Method::Regression,
            };
            Ok((record(spec, samples, Some(ki)), report))
        }
    }
}

fn record(spec: &RigSpec, samples: Vec<RigSample>, ki: Option<f64>) -> RigRecord {
    RigRecord { axis: spec.axis, mode: spec.mode, seed: spec.seed, noise: spec.noise, samples, current_stiffness: ki }
}

fn fit_current(axis: PoseAxis, samples: &[RigSample]) -> Result<StiffnessReport> {
    let x: Vec<f64> = samples.iter().map(|s| s.current).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.force).collect();
    let fit = linear_regression(&x, &y)?;
    Ok(StiffnessReport {
        axis,
        kind: StiffnessKind::Current,
        value: fit.slope,
        r_squared: Some(fit.r_squared),
        method: Method::Regression,
    })
}

/// Forces reaching half of the command range of `spec.axis`, evenly spaced.
pub fn default_forces(model: &Emcm, spec: &RigSpec, n: usize) -> Result<Vec<f64>> {
    let ki = fd_stiffness(model, &spec.pose, &spec.excitation, spec.axis, StiffnessKind::Current, 1e-3)?.value;
    let f = 0.5 * ki.abs() * current_half_width(spec.axis) / control_turns(model, spec.axis);
    Ok(super::linspace(-f, f, n))
}

/// Adds channel noise in place, channel by channel, in sample order.
fn add_noise(samples: &mut [RigSample], noise: f64, with_position: bool, rng: &mut ChaCha8Rng) {
    if noise == 0.0 {
        return;
    }
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let full_scale = |f: fn(&RigSample) -> f64| samples.iter().map(|s| f(s).abs()).fold(0.0, f64::max);
    let sf = noise * full_scale(|s| s.force);
    let si = noise * full_scale(|s| s.current);
    let sp = noise * full_scale(|s| s.position);
    for s in samples.iter_mut() {
        s.force += sf * normal.sample(rng);
        s.current += si * normal.sample(rng);
        if with_position {
            s.position += sp * normal.sample(rng);
        }
    }
}

fn current_run(model: &Emcm, spec: &RigSpec, forces: &[f64], rng: &mut ChaCha8Rng) -> Result<Vec<RigSample>> {
    let axis = spec.axis;
    let c = component(axis);
    let turns = control_turns(model, axis);
    let base = command(&spec.excitation, axis, turns) / turns;
    let q0 = model.wrench(&spec.pose, &spec.excitation)?.get(c);
    let q = |di: f64| -> Result<f64> {
        let ex = set_command(model, &spec.excitation, axis, (base + di) * turns)?;
        Ok(model.wrench(&spec.pose, &ex)?.get(c) - q0)
    };
    let role = match axis {
        PoseAxis::Z => CoilRole::Axial,
        PoseAxis::ThetaX | PoseAxis::ThetaY => CoilRole::Tilt,
        PoseAxis::X | PoseAxis::Y => CoilRole::Radial,
    };
    let imax = model
        .config()
        .coils
        .iter()
        .filter(|k| k.role == role)
        .map(|k| k.max_current)
        .fold(f64::INFINITY, f64::min);
    let (lo, hi) = (-imax - base, imax - base);
    let h = 1e-3 * imax;
    let slope = (q(h)? - q(-h)?) / (2.0 * h);

    let results: Vec<Result<RigSample>> = forces
        .par_iter()
        .map(|&f| {
            if f == 0.0 {
                return Ok(RigSample { force: f, current: 0.0, position: 0.0 });
            }
            // Bracket outward from the operating point along the local slope.
            let guess = f / slope;
            let bound = if guess > 0.0 { hi } else { lo };
            let mut b = (1.25 * guess).clamp(lo, hi);
            let mut gb = q(b)? - f;
            while gb.signum() == -f.signum() * slope.signum() && b != bound {
                b = (2.0 * b).clamp(lo, hi);
                gb = q(b)? - f;
            }
            if gb.signum() != f.signum() * slope.signum() && gb != 0.0 {
                // Unreachable: report the limit the linear extrapolation hits.
                let ex = set_command(model, &spec.excitation, axis, (base + guess) * turns)?;
                model.mmf(&ex)?;
                let coil = model.config().coils.iter().find(|k| k.role == role).expect("coil of each role");
                return Err(EmcmError::AmplifierLimit { coil: coil.label(), mmf: guess * turns, limit: coil.max_mmf() });
            }
            let di = illinois(|x| Ok(q(x)? - f), 0.0, b, -f, gb)?;
            Ok(RigSample { force: f, current: di, position: 0.0 })
        })
        .collect();
    let mut samples = collect(results)?;
    add_noise(&mut samples, spec.noise, false, rng);
    Ok(samples)
}

fn position_run(model: &Emcm, spec: &RigSpec, rng: &mut ChaCha8Rng) -> Result<Vec<RigSample>> {
    let axis = spec.axis;
    let c = component(axis);
    let turns = control_turns(model, axis);
    let base = command(&spec.excitation, axis, turns) / turns;
    let q0 = model.wrench(&spec.pose, &spec.excitation)?.get(c);
    let results: Vec<Result<RigSample>> = spec
        .probes
        .par_iter()
        .map(|&v| {
            let dp = axis.to_si(v);
            let di = -spec.gain * dp;
            let ex = set_command(model, &spec.excitation, axis, (base + di) * turns)?;
            let f = model.wrench(&spec.pose.offset(axis, dp), &ex)?.get(c) - q0;
            Ok(RigSample { force: f, current: di, position: dp })
        })
        .collect();
    let mut samples = collect(results)?;
    add_noise(&mut samples, spec.noise, true, rng);
    Ok(samples)
}

fn collect(results: Vec<Result<RigSample>>) -> Result<Vec<RigSample>> {
    results.into_iter().enumerate().map(|(k, r)| r.map_err(|e| e.at_sample(k))).collect()
}

/// Bracketed root of `g` by the Illinois variant of regula falsi.
fn illinois(g: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, mut ga: f64, mut gb: f64) -> Result<f64> {
    if ga == 0.0 {
        return Ok(a);
    }
    if gb == 0.0 {
        return Ok(b);
    }
    let width = (b - a).abs();
    let mut side = 0;
    for _ in 0..200 {
        let x = (a * gb - b * ga) / (gb - ga);
        let gx = g(x)?;
        if gx == 0.0 || (b - a).abs() <= 1e-15 * width {
            return Ok(x);
        }
        if gx.signum() == gb.signum() {
            b = x;
            gb = gx;
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        } else {
            a = x;
            ga = gx;
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        }
        if (gx.abs() <= 1e-14 * (ga.abs() + gb.abs())) || (b - a).abs() <= 1e-14 * width {
            return Ok(x);
        }
    }
    Ok((a * gb - b * ga) / (gb - ga))
}
