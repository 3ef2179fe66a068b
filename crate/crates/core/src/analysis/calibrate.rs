//! Fitting free machine parameters to design targets.
//!
//! The solver first bisects each parameter against the residual it drives
//! monotonically, then polishes all of them together with damped least
//! squares in log-parameter space.

use crate::config::{MachineConfig, PoleKind};
use crate::error::{EmcmError, Result};
use crate::flux::Excitation;
use crate::geometry::Pose;
use crate::model::Emcm;
use crate::units::MU0;

/// Iteration cap shared by the bisection and least-squares stages.
pub const MAX_ITERATIONS: usize = 200;

/// A calibration problem over positive parameters.
pub trait Calibrator {
    fn parameter_names(&self) -> Vec<String>;
    fn residual_names(&self) -> Vec<String>;
    fn initial(&self) -> Vec<f64>;
    /// Positive lower and upper bound per parameter.
    fn bounds(&self) -> Vec<(f64, f64)>;
    /// Acceptance tolerance per residual.
    fn tolerances(&self) -> Vec<f64>;
    fn residuals(&self, x: &[f64]) -> Result<Vec<f64>>;
    /// For each residual, the parameter that drives it monotonically, if any.
    fn pairing(&self) -> Vec<Option<usize>> {
        vec![None; self.residual_names().len()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult {
    pub parameter_names: Vec<String>,
    pub parameters: Vec<f64>,
    pub residual_names: Vec<String>,
    pub residuals: Vec<f64>,
    pub tolerances: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl CalibrationResult {
    pub fn residual_summary(&self) -> String {
        self.residual_names
            .iter()
            .zip(&self.residuals)
            .zip(&self.tolerances)
            .map(|((n, r), t)| format!("{n}={r:.3e} (tol {t:.1e})"))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

fn within(r: &[f64], tol: &[f64], factor: f64) -> bool {
    r.iter().zip(tol).all(|(r, t)| r.abs() <= factor * t)
}

fn cost(r: &[f64], tol: &[f64]) -> f64 {
    r.iter().zip(tol).map(|(r, t)| (r / t).powi(2)).sum()
}

/// Runs bisection and least squares. Model failures are errors; failing to
/// meet the tolerances is reported through `converged`.
pub fn run<C: Calibrator + ?Sized>(c: &C) -> Result<CalibrationResult> {
    let tol = c.tolerances();
    let bounds = c.bounds();
    let mut x = c.initial();
    let mut iterations = 0;
    let mut r = c.residuals(&x)?;
    iterations += 1;

    // Coordinate bisection on the monotone pairs.
    'outer: for _ in 0..3 {
        for (k, p) in c.pairing().into_iter().enumerate() {
            let Some(i) = p else { continue };
            if r[k].abs() <= 0.1 * tol[k] {
                continue;
            }
            let (mut lo, mut hi) = bounds[i];
            let at = |v: f64, iterations: &mut usize| -> Result<f64> {
                let mut y = x.clone();
                y[i] = v;
                *iterations += 1;
                Ok(c.residuals(&y)?[k])
            };
            let r_lo = at(lo, &mut iterations)?;
            let r_hi = at(hi, &mut iterations)?;
            if r_lo.signum() == r_hi.signum() {
                continue;
            }
            while iterations < MAX_ITERATIONS / 2 {
                let mid = (lo * hi).sqrt();
                let r_mid = at(mid, &mut iterations)?;
                if r_mid.signum() == r_lo.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if r_mid.abs() <= 0.1 * tol[k] || hi / lo - 1.0 < 1e-12 {
                    break;
                }
            }
            x[i] = (lo * hi).sqrt();
            r = c.residuals(&x)?;
            iterations += 1;
            if iterations >= MAX_ITERATIONS / 2 {
                break 'outer;
            }
        }
        if within(&r, &tol, 0.1) {
            break;
        }
    }

    // Damped least squares on the scaled residuals, parameters in log space.
    let n = x.len();
    let m = r.len();
    let mut lambda = 1e-3;
    while iterations < MAX_ITERATIONS && !within(&r, &tol, 0.01) {
        let s: Vec<f64> = r.iter().zip(&tol).map(|(r, t)| r / t).collect();
        let mut jac = vec![vec![0.0; n]; m];
        for i in 0..n {
            let h: f64 = 1e-6;
            let mut y = x.clone();
            y[i] *= h.exp();
            let ry = c.residuals(&y)?;
            iterations += 1;
            for k in 0..m {
                jac[k][i] = (ry[k] - r[k]) / tol[k] / h;
            }
        }
        let mut improved = false;
        for _ in 0..8 {
            let mut a = crate::linalg::Matrix::zeros(n);
            let mut g = vec![0.0; n];
            for i in 0..n {
                for j in 0..n {
                    let v: f64 = (0..m).map(|k| jac[k][i] * jac[k][j]).sum();
                    a.set(i, j, v);
                }
                let d = a.get(i, i);
                a.set(i, i, d * (1.0 + lambda) + 1e-12);
                g[i] = -(0..m).map(|k| jac[k][i] * s[k]).sum::<f64>();
            }
            let Ok(step) = crate::linalg::solve(&a, &g) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = x
                .iter()
                .zip(&step)
                .zip(&bounds)
                .map(|((v, d), (lo, hi))| (v * d.clamp(-1.0, 1.0).exp()).clamp(*lo, *hi))
                .collect();
            let rt = c.residuals(&trial)?;
            iterations += 1;
            if cost(&rt, &tol) < cost(&r, &tol) {
                x = trial;
                r = rt;
                lambda = (lambda * 0.3).max(1e-9);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }

    Ok(CalibrationResult {
        parameter_names: c.parameter_names(),
        parameters: x,
        residual_names: c.residual_names(),
        converged: within(&r, &tol, 1.0),
        residuals: r,
        tolerances: tol,
        iterations,
    })
}

/// Like [`run`], but non-convergence is an error carrying the residuals.
pub fn calibrate<C: Calibrator + ?Sized>(c: &C) -> Result<CalibrationResult> {
    let result = run(c)?;
    if !result.converged {
        return Err(EmcmError::NotConverged { iterations: result.iterations, residuals: result.residual_summary() });
    }
    Ok(result)
}

/// Targets at the centred pose with zero current.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignTargets {
    /// Lift to produce, N.
    pub weight: f64,
    /// Relative tolerance on the lift.
    pub weight_tolerance: f64,
    /// Axial pole bias flux density, T.
    pub axial_flux_density: f64,
    /// Radial pole bias flux density, T.
    pub radial_flux_density: f64,
    /// Tolerance on both flux densities, T.
    pub flux_density_tolerance: f64,
}

impl DesignTargets {
    /// Weight of the configured flywheel, 0.8 T axial bias and 0.55 T radial
    /// bias (the middle of the 0.5–0.6 T band).
    pub fn for_machine(cfg: &MachineConfig) -> Self {
        Self {
            weight: cfg.weight(),
            weight_tolerance: 1e-3,
            axial_flux_density: 0.8,
            radial_flux_density: 0.55,
            flux_density_tolerance: 0.05,
        }
    }
}

/// Scales applied to a base machine: axial pole ring width, radial pole
/// area and PM MMF (ring thickness and area together, which keeps the ring
/// reluctance fixed).
#[derive(Debug, Clone)]
pub struct MachineCalibration {
    pub base: MachineConfig,
    pub targets: DesignTargets,
}

impl MachineCalibration {
    pub fn apply(&self, x: &[f64]) -> MachineConfig {
        let mut cfg = self.base.clone();
        for kind in [PoleKind::AxialInner, PoleKind::AxialOuter] {
            for s in cfg.sectors_mut(kind) {
                *s = s.scaled_width(x[0]);
            }
        }
        for a in cfg.radial_areas_mut() {
            *a *= x[1];
        }
        for pm in [&mut cfg.pm_upper, &mut cfg.pm_lower] {
            pm.thickness *= x[2];
            pm.pole_area *= x[2];
        }
        cfg
    }
}

impl Calibrator for MachineCalibration {
    fn parameter_names(&self) -> Vec<String> {
        ["axial_width_scale", "radial_area_scale", "pm_mmf_scale"].map(String::from).to_vec()
    }

    fn residual_names(&self) -> Vec<String> {
        ["lift_rel", "axial_b_t", "radial_b_t"].map(String::from).to_vec()
    }

    fn initial(&self) -> Vec<f64> {
        vec![1.0; 3]
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        // The axial width cannot grow past the inner radius of the ring.
        let limit = self
            .base
            .poles
            .iter()
            .filter(|p| matches!(p.kind, PoleKind::AxialInner | PoleKind::AxialOuter))
            .filter_map(|p| match p.shape {
                crate::config::PoleShape::Sector(s) => Some((s.r_in + s.r_out) / (s.r_out - s.r_in)),
                _ => None,
            })
            .fold(f64::INFINITY, f64::min);
        vec![(0.05, (0.99 * limit).min(20.0)), (0.05, 20.0), (0.05, 20.0)]
    }

    fn tolerances(&self) -> Vec<f64> {
        let t = &self.targets;
        vec![t.weight_tolerance, t.flux_density_tolerance, t.flux_density_tolerance]
    }

    fn residuals(&self, x: &[f64]) -> Result<Vec<f64>> {
        let model = Emcm::new(self.apply(x))?;
        let s = model.solve(&Pose::CENTERED, &Excitation::ZERO)?;
        let t = &self.targets;
        Ok(vec![
            (s.wrench.fz - t.weight) / t.weight,
            s.flux_density.axial_inner[0] - t.axial_flux_density,
            s.flux_density.radial_inner[0] - t.radial_flux_density,
        ])
    }

    fn pairing(&self) -> Vec<Option<usize>> {
        vec![Some(2), Some(0), Some(1)]
    }
}

/// Fits the axial width, radial area and PM MMF scales of `cfg` to
/// `targets` and returns the calibrated machine.
pub fn calibrate_to_targets(cfg: &MachineConfig, targets: &DesignTargets) -> Result<(MachineConfig, CalibrationResult)> {
    let problem = MachineCalibration { base: cfg.clone(), targets: *targets };
    let result = calibrate(&problem)?;
    Ok((problem.apply(&result.parameters), result))
}

/// One flat gap of area `A` driven by a fixed MMF: find `A` so that the
/// attraction equals `weight`. The exact answer is `2 z0² W / (mu0 F²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleGap {
    pub mmf: f64,
    pub gap: f64,
    pub weight: f64,
    pub initial_area: f64,
}

impl SingleGap {
    pub fn force(&self, area: f64) -> f64 {
        MU0 * self.mmf * self.mmf * area / (2.0 * self.gap * self.gap)
    }

    pub fn exact_area(&self) -> f64 {
        2.0 * self.gap * self.gap * self.weight / (MU0 * self.mmf * self.mmf)
    }
}

impl Calibrator for SingleGap {
    fn parameter_names(&self) -> Vec<String> {
        vec!["area_m2".into()]
    }

    fn residual_names(&self) -> Vec<String> {
        vec!["force_rel".into()]
    }

    fn initial(&self) -> Vec<f64> {
        vec![self.initial_area]
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(self.initial_area * 1e-3, self.initial_area * 1e3)]
    }

    fn tolerances(&self) -> Vec<f64> {
        vec![1e-9]
    }

    fn residuals(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![(self.force(x[0]) - self.weight) / self.weight])
    }

    fn pairing(&self) -> Vec<Option<usize>> {
        vec![Some(0)]
    }
}
