//! Cross-axis coupling maps over two pose coordinates or two commands.

use rayon::prelude::*;

use super::SweepAxis;
use crate::error::{EmcmError, Result};
use crate::flux::Excitation;
use crate::force::WrenchAxis;
use crate::geometry::{Pose, PoseAxis};
use crate::model::Emcm;

/// What each grid point is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    /// The value with both axes at zero.
    Origin,
    /// The value at the same first-axis setting with the second axis at
    /// zero, i.e. the change caused by the second axis alone.
    FirstAxis,
}

/// Relative change of one wrench component over a two-axis grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMap {
    pub first: SweepAxis,
    pub second: SweepAxis,
    /// Grid values in boundary units.
    pub first_values: Vec<f64>,
    pub second_values: Vec<f64>,
    pub component: WrenchAxis,
    pub baseline: Baseline,
    /// Absolute component values, `values[a][b]`.
    pub values: Vec<Vec<f64>>,
    /// `(value - baseline) / |baseline|`, `relative[a][b]`.
    pub relative: Vec<Vec<f64>>,
}

impl CouplingMap {
    /// Relative change at the grid point closest to `(a, b)`.
    pub fn at(&self, a: f64, b: f64) -> f64 {
        let nearest = |vals: &[f64], v: f64| {
            (0..vals.len()).min_by(|&i, &j| (vals[i] - v).abs().total_cmp(&(vals[j] - v).abs())).unwrap_or(0)
        };
        self.relative[nearest(&self.first_values, a)][nearest(&self.second_values, b)]
    }
}

fn grid(
    model: &Emcm,
    first: SweepAxis,
    second: SweepAxis,
    first_values: &[f64],
    second_values: &[f64],
    component: WrenchAxis,
    baseline: Baseline,
) -> Result<CouplingMap> {
    if first == second {
        return Err(EmcmError::InvalidInput("coupling needs two different axes".into()));
    }
    let eval = |a: f64, b: f64| -> Result<f64> {
        let (p, e) = first.apply(model, &Pose::CENTERED, &Excitation::ZERO, a)?;
        let (p, e) = second.apply(model, &p, &e, b)?;
        Ok(model.wrench(&p, &e)?.get(component))
    };
    let points: Vec<(usize, usize)> =
        (0..first_values.len()).flat_map(|i| (0..second_values.len()).map(move |j| (i, j))).collect();
    let results: Vec<Result<f64>> =
        points.par_iter().map(|&(i, j)| eval(first_values[i], second_values[j])).collect();
    let mut values = vec![vec![0.0; second_values.len()]; first_values.len()];
    for (k, (r, &(i, j))) in results.into_iter().zip(&points).enumerate() {
        values[i][j] = r.map_err(|e| e.at_sample(k))?;
    }
    let origin = eval(0.0, 0.0)?;
    let mut relative = values.clone();
    for (i, row) in relative.iter_mut().enumerate() {
        let base = match baseline {
            Baseline::Origin => origin,
            Baseline::FirstAxis => eval(first_values[i], 0.0)?,
        };
        for v in row.iter_mut() {
            *v = if base == 0.0 { if *v == 0.0 { 0.0 } else { f64::INFINITY } } else { (*v - base) / base.abs() };
        }
    }
    Ok(CouplingMap {
        first,
        second,
        first_values: first_values.to_vec(),
        second_values: second_values.to_vec(),
        component,
        baseline,
        values,
        relative,
    })
}

/// Coupling over two pose coordinates (boundary units: mm, deg).
pub fn coupling_position(
    model: &Emcm,
    first: PoseAxis,
    second: PoseAxis,
    first_values: &[f64],
    second_values: &[f64],
    component: WrenchAxis,
) -> Result<CouplingMap> {
    grid(model, SweepAxis::Pose(first), SweepAxis::Pose(second), first_values, second_values, component, Baseline::Origin)
}

/// Coupling over two control commands (ampere-turns).
pub fn coupling_current(
    model: &Emcm,
    first: PoseAxis,
    second: PoseAxis,
    first_values: &[f64],
    second_values: &[f64],
    component: WrenchAxis,
    baseline: Baseline,
) -> Result<CouplingMap> {
    grid(
        model,
        SweepAxis::Current(first),
        SweepAxis::Current(second),
        first_values,
        second_values,
        component,
        baseline,
    )
}
