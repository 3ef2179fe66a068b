//! One-dimensional sweeps of a pose coordinate or a control command.

use rayon::prelude::*;

use super::SweepAxis;
use crate::error::{EmcmError, Result};
use crate::flux::Excitation;
use crate::force::Wrench;
use crate::geometry::Pose;
use crate::model::Emcm;

/// Sweep definition. `min`, `max` are in the boundary unit of the axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub min: f64,
    pub max: f64,
    pub samples: usize,
    pub pose: Pose,
    pub excitation: Excitation,
}

impl SweepSpec {
    pub fn new(axis: SweepAxis, min: f64, max: f64, samples: usize) -> Self {
        Self { axis, min, max, samples, pose: Pose::CENTERED, excitation: Excitation::ZERO }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < 3 {
            return Err(EmcmError::InvalidInput(format!("a sweep needs at least 3 samples, got {}", self.samples)));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min <= self.max) {
            return Err(EmcmError::InvalidInput(format!("invalid sweep range [{}, {}]", self.min, self.max)));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        super::linspace(self.min, self.max, self.samples)
    }
}

/// Sweep result: one row per sample, in sample order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub axis: SweepAxis,
    /// Swept values in boundary units.
    pub values: Vec<f64>,
    /// Swept values in SI (m, rad, or coil amperes).
    pub si: Vec<f64>,
    pub wrenches: Vec<Wrench>,
}

impl SweepTable {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn sweep(spec: &SweepSpec, model: &Emcm) -> Result<SweepTable> {
    spec.validate()?;
    sweep_values(model, spec.axis, &spec.values(), &spec.pose, &spec.excitation)
}

/// Evaluates the wrench at arbitrary boundary values of `axis`. Samples run
/// in parallel; the first failing sample (by index) is reported.
pub fn sweep_values(model: &Emcm, axis: SweepAxis, values: &[f64], pose: &Pose, ex: &Excitation) -> Result<SweepTable> {
    let results: Vec<Result<Wrench>> = values
        .par_iter()
        .map(|&v| {
            let (p, e) = axis.apply(model, pose, ex, v)?;
            model.wrench(&p, &e)
        })
        .collect();
    let mut wrenches = Vec::with_capacity(values.len());
    for (k, r) in results.into_iter().enumerate() {
        wrenches.push(r.map_err(|e| e.at_sample(k))?);
    }
    Ok(SweepTable {
        axis,
        values: values.to_vec(),
        si: values.iter().map(|&v| axis.to_si(model, v)).collect(),
        wrenches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::reference_config;
    use crate::geometry::PoseAxis;

    #[test]
    fn too_few_samples() {
        let m = Emcm::new(reference_config()).unwrap();
        let spec = SweepSpec::new(SweepAxis::Pose(PoseAxis::X), -0.1, 0.1, 1);
        assert!(matches!(sweep(&spec, &m), Err(EmcmError::InvalidInput(_))));
    }

    #[test]
    fn zero_width_sweep_repeats() {
        let m = Emcm::new(reference_config()).unwrap();
        let spec = SweepSpec::new(SweepAxis::Pose(PoseAxis::X), 0.1, 0.1, 3);
        let t = sweep(&spec, &m).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.wrenches[0], t.wrenches[1]);
        assert_eq!(t.wrenches[1], t.wrenches[2]);
    }

    #[test]
    fn failing_sample_is_indexed() {
        let m = Emcm::new(reference_config()).unwrap();
        let spec = SweepSpec::new(SweepAxis::Pose(PoseAxis::X), 0.0, 3.0, 4);
        match sweep(&spec, &m) {
            Err(EmcmError::Sample { index, source }) => {
                assert_eq!(index, 2);
                assert!(matches!(*source, EmcmError::Contact { .. }));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn amplifier_limit_in_current_sweep() {
        let m = Emcm::new(reference_config()).unwrap();
        let spec = SweepSpec::new(SweepAxis::Current(PoseAxis::X), 0.0, 5000.0, 3);
        let err = sweep(&spec, &m).unwrap_err();
        assert!(matches!(err.root(), EmcmError::AmplifierLimit { .. }));
    }
}
