//! Equivalent magnetic circuit model (EMCM) of a permanent-magnet biased,
//! homopolar combination 5-DOF active magnetic bearing.
//!
//! The bearing levitates a shaft-less flywheel with a single device: eight
//! radial pole pairs bracket a rotor ring on the flywheel, and four quadrant
//! sections of axial and PM poles carry the weight and the tilt control.
//! Two PM rings supply the bias flux. Control coils add axial, tilt and radial
//! flux on top of it, and the linear circuit lets every source be solved
//! separately and superposed.
//!
//! The crate is organised bottom-up:
//!
//! - [`config`]: machine description, file schema, validation, reference machine
//! - [`geometry`]: flywheel pose and air gaps at every pole face
//! - [`reluctance`]: gap, sector and PM reluctances assembled at a pose
//! - [`flux`]: bias, axial, tilt and radial control flux solves
//! - [`force`]: pole forces, moments and the net wrench
//! - [`model`]: one-call solve of a pose/excitation pair
//! - [`analysis`]: sweeps, stiffness, coupling, PM study, calibration, virtual rig
//! - [`report`]: CSV tables of the results
//!
//! ```
//! use amb_emcm::{Emcm, Excitation, Pose, reference_config};
//!
//! let model = Emcm::new(reference_config()).unwrap();
//! let solution = model.solve(&Pose::CENTERED, &Excitation::ZERO).unwrap();
//! let weight = 5443.0 * 9.81;
//! assert!((solution.wrench.fz - weight).abs() / weight < 1e-2);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod error;
pub mod flux;
pub mod force;
pub mod geometry;
pub mod linalg;
pub mod model;
pub mod quadrature;
pub mod reluctance;
pub mod report;
pub mod units;

pub use config::{
    load_config, reference_config, validate, CoilRole, CoilSpec, CommandMap, Layout, MachineConfig,
    MaterialSpec, PmRingSpec, PoleGeometry, PoleKind, PoleShape, SectorShape, ValidationReport,
};
pub use error::{EmcmError, PoleId, Result};
pub use flux::{Excitation, FluxState, PoleFluxes, RadialCommand, TiltCommand};
pub use force::Wrench;
pub use geometry::{Pose, QuadDomain};
pub use model::{Emcm, Solution};
pub use reluctance::ReluctanceSet;
