//! The four linear flux solves (PM bias, axial, tilt and radial control) and
//! their superposition.
//!
//! Fluxes are oriented along the bias circulation: positive means into the
//! flywheel at the axial poles and out of it at the PM and radial poles.

use crate::config::{CoilRole, CoilSpec, CommandMap, Layout, MachineConfig, PmRingSpec, QUADRANTS, RADIAL_PAIRS};
use crate::error::{EmcmError, PoleId, Result};
use crate::linalg::{Lu, Matrix};
use crate::reluctance::ReluctanceSet;

/// Tilt excitation: axis commands (AT) distributed by the command map, or
/// explicit per-quadrant MMFs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TiltCommand {
    Axes { mx: f64, my: f64 },
    Mmf([f64; QUADRANTS]),
}

/// Radial excitation: axis commands (AT) distributed by the command map, or
/// explicit per-pair MMFs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialCommand {
    Axes { fx: f64, fy: f64 },
    Mmf([f64; RADIAL_PAIRS]),
}

/// Axis-level commands. The axial command is a current (A), the tilt and
/// radial commands are ampere-turns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Excitation {
    pub i_axial: f64,
    pub tilt: TiltCommand,
    pub radial: RadialCommand,
}

impl Default for Excitation {
    fn default() -> Self {
        Self::ZERO
    }
}

impl Excitation {
    pub const ZERO: Excitation = Excitation {
        i_axial: 0.0,
        tilt: TiltCommand::Axes { mx: 0.0, my: 0.0 },
        radial: RadialCommand::Axes { fx: 0.0, fy: 0.0 },
    };

    pub fn axial(i: f64) -> Self {
        Self { i_axial: i, ..Self::ZERO }
    }

    pub fn tilt(mx: f64, my: f64) -> Self {
        Self { tilt: TiltCommand::Axes { mx, my }, ..Self::ZERO }
    }

    pub fn radial(fx: f64, fy: f64) -> Self {
        Self { radial: RadialCommand::Axes { fx, fy }, ..Self::ZERO }
    }
}

/// Per-coil MMFs, ampere-turns.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CoilMmf {
    pub axial: f64,
    pub tilt: [f64; QUADRANTS],
    pub radial: [f64; RADIAL_PAIRS],
}

impl CoilMmf {
    pub fn scaled(&self, s: f64) -> Self {
        Self { axial: s * self.axial, tilt: self.tilt.map(|v| s * v), radial: self.radial.map(|v| s * v) }
    }
}

/// Distributes axis commands onto the coils and checks every amplifier limit.
pub fn map_commands_to_mmf(ex: &Excitation, cfg: &MachineConfig) -> Result<CoilMmf> {
    map_with(ex, &cfg.command_map()?, cfg)
}

pub(crate) fn map_with(ex: &Excitation, map: &CommandMap, cfg: &MachineConfig) -> Result<CoilMmf> {
    let tilt = match ex.tilt {
        TiltCommand::Axes { mx, my } => std::array::from_fn(|i| map.tilt_x[i] * mx + map.tilt_y[i] * my),
        TiltCommand::Mmf(v) => v,
    };
    let radial = match ex.radial {
        RadialCommand::Axes { fx, fy } => std::array::from_fn(|j| map.radial_x[j] * fx + map.radial_y[j] * fy),
        RadialCommand::Mmf(v) => v,
    };
    let mmf = CoilMmf { axial: cfg.turns(CoilRole::Axial) * ex.i_axial, tilt, radial };
    check_limits(&mmf, &cfg.coils)?;
    Ok(mmf)
}

pub(crate) fn check_limits(mmf: &CoilMmf, coils: &[CoilSpec]) -> Result<()> {
    for c in coils {
        let v = match c.role {
            CoilRole::Axial => mmf.axial,
            CoilRole::Tilt => mmf.tilt[c.index],
            CoilRole::Radial => mmf.radial[c.index],
        };
        let limit = c.max_mmf();
        if v.abs() > limit * (1.0 + 1e-12) {
            return Err(EmcmError::AmplifierLimit { coil: c.label(), mmf: v, limit });
        }
    }
    Ok(())
}

/// One flux value per pole face, Wb.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PoleFluxes {
    pub axial_inner: [f64; QUADRANTS],
    pub axial_outer: [f64; QUADRANTS],
    pub pm: [f64; QUADRANTS],
    pub radial_inner: [f64; RADIAL_PAIRS],
    pub radial_outer: [f64; RADIAL_PAIRS],
}

impl PoleFluxes {
    pub const ZERO: PoleFluxes = PoleFluxes {
        axial_inner: [0.0; QUADRANTS],
        axial_outer: [0.0; QUADRANTS],
        pm: [0.0; QUADRANTS],
        radial_inner: [0.0; RADIAL_PAIRS],
        radial_outer: [0.0; RADIAL_PAIRS],
    };

    pub fn get(&self, pole: PoleId) -> f64 {
        match pole {
            PoleId::AxialInner(i) => self.axial_inner[i],
            PoleId::AxialOuter(i) => self.axial_outer[i],
            PoleId::Pm(i) => self.pm[i],
            PoleId::RadialInner(j) => self.radial_inner[j],
            PoleId::RadialOuter(j) => self.radial_outer[j],
        }
    }

    pub fn map(&self, f: impl Fn(PoleId, f64) -> f64) -> Self {
        Self {
            axial_inner: std::array::from_fn(|i| f(PoleId::AxialInner(i), self.axial_inner[i])),
            axial_outer: std::array::from_fn(|i| f(PoleId::AxialOuter(i), self.axial_outer[i])),
            pm: std::array::from_fn(|i| f(PoleId::Pm(i), self.pm[i])),
            radial_inner: std::array::from_fn(|j| f(PoleId::RadialInner(j), self.radial_inner[j])),
            radial_outer: std::array::from_fn(|j| f(PoleId::RadialOuter(j), self.radial_outer[j])),
        }
    }

    pub fn add(&self, other: &PoleFluxes) -> Self {
        self.map(|p, v| v + other.get(p))
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|_, v| s * v)
    }

    /// Every pole in a fixed order: axial inner, axial outer, PM, radial
    /// inner, radial outer.
    pub fn entries(&self) -> Vec<(PoleId, f64)> {
        all_poles().into_iter().map(|p| (p, self.get(p))).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|(_, v)| v.abs()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|(_, v)| v.is_finite())
    }

    /// Flux density per pole, T.
    pub fn flux_density(&self, layout: &Layout) -> Self {
        self.map(|p, v| v / pole_area(layout, p))
    }
}

/// Pole identities in the order used by [`PoleFluxes::entries`].
pub fn all_poles() -> Vec<PoleId> {
    let mut out = Vec::with_capacity(3 * QUADRANTS + 2 * RADIAL_PAIRS);
    out.extend((0..QUADRANTS).map(PoleId::AxialInner));
    out.extend((0..QUADRANTS).map(PoleId::AxialOuter));
    out.extend((0..QUADRANTS).map(PoleId::Pm));
    out.extend((0..RADIAL_PAIRS).map(PoleId::RadialInner));
    out.extend((0..RADIAL_PAIRS).map(PoleId::RadialOuter));
    out
}

/// Face area of a pole, m².
pub fn pole_area(layout: &Layout, pole: PoleId) -> f64 {
    match pole {
        PoleId::AxialInner(i) => layout.axial_inner[i].area(),
        PoleId::AxialOuter(i) => layout.axial_outer[i].area(),
        PoleId::Pm(i) => layout.pm[i].area(),
        PoleId::RadialInner(j) => layout.radial[j].inner_area,
        PoleId::RadialOuter(j) => layout.radial[j].outer_area,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Bias,
    Axial,
    Tilt,
    Radial,
}

/// Fluxes of one source, tagged with the reluctance set they were solved on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxComponent {
    pub source: Source,
    pub fluxes: PoleFluxes,
    basis: u64,
}

impl FluxComponent {
    pub fn new(source: Source, fluxes: PoleFluxes, reluctances: &ReluctanceSet) -> Self {
        Self { source, fluxes, basis: reluctances.fingerprint() }
    }
}

/// Per-pole fluxes by source, and their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxState {
    pub bias: PoleFluxes,
    pub axial: PoleFluxes,
    pub tilt: PoleFluxes,
    pub radial: PoleFluxes,
    pub total: PoleFluxes,
}

impl FluxState {
    pub fn component(&self, source: Source) -> &PoleFluxes {
        match source {
            Source::Bias => &self.bias,
            Source::Axial => &self.axial,
            Source::Tilt => &self.tilt,
            Source::Radial => &self.radial,
        }
    }
}

/// Sums the four components pole by pole.
pub fn superpose(
    bias: &FluxComponent,
    axial: &FluxComponent,
    tilt: &FluxComponent,
    radial: &FluxComponent,
) -> Result<FluxState> {
    let parts = [(bias, Source::Bias), (axial, Source::Axial), (tilt, Source::Tilt), (radial, Source::Radial)];
    for (c, want) in parts {
        if c.source != want {
            return Err(EmcmError::Consistency(format!("expected the {want:?} component, got {:?}", c.source)));
        }
        if c.basis != bias.basis {
            return Err(EmcmError::Consistency(format!(
                "{:?} component was solved on a different reluctance set",
                c.source
            )));
        }
    }
    let total = bias.fluxes.add(&axial.fluxes).add(&tilt.fluxes).add(&radial.fluxes);
    if !total.is_finite() {
        return Err(EmcmError::Consistency("non-finite flux".into()));
    }
    Ok(FluxState { bias: bias.fluxes, axial: axial.fluxes, tilt: tilt.fluxes, radial: radial.fluxes, total })
}

/// Per-quadrant branch reluctances of the bias/tilt block system.
struct QuadrantBranches {
    alpha: [f64; QUADRANTS],
    beta: [f64; QUADRANTS],
    upper: f64,
    common: f64,
}

fn quadrant_branches(r: &ReluctanceSet) -> QuadrantBranches {
    let n = QUADRANTS as f64;
    QuadrantBranches {
        alpha: std::array::from_fn(|i| r.axial_quadrant(i) + n * r.flywheel_axial),
        beta: std::array::from_fn(|i| r.pm_pole[i] + n * r.pm_lower),
        upper: n * r.pm_upper,
        common: r.radial_total() + r.flywheel_radial,
    }
}

/// The 8x8 quadrant system shared by the bias and tilt solves. Unknowns are
/// the quadrant axial fluxes followed by the quadrant PM-pole fluxes.
///
/// Rows 0..4 are the loops through the axial pole, the PM pole and the lower
/// ring; rows 4..8 the loops through the axial pole, the upper ring and the
/// shared radial return.
pub fn quadrant_matrix(r: &ReluctanceSet) -> Matrix {
    let q = quadrant_branches(r);
    let mut m = Matrix::zeros(2 * QUADRANTS);
    for i in 0..QUADRANTS {
        m.set(i, i, q.alpha[i]);
        m.set(i, QUADRANTS + i, q.beta[i]);
        m.set(QUADRANTS + i, i, q.alpha[i] + q.upper);
        m.set(QUADRANTS + i, QUADRANTS + i, -q.upper);
        for k in 0..QUADRANTS {
            m.add(QUADRANTS + i, k, q.common);
            m.add(QUADRANTS + i, QUADRANTS + k, -q.common);
        }
    }
    m
}

/// Quadrant fluxes `(axial, pm)` for the given right-hand sides.
fn solve_quadrants(
    r: &ReluctanceSet,
    lower: [f64; QUADRANTS],
    upper: [f64; QUADRANTS],
) -> Result<([f64; QUADRANTS], [f64; QUADRANTS])> {
    let lu = Lu::factor(&quadrant_matrix(r))?;
    let rhs: Vec<f64> = lower.iter().chain(&upper).copied().collect();
    let x = lu.solve(&rhs);
    Ok((std::array::from_fn(|i| x[i]), std::array::from_fn(|i| x[QUADRANTS + i])))
}

/// Spreads quadrant axial and PM fluxes onto the pole faces and sends the
/// net `Σ(axial − pm)` through the radial poles by conductance.
fn distribute(r: &ReluctanceSet, axial: &[f64; QUADRANTS], pm: &[f64; QUADRANTS]) -> PoleFluxes {
    let radial_flux: f64 = (0..QUADRANTS).map(|i| axial[i] - pm[i]).sum();
    let mut out = PoleFluxes {
        axial_inner: std::array::from_fn(|i| axial[i] * r.axial_quadrant(i) / r.axial_inner[i]),
        axial_outer: std::array::from_fn(|i| axial[i] * r.axial_quadrant(i) / r.axial_outer[i]),
        pm: *pm,
        ..PoleFluxes::ZERO
    };
    spread_radial(r, radial_flux, &mut out);
    out
}

fn spread_radial(r: &ReluctanceSet, flux: f64, out: &mut PoleFluxes) {
    let rr = r.radial_total();
    out.radial_inner = std::array::from_fn(|j| flux * rr / r.radial_inner[j]);
    out.radial_outer = std::array::from_fn(|j| flux * rr / r.radial_outer[j]);
}

/// Bias solve: quadrant axial and PM-pole fluxes and the resulting pole fluxes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasSolution {
    pub axial_quadrant: [f64; QUADRANTS],
    pub pm_quadrant: [f64; QUADRANTS],
    /// Net flux through the radial poles, `Σ(axial − pm)`.
    pub radial: f64,
    pub component: FluxComponent,
}

/// PM bias with the motion-dependent quadrant reluctances.
pub fn solve_bias(r: &ReluctanceSet, pm_upper: &PmRingSpec, pm_lower: &PmRingSpec) -> Result<BiasSolution> {
    let (axial, pm) = solve_quadrants(r, [pm_lower.mmf(); QUADRANTS], [pm_upper.mmf(); QUADRANTS])?;
    let fluxes = distribute(r, &axial, &pm);
    Ok(BiasSolution {
        axial_quadrant: axial,
        pm_quadrant: pm,
        radial: (0..QUADRANTS).map(|i| axial[i] - pm[i]).sum(),
        component: FluxComponent::new(Source::Bias, fluxes, r),
    })
}

/// Branch fluxes of the symmetric three-branch bias network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarBias {
    pub axial: f64,
    pub pm: f64,
    pub radial: f64,
}

/// Closed-form solution of the lumped network with branches α (axial),
/// β (PM pole and lower ring) and γ (radial and upper ring).
pub fn scalar_bias(r: &ReluctanceSet, f_upper: f64, f_lower: f64) -> ScalarBias {
    let (a, b, g) = (r.alpha(), r.beta(), r.gamma());
    let l = r.l();
    ScalarBias {
        pm: (f_lower * (a + g) - a * f_upper) / l,
        radial: ((a + b) * f_upper - a * f_lower) / l,
        axial: (g * f_lower + b * f_upper) / l,
    }
}

/// Axial control flux from the axial coil MMF `f` (ampere-turns).
///
/// Two meshes: the inner axial ring carries `f`, the outer ring `2f`, and the
/// common return runs through the flywheel path and the PM-pole and radial
/// branches in parallel.
pub fn solve_axial_control(r: &ReluctanceSet, f: f64) -> FluxComponent {
    let (b, g) = (r.beta(), r.gamma());
    let bg = b * g / (b + g);
    let p = bg + r.flywheel_axial;
    let r1 = r.axial_inner_total();
    let r2 = r.axial_outer_total();
    let d = r1 * r2 + p * (r1 + r2);
    let inner = f * (r2 - p) / d;
    let outer = f * (2.0 * r1 + p) / d;
    let ret = inner + outer;
    let pm_total = ret * bg / b;
    let rt = r.pm_pole_total();
    let mut out = PoleFluxes {
        axial_inner: std::array::from_fn(|i| inner * r1 / r.axial_inner[i]),
        axial_outer: std::array::from_fn(|i| outer * r2 / r.axial_outer[i]),
        pm: std::array::from_fn(|i| pm_total * rt / r.pm_pole[i]),
        ..PoleFluxes::ZERO
    };
    spread_radial(r, ret * bg / g, &mut out);
    FluxComponent::new(Source::Axial, out, r)
}

/// Tilt control flux: the quadrant system with every PM MMF replaced by the
/// quadrant tilt-coil MMF.
pub fn solve_tilt_control(r: &ReluctanceSet, f_it: &[f64; QUADRANTS]) -> Result<FluxComponent> {
    let (axial, pm) = solve_quadrants(r, *f_it, *f_it)?;
    Ok(FluxComponent::new(Source::Tilt, distribute(r, &axial, &pm), r))
}

/// The 16x16 radial control system: unknowns are the inner then the outer
/// pole control fluxes of the eight pairs.
///
/// Row `j` is the loop around pair `j` (inner gap, rotor ring, outer gap).
/// Row `8 + j` closes the outer pole of pair `j` through the rest of the
/// network, which carries the sum of all radial control fluxes.
pub fn radial_matrix(r: &ReluctanceSet) -> Matrix {
    let n = RADIAL_PAIRS;
    let rnr = r.non_radial();
    let mut m = Matrix::zeros(2 * n);
    for j in 0..n {
        m.set(j, j, r.radial_inner[j]);
        m.set(j, n + j, -r.radial_outer[j]);
        for k in 0..2 * n {
            m.set(n + j, k, rnr);
        }
        m.add(n + j, n + j, r.radial_outer[j]);
    }
    m
}

pub fn solve_radial_control(r: &ReluctanceSet, f_ir: &[f64; RADIAL_PAIRS]) -> Result<FluxComponent> {
    let lu = Lu::factor(&radial_matrix(r))?;
    let mut rhs = vec![0.0; 2 * RADIAL_PAIRS];
    rhs[..RADIAL_PAIRS].copy_from_slice(f_ir);
    let x = lu.solve(&rhs);
    let out = PoleFluxes {
        radial_inner: std::array::from_fn(|j| x[j]),
        radial_outer: std::array::from_fn(|j| x[RADIAL_PAIRS + j]),
        ..PoleFluxes::ZERO
    };
    Ok(FluxComponent::new(Source::Radial, out, r))
}

/// All four solves at one reluctance set.
pub fn solve_all(
    r: &ReluctanceSet,
    pm_upper: &PmRingSpec,
    pm_lower: &PmRingSpec,
    mmf: &CoilMmf,
) -> Result<FluxState> {
    let bias = solve_bias(r, pm_upper, pm_lower)?;
    let axial = solve_axial_control(r, mmf.axial);
    let tilt = solve_tilt_control(r, &mmf.tilt)?;
    let radial = solve_radial_control(r, &mmf.radial)?;
    superpose(&bias.component, &axial, &tilt, &radial)
}
