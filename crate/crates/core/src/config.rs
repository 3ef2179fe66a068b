//! Machine description: pole geometry, PM rings, coils, fixed flywheel
//! path reluctances and gaps.
//!
//! The on-disk format is TOML with boundary units (mm, mm², degrees, AT, kg).
//! [`MachineConfig`] holds SI values only. [`SCHEMA`] documents every section
//! and key and is what `emcm print-schema` emits.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{EmcmError, Result};
use crate::geometry::RADIAL_DIRECTIONS;
use crate::units::{self, MU0};

/// Number of radial pole pairs.
pub const RADIAL_PAIRS: usize = 8;
/// Number of axial/PM quadrants.
pub const QUADRANTS: usize = 4;

const DEG: f64 = 180.0 / PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialSpec {
    pub name: String,
    pub relative_permeability: f64,
    /// Tesla.
    pub saturation_flux_density: f64,
}

/// One PM ring. MMF and internal reluctance are derived from the
/// remanence, recoil permeability and dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmRingSpec {
    /// Magnetisation length, m.
    pub thickness: f64,
    /// Cross-section normal to the magnetisation, m².
    pub pole_area: f64,
    /// Tesla.
    pub remanence: f64,
    pub recoil_permeability: f64,
}

impl PmRingSpec {
    /// Coercive field of the linear recoil line, A/m.
    pub fn coercive_field(&self) -> f64 {
        self.remanence / (self.recoil_permeability * MU0)
    }

    /// MMF of the ring, ampere-turns.
    pub fn mmf(&self) -> f64 {
        self.coercive_field() * self.thickness
    }

    /// Internal reluctance of the full ring, AT/Wb.
    pub fn internal_reluctance(&self) -> f64 {
        self.thickness / (MU0 * self.recoil_permeability * self.pole_area)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoilRole {
    Axial,
    Tilt,
    Radial,
}

impl CoilRole {
    pub fn expected_count(self) -> usize {
        match self {
            CoilRole::Axial => 1,
            CoilRole::Tilt => QUADRANTS,
            CoilRole::Radial => RADIAL_PAIRS,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CoilRole::Axial => "axial",
            CoilRole::Tilt => "tilt",
            CoilRole::Radial => "radial",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoilSpec {
    pub role: CoilRole,
    /// Zero-based position within its role (quadrant or pair).
    pub index: usize,
    pub turns: u32,
    /// Amplifier current limit, A.
    pub max_current: f64,
}

impl CoilSpec {
    pub fn max_mmf(&self) -> f64 {
        self.turns as f64 * self.max_current
    }

    pub fn label(&self) -> String {
        match self.role {
            CoilRole::Axial => "axial coil".to_string(),
            role => format!("{} coil {}", role.name(), self.index + 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoleKind {
    RadialInner,
    RadialOuter,
    Pm,
    AxialInner,
    AxialOuter,
}

impl PoleKind {
    pub fn is_radial(self) -> bool {
        matches!(self, PoleKind::RadialInner | PoleKind::RadialOuter)
    }

    fn name(self) -> &'static str {
        match self {
            PoleKind::RadialInner => "radial_inner",
            PoleKind::RadialOuter => "radial_outer",
            PoleKind::Pm => "pm",
            PoleKind::AxialInner => "axial_inner",
            PoleKind::AxialOuter => "axial_outer",
        }
    }
}

/// Annular sector `r_in <= r <= r_out`, `psi_start <= psi <= psi_end` (m, rad).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorShape {
    pub r_in: f64,
    pub r_out: f64,
    pub psi_start: f64,
    pub psi_end: f64,
}

impl SectorShape {
    pub fn span(&self) -> f64 {
        self.psi_end - self.psi_start
    }

    pub fn area(&self) -> f64 {
        0.5 * self.span() * (self.r_out * self.r_out - self.r_in * self.r_in)
    }

    pub fn mid_angle(&self) -> f64 {
        0.5 * (self.psi_start + self.psi_end)
    }

    /// Same mean radius and span, radial width scaled by `factor`. The area
    /// scales by exactly `factor`.
    pub fn scaled_width(&self, factor: f64) -> Self {
        let mid = 0.5 * (self.r_in + self.r_out);
        let half = 0.5 * (self.r_out - self.r_in) * factor;
        Self { r_in: mid - half, r_out: mid + half, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PoleShape {
    /// Radial pole face: area (m²) and the direction cosines of the pair.
    Radial { area: f64, direction: [f64; 2] },
    Sector(SectorShape),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleGeometry {
    pub kind: PoleKind,
    /// Zero-based pair (radial) or quadrant (sector) index.
    pub index: usize,
    pub shape: PoleShape,
}

/// Distribution of axis commands onto coil MMFs.
///
/// `radial_x[j]` is the MMF on radial coil `j` per ampere-turn of x-force
/// command, and likewise for the other axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommandMap {
    pub radial_x: [f64; RADIAL_PAIRS],
    pub radial_y: [f64; RADIAL_PAIRS],
    pub tilt_x: [f64; QUADRANTS],
    pub tilt_y: [f64; QUADRANTS],
}

impl CommandMap {
    /// Radial commands follow the pair direction cosines, so opposite pairs
    /// receive opposite MMFs. A positive x-moment command strengthens the
    /// quadrants on the -y side (sin psi < 0), a positive y-moment command
    /// those on the +x side.
    pub fn derived(layout: &Layout) -> Self {
        let mut map = CommandMap {
            radial_x: [0.0; RADIAL_PAIRS],
            radial_y: [0.0; RADIAL_PAIRS],
            tilt_x: [0.0; QUADRANTS],
            tilt_y: [0.0; QUADRANTS],
        };
        for (j, pair) in layout.radial.iter().enumerate() {
            map.radial_x[j] = pair.direction[0];
            map.radial_y[j] = pair.direction[1];
        }
        for (i, s) in layout.axial_inner.iter().enumerate() {
            let mid = s.mid_angle();
            map.tilt_x[i] = -mid.sin().signum();
            map.tilt_y[i] = mid.cos().signum();
        }
        map
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MachineConfig {
    pub poles: Vec<PoleGeometry>,
    pub pm_upper: PmRingSpec,
    pub pm_lower: PmRingSpec,
    pub coils: Vec<CoilSpec>,
    /// Nominal axial gap z0, m.
    pub axial_gap: f64,
    /// Nominal radial gap z1, m.
    pub radial_gap: f64,
    /// Flywheel path between axial and PM poles, AT/Wb.
    pub flywheel_axial_reluctance: f64,
    /// Flywheel path between PM and radial poles, AT/Wb.
    pub flywheel_radial_reluctance: f64,
    pub flywheel_mass: f64,
    pub gravity: f64,
    pub flywheel_material: MaterialSpec,
    pub bearing_material: MaterialSpec,
    /// Overrides the derived command distribution when present.
    pub command_map: Option<CommandMap>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialPair {
    pub direction: [f64; 2],
    pub inner_area: f64,
    pub outer_area: f64,
}

/// Pole geometry arranged by role and index.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub radial: [RadialPair; RADIAL_PAIRS],
    pub pm: [SectorShape; QUADRANTS],
    pub axial_inner: [SectorShape; QUADRANTS],
    pub axial_outer: [SectorShape; QUADRANTS],
}

impl MachineConfig {
    pub fn weight(&self) -> f64 {
        self.flywheel_mass * self.gravity
    }

    pub fn coil(&self, role: CoilRole, index: usize) -> Option<&CoilSpec> {
        self.coils.iter().find(|c| c.role == role && c.index == index)
    }

    /// Turns of the first coil of a role; used to express per-ampere stiffness.
    pub fn turns(&self, role: CoilRole) -> f64 {
        self.coil(role, 0).map(|c| c.turns as f64).unwrap_or(1.0)
    }

    pub fn layout(&self) -> Result<Layout> {
        let report = validate(self);
        if let Some(issue) = report.errors().next() {
            return Err(EmcmError::schema(issue.key.clone(), issue.message.clone()));
        }
        Ok(build_layout(self).expect("validated configuration has a complete layout"))
    }

    pub fn command_map(&self) -> Result<CommandMap> {
        match self.command_map {
            Some(m) => Ok(m),
            None => Ok(CommandMap::derived(&self.layout()?)),
        }
    }

    /// Mutable access to every sector of one kind.
    pub fn sectors_mut(&mut self, kind: PoleKind) -> impl Iterator<Item = &mut SectorShape> {
        self.poles.iter_mut().filter(move |p| p.kind == kind).filter_map(|p| match &mut p.shape {
            PoleShape::Sector(s) => Some(s),
            PoleShape::Radial { .. } => None,
        })
    }

    /// Mutable access to every radial pole area.
    pub fn radial_areas_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.poles.iter_mut().filter_map(|p| match &mut p.shape {
            PoleShape::Radial { area, .. } => Some(area),
            PoleShape::Sector(_) => None,
        })
    }
}

fn build_layout(cfg: &MachineConfig) -> Option<Layout> {
    let mut inner = [None; RADIAL_PAIRS];
    let mut outer = [None; RADIAL_PAIRS];
    let mut sectors: BTreeMap<PoleKind, [Option<SectorShape>; QUADRANTS]> = BTreeMap::new();
    for p in &cfg.poles {
        match (p.kind, p.shape) {
            (PoleKind::RadialInner, PoleShape::Radial { area, direction }) => {
                *inner.get_mut(p.index)? = Some((area, direction))
            }
            (PoleKind::RadialOuter, PoleShape::Radial { area, direction }) => {
                *outer.get_mut(p.index)? = Some((area, direction))
            }
            (kind, PoleShape::Sector(s)) if !kind.is_radial() => {
                *sectors.entry(kind).or_insert([None; QUADRANTS]).get_mut(p.index)? = Some(s)
            }
            _ => return None,
        }
    }
    let mut radial = [RadialPair { direction: [0.0; 2], inner_area: 0.0, outer_area: 0.0 }; RADIAL_PAIRS];
    for j in 0..RADIAL_PAIRS {
        let (ai, d) = inner[j]?;
        let (ao, _) = outer[j]?;
        radial[j] = RadialPair { direction: d, inner_area: ai, outer_area: ao };
    }
    let ring = |kind| -> Option<[SectorShape; QUADRANTS]> {
        let s = sectors.get(&kind)?;
        Some([s[0]?, s[1]?, s[2]?, s[3]?])
    };
    Some(Layout {
        radial,
        pm: ring(PoleKind::Pm)?,
        axial_inner: ring(PoleKind::AxialInner)?,
        axial_outer: ring(PoleKind::AxialOuter)?,
    })
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Issue {
    pub severity: Severity,
    pub key: String,
    pub message: String,
}

/// Violated invariants. Empty iff the configuration satisfies all of them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Warning)
    }

    fn error(&mut self, key: impl Into<String>, message: impl Into<String>) {
        self.issues.push(Issue { severity: Severity::Error, key: key.into(), message: message.into() });
    }

    fn warn(&mut self, key: impl Into<String>, message: impl Into<String>) {
        self.issues.push(Issue { severity: Severity::Warning, key: key.into(), message: message.into() });
    }

    fn positive(&mut self, key: &str, value: f64, message: &str) {
        if !(value > 0.0 && value.is_finite()) {
            self.error(key, message);
        }
    }
}

const DIRECTION_PATTERN_TOL: f64 = 1e-3;
const DIRECTION_TRIG_TOL: f64 = 1e-2;
const ANGLE_TOL: f64 = 1e-9;

pub fn validate(cfg: &MachineConfig) -> ValidationReport {
    let mut r = ValidationReport::default();
    r.positive("machine.axial_gap_mm", cfg.axial_gap, "nominal gap must be positive");
    r.positive("machine.radial_gap_mm", cfg.radial_gap, "nominal gap must be positive");
    r.positive("machine.flywheel_mass_kg", cfg.flywheel_mass, "flywheel mass must be positive");
    r.positive("machine.gravity_m_per_s2", cfg.gravity, "gravity must be positive");
    for (key, v) in [
        ("machine.flywheel_axial_reluctance_at_per_wb", cfg.flywheel_axial_reluctance),
        ("machine.flywheel_radial_reluctance_at_per_wb", cfg.flywheel_radial_reluctance),
    ] {
        if !(v >= 0.0 && v.is_finite()) {
            r.error(key, "fixed path reluctance must be non-negative");
        }
    }
    for (name, m) in [("flywheel", &cfg.flywheel_material), ("bearing", &cfg.bearing_material)] {
        if !(m.relative_permeability >= 1.0) {
            r.error(format!("materials.{name}.relative_permeability"), "relative permeability must be at least 1");
        }
        r.positive(
            &format!("materials.{name}.saturation_flux_density_t"),
            m.saturation_flux_density,
            "saturation flux density must be positive",
        );
    }
    for (name, pm) in [("upper", &cfg.pm_upper), ("lower", &cfg.pm_lower)] {
        r.positive(&format!("magnets.{name}.thickness_mm"), pm.thickness, "magnet thickness must be positive");
        r.positive(&format!("magnets.{name}.pole_area_mm2"), pm.pole_area, "magnet area must be positive");
        r.positive(&format!("magnets.{name}.remanence_t"), pm.remanence, "remanence must be positive");
        r.positive(
            &format!("magnets.{name}.recoil_permeability"),
            pm.recoil_permeability,
            "recoil permeability must be positive",
        );
    }

    for role in [CoilRole::Axial, CoilRole::Tilt, CoilRole::Radial] {
        let coils: Vec<_> = cfg.coils.iter().filter(|c| c.role == role).collect();
        let mut seen = vec![false; role.expected_count()];
        for c in &coils {
            match seen.get_mut(c.index) {
                Some(s) if !*s => *s = true,
                _ => r.error(format!("coils.{}[{}]", role.name(), c.index + 1), "coil index out of range or duplicated"),
            }
            if c.turns == 0 {
                r.error(format!("coils.{}[{}].turns", role.name(), c.index + 1), "coil turns must be positive");
            }
            r.positive(
                &format!("coils.{}[{}].max_current_a", role.name(), c.index + 1),
                c.max_current,
                "coil current limit must be positive",
            );
        }
        if coils.len() != role.expected_count() {
            r.error(
                format!("coils.{}", role.name()),
                format!("expected {} {} coil(s), found {}", role.expected_count(), role.name(), coils.len()),
            );
        }
        if coils.iter().any(|c| c.turns != coils[0].turns) {
            r.warn(format!("coils.{}", role.name()), "coils of one role have different turns");
        }
    }

    validate_poles(cfg, &mut r);
    r
}

fn validate_poles(cfg: &MachineConfig, r: &mut ValidationReport) {
    let mut radial: [BTreeMap<usize, [f64; 2]>; 2] = [BTreeMap::new(), BTreeMap::new()];
    let mut rings: BTreeMap<PoleKind, Vec<(usize, SectorShape)>> = BTreeMap::new();
    for (n, p) in cfg.poles.iter().enumerate() {
        let key = format!("poles[{}]", n + 1);
        match (p.kind, p.shape) {
            (kind, PoleShape::Radial { area, direction }) if kind.is_radial() => {
                r.positive(&format!("{key}.area_mm2"), area, "pole area must be positive");
                let side = usize::from(kind == PoleKind::RadialOuter);
                if radial[side].insert(p.index, direction).is_some() || p.index >= RADIAL_PAIRS {
                    r.error(key.clone(), format!("{} index {} out of range or duplicated", kind.name(), p.index + 1));
                }
                check_direction(&key, direction, r);
            }
            (kind, PoleShape::Sector(s)) if !kind.is_radial() => {
                if !(s.r_in > 0.0 && s.r_out > s.r_in) {
                    r.error(format!("{key}.r_out_mm"), "sector radii must satisfy r_out > r_in > 0");
                }
                let span = s.span();
                if !(span > 0.0 && span <= FRAC_PI_2 + ANGLE_TOL) {
                    r.error(format!("{key}.end_deg"), "sector span must be in (0, 90] degrees");
                }
                rings.entry(kind).or_default().push((p.index, s));
            }
            (kind, _) => r.error(key, format!("{} pole has the wrong shape", kind.name())),
        }
    }

    let pairs = (0..RADIAL_PAIRS)
        .filter(|j| radial[0].contains_key(j) && radial[1].contains_key(j))
        .count()
        .min(radial[0].len())
        .min(radial[1].len());
    if radial[0].len() != RADIAL_PAIRS || radial[1].len() != RADIAL_PAIRS || pairs != RADIAL_PAIRS {
        r.error(
            "poles.radial",
            format!("expected {RADIAL_PAIRS} radial pole pairs, found {}", radial[0].len().min(radial[1].len())),
        );
    }
    for (j, d_in) in &radial[0] {
        if let Some(d_out) = radial[1].get(j) {
            if (d_in[0] - d_out[0]).abs() > 1e-12 || (d_in[1] - d_out[1]).abs() > 1e-12 {
                r.error(format!("poles.radial[{}]", j + 1), "inner and outer poles of a pair must share a direction");
            }
        }
    }

    for kind in [PoleKind::Pm, PoleKind::AxialInner, PoleKind::AxialOuter] {
        let mut ring = rings.remove(&kind).unwrap_or_default();
        let mut indices: Vec<usize> = ring.iter().map(|(i, _)| *i).collect();
        indices.sort_unstable();
        indices.dedup();
        if ring.len() != QUADRANTS || indices != [0, 1, 2, 3] {
            r.error(
                format!("poles.{}", kind.name()),
                format!("expected {QUADRANTS} {} quadrants, found {}", kind.name(), ring.len()),
            );
            continue;
        }
        ring.sort_by(|a, b| a.1.psi_start.total_cmp(&b.1.psi_start));
        let total: f64 = ring.iter().map(|(_, s)| s.span()).sum();
        let contiguous = ring.windows(2).all(|w| (w[1].1.psi_start - w[0].1.psi_end).abs() < ANGLE_TOL);
        if !contiguous || (total - TAU).abs() > ANGLE_TOL {
            r.error(format!("poles.{}", kind.name()), "quadrant sectors must tile the full circle without overlap");
        }
    }
}

fn check_direction(key: &str, d: [f64; 2], r: &mut ValidationReport) {
    let matches_pattern = RADIAL_DIRECTIONS
        .iter()
        .any(|c| (c[0] - d[0]).abs() <= DIRECTION_PATTERN_TOL && (c[1] - d[1]).abs() <= DIRECTION_PATTERN_TOL);
    if !matches_pattern {
        r.warn(format!("{key}.direction"), "direction does not match the (±0.38, ±0.92) / (±0.92, ±0.38) pattern");
    }
    let near_trig = (0..8).any(|k| {
        let a = (22.5 + 45.0 * k as f64).to_radians();
        (a.cos() - d[0]).abs() <= DIRECTION_TRIG_TOL && (a.sin() - d[1]).abs() <= DIRECTION_TRIG_TOL
    });
    if !near_trig {
        r.warn(format!("{key}.direction"), "direction is not within 1e-2 of a 22.5° + k·45° unit vector");
    }
}

// ---------------------------------------------------------------------------
// File format

/// Documented schema of the configuration file.
pub const SCHEMA: &str = include_str!("../data/schema.toml");

/// The shipped reference machine, in the file format.
pub const REFERENCE_TOML: &str = include_str!("../data/reference.toml");

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    machine: MachineSection,
    materials: MaterialsSection,
    magnets: MagnetsSection,
    #[serde(default)]
    coils: Vec<CoilEntry>,
    #[serde(default)]
    poles: Vec<PoleEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    command_map: Option<CommandMap>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MachineSection {
    flywheel_mass_kg: f64,
    gravity_m_per_s2: f64,
    axial_gap_mm: f64,
    radial_gap_mm: f64,
    flywheel_axial_reluctance_at_per_wb: f64,
    flywheel_radial_reluctance_at_per_wb: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialsSection {
    flywheel: MaterialEntry,
    bearing: MaterialEntry,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialEntry {
    name: String,
    relative_permeability: f64,
    saturation_flux_density_t: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MagnetsSection {
    upper: MagnetEntry,
    lower: MagnetEntry,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MagnetEntry {
    thickness_mm: f64,
    pole_area_mm2: f64,
    remanence_t: f64,
    recoil_permeability: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoilEntry {
    role: CoilRole,
    index: usize,
    turns: u32,
    max_current_a: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoleEntry {
    kind: PoleKind,
    index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    area_mm2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    direction: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r_in_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r_out_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    start_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    end_deg: Option<f64>,
}

fn one_based(key: &str, index: usize) -> Result<usize> {
    index.checked_sub(1).ok_or_else(|| EmcmError::schema(key, "indices are one-based"))
}

fn toml_error(err: toml::de::Error) -> EmcmError {
    let message = err.message().to_string();
    let key = message
        .split('`')
        .nth(1)
        .map(str::to_string)
        .unwrap_or_else(|| "<document>".to_string());
    EmcmError::Schema { key, message }
}

/// Parses and validates a configuration in the documented schema.
pub fn load_config(source: &str) -> Result<MachineConfig> {
    let file: ConfigFile = toml::from_str(source).map_err(toml_error)?;
    let cfg = from_file(file)?;
    let report = validate(&cfg);
    if let Some(issue) = report.errors().next() {
        return Err(EmcmError::schema(issue.key.clone(), issue.message.clone()));
    }
    Ok(cfg)
}

fn from_file(f: ConfigFile) -> Result<MachineConfig> {
    let m = &f.machine;
    let magnet = |e: &MagnetEntry| PmRingSpec {
        thickness: units::mm_to_m(e.thickness_mm),
        pole_area: units::mm2_to_m2(e.pole_area_mm2),
        remanence: e.remanence_t,
        recoil_permeability: e.recoil_permeability,
    };
    let material = |e: &MaterialEntry| MaterialSpec {
        name: e.name.clone(),
        relative_permeability: e.relative_permeability,
        saturation_flux_density: e.saturation_flux_density_t,
    };
    let coils = f
        .coils
        .iter()
        .enumerate()
        .map(|(n, c)| {
            Ok(CoilSpec {
                role: c.role,
                index: one_based(&format!("coils[{}].index", n + 1), c.index)?,
                turns: c.turns,
                max_current: c.max_current_a,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let poles = f
        .poles
        .iter()
        .enumerate()
        .map(|(n, p)| {
            let key = format!("poles[{}]", n + 1);
            let need = |v: Option<f64>, name: &str| {
                v.ok_or_else(|| EmcmError::schema(format!("{key}.{name}"), "missing key"))
            };
            let index = one_based(&format!("{key}.index"), p.index)?;
            let shape = if p.kind.is_radial() {
                PoleShape::Radial {
                    area: units::mm2_to_m2(need(p.area_mm2, "area_mm2")?),
                    direction: p.direction.ok_or_else(|| EmcmError::schema(format!("{key}.direction"), "missing key"))?,
                }
            } else {
                PoleShape::Sector(SectorShape {
                    r_in: units::mm_to_m(need(p.r_in_mm, "r_in_mm")?),
                    r_out: units::mm_to_m(need(p.r_out_mm, "r_out_mm")?),
                    psi_start: need(p.start_deg, "start_deg")? / DEG,
                    psi_end: need(p.end_deg, "end_deg")? / DEG,
                })
            };
            Ok(PoleGeometry { kind: p.kind, index, shape })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MachineConfig {
        poles,
        pm_upper: magnet(&f.magnets.upper),
        pm_lower: magnet(&f.magnets.lower),
        coils,
        axial_gap: units::mm_to_m(m.axial_gap_mm),
        radial_gap: units::mm_to_m(m.radial_gap_mm),
        flywheel_axial_reluctance: m.flywheel_axial_reluctance_at_per_wb,
        flywheel_radial_reluctance: m.flywheel_radial_reluctance_at_per_wb,
        flywheel_mass: m.flywheel_mass_kg,
        gravity: m.gravity_m_per_s2,
        flywheel_material: material(&f.materials.flywheel),
        bearing_material: material(&f.materials.bearing),
        command_map: f.command_map,
    })
}

/// Writes a configuration in the file format. Loading the result gives back
/// a configuration equal field by field.
pub fn to_toml(cfg: &MachineConfig) -> String {
    let magnet = |p: &PmRingSpec| MagnetEntry {
        thickness_mm: units::m_to_mm(p.thickness),
        pole_area_mm2: units::m2_to_mm2(p.pole_area),
        remanence_t: p.remanence,
        recoil_permeability: p.recoil_permeability,
    };
    let material = |m: &MaterialSpec| MaterialEntry {
        name: m.name.clone(),
        relative_permeability: m.relative_permeability,
        saturation_flux_density_t: m.saturation_flux_density,
    };
    let file = ConfigFile {
        machine: MachineSection {
            flywheel_mass_kg: cfg.flywheel_mass,
            gravity_m_per_s2: cfg.gravity,
            axial_gap_mm: units::m_to_mm(cfg.axial_gap),
            radial_gap_mm: units::m_to_mm(cfg.radial_gap),
            flywheel_axial_reluctance_at_per_wb: cfg.flywheel_axial_reluctance,
            flywheel_radial_reluctance_at_per_wb: cfg.flywheel_radial_reluctance,
        },
        materials: MaterialsSection {
            flywheel: material(&cfg.flywheel_material),
            bearing: material(&cfg.bearing_material),
        },
        magnets: MagnetsSection { upper: magnet(&cfg.pm_upper), lower: magnet(&cfg.pm_lower) },
        coils: cfg
            .coils
            .iter()
            .map(|c| CoilEntry { role: c.role, index: c.index + 1, turns: c.turns, max_current_a: c.max_current })
            .collect(),
        poles: cfg
            .poles
            .iter()
            .map(|p| {
                let mut e = PoleEntry {
                    kind: p.kind,
                    index: p.index + 1,
                    area_mm2: None,
                    direction: None,
                    r_in_mm: None,
                    r_out_mm: None,
                    start_deg: None,
                    end_deg: None,
                };
                match p.shape {
                    PoleShape::Radial { area, direction } => {
                        e.area_mm2 = Some(units::m2_to_mm2(area));
                        e.direction = Some(direction);
                    }
                    PoleShape::Sector(s) => {
                        e.r_in_mm = Some(units::m_to_mm(s.r_in));
                        e.r_out_mm = Some(units::m_to_mm(s.r_out));
                        e.start_deg = Some(units::to_boundary(s.psi_start, DEG));
                        e.end_deg = Some(units::to_boundary(s.psi_end, DEG));
                    }
                }
                e
            })
            .collect(),
        command_map: cfg.command_map,
    };
    toml::to_string(&file).expect("configuration serialises")
}

/// The shipped reference machine.
///
/// Gaps, mass, materials and the radial coil rating are the machine's design
/// values. Pole and PM ring dimensions, the flywheel path reluctances and the
/// axial/tilt coil turns are fitted: weight balance at the nominal gap, 0.8 T
/// axial and 0.55 T radial bias, and the target stiffnesses. They are not the
/// dimensions of the built machine.
pub fn reference_config() -> MachineConfig {
    load_config(REFERENCE_TOML).expect("shipped reference configuration is valid")
}
