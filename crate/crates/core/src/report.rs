//! CSV tables for solves and analyses.
//!
//! Column names and order are fixed per table. Numbers are written in
//! scientific notation with nine significant digits, lines end in LF.

use std::fmt::Write as _;

use crate::analysis::stiffness::target_stiffness;
use crate::analysis::{CalibrationResult, CouplingMap, PmStudyRow, RigRecord, StiffnessReport, SweepTable};
use crate::error::PoleId;
use crate::flux::all_poles;
use crate::force::Wrench;
use crate::model::Solution;

/// Nine significant digits, scientific notation.
pub fn num(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.8e}")
}

/// Short machine-readable pole name, e.g. `radial_inner_3`.
pub fn pole_name(p: PoleId) -> String {
    match p {
        PoleId::RadialInner(j) => format!("radial_inner_{}", j + 1),
        PoleId::RadialOuter(j) => format!("radial_outer_{}", j + 1),
        PoleId::Pm(i) => format!("pm_{}", i + 1),
        PoleId::AxialInner(i) => format!("axial_inner_{}", i + 1),
        PoleId::AxialOuter(i) => format!("axial_outer_{}", i + 1),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// The table preceded by `# `-prefixed comment lines.
    pub fn render(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            let _ = writeln!(out, "# {c}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

const WRENCH_COLUMNS: [&str; 5] = ["fx_n", "fy_n", "fz_n", "mx_nm", "my_nm"];

fn wrench_cells(w: &Wrench) -> Vec<String> {
    [w.fx, w.fy, w.fz, w.mx, w.my].into_iter().map(num).collect()
}

pub fn wrench_table(w: &Wrench) -> CsvTable {
    let mut t = CsvTable::new(&WRENCH_COLUMNS);
    t.push(wrench_cells(w));
    t
}

/// Per-pole flux by source, total flux density and saturation flag.
pub fn fluxes_table(s: &Solution) -> CsvTable {
    let mut t = CsvTable::new(&[
        "pole",
        "bias_wb",
        "axial_wb",
        "tilt_wb",
        "radial_wb",
        "total_wb",
        "flux_density_t",
        "saturated",
    ]);
    let f = &s.flux;
    for p in all_poles() {
        let mut row = vec![pole_name(p)];
        row.extend([f.bias.get(p), f.axial.get(p), f.tilt.get(p), f.radial.get(p), f.total.get(p), s.flux_density.get(p)].map(num));
        row.push(s.saturated.contains(&p).to_string());
        t.push(row);
    }
    t
}

pub fn sweep_table(s: &SweepTable) -> CsvTable {
    let first = format!("{}_{}", s.axis.name(), s.axis.unit().to_lowercase());
    let mut cols = vec![first.as_str()];
    cols.extend(WRENCH_COLUMNS);
    let mut t = CsvTable::new(&cols);
    for (v, w) in s.values.iter().zip(&s.wrenches) {
        let mut row = vec![num(*v)];
        row.extend(wrench_cells(w));
        t.push(row);
    }
    t
}

/// Computed stiffness next to the target of the reference machine.
pub fn stiffness_table(reports: &[StiffnessReport]) -> CsvTable {
    let mut t = CsvTable::new(&["axis", "kind", "unit", "computed", "target", "relative_difference", "r_squared", "method"]);
    for r in reports {
        let target = target_stiffness(r.axis, r.kind);
        let v = r.boundary_value();
        t.push(vec![
            r.axis.name().to_string(),
            match r.kind {
                crate::analysis::StiffnessKind::Current => "current",
                crate::analysis::StiffnessKind::Position => "position",
            }
            .to_string(),
            r.unit().to_string(),
            num(v),
            num(target),
            num((v - target) / target.abs()),
            r.r_squared.map(num).unwrap_or_default(),
            match r.method {
                crate::analysis::stiffness::Method::Regression => "regression",
                crate::analysis::stiffness::Method::FiniteDifference => "finite_difference",
            }
            .to_string(),
        ]);
    }
    t
}

/// Long format: one row per grid point.
pub fn coupling_table(m: &CouplingMap) -> CsvTable {
    let a = format!("{}_{}", m.first.name(), m.first.unit().to_lowercase());
    let b = format!("{}_{}", m.second.name(), m.second.unit().to_lowercase());
    let mut t = CsvTable::new(&[&a, &b, m.component.name(), "relative_change"]);
    for (i, va) in m.first_values.iter().enumerate() {
        for (j, vb) in m.second_values.iter().enumerate() {
            t.push(vec![num(*va), num(*vb), num(m.values[i][j]), num(m.relative[i][j])]);
        }
    }
    t
}

pub fn pm_study_table(rows: &[PmStudyRow]) -> CsvTable {
    let mut t = CsvTable::new(&["upper_mm", "lower_mm", "radial_inner_t", "radial_outer_t", "pm_pole_t", "axial_t"]);
    for r in rows {
        t.push([r.upper_mm, r.lower_mm, r.radial_inner, r.radial_outer, r.pm_pole, r.axial].map(num).to_vec());
    }
    t
}

/// Recorded rig samples in SI units.
pub fn rig_table(r: &RigRecord) -> CsvTable {
    let angle = r.axis.is_angle();
    let (f, p) = if angle { ("moment_nm", "position_rad") } else { ("force_n", "position_m") };
    let mut t = CsvTable::new(&["sample", f, "current_a", p]);
    for (k, s) in r.samples.iter().enumerate() {
        t.push(vec![k.to_string(), num(s.force), num(s.current), num(s.position)]);
    }
    t
}

pub fn calibration_table(r: &CalibrationResult) -> CsvTable {
    let mut t = CsvTable::new(&["kind", "name", "value", "tolerance"]);
    for (n, v) in r.parameter_names.iter().zip(&r.parameters) {
        t.push(vec!["parameter".into(), n.clone(), num(*v), String::new()]);
    }
    for ((n, v), tol) in r.residual_names.iter().zip(&r.residuals).zip(&r.tolerances) {
        t.push(vec!["residual".into(), n.clone(), num(*v), num(*tol)]);
    }
    t
}
