//! One function per subcommand. Each returns the files to write; nothing
//! touches the output directory until the whole computation succeeded.

use amb_emcm::analysis::rig::default_forces;
use amb_emcm::analysis::stiffness::{current_half_width, linear_half_width, stiffness_at_center};
use amb_emcm::analysis::{
    calibrate_to_targets, coupling_current, coupling_position, extract_stiffness, fd_stiffness, linspace,
    pm_thickness_study, sweep, virtual_measurement, Baseline, DesignTargets, RigSpec, StiffnessKind,
    StiffnessReport, SweepAxis, SweepSpec,
};
use amb_emcm::config::{to_toml, SCHEMA};
use amb_emcm::force::WrenchAxis;
use amb_emcm::geometry::PoseAxis;
use amb_emcm::report::{self, pole_name};
use amb_emcm::{load_config, RadialCommand, TiltCommand, reference_config, Emcm, Excitation, MachineConfig, Pose};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::output::{Outputs, RunManifest};
use crate::{
    BaselineArg, CalibrateArgs, Cli, CliError, Command, CouplingArgs, ExcitationArgs, MeasureArgs, ModeArg,
    PmStudyArgs, PoseArgs, SolveArgs, StiffnessArgs, SweepArgs,
};

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let outputs = match &cli.command {
        Command::PrintSchema => {
            print!("{SCHEMA}");
            return Ok(());
        }
        Command::Solve(a) => solve(cli, a)?,
        Command::Sweep(a) => sweep_cmd(cli, a)?,
        Command::Stiffness(a) => stiffness(cli, a)?,
        Command::Coupling(a) => coupling(cli, a)?,
        Command::PmStudy(a) => pm_study(cli, a)?,
        Command::Calibrate(a) => calibrate(cli, a)?,
        Command::Measure(a) => measure(cli, a)?,
    };
    for path in outputs.write(&cli.global.out)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn load(cli: &Cli) -> Result<MachineConfig, CliError> {
    match &cli.global.config {
        None => Ok(reference_config()),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::ConfigRead { path: path.clone(), source: e })?;
            Ok(load_config(&text)?)
        }
    }
}

fn model(cli: &Cli, cfg: &MachineConfig) -> Result<Emcm, CliError> {
    Ok(match cli.global.quad_order {
        Some(n) => Emcm::with_quad_order(cfg.clone(), n)?,
        None => Emcm::new(cfg.clone())?,
    })
}

fn manifest(cli: &Cli, command: &str, cfg: &MachineConfig, args: &impl Serialize) -> RunManifest {
    let mut params = json!({ "config": cli.global.config, "quad_order": cli.global.quad_order });
    if let (Value::Object(p), Ok(Value::Object(a))) = (&mut params, serde_json::to_value(args)) {
        p.extend(a);
    }
    RunManifest::new(command, cfg, params)
}

fn pose(p: &PoseArgs) -> Pose {
    Pose::from_boundary(p.x, p.y, p.z, p.theta_x, p.theta_y)
}

fn excitation(e: &ExcitationArgs) -> Excitation {
    Excitation {
        i_axial: e.i_axial,
        tilt: TiltCommand::Axes { mx: e.tilt_x, my: e.tilt_y },
        radial: RadialCommand::Axes { fx: e.radial_x, fy: e.radial_y },
    }
}

fn sweep_axis(name: &str) -> Result<SweepAxis, CliError> {
    SweepAxis::parse(name).ok_or_else(|| {
        let names: Vec<&str> = SweepAxis::ALL.iter().map(|a| a.name()).collect();
        CliError::Usage(format!("unknown axis `{name}`, expected one of {}", names.join(", ")))
    })
}

fn pose_axis(name: &str) -> Result<PoseAxis, CliError> {
    PoseAxis::ALL.into_iter().find(|a| a.name() == name).ok_or_else(|| {
        let names: Vec<&str> = PoseAxis::ALL.iter().map(|a| a.name()).collect();
        CliError::Usage(format!("unknown axis `{name}`, expected one of {}", names.join(", ")))
    })
}

/// Half-width of the default range of `axis`: 0.5 mm, 0.04° or the
/// command half-width.
fn default_half_width(axis: SweepAxis) -> f64 {
    match axis {
        SweepAxis::Pose(a) if a.is_angle() => 0.04,
        SweepAxis::Pose(_) => 0.5,
        SweepAxis::Current(a) => current_half_width(a),
    }
}

fn range(axis: SweepAxis, min: Option<f64>, max: Option<f64>) -> (f64, f64) {
    let h = default_half_width(axis);
    (min.unwrap_or(-h), max.unwrap_or(h))
}

fn need_samples(samples: usize) -> Result<(), CliError> {
    if samples < 3 {
        return Err(CliError::Usage(format!("--samples must be at least 3, got {samples}")));
    }
    Ok(())
}

fn stiffness_json(r: &StiffnessReport) -> Value {
    json!({
        "axis": r.axis.name(),
        "kind": kind_name(r.kind),
        "unit": r.unit(),
        "value": r.boundary_value(),
        "r_squared": r.r_squared,
    })
}

fn kind_name(k: StiffnessKind) -> &'static str {
    match k {
        StiffnessKind::Current => "current",
        StiffnessKind::Position => "position",
    }
}

fn solve(cli: &Cli, a: &SolveArgs) -> Result<Outputs, CliError> {
    let cfg = load(cli)?;
    let m = model(cli, &cfg)?;
    let s = m.solve(&pose(&a.pose), &excitation(&a.excitation))?;
    let mut out = Outputs::new(manifest(cli, "solve", &cfg, a));
    out.table("fluxes.csv", report::fluxes_table(&s));
    out.table("wrench.csv", report::wrench_table(&s.wrench));
    let bias = s.flux.bias.flux_density(m.layout());
    let bias_b: Map<String, Value> = bias.entries().into_iter().map(|(p, b)| (pole_name(p), json!(b))).collect();
    let wrench: Map<String, Value> = WrenchAxis::ALL.iter().map(|c| (c.name().to_string(), json!(s.wrench.get(*c)))).collect();
    out.summary = json!({
        "wrench": wrench,
        "bias_flux_density_t": bias_b,
        "saturated": s.saturated.iter().map(|p| pole_name(*p)).collect::<Vec<_>>(),
    });
    Ok(out)
}

fn sweep_cmd(cli: &Cli, a: &SweepArgs) -> Result<Outputs, CliError> {
    need_samples(a.samples)?;
    let axis = sweep_axis(&a.axis)?;
    let cfg = load(cli)?;
    let m = model(cli, &cfg)?;
    let (min, max) = range(axis, a.min, a.max);
    let spec = SweepSpec { pose: pose(&a.pose), excitation: excitation(&a.excitation), ..SweepSpec::new(axis, min, max, a.samples) };
    let t = sweep(&spec, &m)?;
    let mut out = Outputs::new(manifest(cli, "sweep", &cfg, a));
    out.table("sweep.csv", report::sweep_table(&t));
    let fit = extract_stiffness(&t, axis.pose_axis()).ok();
    out.summary = json!({
        "axis": axis.name(),
        "unit": axis.unit(),
        "min": min,
        "max": max,
        "samples": a.samples,
        "stiffness": fit.as_ref().map(stiffness_json),
    });
    Ok(out)
}

fn stiffness(cli: &Cli, a: &StiffnessArgs) -> Result<Outputs, CliError> {
    need_samples(a.samples)?;
    let cfg = load(cli)?;
    let m = model(cli, &cfg)?;
    let mut reports = Vec::new();
    for kind in [StiffnessKind::Current, StiffnessKind::Position] {
        for axis in PoseAxis::ALL {
            reports.push(stiffness_at_center(&m, axis, kind, a.samples)?);
        }
    }
    if a.fd {
        for kind in [StiffnessKind::Current, StiffnessKind::Position] {
            for axis in PoseAxis::ALL {
                let step = match kind {
                    StiffnessKind::Current => 1e-3,
                    StiffnessKind::Position => axis.to_si(linear_half_width(axis)) * 1e-3,
                };
                reports.push(fd_stiffness(&m, &Pose::CENTERED, &Excitation::ZERO, axis, kind, step)?);
            }
        }
    }
    let mut out = Outputs::new(manifest(cli, "stiffness", &cfg, a));
    out.table("stiffness.csv", report::stiffness_table(&reports));
    out.summary = json!({ "stiffness": reports.iter().map(stiffness_json).collect::<Vec<_>>() });
    Ok(out)
}

fn coupling(cli: &Cli, a: &CouplingArgs) -> Result<Outputs, CliError> {
    need_samples(a.samples)?;
    let first = sweep_axis(&a.first)?;
    let second = sweep_axis(&a.second)?;
    let component = WrenchAxis::parse(&a.component).ok_or_else(|| {
        let names: Vec<&str> = WrenchAxis::ALL.iter().map(|c| c.name()).collect();
        CliError::Usage(format!("unknown component `{}`, expected one of {}", a.component, names.join(", ")))
    })?;
    let (f0, f1) = range(first, a.first_min, a.first_max);
    let (s0, s1) = range(second, a.second_min, a.second_max);
    let fv = linspace(f0, f1, a.samples);
    let sv = linspace(s0, s1, a.samples);
    let cfg = load(cli)?;
    let m = model(cli, &cfg)?;
    let map = match (first, second) {
        (SweepAxis::Pose(p), SweepAxis::Pose(q)) => {
            if !matches!(a.baseline, BaselineArg::Origin) {
                return Err(CliError::Usage("position coupling is always relative to the centred pose".into()));
            }
            coupling_position(&m, p, q, &fv, &sv, component)?
        }
        (SweepAxis::Current(p), SweepAxis::Current(q)) => {
            let baseline = match a.baseline {
                BaselineArg::Origin => Baseline::Origin,
                BaselineArg::FirstAxis => Baseline::FirstAxis,
            };
            coupling_current(&m, p, q, &fv, &sv, component, baseline)?
        }
        _ => return Err(CliError::Usage("couple two pose coordinates or two commands, not one of each".into())),
    };
    let max = map.relative.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
    let mut out = Outputs::new(manifest(cli, "coupling", &cfg, a));
    out.table("coupling.csv", report::coupling_table(&map));
    out.summary = json!({ "component": component.name(), "max_abs_relative_change": max });
    Ok(out)
}

fn pm_study(cli: &Cli, a: &PmStudyArgs) -> Result<Outputs, CliError> {
    need_samples(a.samples)?;
    let cfg = load(cli)?;
    let up = amb_emcm::units::m_to_mm(cfg.pm_upper.thickness);
    let lo = amb_emcm::units::m_to_mm(cfg.pm_lower.thickness);
    let upper = linspace(a.upper_min.unwrap_or(0.5 * up), a.upper_max.unwrap_or(1.5 * up), a.samples);
    let lower = linspace(a.lower_min.unwrap_or(0.5 * lo), a.lower_max.unwrap_or(1.5 * lo), a.samples);
    let rows = pm_thickness_study(&cfg, &upper, &lower)?;
    let mut out = Outputs::new(manifest(cli, "pm-study", &cfg, a));
    out.table("pm_study.csv", report::pm_study_table(&rows));
    out.summary = json!({ "rows": rows.len() });
    Ok(out)
}

fn calibrate(cli: &Cli, a: &CalibrateArgs) -> Result<Outputs, CliError> {
    let cfg = load(cli)?;
    let mut targets = DesignTargets::for_machine(&cfg);
    if let Some(w) = a.weight {
        targets.weight = w;
    }
    targets.axial_flux_density = a.axial_b;
    targets.radial_flux_density = a.radial_b;
    let (calibrated, result) = calibrate_to_targets(&cfg, &targets)?;
    let mut out = Outputs::new(manifest(cli, "calibrate", &cfg, a));
    out.table("calibration.csv", report::calibration_table(&result));
    out.texts.push(("calibrated.toml".into(), to_toml(&calibrated)));
    let params: Map<String, Value> =
        result.parameter_names.iter().zip(&result.parameters).map(|(n, v)| (n.clone(), json!(v))).collect();
    let residuals: Map<String, Value> =
        result.residual_names.iter().zip(&result.residuals).map(|(n, v)| (n.clone(), json!(v))).collect();
    out.summary = json!({
        "converged": result.converged,
        "iterations": result.iterations,
        "parameters": params,
        "residuals": residuals,
        "calibrated_config_sha256": crate::output::config_digest(&calibrated),
    });
    Ok(out)
}

fn measure(cli: &Cli, a: &MeasureArgs) -> Result<Outputs, CliError> {
    need_samples(a.probes)?;
    let axis = pose_axis(&a.axis)?;
    if !(a.noise >= 0.0 && a.noise.is_finite()) {
        return Err(CliError::Usage(format!("--noise must be a non-negative percentage, got {}", a.noise)));
    }
    let cfg = load(cli)?;
    let m = model(cli, &cfg)?;
    let noise = a.noise / 100.0;
    let spec = match a.mode {
        ModeArg::Current => {
            let base = RigSpec::current(axis, Vec::new());
            let forces = match (a.min, a.max) {
                (None, None) => default_forces(&m, &base, a.probes)?,
                (lo, hi) => {
                    let d = default_forces(&m, &base, 2)?;
                    linspace(lo.unwrap_or(d[0]), hi.unwrap_or(d[1]), a.probes)
                }
            };
            RigSpec { probes: forces, ..base }
        }
        ModeArg::Position => {
            let h = linear_half_width(axis);
            RigSpec::position(axis, linspace(a.min.unwrap_or(-h), a.max.unwrap_or(h), a.probes))
        }
    }
    .with_noise(noise, a.seed)
    .with_gain(a.gain);
    let (record, fitted) = virtual_measurement(&m, &spec)?;
    let mut out = Outputs::new(manifest(cli, "measure", &cfg, a));
    out.table("rig.csv", report::rig_table(&record));
    out.table("stiffness.csv", report::stiffness_table(&[fitted]));
    out.summary = json!({
        "stiffness": stiffness_json(&fitted),
        "current_stiffness_used": record.current_stiffness,
    });
    Ok(out)
}
