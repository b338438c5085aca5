use std::fmt::Write as _;

use ncmech::analysis::{measure_roll_spacing, measure_vortex_period};
use ncmech::integrator::linspace;
use ncmech::{
    closed_form, compare, convergence_order, fresnel, hamiltonian, jacobi_residual, roll_distance,
    simulate, vortex_period, ComparisonReport, DeformationSpec, ForceModel, IntegratorConfig, PhaseState,
    PoissonStructure, Tolerances, Trajectory, WithoutMomentumExtension,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::scenario::Scenario;

/// Failure classes, mapped onto process exit codes.
#[derive(Debug)]
pub enum Failure {
    /// A check ran and missed its tolerance.
    Tolerance(String),
    /// Bad input or a computation that could not be carried out.
    Input(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Tolerance(_) => 1,
            Failure::Input(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Tolerance(m) | Failure::Input(m) => m,
        }
    }
}

impl From<ncmech::Error> for Failure {
    fn from(e: ncmech::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

pub const JACOBI_TOLERANCE: f64 = 1e-12;

fn require_full_structure(scenario: &Scenario, verb: &str) -> Result<(), Failure> {
    if scenario.momentum_extension {
        Ok(())
    } else {
        Err(Failure::Input(format!(
            "momentum_extension = false is only supported by jacobi, not {verb}"
        )))
    }
}

/// Largest Jacobi residual over `states` seeded random phase states, as a
/// text report, and whether it stays within 1e-12.
pub fn jacobi(scenario: &Scenario, states: usize) -> Result<(String, bool), Failure> {
    if states == 0 {
        return Err(Failure::Input("jacobi needs at least one state".into()));
    }
    let structure: Box<dyn PoissonStructure> = if scenario.momentum_extension {
        Box::new(scenario.spec)
    } else {
        Box::new(WithoutMomentumExtension(scenario.spec))
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = 0.0f64;
    for _ in 0..states {
        let mut v = || rng.gen_range(-10.0..10.0);
        let x = [v(), v(), v()];
        let p = [v(), v(), v()];
        let t = rng.gen_range(scenario.t0..=scenario.t1);
        let state = PhaseState::new(x, p, t)?;
        worst = worst.max(jacobi_residual(structure.as_ref(), &state)?);
    }
    let pass = worst <= JACOBI_TOLERANCE;
    let mut out = String::new();
    writeln!(out, "scenario: {}", scenario.name).unwrap();
    writeln!(out, "deformation: {}", scenario.spec.name()).unwrap();
    writeln!(out, "momentum_extension: {}", scenario.momentum_extension).unwrap();
    writeln!(out, "states: {states}").unwrap();
    writeln!(out, "max_residual: {worst:e}").unwrap();
    writeln!(out, "tolerance: {JACOBI_TOLERANCE:e}").unwrap();
    writeln!(out, "result: {}", if pass { "pass" } else { "fail" }).unwrap();
    Ok((out, pass))
}

/// Closed forms take the initial data at `t = 0`.
fn require_zero_start(scenario: &Scenario, verb: &str) -> Result<(), Failure> {
    if scenario.t0 == 0.0 {
        Ok(())
    } else {
        Err(Failure::Input(format!("{verb} needs t0 = 0, got {}", scenario.t0)))
    }
}

fn run(scenario: &Scenario) -> Result<Trajectory, Failure> {
    run_spec(scenario, scenario.spec)
}

fn run_spec(scenario: &Scenario, spec: DeformationSpec) -> Result<Trajectory, Failure> {
    let model = ForceModel::new(scenario.mass, scenario.force)?;
    let cfg = IntegratorConfig::uniform(scenario.t0, scenario.t1, scenario.samples)
        .with_tolerances(scenario.rel_tol, scenario.abs_tol);
    Ok(simulate(&spec, &model, scenario.x0, scenario.v0, scenario.t0, scenario.t1, &cfg)?)
}

/// Trajectory as CSV `t,x1,x2,x3,p1,p2,p3,H`, 17 significant digits.
pub fn simulate_csv(scenario: &Scenario) -> Result<String, Failure> {
    require_full_structure(scenario, "simulate")?;
    let traj = run(scenario)?;
    let model = ForceModel::new(scenario.mass, scenario.force)?;
    let mut out = String::from("t,x1,x2,x3,p1,p2,p3,H\n");
    for s in traj.samples() {
        let h = hamiltonian(&model, s);
        let row = [s.t, s.x[0], s.x[1], s.x[2], s.p[0], s.p[1], s.p[2], h];
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Integrated trajectory against the closed form. Returns the text report
/// and a JSON rendering of it.
pub fn compare_report(scenario: &Scenario) -> Result<(String, String, bool), Failure> {
    require_full_structure(scenario, "compare")?;
    require_zero_start(scenario, "compare")?;
    let params = scenario.params()?;
    // surface an undefined closed form before integrating
    closed_form(&params, 0.0)?;
    let traj = run(scenario)?;
    let tolerances = Tolerances {
        position: scenario.tolerance,
        energy: Some(10.0 * scenario.rel_tol),
    };
    let mut report = compare(&traj, |t| closed_form(&params, t), tolerances)?;
    let mut predicted = None;
    if let DeformationSpec::LieSpace { inv_kappa_hat, gamma, .. } = scenario.spec {
        if inv_kappa_hat != 0.0 && scenario.force[gamma.index()] != 0.0 {
            let period = vortex_period(&params)?;
            report.period_estimate = measure_vortex_period(&traj, &params)?;
            report.roll_distance_estimate = measure_roll_spacing(&traj, &params, period)?;
            predicted = Some((period, roll_distance(&params)?));
        }
    }
    let text = render_report(scenario, &report, predicted);
    let json = json!({
        "scenario": scenario.name,
        "deformation": scenario.spec.name(),
        "samples": report.samples,
        "max_abs_error": report.max_abs_error,
        "rms_error": report.rms_error,
        "max_error": report.max_error,
        "energy_drift": report.energy_drift,
        "initial_energy": report.initial_energy,
        "period_estimate": report.period_estimate,
        "roll_distance_estimate": report.roll_distance_estimate,
        "predicted_period": predicted.map(|p| p.0),
        "predicted_roll_distance": predicted.map(|p| p.1),
        "position_tolerance": report.tolerances.position,
        "energy_tolerance": report.tolerances.energy,
        "position_pass": report.position_pass,
        "energy_pass": report.energy_pass,
        "pass": report.passed(),
    });
    let json = serde_json::to_string_pretty(&json).expect("report serializes") + "\n";
    Ok((text, json, report.passed()))
}

fn render_report(scenario: &Scenario, r: &ComparisonReport, predicted: Option<(f64, f64)>) -> String {
    let mut out = String::new();
    let v = |a: [f64; 3]| format!("{:e} {:e} {:e}", a[0], a[1], a[2]);
    writeln!(out, "scenario: {}", scenario.name).unwrap();
    writeln!(out, "deformation: {}", scenario.spec.name()).unwrap();
    writeln!(out, "samples: {}", r.samples).unwrap();
    writeln!(out, "max_abs_error: {}", v(r.max_abs_error)).unwrap();
    writeln!(out, "rms_error: {}", v(r.rms_error)).unwrap();
    writeln!(out, "max_error: {:e} (tolerance {:e})", r.max_error, r.tolerances.position).unwrap();
    if let (Some(drift), Some(h0)) = (r.energy_drift, r.initial_energy) {
        let bound = r.tolerances.energy.unwrap_or(f64::NAN) * (1.0 + h0.abs());
        writeln!(out, "energy_drift: {drift:e} (bound {bound:e}, H0 {h0:e})").unwrap();
    }
    if let Some((period, roll)) = predicted {
        let show = |x: Option<f64>| x.map_or("n/a".to_string(), |x| format!("{x:e}"));
        writeln!(out, "period: {} (predicted {period:e})", show(r.period_estimate)).unwrap();
        writeln!(out, "roll_distance: {} (predicted {roll:e})", show(r.roll_distance_estimate)).unwrap();
    }
    writeln!(out, "result: {}", if r.passed() { "pass" } else { "fail" }).unwrap();
    out
}

/// Default sweep values of the inverse deformation strength.
pub fn default_sweep_values() -> Vec<f64> {
    (1..=5).map(|k| 10f64.powi(-k)).collect()
}

pub struct SweepOutput {
    pub table: String,
    pub curves: String,
}

/// Maximum deviation from the undeformed trajectory for each inverse
/// strength, with the log-log slope over the positive entries. Both runs
/// share the integrator settings, so a zero strength gives zero deviation.
pub fn sweep(scenario: &Scenario, values: &[f64]) -> Result<SweepOutput, Failure> {
    require_full_structure(scenario, "sweep")?;
    if scenario.spec.inverse_strength().is_none() {
        return Err(Failure::Input(format!(
            "sweep needs a lie_time, lie_space or quadratic deformation, got {}",
            scenario.spec.name()
        )));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Failure::Input(format!("sweep values must be finite, got {bad}")));
    }
    let baseline = run_spec(scenario, scenario.spec.with_inverse_strength(0.0))?;
    let runs: Vec<(f64, Trajectory)> = values
        .par_iter()
        .map(|&inv| run_spec(scenario, scenario.spec.with_inverse_strength(inv)).map(|t| (inv, t)))
        .collect::<Result<_, _>>()?;

    let mut table = String::from("inv_kappa,kappa,deviation\n");
    let mut curves = String::from("inv_kappa,t,x1,x2,x3\n");
    let mut points = Vec::new();
    for (inv, traj) in &runs {
        let deviation = traj
            .samples()
            .iter()
            .zip(baseline.samples())
            .map(|(s, c)| (0..3).map(|i| (s.x[i] - c.x[i]).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        writeln!(table, "{inv:.16e},{:.16e},{deviation:.16e}", 1.0 / inv).unwrap();
        if *inv > 0.0 && deviation > 0.0 {
            points.push((*inv, deviation));
        }
        for s in traj.samples() {
            writeln!(curves, "{inv:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", s.t, s.x[0], s.x[1], s.x[2]).unwrap();
        }
    }
    match convergence_order(&points) {
        Ok(slope) => writeln!(table, "# slope = {slope:.6}").unwrap(),
        Err(_) => writeln!(table, "# slope = n/a (needs four positive deviations)").unwrap(),
    }
    Ok(SweepOutput { table, curves })
}

/// `z,C,S` on `n` evenly spaced points.
pub fn fresnel_csv(z_min: f64, z_max: f64, n: usize) -> Result<String, Failure> {
    if !(z_min.is_finite() && z_max.is_finite()) || z_max < z_min || n == 0 || (n == 1 && z_max != z_min) {
        return Err(Failure::Input(format!(
            "need finite z_min <= z_max and n >= 1 (n = 1 only when z_min = z_max), got {z_min}, {z_max}, {n}"
        )));
    }
    let mut out = String::from("z,C,S\n");
    for z in linspace(z_min, z_max, n) {
        let (c, s) = fresnel(z);
        writeln!(out, "{z:.16e},{c:.16e},{s:.16e}").unwrap();
    }
    Ok(out)
}
