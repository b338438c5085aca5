//! Error metrics between trajectories, convergence-order fits and vortex
//! measurements.

use crate::analytic::ScenarioParams;
use crate::dynamics::{hamiltonian, ParticleModel};
use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::phasespace::{DeformationSpec, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Maximum absolute position error.
    pub position: f64,
    /// Maximum `|H(t) − H(0)| / (1 + |H(0)|)`; unchecked when `None`.
    pub energy: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            position: 1e-6,
            energy: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub samples: usize,
    pub max_abs_error: Vec3,
    pub rms_error: Vec3,
    pub max_error: f64,
    /// `max |H(t) − H(0)|`, when the trajectory carries a force model.
    pub energy_drift: Option<f64>,
    pub initial_energy: Option<f64>,
    pub period_estimate: Option<f64>,
    pub roll_distance_estimate: Option<f64>,
    pub tolerances: Tolerances,
    pub position_pass: bool,
    pub energy_pass: Option<bool>,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.position_pass && self.energy_pass.unwrap_or(true)
    }
}

/// Position errors of `a` against `b` on shared sample positions.
fn error_stats(a: &[Vec3], b: &[Vec3]) -> (Vec3, Vec3) {
    let mut max = [0.0f64; 3];
    let mut sq = [0.0f64; 3];
    for (u, v) in a.iter().zip(b) {
        for i in 0..3 {
            let e = (u[i] - v[i]).abs();
            max[i] = max[i].max(e);
            sq[i] += e * e;
        }
    }
    let n = a.len().max(1) as f64;
    (max, sq.map(|s| (s / n).sqrt()))
}

/// Compares trajectory positions with `reference(t)` at every sample time.
pub fn compare<F>(traj: &Trajectory, mut reference: F, tolerances: Tolerances) -> Result<ComparisonReport>
where
    F: FnMut(f64) -> Result<Vec3>,
{
    if traj.is_empty() {
        return Err(Error::TooFewSamples { need: 1, got: 0 });
    }
    let numeric: Vec<Vec3> = traj.samples().iter().map(|s| s.x).collect();
    let exact = traj.times().map(&mut reference).collect::<Result<Vec<_>>>()?;
    let (max_abs_error, rms_error) = error_stats(&numeric, &exact);
    let max_error = max_abs_error.iter().copied().fold(0.0, f64::max);

    let (energy_drift, initial_energy) = match traj.meta.model {
        Some(model) => {
            let h0 = hamiltonian(&model, &traj.samples()[0]);
            (Some(energy_drift(traj, &model)), Some(h0))
        }
        None => (None, None),
    };
    let energy_pass = match (tolerances.energy, energy_drift, initial_energy) {
        (Some(tol), Some(drift), Some(h0)) => Some(drift <= tol * (1.0 + h0.abs())),
        _ => None,
    };
    Ok(ComparisonReport {
        samples: traj.len(),
        max_abs_error,
        rms_error,
        max_error,
        energy_drift,
        initial_energy,
        period_estimate: None,
        roll_distance_estimate: None,
        tolerances,
        position_pass: max_error <= tolerances.position,
        energy_pass,
    })
}

/// Error statistics between two position series sampled at the same times.
/// Symmetric in its arguments.
pub fn compare_series(a: &[Vec3], b: &[Vec3]) -> Result<(Vec3, Vec3)> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::InvalidInput("series must be non-empty and of equal length".into()));
    }
    Ok(error_stats(a, b))
}

/// `max_t |H(t) − H(0)|`.
pub fn energy_drift<M: ParticleModel + ?Sized>(traj: &Trajectory, model: &M) -> f64 {
    let Some(first) = traj.first() else {
        return 0.0;
    };
    let h0 = hamiltonian(model, first);
    traj.samples()
        .iter()
        .map(|s| (hamiltonian(model, s) - h0).abs())
        .fold(0.0, f64::max)
}

/// Least-squares slope of `log(error)` against `log(parameter)`.
pub fn convergence_order(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 4 {
        return Err(Error::TooFewSamples {
            need: 4,
            got: points.len(),
        });
    }
    if points.iter().any(|&(p, e)| !(p > 0.0 && e > 0.0 && p.is_finite() && e.is_finite())) {
        return Err(Error::InvalidInput("convergence data must be positive and finite".into()));
    }
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|&(p, e)| (p.ln(), e.ln())).collect();
    let mx = logs.iter().map(|l| l.0).sum::<f64>() / n;
    let my = logs.iter().map(|l| l.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|&(x, _)| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("parameters must not all be equal".into()));
    }
    Ok(sxy / sxx)
}

/// Sign changes of `signal`, located by linear interpolation.
pub fn zero_crossings(times: &[f64], signal: &[f64]) -> Vec<f64> {
    times
        .windows(2)
        .zip(signal.windows(2))
        .filter(|(_, s)| s[0] * s[1] < 0.0)
        .map(|(t, s)| t[0] + (t[1] - t[0]) * s[0] / (s[0] - s[1]))
        .collect()
}

/// Period of an oscillating signal from the mean spacing of its zero
/// crossings (two crossings per period). Needs at least three crossings.
pub fn estimate_period(times: &[f64], signal: &[f64]) -> Option<f64> {
    let zc = zero_crossings(times, signal);
    if zc.len() < 3 {
        return None;
    }
    Some(2.0 * (zc[zc.len() - 1] - zc[0]) / (zc.len() - 1) as f64)
}

/// Vortex axes and the in-plane centre `−(F_k, F_l) κ̂²/(F_γ² m)` about
/// which the Lie-to-space motion rolls.
fn vortex_frame(params: &ScenarioParams) -> Result<(usize, usize, f64, f64)> {
    let DeformationSpec::LieSpace {
        inv_kappa_hat,
        k,
        l,
        gamma,
    } = params.spec
    else {
        return Err(Error::InvalidInput("vortex measurements need a lie_space scenario".into()));
    };
    let omega = params.force[gamma.index()] * inv_kappa_hat;
    if omega == 0.0 {
        return Err(Error::Undefined("no vortex without F_gamma and 1/kappa_hat".into()));
    }
    let scale = 1.0 / (omega * omega * params.mass);
    Ok((
        k.index(),
        l.index(),
        -params.force[k.index()] * scale,
        -params.force[l.index()] * scale,
    ))
}

/// Period of the Lie-to-space vortex measured from zero crossings of
/// `x_k` minus its centre offset.
pub fn measure_vortex_period(traj: &Trajectory, params: &ScenarioParams) -> Result<Option<f64>> {
    let (k, _, ck, _) = vortex_frame(params)?;
    let times: Vec<f64> = traj.times().collect();
    let signal: Vec<f64> = traj.samples().iter().map(|s| s.x[k] - ck).collect();
    Ok(estimate_period(&times, &signal))
}

/// Mean `(k, l)`-plane displacement between successive period marks
/// `t₀ + nT`. Marks must be present among the sample times.
pub fn measure_roll_spacing(traj: &Trajectory, params: &ScenarioParams, period: f64) -> Result<Option<f64>> {
    let (k, l, _, _) = vortex_frame(params)?;
    let Some(first) = traj.first() else {
        return Ok(None);
    };
    let t0 = first.t;
    let tol = 1e-9 * (1.0 + period);
    let marks: Vec<(f64, f64)> = traj
        .samples()
        .iter()
        .filter(|s| {
            let n = ((s.t - t0) / period).round();
            (s.t - t0 - n * period).abs() <= tol
        })
        .map(|s| (s.x[k], s.x[l]))
        .collect();
    if marks.len() < 2 {
        return Ok(None);
    }
    let total: f64 = marks
        .windows(2)
        .map(|w| (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1))
        .sum();
    Ok(Some(total / (marks.len() - 1) as f64))
}
