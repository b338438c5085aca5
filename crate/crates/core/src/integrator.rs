//! Adaptive Dormand–Prince 5(4) integration of the six-dimensional phase
//! flow, with steps clipped to land exactly on requested sample times.

use crate::dynamics::{self, ForceModel, ParticleModel};
use crate::error::{Error, Result};
use crate::phasespace::{DeformationSpec, PhaseState, Vec3, DIM};

type State = [f64; DIM];

// Dormand–Prince 5(4) tableau (Dormand & Prince 1980, FSAL form).
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights (identical to the last stage row).
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
/// Fifth-order minus embedded fourth-order weights
/// (b̂ = 5179/57600, 0, 7571/16695, 393/640, −92097/339200, 187/2100, 1/40).
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const MAX_STEPS: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Times at which samples are reported, in addition to the endpoints.
    pub sample_times: Vec<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            sample_times: Vec::new(),
        }
    }
}

impl IntegratorConfig {
    /// `n` uniformly spaced samples on `[t0, t1]` (both endpoints included).
    pub fn uniform(t0: f64, t1: f64, n: usize) -> Self {
        IntegratorConfig {
            sample_times: linspace(t0, t1, n),
            ..Default::default()
        }
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_max_step(mut self, max_step: f64) -> Self {
        self.max_step = max_step;
        self
    }

    fn validate(&self, t0: f64, t1: f64) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::InvalidInput("rel_tol must be positive".into()));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::InvalidInput("abs_tol must be positive".into()));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::InvalidInput("max_step must be positive".into()));
        }
        for w in self.sample_times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidInput("sample times must be increasing".into()));
            }
        }
        if let (Some(&first), Some(&last)) = (self.sample_times.first(), self.sample_times.last()) {
            if first < t0 || last > t1 || !first.is_finite() || !last.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "sample times must lie within [{t0}, {t1}]"
                )));
            }
        }
        Ok(())
    }
}

/// `n` points from `a` to `b` inclusive. Symmetric ranges map exactly onto
/// their negatives.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let last = n - 1;
            let d = last as f64;
            (0..n)
                .map(|i| match i {
                    0 => a,
                    i if i == last => b,
                    i => {
                        let i = i as f64;
                        (a * (d - i) + b * i) / d
                    }
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMeta {
    pub spec: Option<DeformationSpec>,
    pub model: Option<ForceModel>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

/// Time-ordered phase states.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    samples: Vec<PhaseState>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    /// Builds a trajectory from externally produced samples (e.g. a closed
    /// form). Times must be strictly increasing and all values finite.
    pub fn from_samples(samples: Vec<PhaseState>, meta: TrajectoryMeta) -> Result<Self> {
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFinite("trajectory sample"));
        }
        if samples.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(Error::InvalidInput("sample times must be strictly increasing".into()));
        }
        Ok(Trajectory { samples, meta })
    }

    pub fn samples(&self) -> &[PhaseState] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    pub fn first(&self) -> Option<&PhaseState> {
        self.samples.first()
    }

    pub fn last(&self) -> Option<&PhaseState> {
        self.samples.last()
    }
}

impl TrajectoryMeta {
    pub fn bare(rel_tol: f64, abs_tol: f64) -> Self {
        TrajectoryMeta {
            spec: None,
            model: None,
            rel_tol,
            abs_tol,
            accepted_steps: 0,
            rejected_steps: 0,
        }
    }
}

fn eval<F>(rhs: &mut F, t: f64, y: &State) -> Result<State>
where
    F: FnMut(&PhaseState) -> Result<(Vec3, Vec3)>,
{
    let (dx, dp) = rhs(&PhaseState::from_coords(*y, t))?;
    let out = [dx[0], dx[1], dx[2], dp[0], dp[1], dp[2]];
    if out.iter().all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(Error::NonFiniteRhs { t })
    }
}

/// One Dormand–Prince step from `(t, y)` with derivative `k1 = f(t, y)`.
/// Returns the fifth-order increment, the derivative at the new point (FSAL)
/// and the embedded error estimate.
fn dopri_step<F>(rhs: &mut F, t: f64, y: &State, k1: &State, h: f64) -> Result<(State, State, State)>
where
    F: FnMut(&PhaseState) -> Result<(Vec3, Vec3)>,
{
    let mut k = [[0.0; DIM]; 7];
    k[0] = *k1;
    for s in 1..6 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..DIM {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        k[s] = eval(rhs, t + C[s] * h, &ys)?;
    }
    let mut dy = [0.0; DIM];
    for (s, ks) in k.iter().enumerate().take(6) {
        for i in 0..DIM {
            dy[i] += h * B[s] * ks[i];
        }
    }
    let y5: State = std::array::from_fn(|i| y[i] + dy[i]);
    k[6] = eval(rhs, t + h, &y5)?;
    let mut err = [0.0; DIM];
    for (s, ks) in k.iter().enumerate() {
        for i in 0..DIM {
            err[i] += h * E[s] * ks[i];
        }
    }
    Ok((dy, k[6], err))
}

/// `y += dy` with Kahan compensation, so rounding does not build up over
/// many small increments to a large coordinate.
fn accumulate(y: &mut State, carry: &mut State, dy: &State) {
    for i in 0..DIM {
        let inc = dy[i] + carry[i];
        let sum = y[i] + inc;
        carry[i] = inc - (sum - y[i]);
        y[i] = sum;
    }
}

fn error_norm(err: &State, y0: &State, y1: &State, rtol: f64, atol: f64) -> f64 {
    (0..DIM)
        .map(|i| err[i].abs() / (atol + rtol * y0[i].abs().max(y1[i].abs())))
        .fold(0.0, f64::max)
}

/// Starting step size (Hairer, Nørsett & Wanner, II.4).
fn initial_step<F>(rhs: &mut F, t0: f64, y0: &State, f0: &State, cfg: &IntegratorConfig, span: f64) -> Result<f64>
where
    F: FnMut(&PhaseState) -> Result<(Vec3, Vec3)>,
{
    let scale: State = std::array::from_fn(|i| cfg.abs_tol + cfg.rel_tol * y0[i].abs());
    let rms = |v: &State| (v.iter().zip(&scale).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / DIM as f64).sqrt();
    let d0 = rms(y0);
    let d1 = rms(f0);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(span).min(cfg.max_step);
    let y1: State = std::array::from_fn(|i| y0[i] + h0 * f0[i]);
    let f1 = eval(rhs, t0 + h0, &y1)?;
    let diff: State = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = rms(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    Ok((100.0 * h0).min(h1).min(span).min(cfg.max_step))
}

/// Integrates `(ẋ, ṗ) = rhs(state)` from `t0` to `t1`.
///
/// The returned trajectory holds `t0`, every requested sample time and `t1`.
pub fn integrate<F>(mut rhs: F, x0: Vec3, p0: Vec3, t0: f64, t1: f64, cfg: &IntegratorConfig) -> Result<Trajectory>
where
    F: FnMut(&PhaseState) -> Result<(Vec3, Vec3)>,
{
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(Error::InvalidInput(format!("need t1 > t0 (got {t0}, {t1})")));
    }
    cfg.validate(t0, t1)?;
    let start = PhaseState::new(x0, p0, t0)?;

    let mut targets: Vec<f64> = cfg.sample_times.iter().copied().filter(|&s| s > t0).collect();
    if targets.last() != Some(&t1) {
        targets.push(t1);
    }

    let mut meta = TrajectoryMeta::bare(cfg.rel_tol, cfg.abs_tol);
    let mut samples = Vec::with_capacity(targets.len() + 1);
    samples.push(start);

    let mut t = t0;
    let mut y = start.coords();
    let mut carry = [0.0; DIM];
    let mut f = eval(&mut rhs, t, &y)?;
    let mut h = initial_step(&mut rhs, t, &y, &f, cfg, t1 - t0)?;

    for &target in &targets {
        while t < target {
            if meta.accepted_steps + meta.rejected_steps >= MAX_STEPS {
                return Err(Error::StepSizeUnderflow { t, last_good_t: t });
            }
            let remaining = target - t;
            let mut step = h.min(cfg.max_step);
            // Land exactly on the target rather than leave a sliver.
            let lands = step >= remaining * (1.0 - 1e-12);
            if lands {
                step = remaining;
            }
            let min_step = 16.0 * f64::EPSILON * t.abs().max(1.0);
            if step < min_step && !lands {
                return Err(Error::StepSizeUnderflow { t: t + step, last_good_t: t });
            }
            let (dy, f_new, err) = dopri_step(&mut rhs, t, &y, &f, step)?;
            let y_new: State = std::array::from_fn(|i| y[i] + dy[i]);
            let norm = error_norm(&err, &y, &y_new, cfg.rel_tol, cfg.abs_tol);
            if norm <= 1.0 {
                meta.accepted_steps += 1;
                t = if lands { target } else { t + step };
                accumulate(&mut y, &mut carry, &dy);
                f = f_new;
                let factor = if norm == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * norm.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                // A step shortened to hit a sample must not shrink the next one.
                h = if lands { h.max(step * factor) } else { step * factor };
            } else {
                meta.rejected_steps += 1;
                h = step * (SAFETY * norm.powf(-0.2)).max(MIN_FACTOR);
                if h < min_step {
                    return Err(Error::StepSizeUnderflow { t: t + h, last_good_t: t });
                }
            }
        }
        samples.push(PhaseState::from_coords(y, target));
    }

    Ok(Trajectory { samples, meta })
}

/// Fixed-step Dormand–Prince (fifth-order solution, no error control).
pub fn integrate_fixed<F>(mut rhs: F, x0: Vec3, p0: Vec3, t0: f64, t1: f64, steps: usize) -> Result<Trajectory>
where
    F: FnMut(&PhaseState) -> Result<(Vec3, Vec3)>,
{
    if steps == 0 || !(t1 > t0) {
        return Err(Error::InvalidInput("need steps > 0 and t1 > t0".into()));
    }
    let start = PhaseState::new(x0, p0, t0)?;
    let h = (t1 - t0) / steps as f64;
    let mut y = start.coords();
    let mut carry = [0.0; DIM];
    let mut samples = vec![start];
    let mut f = eval(&mut rhs, t0, &y)?;
    for n in 0..steps {
        let t = t0 + n as f64 * h;
        let (dy, f_new, _) = dopri_step(&mut rhs, t, &y, &f, h)?;
        accumulate(&mut y, &mut carry, &dy);
        f = f_new;
        let tn = if n + 1 == steps { t1 } else { t0 + (n + 1) as f64 * h };
        samples.push(PhaseState::from_coords(y, tn));
    }
    let mut meta = TrajectoryMeta::bare(0.0, 0.0);
    meta.accepted_steps = steps;
    Ok(Trajectory { samples, meta })
}

/// Integrates the Hamilton flow of `model` on `spec` from initial momentum `p0`.
pub fn integrate_hamiltonian<M: ParticleModel + ?Sized>(
    spec: &DeformationSpec,
    model: &M,
    x0: Vec3,
    p0: Vec3,
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    spec.validate()?;
    let mut traj = integrate(|s| dynamics::hamilton_rhs(spec, model, s), x0, p0, t0, t1, cfg)?;
    traj.meta.spec = Some(*spec);
    Ok(traj)
}

/// Constant-force simulation from initial position and velocity.
pub fn simulate(
    spec: &DeformationSpec,
    model: &ForceModel,
    x0: Vec3,
    v0: Vec3,
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let p0 = dynamics::momentum_from_velocity(spec, model, &x0, &v0, t0)?;
    let mut traj = integrate_hamiltonian(spec, model, x0, p0, t0, t1, cfg)?;
    traj.meta.model = Some(*model);
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn oscillator(s: &PhaseState) -> Result<(Vec3, Vec3)> {
        Ok(([s.p[0], 0.0, 0.0], [-s.x[0], 0.0, 0.0]))
    }

    #[test]
    fn tableau_consistency() {
        for s in 0..7 {
            let row: f64 = A[s].iter().sum();
            assert!((row - C[s]).abs() < 1e-15, "row {s}");
        }
        assert!((B.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(E.iter().sum::<f64>().abs() < 1e-15);
    }

    #[test]
    fn unit_oscillator_returns_after_one_period() {
        let cfg = IntegratorConfig::default();
        let traj = integrate(oscillator, [1.0, 0.0, 0.0], [0.0; 3], 0.0, 2.0 * PI, &cfg).unwrap();
        let end = traj.last().unwrap();
        assert_eq!(end.t, 2.0 * PI);
        assert!((end.x[0] - 1.0).abs() < 1e-8);
        assert!(end.p[0].abs() < 1e-8);
    }

    #[test]
    fn samples_land_exactly() {
        let cfg = IntegratorConfig::uniform(0.0, 3.0, 7);
        let traj = integrate(oscillator, [1.0, 0.0, 0.0], [0.0; 3], 0.0, 3.0, &cfg).unwrap();
        let times: Vec<f64> = traj.times().collect();
        assert_eq!(times, cfg.sample_times);
    }

    #[test]
    fn endpoints_are_added() {
        let cfg = IntegratorConfig {
            sample_times: vec![0.5, 1.0],
            ..Default::default()
        };
        let traj = integrate(oscillator, [1.0, 0.0, 0.0], [0.0; 3], 0.0, 2.0, &cfg).unwrap();
        let times: Vec<f64> = traj.times().collect();
        assert_eq!(times, vec![0.0, 0.5, 1.0, 2.0]);
        assert_eq!(traj.first().unwrap().x, [1.0, 0.0, 0.0]);
    }

    #[test]
    fn rejects_bad_config() {
        let mut cfg = IntegratorConfig::default();
        assert!(integrate(oscillator, [0.0; 3], [0.0; 3], 1.0, 1.0, &cfg).is_err());
        cfg.sample_times = vec![0.5, 0.2];
        assert!(integrate(oscillator, [0.0; 3], [0.0; 3], 0.0, 1.0, &cfg).is_err());
        cfg.sample_times = vec![2.0];
        assert!(integrate(oscillator, [0.0; 3], [0.0; 3], 0.0, 1.0, &cfg).is_err());
        let cfg = IntegratorConfig::default().with_tolerances(0.0, 1e-12);
        assert!(integrate(oscillator, [0.0; 3], [0.0; 3], 0.0, 1.0, &cfg).is_err());
    }

    #[test]
    fn non_finite_rhs_is_reported() {
        let rhs = |s: &PhaseState| Ok(([1.0 / (1.0 - s.t).max(0.0), 0.0, 0.0], [0.0; 3]));
        let err = integrate(rhs, [0.0; 3], [0.0; 3], 0.0, 2.0, &IntegratorConfig::default()).unwrap_err();
        assert!(matches!(err, Error::NonFiniteRhs { .. } | Error::StepSizeUnderflow { .. }));
    }

    #[test]
    fn blow_up_underflows() {
        // ẋ = x², x(0) = 1 blows up at t = 1.
        let rhs = |s: &PhaseState| Ok(([s.x[0] * s.x[0], 0.0, 0.0], [0.0; 3]));
        let err = integrate(rhs, [1.0, 0.0, 0.0], [0.0; 3], 0.0, 2.0, &IntegratorConfig::default()).unwrap_err();
        match err {
            Error::StepSizeUnderflow { last_good_t, .. } | Error::NonFiniteRhs { t: last_good_t } => {
                assert!(last_good_t <= 1.0 && last_good_t > 0.9)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn linspace_symmetric() {
        let z = linspace(-2.0, 2.0, 9);
        assert_eq!(z[4], 0.0);
        for i in 0..9 {
            assert_eq!(z[i], -z[8 - i]);
        }
    }
}
