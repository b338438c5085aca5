//! Equations of motion for `H = p²/2m + V(x)` on each deformed phase space.
//!
//! Two first-order paths are provided: [`hamilton_rhs`] contracts the
//! structure matrix with `∂H`, and [`hamilton_rhs_explicit`] writes out each
//! geometry by hand. They must agree to rounding.
//!
//! Time-dependent brackets (Lie-to-time, quadratic) evolve with `Ḟ = {F, H}`
//! and no extra `∂Π/∂t` term. `H` is conserved along every flow because `Π`
//! is antisymmetric.
//!
//! Only linear potentials are guaranteed to behave classically under the
//! deformed differential calculus. Non-linear potentials are accepted through
//! [`PotentialModel`] and treated with ordinary derivatives; results for them
//! are heuristic.

use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::phasespace::{DeformationSpec, Mat3, PhaseState, Vec3, DIM};

/// Mass and potential of the particle.
pub trait ParticleModel {
    fn mass(&self) -> f64;
    fn potential(&self, x: &Vec3) -> f64;
    /// `∂V/∂x`.
    fn gradient(&self, x: &Vec3) -> Vec3;
    /// `∂²V/∂x∂x`, symmetric.
    fn hessian(&self, x: &Vec3) -> Mat3;
}

impl<M: ParticleModel + ?Sized> ParticleModel for &M {
    fn mass(&self) -> f64 {
        (**self).mass()
    }
    fn potential(&self, x: &Vec3) -> f64 {
        (**self).potential(x)
    }
    fn gradient(&self, x: &Vec3) -> Vec3 {
        (**self).gradient(x)
    }
    fn hessian(&self, x: &Vec3) -> Mat3 {
        (**self).hessian(x)
    }
}

/// Constant force `F`, i.e. `V(x) = -F·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceModel {
    pub mass: f64,
    pub force: Vec3,
}

impl ForceModel {
    pub fn new(mass: f64, force: Vec3) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidModel(format!("mass must be positive, got {mass}")));
        }
        if force.iter().any(|f| !f.is_finite()) {
            return Err(Error::InvalidModel("force must be finite".into()));
        }
        Ok(ForceModel { mass, force })
    }
}

impl ParticleModel for ForceModel {
    fn mass(&self) -> f64 {
        self.mass
    }

    fn potential(&self, x: &Vec3) -> f64 {
        -dot(&self.force, x)
    }

    fn gradient(&self, _x: &Vec3) -> Vec3 {
        self.force.map(|f| -f)
    }

    fn hessian(&self, _x: &Vec3) -> Mat3 {
        [[0.0; 3]; 3]
    }
}

/// A smooth scalar potential.
pub trait PotentialField {
    fn value(&self, x: &Vec3) -> f64;
    fn gradient(&self, x: &Vec3) -> Vec3;
    fn hessian(&self, x: &Vec3) -> Mat3;
}

/// `V(x) = ½ (x - c)ᵀ K (x - c)` with symmetric stiffness `K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticWell {
    pub stiffness: Mat3,
    pub center: Vec3,
}

impl PotentialField for QuadraticWell {
    fn value(&self, x: &Vec3) -> f64 {
        let d = sub(x, &self.center);
        0.5 * dot(&d, &mat_vec(&self.stiffness, &d))
    }

    fn gradient(&self, x: &Vec3) -> Vec3 {
        mat_vec(&self.stiffness, &sub(x, &self.center))
    }

    fn hessian(&self, _x: &Vec3) -> Mat3 {
        self.stiffness
    }
}

/// A particle of given mass in an arbitrary [`PotentialField`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialModel<P> {
    pub mass: f64,
    pub field: P,
}

impl<P: PotentialField> PotentialModel<P> {
    pub fn new(mass: f64, field: P) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidModel(format!("mass must be positive, got {mass}")));
        }
        Ok(PotentialModel { mass, field })
    }
}

impl<P: PotentialField> ParticleModel for PotentialModel<P> {
    fn mass(&self) -> f64 {
        self.mass
    }
    fn potential(&self, x: &Vec3) -> f64 {
        self.field.value(x)
    }
    fn gradient(&self, x: &Vec3) -> Vec3 {
        self.field.gradient(x)
    }
    fn hessian(&self, x: &Vec3) -> Mat3 {
        self.field.hessian(x)
    }
}

/// `H = p²/2m + V(x)`.
pub fn hamiltonian<M: ParticleModel + ?Sized>(model: &M, state: &PhaseState) -> f64 {
    dot(&state.p, &state.p) / (2.0 * model.mass()) + model.potential(&state.x)
}

fn checked_gradient<M: ParticleModel + ?Sized>(model: &M, x: &Vec3) -> Result<Vec3> {
    let g = model.gradient(x);
    if g.iter().all(|v| v.is_finite()) {
        Ok(g)
    } else {
        Err(Error::NonFinite("potential gradient"))
    }
}

fn checked_mass<M: ParticleModel + ?Sized>(model: &M) -> Result<f64> {
    let m = model.mass();
    if m.is_finite() && m > 0.0 {
        Ok(m)
    } else {
        Err(Error::InvalidModel(format!("mass must be positive, got {m}")))
    }
}

/// `ζ̇ = Π(ζ, t) ∂H/∂ζ`, returned as `(dx/dt, dp/dt)`.
pub fn hamilton_rhs<M: ParticleModel + ?Sized>(
    spec: &DeformationSpec,
    model: &M,
    state: &PhaseState,
) -> Result<(Vec3, Vec3)> {
    let m = checked_mass(model)?;
    let pi = spec.structure_matrix(state)?;
    let g = checked_gradient(model, &state.x)?;
    let dh: [f64; DIM] = [
        g[0],
        g[1],
        g[2],
        state.p[0] / m,
        state.p[1] / m,
        state.p[2] / m,
    ];
    let z = pi.apply(&dh);
    Ok(([z[0], z[1], z[2]], [z[3], z[4], z[5]]))
}

/// Same flow as [`hamilton_rhs`], written out per geometry.
pub fn hamilton_rhs_explicit<M: ParticleModel + ?Sized>(
    spec: &DeformationSpec,
    model: &M,
    state: &PhaseState,
) -> Result<(Vec3, Vec3)> {
    spec.validate()?;
    if !state.is_finite() {
        return Err(Error::NonFinite("phase state"));
    }
    let m = checked_mass(model)?;
    let g = checked_gradient(model, &state.x)?;
    let (x, p, t) = (&state.x, &state.p, state.t);
    let mut xdot = p.map(|pi| pi / m);
    let mut pdot = g.map(|gi| -gi);
    match *spec {
        DeformationSpec::Classical => {}
        DeformationSpec::Canonical { theta } => {
            for i in 0..3 {
                xdot[i] += (0..3).map(|k| theta[i][k] * g[k]).sum::<f64>();
            }
        }
        DeformationSpec::LieTime { inv_kappa, rho, tau } => {
            let (r, s) = (rho.index(), tau.index());
            xdot[r] += t * inv_kappa * g[s];
            xdot[s] -= t * inv_kappa * g[r];
        }
        DeformationSpec::LieSpace { .. } | DeformationSpec::Quadratic { .. } => {
            let (sigma, k, l, gm) = rotation(spec, t);
            xdot[k] += sigma * x[l] * g[gm];
            xdot[l] -= sigma * x[k] * g[gm];
            xdot[gm] += -sigma * x[l] * g[k] + sigma * x[k] * g[l];
            pdot[k] += sigma * p[l] * g[gm];
            pdot[l] -= sigma * p[k] * g[gm];
        }
    }
    Ok((xdot, pdot))
}

/// `(σ(t), k, l, γ)` for the rotational geometries, with `σ = 1/κ̂` or `t/κ̄`.
fn rotation(spec: &DeformationSpec, t: f64) -> (f64, usize, usize, usize) {
    match *spec {
        DeformationSpec::LieSpace {
            inv_kappa_hat,
            k,
            l,
            gamma,
        } => (inv_kappa_hat, k.index(), l.index(), gamma.index()),
        DeformationSpec::Quadratic {
            inv_kappa_bar,
            k,
            l,
            gamma,
        } => (t * inv_kappa_bar, k.index(), l.index(), gamma.index()),
        _ => unreachable!("rotation() called on a non-rotational geometry"),
    }
}

/// Position-position block `{x_i, x_j}` of the structure matrix.
fn position_block(spec: &DeformationSpec, x: &Vec3, t: f64) -> Mat3 {
    let mut b = [[0.0; 3]; 3];
    match *spec {
        DeformationSpec::Classical => {}
        DeformationSpec::Canonical { theta } => b = theta,
        DeformationSpec::LieTime { inv_kappa, rho, tau } => {
            b[rho.index()][tau.index()] = t * inv_kappa;
            b[tau.index()][rho.index()] = -t * inv_kappa;
        }
        DeformationSpec::LieSpace { .. } | DeformationSpec::Quadratic { .. } => {
            let (sigma, k, l, g) = rotation(spec, t);
            b[k][g] = sigma * x[l];
            b[g][k] = -sigma * x[l];
            b[l][g] = -sigma * x[k];
            b[g][l] = sigma * x[k];
        }
    }
    b
}

/// Velocity `ẋ` at a phase state.
pub fn velocity<M: ParticleModel + ?Sized>(
    spec: &DeformationSpec,
    model: &M,
    state: &PhaseState,
) -> Result<Vec3> {
    Ok(hamilton_rhs_explicit(spec, model, state)?.0)
}

/// Momentum that produces velocity `v` at `(x, t)`.
///
/// The momentum extensions cancel in `ẋ`, so `ẋ = Θ(x,t) ∂V/∂x + p/m` with
/// `Θ` the position block, and `p = m (v - Θ ∂V/∂x)`.
pub fn momentum_from_velocity<M: ParticleModel + ?Sized>(
    spec: &DeformationSpec,
    model: &M,
    x: &Vec3,
    v: &Vec3,
    t: f64,
) -> Result<Vec3> {
    spec.validate()?;
    let m = checked_mass(model)?;
    let g = checked_gradient(model, x)?;
    let theta = position_block(spec, x, t);
    let tg = mat_vec(&theta, &g);
    Ok(std::array::from_fn(|i| m * (v[i] - tg[i])))
}

/// Newton acceleration `ẍ(x, ẋ, t)` obtained by eliminating the momenta.
///
/// With `G = ∂V/∂x` and `Ġ = (∂²V/∂x∂x) ẋ`, for constant force this reduces
/// to the familiar systems, e.g. on the Lie-to-space geometry
/// `mẍ_k = F_k − (2m/κ̂) F_γ ẋ_l + m (F_γ/κ̂)² x_k`.
pub fn newton_accel<M: ParticleModel + ?Sized>(
    spec: &DeformationSpec,
    model: &M,
    x: &Vec3,
    xdot: &Vec3,
    t: f64,
) -> Result<Vec3> {
    spec.validate()?;
    if x.iter().chain(xdot).any(|v| !v.is_finite()) || !t.is_finite() {
        return Err(Error::NonFinite("newton state"));
    }
    let m = checked_mass(model)?;
    let g = checked_gradient(model, x)?;
    let h = model.hessian(x);
    check_symmetric(&h)?;
    let gdot = mat_vec(&h, xdot);
    let mut a = g.map(|gi| -gi / m);
    match *spec {
        DeformationSpec::Classical => {}
        DeformationSpec::Canonical { theta } => {
            let tg = mat_vec(&theta, &gdot);
            for i in 0..3 {
                a[i] += tg[i];
            }
        }
        DeformationSpec::LieTime { inv_kappa, rho, tau } => {
            let (r, s) = (rho.index(), tau.index());
            // d/dt [ t Θ G ] = Θ G + t Θ Ġ
            a[r] += inv_kappa * (g[s] + t * gdot[s]);
            a[s] -= inv_kappa * (g[r] + t * gdot[r]);
        }
        DeformationSpec::LieSpace { .. } | DeformationSpec::Quadratic { .. } => {
            let (sigma, k, l, gm) = rotation(spec, t);
            // dσ/dt
            let rate = match *spec {
                DeformationSpec::Quadratic { inv_kappa_bar, .. } => inv_kappa_bar,
                _ => 0.0,
            };
            let gg = g[gm];
            a[k] += sigma * x[l] * gdot[gm]
                + (2.0 * sigma * xdot[l] + rate * x[l]) * gg
                + sigma * sigma * x[k] * gg * gg;
            a[l] += -sigma * x[k] * gdot[gm] - (2.0 * sigma * xdot[k] + rate * x[k]) * gg
                + sigma * sigma * x[l] * gg * gg;
            a[gm] += -sigma * x[l] * gdot[k] - (sigma * xdot[l] + rate * x[l]) * g[k]
                + sigma * x[k] * gdot[l]
                + (sigma * xdot[k] + rate * x[k]) * g[l];
        }
    }
    if a.iter().all(|v| v.is_finite()) {
        Ok(a)
    } else {
        Err(Error::NonFinite("newton acceleration"))
    }
}

fn check_symmetric(h: &Mat3) -> Result<()> {
    let scale = h.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
    for i in 0..3 {
        for j in (i + 1)..3 {
            if (h[i][j] - h[j][i]).abs() > 1e-12 * scale {
                return Err(Error::InvalidModel("potential hessian is not symmetric".into()));
            }
        }
    }
    if h.iter().flatten().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("potential hessian"))
    }
}

/// Largest mismatch between finite-difference accelerations of a sampled
/// trajectory and [`newton_accel`] evaluated with finite-difference
/// velocities. Converges as `O(h²)` in the sample spacing.
///
/// Velocities come from central differences rather than stored momenta since
/// `ẋ ≠ p/m` on deformed geometries.
pub fn consistency_residual<M: ParticleModel + ?Sized>(
    spec: &DeformationSpec,
    model: &M,
    trajectory: &Trajectory,
) -> Result<f64> {
    let s = trajectory.samples();
    if s.len() < 5 {
        return Err(Error::TooFewSamples {
            need: 5,
            got: s.len(),
        });
    }
    let h = s[1].t - s[0].t;
    let span = s[s.len() - 1].t - s[0].t;
    for w in s.windows(2) {
        if ((w[1].t - w[0].t) - h).abs() > 1e-9 * span {
            return Err(Error::InvalidInput(
                "consistency check needs uniformly spaced samples".into(),
            ));
        }
    }
    let mut worst = 0.0f64;
    for i in 1..s.len() - 1 {
        let (prev, cur, next) = (&s[i - 1].x, &s[i].x, &s[i + 1].x);
        let v: Vec3 = std::array::from_fn(|j| (next[j] - prev[j]) / (2.0 * h));
        let acc: Vec3 = std::array::from_fn(|j| (next[j] - 2.0 * cur[j] + prev[j]) / (h * h));
        let model_acc = newton_accel(spec, model, cur, &v, s[i].t)?;
        for j in 0..3 {
            worst = worst.max((acc[j] - model_acc[j]).abs());
        }
    }
    Ok(worst)
}

pub(crate) fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn mat_vec(m: &Mat3, v: &Vec3) -> Vec3 {
    std::array::from_fn(|i| dot(&m[i], v))
}
