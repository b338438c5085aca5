//! Closed-form trajectories for constant force on each geometry, plus the
//! vortex period and roll distance of the Lie-to-space motion.
//!
//! The `(k, l)`-plane motion of the rotational geometries is written with
//! `z = x_k + i x_l`:
//!
//! * Lie-to-space, `ω = F_γ/κ̂`:
//!   `z̈ = f + 2iω ż + ω² z` with `f = (F_k + iF_l)/m`, whose solution is
//!   `z(t) = e^{iωt}(z₀ + (v₀ − iωz₀)t) + f t² Φ(iωt)`,
//!   `Φ(w) = ((w − 1)eʷ + 1)/w²`. Expanding gives the usual
//!   `−F_k κ̂²/(F_γ² m) + [...] cos(ωt) − [...] sin(ωt)` form; the `Φ` form
//!   stays accurate as `ω → 0`.
//! * Quadratic, `φ(t) = F_γ t²/(2κ̄)`: `z = w e^{iφ}` reduces the system to
//!   `ẅ = f e^{−iφ}`, integrated with Fresnel integrals.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fresnel::fresnel;
use crate::phasespace::{DeformationSpec, Vec3};
use crate::quadrature;

/// Mass, force and initial data of a constant-force scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioParams {
    pub spec: DeformationSpec,
    pub mass: f64,
    pub force: Vec3,
    pub x0: Vec3,
    pub v0: Vec3,
}

impl ScenarioParams {
    pub fn new(spec: DeformationSpec, mass: f64, force: Vec3, x0: Vec3, v0: Vec3) -> Result<Self> {
        spec.validate()?;
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidModel(format!("mass must be positive, got {mass}")));
        }
        if force.iter().chain(&x0).chain(&v0).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("scenario parameters"));
        }
        Ok(ScenarioParams {
            spec,
            mass,
            force,
            x0,
            v0,
        })
    }

    pub fn with_spec(&self, spec: DeformationSpec) -> Self {
        ScenarioParams { spec, ..*self }
    }
}

/// `x_i(t) = F_i t²/(2m) + v_{i0} t + x_{i0}`.
pub fn classical_solution(params: &ScenarioParams, t: f64) -> Vec3 {
    std::array::from_fn(|i| {
        params.force[i] / (2.0 * params.mass) * t * t + params.v0[i] * t + params.x0[i]
    })
}

/// Lie-to-time solution: constant extra acceleration in the `ρ`, `τ`
/// directions, `a_ρ = −F_τ/κ`, `a_τ = F_ρ/κ`.
pub fn lie_time_solution(params: &ScenarioParams, t: f64) -> Result<Vec3> {
    let DeformationSpec::LieTime { inv_kappa, rho, tau } = params.spec else {
        return Err(wrong_spec("lie_time", &params.spec));
    };
    let (r, s) = (rho.index(), tau.index());
    let m = params.mass;
    let f = params.force;
    let mut x = classical_solution(params, t);
    x[r] = (-m * inv_kappa * f[s] + f[r]) / (2.0 * m) * t * t + params.v0[r] * t + params.x0[r];
    x[s] = (m * inv_kappa * f[r] + f[s]) / (2.0 * m) * t * t + params.v0[s] * t + params.x0[s];
    Ok(x)
}

fn wrong_spec(expected: &str, got: &DeformationSpec) -> Error {
    Error::InvalidInput(format!("expected a {expected} deformation, got {}", got.name()))
}

struct Rotational {
    inv: f64,
    k: usize,
    l: usize,
    g: usize,
}

fn rotational(params: &ScenarioParams, expected: &str) -> Result<Rotational> {
    let (inv, k, l, g) = match (params.spec, expected) {
        (
            DeformationSpec::LieSpace {
                inv_kappa_hat,
                k,
                l,
                gamma,
            },
            "lie_space",
        ) => (inv_kappa_hat, k, l, gamma),
        (
            DeformationSpec::Quadratic {
                inv_kappa_bar,
                k,
                l,
                gamma,
            },
            "quadratic",
        ) => (inv_kappa_bar, k, l, gamma),
        _ => return Err(wrong_spec(expected, &params.spec)),
    };
    if inv != 0.0 && params.force[g.index()] == 0.0 {
        return Err(Error::Undefined(format!(
            "F_gamma = 0 (axis {g}); the closed form divides by F_gamma, integrate numerically instead"
        )));
    }
    Ok(Rotational {
        inv,
        k: k.index(),
        l: l.index(),
        g: g.index(),
    })
}

const SERIES_RADIUS: f64 = 0.5;
const SERIES_TERMS: usize = 30;

/// `φ₁(w) = (eʷ − 1)/w = Σ wⁿ/(n+1)!`
fn phi1(w: Complex64) -> Complex64 {
    if w.norm() < SERIES_RADIUS {
        series(w, |n| 1.0 / factorial(n + 1))
    } else {
        (w.exp() - 1.0) / w
    }
}

/// `Φ(w) = ((w − 1)eʷ + 1)/w² = Σ (n+1) wⁿ/(n+2)! = ∫₀¹ u e^{wu} du`
fn phi2(w: Complex64) -> Complex64 {
    if w.norm() < SERIES_RADIUS {
        series(w, |n| (n + 1) as f64 / factorial(n + 2))
    } else {
        ((w - 1.0) * w.exp() + 1.0) / (w * w)
    }
}

/// `Ψ(w) = ∫₀¹ u² Φ(wu) du = Σ (n+1) wⁿ/((n+2)! (n+3))`
fn psi(w: Complex64) -> Complex64 {
    if w.norm() < SERIES_RADIUS {
        series(w, |n| (n + 1) as f64 / (factorial(n + 2) * (n + 3) as f64))
    } else {
        (1.0 + w * phi2(w) - phi1(w)) / (w * w)
    }
}

fn series(w: Complex64, coeff: impl Fn(usize) -> f64) -> Complex64 {
    // Horner from the top.
    (0..SERIES_TERMS)
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, n| acc * w + coeff(n))
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Lie-to-space solution: a vortex about the `γ` axis with angular
/// frequency `F_γ/κ̂`, superposed on uniform acceleration along `γ`.
///
/// `x_γ` is `F_γt²/2m + v_{γ0}t + x_{γ0} + (1/κ̂)[t(F_l x_{k0} − F_k x_{l0})
/// + ∫₀ᵗ (F_k x_l − F_l x_k) ds]`, evaluated in closed form.
pub fn lie_space_solution(params: &ScenarioParams, t: f64) -> Result<Vec3> {
    let r = rotational(params, "lie_space")?;
    if r.inv == 0.0 {
        return Ok(classical_solution(params, t));
    }
    let m = params.mass;
    let (fk, fl, fg) = (params.force[r.k], params.force[r.l], params.force[r.g]);
    let omega = fg * r.inv;
    let f = Complex64::new(fk, fl) / m;
    let z0 = Complex64::new(params.x0[r.k], params.x0[r.l]);
    let v0 = Complex64::new(params.v0[r.k], params.v0[r.l]);
    let c1 = v0 - Complex64::i() * omega * z0;
    let w = Complex64::new(0.0, omega * t);

    let z = w.exp() * (z0 + c1 * t) + f * t * t * phi2(w);
    let integral = z0 * t * phi1(w) + c1 * t * t * phi2(w) + f * t * t * t * psi(w);
    let cross = (Complex64::new(fk, -fl) * integral).im;

    let mut x = [0.0; 3];
    x[r.k] = z.re;
    x[r.l] = z.im;
    x[r.g] = fg / (2.0 * m) * t * t
        + params.v0[r.g] * t
        + params.x0[r.g]
        + r.inv * (t * (fl * params.x0[r.k] - fk * params.x0[r.l]) + cross);
    Ok(x)
}

/// Period `2πκ̂/|F_γ|` of the Lie-to-space vortex.
pub fn vortex_period(params: &ScenarioParams) -> Result<f64> {
    let r = rotational(params, "lie_space")?;
    let fg = params.force[r.g];
    if r.inv == 0.0 || fg == 0.0 {
        return Err(Error::Undefined("vortex period needs 1/kappa_hat != 0 and F_gamma != 0".into()));
    }
    Ok(2.0 * PI / (fg * r.inv).abs())
}

/// Distance between neighbouring rolls of the Lie-to-space vortex in the
/// `(k, l)`-plane.
pub fn roll_distance(params: &ScenarioParams) -> Result<f64> {
    let r = rotational(params, "lie_space")?;
    let fg = params.force[r.g];
    if r.inv == 0.0 || fg == 0.0 {
        return Err(Error::Undefined("roll distance needs 1/kappa_hat != 0 and F_gamma != 0".into()));
    }
    let kh = 1.0 / r.inv;
    let m = params.mass;
    let (fk, fl) = (params.force[r.k], params.force[r.l]);
    let (xk0, xl0) = (params.x0[r.k], params.x0[r.l]);
    let (vk0, vl0) = (params.v0[r.k], params.v0[r.l]);
    let a = -xk0 + vl0 * kh / fg - fk * kh * kh / (fg * fg * m);
    let b = xl0 + vk0 * kh / fg + fl * kh * kh / (fg * fg * m);
    Ok(2.0 * PI * a.hypot(b))
}

/// In-plane part `(x_k, x_l)` of the quadratic solution.
fn quadratic_plane(params: &ScenarioParams, r: &Rotational, t: f64) -> (f64, f64) {
    let m = params.mass;
    let (fk, fl, fg) = (params.force[r.k], params.force[r.l], params.force[r.g]);
    let c = fg * r.inv;
    let phase = 0.5 * c * t * t;
    let (sin, cos) = phase.sin_cos();
    // Fresnel argument t·sqrt(|c|/π); for c < 0 the continuation
    // C(iy) = iC(y), S(iy) = −iS(y) flips the sign of the C term.
    let zeta = t * (c.abs() / PI).sqrt();
    let (fc, fs) = fresnel(zeta);
    let p = c.signum() * PI * zeta * fc - sin;
    let half = (0.5 * phase).sin();
    let q = -2.0 * half * half + PI * zeta * fs;
    let scale = 1.0 / (m * c);
    let ak = params.x0[r.k] + params.v0[r.k] * t + scale * (fk * p + fl * q);
    let al = params.x0[r.l] + params.v0[r.l] * t + scale * (fl * p - fk * q);
    (ak * cos - al * sin, ak * sin + al * cos)
}

/// Quadratic-deformation solution: the `(k, l)` coefficients rotated by
/// `F_γt²/(2κ̄)`, with `x_γ` completed by adaptive quadrature of
/// `(1/κ̄) ∫₀ᵗ s (x_l F_k − x_k F_l) ds`.
pub fn quadratic_solution(params: &ScenarioParams, t: f64) -> Result<Vec3> {
    let r = rotational(params, "quadratic")?;
    if r.inv == 0.0 {
        return Ok(classical_solution(params, t));
    }
    let m = params.mass;
    let (fk, fl, fg) = (params.force[r.k], params.force[r.l], params.force[r.g]);
    let (xk, xl) = quadratic_plane(params, &r, t);
    let drift = if fk == 0.0 && fl == 0.0 {
        0.0
    } else {
        let integrand = |s: f64| {
            let (a, b) = quadratic_plane(params, &r, s);
            s * (b * fk - a * fl)
        };
        r.inv * quadrature::integrate(integrand, 0.0, t, 1e-13, 1e-12)?
    };
    let mut x = [0.0; 3];
    x[r.k] = xk;
    x[r.l] = xl;
    x[r.g] = fg / (2.0 * m) * t * t + params.v0[r.g] * t + params.x0[r.g] + drift;
    Ok(x)
}

/// Closed-form position for any geometry. The canonical deformation leaves
/// constant-force motion classical.
pub fn closed_form(params: &ScenarioParams, t: f64) -> Result<Vec3> {
    match params.spec {
        DeformationSpec::Classical | DeformationSpec::Canonical { .. } => Ok(classical_solution(params, t)),
        DeformationSpec::LieTime { .. } => lie_time_solution(params, t),
        DeformationSpec::LieSpace { .. } => lie_space_solution(params, t),
        DeformationSpec::Quadratic { .. } => quadratic_solution(params, t),
    }
}
