//! Test-only oracles, independent of the library's numerical paths.

#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

use ncmech::{DeformationSpec, PhaseState};
use rand::Rng;

/// Adaptive Simpson quadrature with the Lyness acceptance test. `tol` is
/// the absolute error budget for the whole interval; it is split between
/// subintervals in proportion to their width.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 40)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let flm = f(0.5 * (a + m));
    let frm = f(0.5 * (m + b));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // below this the difference is rounding noise
    let floor = 64.0 * f64::EPSILON * (b - a) * (fa.abs() + flm.abs() + fm.abs() + frm.abs() + fb.abs());
    if depth == 0 || delta.abs() <= (15.0 * tol).max(floor) {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Fresnel integrals at every point of `zs` by adaptive Simpson
/// quadrature of the defining integrals. Points are visited in order of
/// `|z|` and the integral is accumulated chunk by chunk. Up to `t = 1` the
/// integrand is used as is; beyond, the substitution `u = t²` turns it into
/// `cos(πu/2) / (2√u)`, whose oscillation rate no longer grows. `tol` is
/// the error budget per chunk.
pub fn fresnel_oracle(zs: &[f64], tol: f64) -> Vec<(f64, f64)> {
    let mut order: Vec<usize> = (0..zs.len()).collect();
    order.sort_by(|&i, &j| zs[i].abs().total_cmp(&zs[j].abs()));
    let cos_t = |t: f64| (FRAC_PI_2 * t * t).cos();
    let sin_t = |t: f64| (FRAC_PI_2 * t * t).sin();
    let cos_u = |u: f64| (FRAC_PI_2 * u).cos() / (2.0 * u.sqrt());
    let sin_u = |u: f64| (FRAC_PI_2 * u).sin() / (2.0 * u.sqrt());
    let mut out = vec![(0.0, 0.0); zs.len()];
    let (mut at, mut c, mut s) = (0.0f64, 0.0f64, 0.0f64);
    for i in order {
        let target = zs[i].abs();
        if at < target && at < 1.0 {
            let next = target.min(1.0);
            c += adaptive_simpson(&cos_t, at, next, tol);
            s += adaptive_simpson(&sin_t, at, next, tol);
            at = next;
        }
        // chunks of unit width in u
        let mut u = at * at;
        let end = target * target;
        while u < end {
            let next = (u.floor() + 1.0).min(end);
            c += adaptive_simpson(&cos_u, u, next, tol);
            s += adaptive_simpson(&sin_u, u, next, tol);
            u = next;
        }
        at = at.max(target);
        let sign = zs[i].signum();
        out[i] = if zs[i] == 0.0 { (0.0, 0.0) } else { (sign * c, sign * s) };
    }
    out
}

pub fn random_state<R: Rng>(rng: &mut R) -> PhaseState {
    let mut v = || rng.gen_range(-10.0..10.0);
    let x = [v(), v(), v()];
    let p = [v(), v(), v()];
    let t = rng.gen_range(0.0..10.0);
    PhaseState::new(x, p, t).unwrap()
}

pub fn random_axes<R: Rng>(rng: &mut R) -> [usize; 3] {
    let mut axes = [1, 2, 3];
    for i in (1..3).rev() {
        let j = rng.gen_range(0..=i);
        axes.swap(i, j);
    }
    axes
}

pub fn sample_specs() -> Vec<DeformationSpec> {
    vec![
        DeformationSpec::canonical_from_components(0.3, -0.7, 1.1).unwrap(),
        DeformationSpec::lie_time(0.5, 1, 2).unwrap(),
        DeformationSpec::lie_space(0.1, 1, 2, 3).unwrap(),
        DeformationSpec::quadratic(0.2, 1, 2, 3).unwrap(),
    ]
}

/// Constant-force Newton systems written out independently of the library.
/// Returns ẍ for `(x, ẋ, t)`.
pub fn newton_reference(spec: &DeformationSpec, m: f64, f: [f64; 3], x: [f64; 3], v: [f64; 3], t: f64) -> [f64; 3] {
    let mut a = f.map(|fi| fi / m);
    match *spec {
        DeformationSpec::Classical | DeformationSpec::Canonical { .. } => {}
        DeformationSpec::LieTime { inv_kappa, rho, tau } => {
            let (r, s) = (rho.index(), tau.index());
            a[r] = (-m * inv_kappa * f[s] + f[r]) / m;
            a[s] = (m * inv_kappa * f[r] + f[s]) / m;
        }
        DeformationSpec::LieSpace { inv_kappa_hat: ik, k, l, gamma } => {
            let (k, l, g) = (k.index(), l.index(), gamma.index());
            a[k] = (f[k] - 2.0 * m * ik * f[g] * v[l] + m * (f[g] * ik).powi(2) * x[k]) / m;
            a[l] = (f[l] + 2.0 * m * ik * f[g] * v[k] + m * (f[g] * ik).powi(2) * x[l]) / m;
            a[g] = (f[g] + m * ik * f[k] * v[l] - m * ik * f[l] * v[k]) / m;
        }
        DeformationSpec::Quadratic { inv_kappa_bar: ib, k, l, gamma } => {
            let (k, l, g) = (k.index(), l.index(), gamma.index());
            a[k] = (f[k] - m * ib * f[g] * (x[l] - ib * f[g] * t * t * x[k]) - 2.0 * m * ib * f[g] * t * v[l]) / m;
            a[l] = (f[l] + m * ib * f[g] * (x[k] + ib * f[g] * t * t * x[l]) + 2.0 * m * ib * f[g] * t * v[k]) / m;
            a[g] = (f[g] + m * ib * f[k] * (t * v[l] + x[l]) - m * ib * f[l] * (t * v[k] + x[k])) / m;
        }
    }
    a
}
