//! Fresnel integrals
//!
//! ```text
//! C(z) = ∫₀ᶻ cos(πt²/2) dt,   S(z) = ∫₀ᶻ sin(πt²/2) dt
//! ```
//!
//! Maclaurin series below `SERIES_LIMIT`; above it the complementary error
//! function continued fraction (modified Lentz), which also covers the
//! asymptotic regime. Both are odd in `z`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

/// Switchover between the power series and the continued fraction.
pub const SERIES_LIMIT: f64 = 1.6;

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 500;
const TINY: f64 = 1e-300;

/// Returns `(C(z), S(z))`.
pub fn fresnel(z: f64) -> (f64, f64) {
    if z.is_nan() {
        return (f64::NAN, f64::NAN);
    }
    if z == 0.0 {
        return (0.0, 0.0);
    }
    let sign = z.signum();
    let az = z.abs();
    if az.is_infinite() {
        return (sign * 0.5, sign * 0.5);
    }
    let (c, s) = if az <= SERIES_LIMIT {
        series(az)
    } else {
        continued_fraction(az)
    };
    (sign * c, sign * s)
}

pub fn fresnel_c(z: f64) -> f64 {
    fresnel(z).0
}

pub fn fresnel_s(z: f64) -> f64 {
    fresnel(z).1
}

fn series(x: f64) -> (f64, f64) {
    // Term n of the combined series for ∫₀ˣ exp(iπt²/2) dt:
    //   (iπ/2)^n x^(2n+1) / (n! (2n+1)),
    // even n feed C, odd n feed S.
    let q = FRAC_PI_2 * x * x;
    let mut c = 0.0;
    let mut s = 0.0;
    let mut fact = x; // x (π x²/2)^n / n!, without sign
    for n in 0..60 {
        let term = fact / (2 * n + 1) as f64;
        let signed = if (n / 2) % 2 == 0 { term } else { -term };
        if n % 2 == 0 {
            c += signed;
        } else {
            s += signed;
        }
        if term < EPS * c.abs().max(s.abs()).max(x * EPS) {
            break;
        }
        fact *= q / (n + 1) as f64;
    }
    (c, s)
}

fn continued_fraction(x: f64) -> (f64, f64) {
    let pix2 = PI * x * x;
    let one = Complex64::new(1.0, 0.0);
    let mut b = Complex64::new(1.0, -pix2);
    let mut cc = Complex64::new(1.0 / TINY, 0.0);
    let mut d = one / b;
    let mut h = d;
    let mut n = -1.0f64;
    for _ in 2..=MAX_ITER {
        n += 2.0;
        let a = -n * (n + 1.0);
        b += 4.0;
        d = one / (d * a + b);
        cc = b + a / cc;
        let del = cc * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < EPS {
            break;
        }
    }
    h *= Complex64::new(x, -x);
    let (sin, cos) = half_pi_square_phase(x);
    let cs = Complex64::new(0.5, 0.5) * (one - Complex64::new(cos, sin) * h);
    (cs.re, cs.im)
}

/// `sin(πx²/2)` and `cos(πx²/2)` with `x²` reduced modulo 4 in extended
/// precision, so the phase stays accurate for large `x`.
pub(crate) fn half_pi_square_phase(x: f64) -> (f64, f64) {
    // x² = hi + lo exactly
    let hi = x * x;
    let lo = x.mul_add(x, -hi);
    let k = (hi / 4.0).floor() * 4.0;
    let r = (hi - k) + lo;
    (FRAC_PI_2 * r).sin_cos()
}
