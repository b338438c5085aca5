//! Phase-space geometry: particle state, the four bracket deformations, the
//! Poisson structure matrix and a Jacobi-identity checker.
//!
//! Phase coordinates are always ordered `(x1, x2, x3, p1, p2, p3)`; index `a`
//! in `0..6` refers to that ordering. Axis numbers exposed to users are
//! 1-based.

use std::fmt;
use std::ops::Index;

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

/// Number of phase-space coordinates.
pub const DIM: usize = 6;

/// `∂Π^{ab}/∂ζ^c`, stored as `[c][a][b]`.
pub type StructureGradient = [[[f64; DIM]; DIM]; DIM];

/// A spatial axis. Constructed from the 1-based number used in formulas
/// (`x_1`, `x_2`, `x_3`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Axis(u8);

impl Axis {
    pub const X1: Axis = Axis(0);
    pub const X2: Axis = Axis(1);
    pub const X3: Axis = Axis(2);

    pub fn new(number: usize) -> Result<Self> {
        match number {
            1..=3 => Ok(Axis((number - 1) as u8)),
            _ => Err(Error::InvalidSpec(format!(
                "axis index {number} outside 1..=3"
            ))),
        }
    }

    /// Zero-based position index.
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// One-based axis number.
    #[inline]
    pub fn number(self) -> usize {
        self.0 as usize + 1
    }

    /// Phase index of the position coordinate along this axis.
    #[inline]
    pub fn x(self) -> usize {
        self.index()
    }

    /// Phase index of the momentum coordinate along this axis.
    #[inline]
    pub fn p(self) -> usize {
        self.index() + 3
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// Position, momentum and time of the particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub x: Vec3,
    pub p: Vec3,
    pub t: f64,
}

impl PhaseState {
    pub fn new(x: Vec3, p: Vec3, t: f64) -> Result<Self> {
        let s = PhaseState { x, p, t };
        if !s.is_finite() {
            return Err(Error::NonFinite("phase state"));
        }
        Ok(s)
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.iter().chain(&self.p).all(|v| v.is_finite())
    }

    /// The six phase coordinates `(x, p)`.
    pub fn coords(&self) -> [f64; DIM] {
        let [x1, x2, x3] = self.x;
        let [p1, p2, p3] = self.p;
        [x1, x2, x3, p1, p2, p3]
    }

    pub fn from_coords(z: [f64; DIM], t: f64) -> Self {
        PhaseState {
            x: [z[0], z[1], z[2]],
            p: [z[3], z[4], z[5]],
            t,
        }
    }
}

/// Which bracket geometry is active.
///
/// Deformation strengths are stored as inverses (`1/κ`, `1/κ̂`, `1/κ̄`) so the
/// undeformed limit is exactly `0.0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeformationSpec {
    Classical,
    /// `{x_i, x_j} = θ_ij`, θ constant and antisymmetric.
    Canonical { theta: Mat3 },
    /// `{x_ρ, x_τ} = t/κ`.
    LieTime { inv_kappa: f64, rho: Axis, tau: Axis },
    /// `{x_k, x_γ} = x_l/κ̂`, `{x_l, x_γ} = -x_k/κ̂`, extended to momenta.
    LieSpace {
        inv_kappa_hat: f64,
        k: Axis,
        l: Axis,
        gamma: Axis,
    },
    /// Same as [`DeformationSpec::LieSpace`] with `1/κ̂` replaced by `t/κ̄`.
    Quadratic {
        inv_kappa_bar: f64,
        k: Axis,
        l: Axis,
        gamma: Axis,
    },
}

impl DeformationSpec {
    pub fn canonical(theta: Mat3) -> Result<Self> {
        let spec = DeformationSpec::Canonical { theta };
        spec.validate()?;
        Ok(spec)
    }

    /// Canonical deformation from its three independent entries.
    pub fn canonical_from_components(theta12: f64, theta13: f64, theta23: f64) -> Result<Self> {
        Self::canonical([
            [0.0, theta12, theta13],
            [-theta12, 0.0, theta23],
            [-theta13, -theta23, 0.0],
        ])
    }

    pub fn lie_time(inv_kappa: f64, rho: usize, tau: usize) -> Result<Self> {
        let spec = DeformationSpec::LieTime {
            inv_kappa,
            rho: Axis::new(rho)?,
            tau: Axis::new(tau)?,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn lie_space(inv_kappa_hat: f64, k: usize, l: usize, gamma: usize) -> Result<Self> {
        let spec = DeformationSpec::LieSpace {
            inv_kappa_hat,
            k: Axis::new(k)?,
            l: Axis::new(l)?,
            gamma: Axis::new(gamma)?,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn quadratic(inv_kappa_bar: f64, k: usize, l: usize, gamma: usize) -> Result<Self> {
        let spec = DeformationSpec::Quadratic {
            inv_kappa_bar,
            k: Axis::new(k)?,
            l: Axis::new(l)?,
            gamma: Axis::new(gamma)?,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn name(&self) -> &'static str {
        match self {
            DeformationSpec::Classical => "classical",
            DeformationSpec::Canonical { .. } => "canonical",
            DeformationSpec::LieTime { .. } => "lie_time",
            DeformationSpec::LieSpace { .. } => "lie_space",
            DeformationSpec::Quadratic { .. } => "quadratic",
        }
    }

    /// The inverse deformation strength, `None` for classical and canonical.
    pub fn inverse_strength(&self) -> Option<f64> {
        match *self {
            DeformationSpec::LieTime { inv_kappa, .. } => Some(inv_kappa),
            DeformationSpec::LieSpace { inv_kappa_hat, .. } => Some(inv_kappa_hat),
            DeformationSpec::Quadratic { inv_kappa_bar, .. } => Some(inv_kappa_bar),
            _ => None,
        }
    }

    /// Same geometry with a different inverse strength. Classical and
    /// canonical specs are returned unchanged.
    pub fn with_inverse_strength(&self, value: f64) -> Self {
        let mut out = *self;
        match &mut out {
            DeformationSpec::LieTime { inv_kappa, .. } => *inv_kappa = value,
            DeformationSpec::LieSpace { inv_kappa_hat, .. } => *inv_kappa_hat = value,
            DeformationSpec::Quadratic { inv_kappa_bar, .. } => *inv_kappa_bar = value,
            _ => {}
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DeformationSpec::Classical => Ok(()),
            DeformationSpec::Canonical { theta } => {
                for i in 0..3 {
                    for j in 0..3 {
                        if !theta[i][j].is_finite() {
                            return Err(Error::InvalidSpec("theta must be finite".into()));
                        }
                        if theta[i][j] != -theta[j][i] {
                            return Err(Error::InvalidSpec(format!(
                                "theta is not antisymmetric at ({}, {})",
                                i + 1,
                                j + 1
                            )));
                        }
                    }
                }
                Ok(())
            }
            DeformationSpec::LieTime { inv_kappa, rho, tau } => {
                finite_strength(inv_kappa, "1/kappa")?;
                if rho == tau {
                    return Err(Error::InvalidSpec(format!(
                        "rho and tau must differ (both {rho})"
                    )));
                }
                Ok(())
            }
            DeformationSpec::LieSpace {
                inv_kappa_hat: s,
                k,
                l,
                gamma,
            }
            | DeformationSpec::Quadratic {
                inv_kappa_bar: s,
                k,
                l,
                gamma,
            } => {
                finite_strength(s, "inverse deformation strength")?;
                if k == l || k == gamma || l == gamma {
                    return Err(Error::InvalidSpec(format!(
                        "k, l, gamma must be pairwise distinct (got {k}, {l}, {gamma})"
                    )));
                }
                Ok(())
            }
        }
    }

    /// The Poisson structure matrix at `state`.
    pub fn structure_matrix(&self, state: &PhaseState) -> Result<StructureMatrix> {
        build_matrix(self, state, true)
    }

    /// Analytic derivatives of the structure matrix at `state`.
    pub fn structure_gradient(&self, state: &PhaseState) -> Result<StructureGradient> {
        build_gradient(self, state, true)
    }
}

fn finite_strength(v: f64, what: &str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("{what} must be finite")))
    }
}

/// Antisymmetric 6×6 matrix of coordinate brackets `{ζ^a, ζ^b}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureMatrix([[f64; DIM]; DIM]);

impl StructureMatrix {
    fn canonical_pairs() -> Self {
        let mut m = StructureMatrix([[0.0; DIM]; DIM]);
        for i in 0..3 {
            m.set(i, i + 3, 1.0);
        }
        m
    }

    /// Sets `{ζ^a, ζ^b} = v` and `{ζ^b, ζ^a} = -v`.
    fn set(&mut self, a: usize, b: usize, v: f64) {
        if v != 0.0 {
            self.0[a][b] = v;
            self.0[b][a] = -v;
        }
    }

    pub fn entry(&self, a: usize, b: usize) -> f64 {
        self.0[a][b]
    }

    pub fn as_array(&self) -> &[[f64; DIM]; DIM] {
        &self.0
    }

    pub fn is_antisymmetric(&self) -> bool {
        (0..DIM).all(|a| (0..DIM).all(|b| self.0[a][b] + self.0[b][a] == 0.0))
    }

    /// `Π v`.
    pub fn apply(&self, v: &[f64; DIM]) -> [f64; DIM] {
        let mut out = [0.0; DIM];
        for (o, row) in out.iter_mut().zip(&self.0) {
            *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }

    /// `uᵀ Π v`.
    pub fn contract(&self, u: &[f64; DIM], v: &[f64; DIM]) -> f64 {
        let pv = self.apply(v);
        u.iter().zip(&pv).map(|(a, b)| a * b).sum()
    }
}

impl Index<(usize, usize)> for StructureMatrix {
    type Output = f64;

    fn index(&self, (a, b): (usize, usize)) -> &f64 {
        &self.0[a][b]
    }
}

/// Anything that supplies a Poisson structure together with its analytic
/// derivatives.
pub trait PoissonStructure {
    fn structure_matrix(&self, state: &PhaseState) -> Result<StructureMatrix>;
    fn structure_gradient(&self, state: &PhaseState) -> Result<StructureGradient>;
}

impl PoissonStructure for DeformationSpec {
    fn structure_matrix(&self, state: &PhaseState) -> Result<StructureMatrix> {
        DeformationSpec::structure_matrix(self, state)
    }

    fn structure_gradient(&self, state: &PhaseState) -> Result<StructureGradient> {
        DeformationSpec::structure_gradient(self, state)
    }
}

/// A deformation with the `{p, x_γ}` momentum brackets dropped. For the
/// Lie-to-space and quadratic geometries this breaks the Jacobi identity;
/// other specs are unaffected. Used to check that the Jacobi checker detects
/// broken closures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WithoutMomentumExtension(pub DeformationSpec);

impl PoissonStructure for WithoutMomentumExtension {
    fn structure_matrix(&self, state: &PhaseState) -> Result<StructureMatrix> {
        build_matrix(&self.0, state, false)
    }

    fn structure_gradient(&self, state: &PhaseState) -> Result<StructureGradient> {
        build_gradient(&self.0, state, false)
    }
}

/// Coupling strength multiplying the linear brackets of the Lie-to-space
/// and quadratic geometries at time `t`.
fn rotational_strength(spec: &DeformationSpec, t: f64) -> Option<(f64, Axis, Axis, Axis)> {
    match *spec {
        DeformationSpec::LieSpace {
            inv_kappa_hat,
            k,
            l,
            gamma,
        } => Some((inv_kappa_hat, k, l, gamma)),
        DeformationSpec::Quadratic {
            inv_kappa_bar,
            k,
            l,
            gamma,
        } => Some((t * inv_kappa_bar, k, l, gamma)),
        _ => None,
    }
}

fn build_matrix(
    spec: &DeformationSpec,
    state: &PhaseState,
    momentum_extension: bool,
) -> Result<StructureMatrix> {
    spec.validate()?;
    if !state.is_finite() {
        return Err(Error::NonFinite("phase state"));
    }
    let mut m = StructureMatrix::canonical_pairs();
    match *spec {
        DeformationSpec::Classical => {}
        DeformationSpec::Canonical { theta } => {
            for i in 0..3 {
                for j in (i + 1)..3 {
                    m.set(i, j, theta[i][j]);
                }
            }
        }
        DeformationSpec::LieTime { inv_kappa, rho, tau } => {
            m.set(rho.x(), tau.x(), state.t * inv_kappa);
        }
        DeformationSpec::LieSpace { .. } | DeformationSpec::Quadratic { .. } => {
            let (s, k, l, g) = rotational_strength(spec, state.t).expect("rotational variant");
            if s != 0.0 {
                m.set(k.x(), g.x(), s * state.x[l.index()]);
                m.set(l.x(), g.x(), -s * state.x[k.index()]);
                if momentum_extension {
                    m.set(k.p(), g.x(), s * state.p[l.index()]);
                    m.set(l.p(), g.x(), -s * state.p[k.index()]);
                }
            }
        }
    }
    Ok(m)
}

fn build_gradient(
    spec: &DeformationSpec,
    state: &PhaseState,
    momentum_extension: bool,
) -> Result<StructureGradient> {
    spec.validate()?;
    if !state.is_finite() {
        return Err(Error::NonFinite("phase state"));
    }
    let mut d = [[[0.0; DIM]; DIM]; DIM];
    // Only the rotational geometries have coordinate-dependent entries.
    if let Some((s, k, l, g)) = rotational_strength(spec, state.t) {
        let mut put = |c: usize, a: usize, b: usize, v: f64| {
            d[c][a][b] = v;
            d[c][b][a] = -v;
        };
        put(l.x(), k.x(), g.x(), s);
        put(k.x(), l.x(), g.x(), -s);
        if momentum_extension {
            put(l.p(), k.p(), g.x(), s);
            put(k.p(), l.p(), g.x(), -s);
        }
    }
    Ok(d)
}

/// Free-function form of [`DeformationSpec::structure_matrix`].
pub fn structure_matrix(spec: &DeformationSpec, state: &PhaseState) -> Result<StructureMatrix> {
    spec.structure_matrix(state)
}

/// A smooth function on phase space with an analytic gradient.
pub trait ScalarField {
    fn value(&self, state: &PhaseState) -> f64;
    fn gradient(&self, state: &PhaseState) -> [f64; DIM];
}

impl<F: ScalarField + ?Sized> ScalarField for &F {
    fn value(&self, state: &PhaseState) -> f64 {
        (**self).value(state)
    }

    fn gradient(&self, state: &PhaseState) -> [f64; DIM] {
        (**self).gradient(state)
    }
}

/// The coordinate function `ζ^a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Coordinate(usize);

impl Coordinate {
    pub fn new(index: usize) -> Result<Self> {
        if index < DIM {
            Ok(Coordinate(index))
        } else {
            Err(Error::InvalidInput(format!("phase index {index} outside 0..6")))
        }
    }

    pub fn x(axis: Axis) -> Self {
        Coordinate(axis.x())
    }

    pub fn p(axis: Axis) -> Self {
        Coordinate(axis.p())
    }

    pub fn index(self) -> usize {
        self.0
    }
}

impl ScalarField for Coordinate {
    fn value(&self, state: &PhaseState) -> f64 {
        state.coords()[self.0]
    }

    fn gradient(&self, _state: &PhaseState) -> [f64; DIM] {
        let mut g = [0.0; DIM];
        g[self.0] = 1.0;
        g
    }
}

/// Pointwise product `f·g`.
#[derive(Debug, Clone, Copy)]
pub struct Product<F, G>(pub F, pub G);

impl<F: ScalarField, G: ScalarField> ScalarField for Product<F, G> {
    fn value(&self, state: &PhaseState) -> f64 {
        self.0.value(state) * self.1.value(state)
    }

    fn gradient(&self, state: &PhaseState) -> [f64; DIM] {
        let (fv, gv) = (self.0.value(state), self.1.value(state));
        let (fg, gg) = (self.0.gradient(state), self.1.gradient(state));
        std::array::from_fn(|a| fg[a] * gv + fv * gg[a])
    }
}

/// `{f, g} = Π^{ab} ∂_a f ∂_b g`.
pub fn bracket<P, F, G>(structure: &P, f: &F, g: &G, state: &PhaseState) -> Result<f64>
where
    P: PoissonStructure + ?Sized,
    F: ScalarField + ?Sized,
    G: ScalarField + ?Sized,
{
    let df = f.gradient(state);
    let dg = g.gradient(state);
    if df.iter().chain(&dg).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("field gradient"));
    }
    Ok(structure.structure_matrix(state)?.contract(&df, &dg))
}

/// Largest Jacobiator `|{{ζ^a,ζ^b},ζ^c} + cyclic|` over all coordinate
/// triples. Uses the analytic derivatives of Π, so an exact Poisson structure
/// yields zero up to rounding.
pub fn jacobi_residual<P: PoissonStructure + ?Sized>(structure: &P, state: &PhaseState) -> Result<f64> {
    let pi = structure.structure_matrix(state)?;
    let d = structure.structure_gradient(state)?;
    let pi = pi.as_array();
    // {Π^{ab}, ζ^c} = ∂_e Π^{ab} Π^{ec}
    let inner = |a: usize, b: usize, c: usize| -> f64 { (0..DIM).map(|e| d[e][a][b] * pi[e][c]).sum() };
    let mut worst = 0.0f64;
    for a in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                let j = inner(a, b, c) + inner(b, c, a) + inner(c, a, b);
                worst = worst.max(j.abs());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(x: Vec3, p: Vec3, t: f64) -> PhaseState {
        PhaseState::new(x, p, t).unwrap()
    }

    #[test]
    fn canonical_entries() {
        let spec = DeformationSpec::canonical_from_components(0.1, 0.0, 0.0).unwrap();
        let pi = spec.structure_matrix(&state([1.0, 2.0, 3.0], [0.5; 3], 4.0)).unwrap();
        assert_eq!(pi[(0, 1)], 0.1);
        assert_eq!(pi[(1, 0)], -0.1);
        assert_eq!(pi[(0, 3)], 1.0);
        assert_eq!(pi[(3, 0)], -1.0);
        assert!(pi.is_antisymmetric());
    }

    #[test]
    fn lie_time_vanishes_at_t_zero() {
        let spec = DeformationSpec::lie_time(0.5, 1, 2).unwrap();
        let s = state([1.0, -2.0, 3.0], [0.1, 0.2, 0.3], 0.0);
        let classical = DeformationSpec::Classical.structure_matrix(&s).unwrap();
        assert_eq!(spec.structure_matrix(&s).unwrap(), classical);
        let later = spec.structure_matrix(&state([0.0; 3], [0.0; 3], 2.0)).unwrap();
        assert_eq!(later[(0, 1)], 1.0);
    }

    #[test]
    fn lie_space_entries() {
        let spec = DeformationSpec::lie_space(0.1, 1, 2, 3).unwrap();
        let pi = spec
            .structure_matrix(&state([1.0, 2.0, 0.0], [3.0, 4.0, 0.0], 0.0))
            .unwrap();
        approx::assert_relative_eq!(pi[(0, 2)], 0.2, max_relative = 1e-15);
        approx::assert_relative_eq!(pi[(1, 2)], -0.1, max_relative = 1e-15);
        approx::assert_relative_eq!(pi[(3, 2)], 0.4, max_relative = 1e-15);
        approx::assert_relative_eq!(pi[(4, 2)], -0.3, max_relative = 1e-15);
        assert_eq!(pi[(0, 1)], 0.0);
        assert!(pi.is_antisymmetric());
    }

    #[test]
    fn rejects_repeated_axes() {
        assert!(DeformationSpec::lie_time(1.0, 2, 2).is_err());
        assert!(DeformationSpec::lie_space(1.0, 1, 2, 1).is_err());
        assert!(DeformationSpec::quadratic(1.0, 3, 3, 1).is_err());
        assert!(DeformationSpec::lie_space(1.0, 1, 2, 4).is_err());
        assert!(DeformationSpec::canonical([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0; 3]]).is_err());

        let bad = DeformationSpec::LieSpace {
            inv_kappa_hat: 1.0,
            k: Axis::X1,
            l: Axis::X1,
            gamma: Axis::X3,
        };
        let s = state([0.0; 3], [0.0; 3], 0.0);
        assert!(matches!(bad.structure_matrix(&s), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn coordinate_brackets() {
        let s = state([0.3, 4.0, -1.0], [1.0, 2.0, 3.0], 1.5);
        let x1 = Coordinate::x(Axis::X1);
        let p1 = Coordinate::p(Axis::X1);
        let x3 = Coordinate::x(Axis::X3);
        assert_eq!(bracket(&DeformationSpec::Classical, &x1, &p1, &s).unwrap(), 1.0);
        let spec = DeformationSpec::lie_space(0.25, 1, 2, 3).unwrap();
        assert_eq!(bracket(&spec, &x1, &x3, &s).unwrap(), 1.0);
        assert_eq!(bracket(&spec, &x1, &x1, &s).unwrap(), 0.0);
    }

    struct Broken;
    impl ScalarField for Broken {
        fn value(&self, _: &PhaseState) -> f64 {
            0.0
        }
        fn gradient(&self, _: &PhaseState) -> [f64; DIM] {
            [f64::NAN; DIM]
        }
    }

    #[test]
    fn non_finite_gradient_is_an_error() {
        let s = state([0.0; 3], [0.0; 3], 0.0);
        let x1 = Coordinate::x(Axis::X1);
        assert!(bracket(&DeformationSpec::Classical, &x1, &Broken, &s).is_err());
    }

    #[test]
    fn non_finite_state_rejected() {
        assert!(PhaseState::new([f64::NAN, 0.0, 0.0], [0.0; 3], 0.0).is_err());
        assert!(PhaseState::new([0.0; 3], [0.0; 3], f64::INFINITY).is_err());
    }

    #[test]
    fn classical_jacobi_is_exactly_zero() {
        let s = state([1.0, 2.0, 3.0], [4.0, 5.0, 6.0], 7.0);
        assert_eq!(jacobi_residual(&DeformationSpec::Classical, &s).unwrap(), 0.0);
    }

    #[test]
    fn mutant_breaks_jacobi() {
        let spec = DeformationSpec::lie_space(0.1, 1, 2, 3).unwrap();
        let s = state([0.7, -1.2, 0.4], [0.9, 1.3, -0.5], 0.0);
        assert!(jacobi_residual(&spec, &s).unwrap() < 1e-15);
        // (x_k, x_γ, p_l): {x_k,x_γ} = s x_l gives {s x_l, p_l} = s while the
        // other two cyclic terms vanish without the momentum extension.
        let r = jacobi_residual(&WithoutMomentumExtension(spec), &s).unwrap();
        approx::assert_relative_eq!(r, 0.1, max_relative = 1e-12);
    }
}
