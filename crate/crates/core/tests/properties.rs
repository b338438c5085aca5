mod common;

use ncmech::phasespace::{Coordinate, Product, StructureGradient, DIM};
use ncmech::{
    bracket, hamilton_rhs, hamilton_rhs_explicit, jacobi_residual, newton_accel, structure_matrix, DeformationSpec,
    ForceModel, PhaseState, WithoutMomentumExtension,
};
use proptest::prelude::*;

fn coord() -> impl Strategy<Value = f64> {
    -10.0f64..10.0
}

fn state() -> impl Strategy<Value = PhaseState> {
    (prop::array::uniform3(coord()), prop::array::uniform3(coord()), 0.0f64..10.0)
        .prop_map(|(x, p, t)| PhaseState::new(x, p, t).unwrap())
}

fn axes() -> impl Strategy<Value = [usize; 3]> {
    Just([1, 2, 3]).prop_shuffle().prop_map(|v| [v[0], v[1], v[2]])
}

fn spec() -> impl Strategy<Value = DeformationSpec> {
    prop_oneof![
        Just(DeformationSpec::Classical),
        prop::array::uniform3(-2.0f64..2.0)
            .prop_map(|t| DeformationSpec::canonical_from_components(t[0], t[1], t[2]).unwrap()),
        (-1.0f64..1.0, axes()).prop_map(|(s, a)| DeformationSpec::lie_time(s, a[0], a[1]).unwrap()),
        (-1.0f64..1.0, axes()).prop_map(|(s, a)| DeformationSpec::lie_space(s, a[0], a[1], a[2]).unwrap()),
        (-1.0f64..1.0, axes()).prop_map(|(s, a)| DeformationSpec::quadratic(s, a[0], a[1], a[2]).unwrap()),
    ]
}

fn model() -> impl Strategy<Value = ForceModel> {
    (0.2f64..5.0, prop::array::uniform3(-3.0f64..3.0)).prop_map(|(m, f)| ForceModel::new(m, f).unwrap())
}

/// Central differences of the structure matrix in every phase-space
/// direction, indexed like the analytic gradient.
fn numeric_gradient(spec: &DeformationSpec, state: &PhaseState) -> StructureGradient {
    let h = 1e-6;
    let z = state.coords();
    let mut d = [[[0.0; DIM]; DIM]; DIM];
    for (c, dc) in d.iter_mut().enumerate() {
        let mut plus = z;
        let mut minus = z;
        plus[c] += h;
        minus[c] -= h;
        let up = structure_matrix(spec, &PhaseState::from_coords(plus, state.t)).unwrap();
        let down = structure_matrix(spec, &PhaseState::from_coords(minus, state.t)).unwrap();
        for a in 0..DIM {
            for b in 0..DIM {
                dc[a][b] = (up[(a, b)] - down[(a, b)]) / (2.0 * h);
            }
        }
    }
    d
}

/// Jacobiator of coordinate triples built from a supplied gradient.
fn jacobiator(pi: &[[f64; DIM]; DIM], d: &StructureGradient) -> f64 {
    let term = |a: usize, b: usize, c: usize| (0..DIM).map(|e| d[e][a][b] * pi[e][c]).sum::<f64>();
    let mut worst = 0.0f64;
    for a in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                worst = worst.max((term(a, b, c) + term(b, c, a) + term(c, a, b)).abs());
            }
        }
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn structure_is_antisymmetric(spec in spec(), s in state()) {
        let m = structure_matrix(&spec, &s).unwrap();
        prop_assert!(m.is_antisymmetric());
        for a in 0..DIM {
            for b in 0..DIM {
                prop_assert_eq!(m[(a, b)], -m[(b, a)]);
            }
        }
    }

    #[test]
    fn jacobi_identity_holds(spec in spec(), s in state()) {
        prop_assert!(jacobi_residual(&spec, &s).unwrap() <= 1e-12);
    }

    #[test]
    fn analytic_gradient_matches_differences(spec in spec(), s in state()) {
        let analytic = spec.structure_gradient(&s).unwrap();
        let numeric = numeric_gradient(&spec, &s);
        for c in 0..DIM {
            for a in 0..DIM {
                for b in 0..DIM {
                    prop_assert!((analytic[c][a][b] - numeric[c][a][b]).abs() < 1e-8);
                }
            }
        }
        let pi = structure_matrix(&spec, &s).unwrap();
        prop_assert!(jacobiator(pi.as_array(), &numeric) < 1e-6);
    }

    #[test]
    fn dropping_momentum_extension_breaks_closure(
        inv in 0.05f64..1.0,
        axes in axes(),
        quadratic in any::<bool>(),
        s in state(),
    ) {
        let spec = if quadratic {
            DeformationSpec::quadratic(inv, axes[0], axes[1], axes[2]).unwrap()
        } else {
            DeformationSpec::lie_space(inv, axes[0], axes[1], axes[2]).unwrap()
        };
        let strength = if quadratic { inv * s.t } else { inv };
        let momentum = s.p[axes[0] - 1].abs().max(s.p[axes[1] - 1].abs());
        prop_assume!(strength * strength * momentum > 1e-2);
        prop_assert!(jacobi_residual(&WithoutMomentumExtension(spec), &s).unwrap() > 1e-3);
    }

    #[test]
    fn zero_strength_is_exactly_classical(spec in spec(), s in state(), m in model()) {
        let limit = spec.with_inverse_strength(0.0);
        if spec.inverse_strength().is_some() {
            prop_assert_eq!(
                structure_matrix(&limit, &s).unwrap(),
                structure_matrix(&DeformationSpec::Classical, &s).unwrap()
            );
            prop_assert_eq!(
                hamilton_rhs(&limit, &m, &s).unwrap(),
                hamilton_rhs(&DeformationSpec::Classical, &m, &s).unwrap()
            );
        }
    }

    #[test]
    fn leibniz_rule(spec in spec(), s in state(), i in 0usize..DIM, j in 0usize..DIM, k in 0usize..DIM) {
        let (f, g, h) = (Coordinate::new(i).unwrap(), Coordinate::new(j).unwrap(), Coordinate::new(k).unwrap());
        let z = s.coords();
        let lhs = bracket(&spec, &Product(f, g), &h, &s).unwrap();
        let rhs = z[i] * bracket(&spec, &g, &h, &s).unwrap() + z[j] * bracket(&spec, &f, &h, &s).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn flow_paths_agree(spec in spec(), s in state(), m in model()) {
        let (xa, pa) = hamilton_rhs(&spec, &m, &s).unwrap();
        let (xb, pb) = hamilton_rhs_explicit(&spec, &m, &s).unwrap();
        for i in 0..3 {
            prop_assert!((xa[i] - xb[i]).abs() <= 1e-13 * (1.0 + xa[i].abs()));
            prop_assert!((pa[i] - pb[i]).abs() <= 1e-13 * (1.0 + pa[i].abs()));
        }
    }

    #[test]
    fn flow_is_tangent_to_energy_levels(spec in spec(), s in state(), m in model()) {
        let (xd, pd) = hamilton_rhs(&spec, &m, &s).unwrap();
        let dh_x = m.force.map(|f| -f);
        let dh_p = s.p.map(|p| p / m.mass);
        let rate: f64 = (0..3).map(|i| dh_x[i] * xd[i] + dh_p[i] * pd[i]).sum();
        let scale: f64 = (0..3).map(|i| (dh_x[i] * xd[i]).abs() + (dh_p[i] * pd[i]).abs()).sum();
        prop_assert!(rate.abs() <= 1e-13 * (1.0 + scale));
    }

    #[test]
    fn newton_systems_match_reference(
        spec in spec(),
        m in model(),
        x in prop::array::uniform3(coord()),
        v in prop::array::uniform3(coord()),
        t in 0.0f64..10.0,
    ) {
        let got = newton_accel(&spec, &m, &x, &v, t).unwrap();
        let want = common::newton_reference(&spec, m.mass, m.force, x, v, t);
        for i in 0..3 {
            prop_assert!((got[i] - want[i]).abs() <= 1e-10 * (1.0 + want[i].abs()), "axis {i}: {got:?} vs {want:?}");
        }
    }
}
