mod common;

use common::{max_abs, Gen};
use proptest::prelude::*;
use spinsme::operator_core::algebra::{self, c, Operator};
use spinsme::operator_core::state::DensityMatrix;
use spinsme::operator_core::superop::{
    dissipator_apply, liouvillian_build, meas_superop_apply, unvec, vec, Jump,
};
use spinsme::operator_core::{propagate, steady_state};

fn random_generator(
    g: &mut Gen,
    n: usize,
    jumps: usize,
) -> spinsme::operator_core::superop::Superoperator {
    let h = g.hermitian(n);
    let js: Vec<Jump> = (0..jumps)
        .map(|_| Jump::new(0.2 + g.uniform(), g.complex(n)))
        .collect();
    liouvillian_build(&h, &js).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn dissipator_output_is_traceless(seed in any::<u64>(), n in 2usize..5) {
        let mut g = Gen::new(seed);
        let x = g.complex(n);
        let rho = g.density(n);
        let d = dissipator_apply(&x, rho.as_op()).unwrap();
        prop_assert!(d.trace().norm() < 1e-12);
        prop_assert!(algebra::hermiticity_defect(&d) < 1e-12);
    }

    #[test]
    fn measurement_superoperator_is_traceless(seed in any::<u64>(), n in 2usize..5) {
        let mut g = Gen::new(seed);
        let cop = g.complex(n);
        let rho = g.density(n);
        let h = meas_superop_apply(&cop, rho.as_op()).unwrap();
        prop_assert!(h.trace().norm() < 1e-12);
    }

    #[test]
    fn vec_round_trip_is_exact(seed in any::<u64>(), n in 1usize..6) {
        let a = Gen::new(seed).complex(n);
        prop_assert_eq!(unvec(&vec(&a), n).unwrap(), a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn generators_preserve_trace_and_hermiticity(seed in any::<u64>(), n in 2usize..4, t in 0.0f64..10.0) {
        let mut g = Gen::new(seed);
        let l = random_generator(&mut g, n, 2);
        prop_assert!(l.trace_defect() < 1e-10);
        let rho = propagate(&l, &g.density(n), t).unwrap();
        prop_assert!((rho.as_op().trace().re - 1.0).abs() < 1e-9);
        prop_assert!(algebra::hermiticity_defect(rho.as_op()) < 1e-9);
    }

    #[test]
    fn generator_matches_elementwise_action(seed in any::<u64>(), n in 2usize..4) {
        let mut g = Gen::new(seed);
        let h = g.hermitian(n);
        let js: Vec<Jump> = (0..2).map(|_| Jump::new(g.uniform(), g.complex(n))).collect();
        let l = liouvillian_build(&h, &js).unwrap();
        let rho = g.density(n);
        let r = rho.as_op();
        let mut want: Operator = (&h * r - r * &h) * c(0.0, -1.0);
        for j in &js {
            want += dissipator_apply(&j.op, r).unwrap() * c(j.rate, 0.0);
        }
        prop_assert!(max_abs(&(l.apply(r).unwrap() - want)) < 1e-12);
    }

    #[test]
    fn steady_state_matches_long_propagation(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let h = g.hermitian(2);
        let l = liouvillian_build(&h, &[Jump::new(0.5 + g.uniform(), algebra::sigma_minus()), Jump::new(g.uniform(), g.complex(2))]).unwrap();
        let rho0 = g.density(2);
        let ss = steady_state(&l, &rho0).unwrap();
        prop_assert!(l.apply(ss.as_op()).unwrap().norm() < 1e-9);
        let late = propagate(&l, &rho0, 100.0).unwrap();
        prop_assert!(max_abs(&(late.as_op() - ss.as_op())) < 1e-6);
    }
}

#[test]
fn dissipator_examples() {
    let excited = DensityMatrix::basis(2, 1);
    // σ₋ = |0⟩⟨1| lowers level 1 to level 0
    let d = dissipator_apply(&algebra::sigma_minus(), excited.as_op()).unwrap();
    assert!(max_abs(&(d - algebra::diag(&[1.0, -1.0]))) < 1e-15);
    let mut g = Gen::new(7);
    let rho = g.density(3);
    assert!(max_abs(&dissipator_apply(&algebra::identity(3), rho.as_op()).unwrap()) < 1e-15);

    // element-wise oracle on a random 3x3 case
    let x = g.complex(3);
    let r = rho.as_op();
    let got = dissipator_apply(&x, r).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let mut v = c(0.0, 0.0);
            for a in 0..3 {
                for b in 0..3 {
                    v += x[(i, a)] * r[(a, b)] * x[(j, b)].conj();
                    // X†X ρ and ρ X†X
                    v -= 0.5 * x[(b, i)].conj() * x[(b, a)] * r[(a, j)];
                    v -= 0.5 * r[(i, a)] * x[(b, a)].conj() * x[(b, j)];
                }
            }
            assert!((got[(i, j)] - v).norm() < 1e-13);
        }
    }
}

#[test]
fn measurement_superoperator_examples() {
    let mixed = DensityMatrix::maximally_mixed(2);
    let h = meas_superop_apply(&algebra::sigma_z(), mixed.as_op()).unwrap();
    assert!(max_abs(&(h - algebra::sigma_z())) < 1e-15);
    let mut g = Gen::new(3);
    let rho = g.density(2);
    assert!(max_abs(&meas_superop_apply(&algebra::identity(2), rho.as_op()).unwrap()) < 1e-15);
    let bad = rho.as_op() * c(2.0, 0.0);
    assert!(meas_superop_apply(&algebra::sigma_z(), &bad).is_err());
    assert!(meas_superop_apply(&algebra::identity(3), rho.as_op()).is_err());
}

#[test]
fn liouvillian_examples() {
    let zero = liouvillian_build(&algebra::zeros(2), &[]).unwrap();
    assert_eq!(zero.sup_norm(), 0.0);

    // off-diagonal ρ₀₁ evolves with rate −iω − 2Γ
    let (w, gam) = (1.3, 0.4);
    let h = algebra::sigma_z() * c(w / 2.0, 0.0);
    let l = liouvillian_build(&h, &[Jump::new(gam, algebra::sigma_z())]).unwrap();
    let rho = Gen::new(11).density(2);
    let out = l.apply(rho.as_op()).unwrap();
    assert!((out[(0, 1)] - rho.as_op()[(0, 1)] * c(-2.0 * gam, -w)).norm() < 1e-14);

    assert!(liouvillian_build(&algebra::sigma_minus(), &[]).is_err());
    assert!(liouvillian_build(&h, &[Jump::new(-1.0, algebra::sigma_z())]).is_err());
}

#[test]
fn propagate_examples() {
    let l = liouvillian_build(&algebra::zeros(2), &[Jump::new(0.5, algebra::sigma_z())]).unwrap();
    let plus = DensityMatrix::pure(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
    assert_eq!(propagate(&l, &plus, 0.0).unwrap().as_op(), plus.as_op());
    let r = propagate(&l, &plus, 1.0).unwrap();
    assert!((r.as_op()[(0, 1)].re - 0.5 * (-1.0f64).exp()).abs() < 1e-14);
    let ss = steady_state(&l, &plus).unwrap();
    assert!(max_abs(&(ss.as_op() - algebra::diag(&[0.5, 0.5]))) < 1e-12);
}

#[test]
fn partial_trace_and_kron_examples() {
    let mut g = Gen::new(5);
    let a = g.density(2);
    let b = g.density(3);
    let ab = algebra::kron(a.as_op(), b.as_op());
    assert_eq!(ab.shape(), (6, 6));
    assert_eq!(ab[(4, 2)], a.as_op()[(1, 0)] * b.as_op()[(1, 2)]);
    let ra = algebra::partial_trace(&ab, &[2, 3], 1).unwrap();
    assert!(max_abs(&(ra - a.as_op())) < 1e-15);
    let x = g.complex(3);
    assert!(max_abs(&algebra::commutator(&x, &x).unwrap()) == 0.0);
}
