mod common;

use std::collections::BTreeMap;

use common::reference;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spinsme::operator_core::InitialState;
use spinsme::sme_engine::{simulate_ensemble, SimParams};
use spinsme::spin_bath::{
    coherence_kernel, enumerate_sectors, quadrature_sectors, sample_theta, BathSpec, DephasingClass,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn discrete_weights_form_a_distribution(
        spins in proptest::collection::vec((-3.0f64..3.0, 0.0f64..=1.0), 1..8)
    ) {
        let (g, a): (Vec<f64>, Vec<f64>) = spins.into_iter().unzip();
        let spec = BathSpec::Discrete { omega: vec![0.0; g.len()], g, a };
        let s = enumerate_sectors(&spec).unwrap();
        prop_assert!(s.iter().all(|x| x.weight >= 0.0));
        prop_assert!((s.iter().map(|x| x.weight).sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn quadrature_weights_and_moments(v in 0.1f64..5.0, n in 3usize..60, p in 0usize..3, t in 0.2f64..4.0) {
        let spec = match p {
            0 => BathSpec::GaussianStatic { v },
            1 => BathSpec::GaussianScaled { v, p: DephasingClass::Linear },
            _ => BathSpec::GaussianScaled { v, p: DephasingClass::ThreeHalves },
        };
        let s = quadrature_sectors(&spec, t, n).unwrap();
        let w: f64 = s.iter().map(|x| x.weight).sum();
        let m1: f64 = s.iter().map(|x| x.weight * x.theta).sum();
        let m2: f64 = s.iter().map(|x| x.weight * x.theta * x.theta).sum();
        prop_assert!((w - 1.0).abs() < 1e-10);
        prop_assert!(m1.abs() < 1e-10);
        prop_assert!((m2 - spec.gaussian_variance(t).unwrap()).abs() < 1e-10 * (1.0 + m2));
    }
}

#[test]
fn sampler_matches_enumeration() {
    let spec = BathSpec::Discrete {
        g: vec![1.0, 2.0, 3.0],
        a: vec![0.2, 0.5, 0.9],
        omega: vec![0.0; 3],
    };
    let exact = enumerate_sectors(&spec).unwrap();
    let m = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut hist: BTreeMap<i64, usize> = BTreeMap::new();
    for _ in 0..m {
        let th = sample_theta(&spec, 1.0, &mut rng).unwrap();
        *hist.entry(th.round() as i64).or_default() += 1;
    }
    let bound = 4.0 / (m as f64).sqrt();
    for s in &exact {
        let freq = *hist.get(&(s.theta.round() as i64)).unwrap_or(&0) as f64 / m as f64;
        assert!(
            (freq - s.weight).abs() < bound,
            "θ = {}: {freq} vs {}",
            s.theta,
            s.weight
        );
    }
}

#[test]
fn kernel_matches_sector_average() {
    let mut prev = f64::INFINITY;
    for n in [5, 11, 21, 41] {
        let spec = BathSpec::GaussianStatic { v: 2.0 };
        let s = quadrature_sectors(&spec, 1.0, n).unwrap();
        let mut worst: f64 = 0.0;
        for k in 0..=20 {
            let t = 0.1 * k as f64;
            let (re, im) = s.iter().fold((0.0, 0.0), |(re, im), x| {
                (
                    re + x.weight * (2.0 * x.theta * t).cos(),
                    im - x.weight * (2.0 * x.theta * t).sin(),
                )
            });
            let kern = coherence_kernel(&spec, t).unwrap();
            assert!(im.abs() < 1e-10 && kern.im == 0.0);
            worst = worst.max((re - kern.re).abs());
        }
        assert!(worst <= prev + 1e-15, "n = {n}: {worst} > {prev}");
        prev = worst;
    }
    assert!(prev < 1e-10);
}

#[test]
fn spin_frequencies_do_not_enter() {
    let cold = BathSpec::Discrete {
        g: vec![2.0, 1.0],
        a: vec![0.5, 0.3],
        omega: vec![0.0, 0.0],
    };
    let hot = BathSpec::Discrete {
        g: vec![2.0, 1.0],
        a: vec![0.5, 0.3],
        omega: vec![7.0, 7.0],
    };
    let (_, _, dynamics) = reference(&cold, true);
    let params = SimParams {
        t_end: 0.5,
        trajectories: 8,
        seed: 3,
        ..SimParams::default()
    };
    let rho0 = InitialState::Plus.qubit();
    let a = simulate_ensemble(
        &dynamics,
        &enumerate_sectors(&cold).unwrap(),
        &rho0,
        &params,
        true,
    )
    .unwrap();
    let b = simulate_ensemble(
        &dynamics,
        &enumerate_sectors(&hot).unwrap(),
        &rho0,
        &params,
        true,
    )
    .unwrap();
    let diff = a
        .mean
        .iter()
        .zip(&b.mean)
        .map(|(x, y)| common::max_abs(&(x - y)))
        .fold(0.0, f64::max);
    assert!(diff < 1e-12);
    assert_eq!(a.records, b.records);
}
