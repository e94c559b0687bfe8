mod common;

use common::{reference, Gen};
use spinsme::operator_core::algebra::{self, c, Operator, C64};
use spinsme::operator_core::superop::{liouvillian_build, Jump, Superoperator};
use spinsme::operator_core::{DensityMatrix, InitialState};
use spinsme::sme_engine::{run_stepper, Scheme, Stepper, TrajectoryRecord, WienerSource};
use spinsme::spectroscopy::{
    build_measurement_operator, cross_correlation, half_transform, joint_sectors,
    periodogram_spectrum, spectrum, PairModel, Regression, Rescale, StationarySector, TauGrid,
    WelchSettings,
};
use spinsme::spin_bath::{enumerate_sectors, BathSpec};

fn eigenvalues(l: &Superoperator) -> Vec<C64> {
    let (_, t) = l.matrix().clone().schur().unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Slowest nonzero decay rate of a generator.
fn gap(l: &Superoperator) -> f64 {
    eigenvalues(l)
        .iter()
        .map(|z| -z.re)
        .filter(|&r| r > 1e-8)
        .fold(f64::INFINITY, f64::min)
}

fn single(l: Superoperator, rho0: &DensityMatrix, eta_kappa: f64) -> Regression {
    Regression::new(
        vec![StationarySector::new(1.0, l, rho0).unwrap()],
        eta_kappa,
    )
    .unwrap()
}

fn dephasing(omega: f64, gamma: f64) -> Superoperator {
    liouvillian_build(
        &(algebra::sigma_z() * c(omega / 2.0, 0.0)),
        &[Jump::new(gamma, algebra::sigma_z())],
    )
    .unwrap()
}

#[test]
fn measurement_operator_reference_values() {
    let (m, f, _) = reference(&BathSpec::single_spin(2.0, 0.5), false);
    let (cop, x) = build_measurement_operator(&m, &f);
    // (α/κ)(i(1 + Λ) + κΛ²)·e^{iπ/2} with Λ = ∓0.0046875
    for (k, l) in [(0, -0.0046875f64), (1, 0.0046875)] {
        let want = c(-(1.0 + l) / 10.0, l * l);
        assert!((cop[(k, k)] - want).norm() < 1e-15);
        assert!((x[(k, k)].re - 2.0 * want.re).abs() < 1e-15);
    }
    assert!((cop[(0, 0)].re + 0.09953125).abs() < 1e-15);
    assert!((cop[(1, 1)].re + 0.10046875).abs() < 1e-15);
    assert!((cop[(0, 0)].im - 2.197265625e-5).abs() < 1e-15);
}

#[test]
fn zero_measurement_gives_zero_correlation() {
    let l = dephasing(3.0, 0.4);
    let reg = single(l, &InitialState::Plus.qubit(), 5.0);
    let z = algebra::zeros(2);
    let corr = reg
        .correlation(&z, &z, TauGrid::new(0.05, 100).unwrap())
        .unwrap();
    assert!(corr.r_tilde.iter().all(|&r| r == 0.0));
    assert_eq!(corr.dc_weight, 0.0);
    assert_eq!(corr.delta_weight, 10.0);
}

#[test]
fn zero_lag_matches_direct_formula() {
    let mut g = Gen::new(31);
    let l = liouvillian_build(
        &g.hermitian(3),
        &[Jump::new(1.0, g.complex(3)), Jump::new(0.7, g.complex(3))],
    )
    .unwrap();
    let rho0 = g.density(3);
    let eta_kappa = 0.8;
    let reg = single(l, &rho0, eta_kappa);
    let cop = g.complex(3);
    let x = &cop + cop.adjoint();
    let corr = reg
        .correlation(&cop, &x, TauGrid::new(0.1, 4).unwrap())
        .unwrap();
    let rho = reg.mixed_state();
    let y = &cop * &rho + &rho * cop.adjoint();
    let mean = (&x * &rho).trace().re;
    let want = (2.0 * eta_kappa).powi(2) * ((&x * y).trace().re - mean * mean);
    assert!(
        (corr.at_zero() - want).abs() < 1e-12,
        "{} vs {want}",
        corr.at_zero()
    );
    assert!(corr.dc_weight.abs() < 1e-12);
}

#[test]
fn dephasing_envelope_rate_matches_generator_eigenvalue() {
    let (omega, gamma) = (2.0 * std::f64::consts::PI, 0.15);
    let l = dephasing(omega, gamma);
    let oracle = gap(&l);
    let reg = single(l, &InitialState::Plus.qubit(), 0.5);
    let grid = TauGrid::new(0.01, 2000).unwrap();
    let corr = reg
        .correlation(
            &algebra::sigma_x(),
            &(algebra::sigma_x() * c(2.0, 0.0)),
            grid,
        )
        .unwrap();
    // cos ωτ = 1 at integer τ; least-squares slope of ln R̃ there
    let pts: Vec<(f64, f64)> = (0..=20)
        .map(|k| (k as f64, corr.r_tilde[100 * k].ln()))
        .collect();
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (sxx, sxy) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x * x, b + x * y));
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    assert!(
        (-slope / oracle - 1.0).abs() < 0.01,
        "fit {} vs {oracle}",
        -slope
    );
    assert!((corr.r_tilde[0] - 4.0).abs() < 1e-12);
}

#[test]
fn resolvent_and_trapezoid_routes_agree() {
    let omegas: Vec<f64> = (0..25).map(|k| -6.0 + 0.5 * k as f64).collect();
    for seed in 0..10 {
        let mut g = Gen::new(500 + seed);
        let n = 2 + (seed as usize % 2);
        let l = liouvillian_build(
            &g.hermitian(n),
            &[
                Jump::new(0.5 + g.uniform(), g.complex(n)),
                Jump::new(0.5 + g.uniform(), g.complex(n)),
            ],
        )
        .unwrap();
        let span = 30.0 / gap(&l);
        let dtau = 0.005;
        let grid = TauGrid::new(dtau, (span / dtau).ceil() as usize).unwrap();
        let reg = single(l, &g.density(n), 0.5);
        let cop = g.complex(n);
        let x = &cop + cop.adjoint();
        let corr = reg.correlation(&cop, &x, grid).unwrap();
        let res = reg.resolvent(&cop, &x, &omegas).unwrap();
        for (w, r) in omegas.iter().zip(&res) {
            let t = half_transform(&corr, *w);
            assert!((t - r).abs() < 1e-6, "seed {seed}, ω = {w}: {t} vs {r}");
        }
        // full spectra agree as well, floor included
        let s1 = spectrum(&corr, &omegas, Rescale::default()).unwrap();
        let s2 = reg.spectrum(&cop, &omegas, Rescale::default()).unwrap();
        for (a, b) in s1.s_raw.iter().zip(&s2.s_raw) {
            assert!((a - b).abs() < 1e-6);
        }
    }
}

#[test]
fn reference_spectrum_floor_and_positivity() {
    let bath = BathSpec::single_spin(2.0, 0.5);
    let (_, _, d) = reference(&bath, true);
    let reg = Regression::from_dynamics(
        &d,
        &enumerate_sectors(&bath).unwrap(),
        &InitialState::Plus.qubit(),
    )
    .unwrap();
    let omegas: Vec<f64> = (0..=400).map(|k| -100.0 + 0.5 * k as f64).collect();
    let s = reg
        .spectrum(d.measurement(), &omegas, Rescale { a: 0.5, b: -1.0 })
        .unwrap();
    assert_eq!(s.delta_weight, 20.0);
    assert!(s.s_raw.iter().all(|&v| v >= 0.0));
    let edge = s.s_raw[0].max(s.s_raw[400]);
    assert!(((edge - 20.0) / 20.0).abs() < 0.02);
    // S(ω) is even for a real stationary current
    for k in 0..=200 {
        assert!((s.s_raw[k] - s.s_raw[400 - k]).abs() < 1e-9 * s.s_raw[k].abs());
    }
    assert!((s.s_display[10] - (0.5 * s.s_raw[10] - 1.0)).abs() < 1e-15);
}

fn pair(r: f64) -> (PairModel, Regression) {
    let bath = BathSpec::single_spin(2.0, 0.5);
    let (_, _, d) = reference(&bath, true);
    let secs = enumerate_sectors(&bath).unwrap();
    let p = PairModel::new(d.clone(), d).unwrap();
    let joint = joint_sectors(&secs, &secs, r).unwrap();
    let plus = InitialState::Plus.qubit();
    let reg = p.regression(&joint, &plus, &plus).unwrap();
    (p, reg)
}

#[test]
fn uncorrelated_baths_have_no_cross_correlation() {
    let (p, reg) = pair(0.0);
    let (c1, c2) = p.measurements();
    let cc = cross_correlation(&reg, &c1, &c2, TauGrid::new(0.01, 1500).unwrap()).unwrap();
    assert!(cc.rc.sup_norm() < 1e-10, "{}", cc.rc.sup_norm());
    assert!(cc.additivity_defect() < 1e-10);
}

#[test]
fn correlated_baths_show_cross_correlation() {
    let (p, reg) = pair(1.0);
    let (c1, c2) = p.measurements();
    let cc = cross_correlation(&reg, &c1, &c2, TauGrid::new(0.01, 1500).unwrap()).unwrap();
    assert!(cc.rc.at_zero().abs() > 1e-8, "{}", cc.rc.at_zero());
    assert!(cc.additivity_defect() < 1e-10);
    assert_eq!(cc.rc.delta_weight, 0.0);
    assert!(cc.rc.r_tilde.last().unwrap().abs() < 1e-6);
    assert!(joint_sectors(
        &enumerate_sectors(&BathSpec::single_spin(2.0, 0.5)).unwrap(),
        &[],
        0.5
    )
    .is_err());
}

fn white(seed: u64, n: usize, dt: f64) -> TrajectoryRecord {
    let mut w = WienerSource::new(seed, dt);
    TrajectoryRecord {
        seed,
        theta: 0.0,
        dt,
        times: vec![],
        states: vec![],
        current_times: (1..=n).map(|k| k as f64 * dt).collect(),
        current: (0..n)
            .map(|_| 20f64.sqrt() * w.next_increment() / dt)
            .collect(),
        increments: vec![],
    }
}

#[test]
fn periodogram_variance_halves_with_doubled_records() {
    let dt = 1e-3;
    let seg = 256;
    let omegas: Vec<f64> = (1..=20).map(|k| 100.0 * k as f64).collect();
    let settings = WelchSettings {
        t_burn: 0.0,
        segment: seg,
    };
    let spread = |len: usize, base: u64| {
        let est: Vec<Vec<f64>> = (0..60)
            .map(|b| {
                let recs = [white(base + b, len, dt)];
                periodogram_spectrum(&recs, &omegas, settings, 20.0, Rescale::default())
                    .unwrap()
                    .spectrum
                    .s_raw
            })
            .collect();
        let mut v = 0.0;
        for k in 0..omegas.len() {
            let m = est.iter().map(|e| e[k]).sum::<f64>() / est.len() as f64;
            v += est.iter().map(|e| (e[k] - m).powi(2)).sum::<f64>() / (est.len() - 1) as f64;
        }
        v / omegas.len() as f64
    };
    let short = spread(40 * seg, 0);
    let long = spread(80 * seg, 10_000);
    let ratio = short / long;
    assert!((ratio - 2.0).abs() < 0.4, "variance ratio {ratio}");
}

#[test]
fn periodogram_matches_regression_under_strong_measurement() {
    // Rabi-driven qubit under σ_z/2 monitoring: the structured part is comparable
    // to the shot floor, so the (2ηκ)² normalisation is tested directly.
    let (rabi, eta_kappa) = (5.0, 1.0);
    let m: Operator = algebra::sigma_z() * c(0.5, 0.0);
    let l = liouvillian_build(
        &(algebra::sigma_x() * c(rabi / 2.0, 0.0)),
        &[Jump::new(2.0 * eta_kappa, m.clone())],
    )
    .unwrap();
    let rho0 = InitialState::Ground.qubit();
    let reg = single(l.clone(), &rho0, eta_kappa);
    let omegas: Vec<f64> = (0..=24).map(|k| 1.0 + 0.333 * k as f64).collect();
    let exact = reg.spectrum(&m, &omegas, Rescale::default()).unwrap();

    let dt = 1e-3;
    let stepper = Stepper::new(&l, m, eta_kappa, dt, Scheme::ExponentialEuler, false).unwrap();
    let records: Vec<TrajectoryRecord> = (0..40)
        .map(|j| {
            run_stepper(
                &stepper,
                rho0.as_op(),
                100_000,
                100_000,
                10,
                9000 + j,
                0.0,
                false,
            )
            .unwrap()
        })
        .collect();
    let p = periodogram_spectrum(
        &records,
        &omegas,
        WelchSettings {
            t_burn: 2.0,
            segment: 2048,
        },
        2.0,
        Rescale::default(),
    )
    .unwrap();
    let peak = exact.s_raw.iter().cloned().fold(0.0, f64::max);
    assert!(
        peak > 2.0 * 2.0,
        "structured part should dominate the floor: {peak}"
    );
    for ((w, e), (v, se)) in omegas
        .iter()
        .zip(&exact.s_raw)
        .zip(p.spectrum.s_raw.iter().zip(&p.stderr))
    {
        assert!(
            (v - e).abs() < 4.0 * se + 0.03 * e,
            "ω = {w}: periodogram {v} ± {se}, regression {e}"
        );
    }
}
