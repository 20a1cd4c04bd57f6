//! Simulated paths against the transform formulas.

use skewwalk_core::distributions::{EtaFamily, LatticeStableLaw, PerturbationLaw, StepLaw};
use skewwalk_core::quadrature::QuadratureSpec;
use skewwalk_core::resolvent::{
    hit_gf_sample, hold_jump_sample, killed_resolvent_v, mc_mean, poisson_hit_sample, splitting_check,
    DiscreteResolvent, KilledMode, Observable,
};
use skewwalk_core::transforms::{hit_gf, poisson_hit_laplace};

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

#[test]
fn poissonized_hitting_matches_formula() {
    let law = StepLaw::stable(1.5).unwrap();
    for &(x, lambda, rho) in &[(1i64, 1.0, 1.0), (2, 0.5, 1.0)] {
        let want = poisson_hit_laplace(x, lambda, rho, &law, &spec()).unwrap().value;
        let est = mc_mean(100_000, |i| poisson_hit_sample(&law, x, lambda, rho, 11, i));
        assert!(est.z_score(want) < 3.0, "x={x} mc={est:?} want={want}");
    }
}

#[test]
fn hitting_generating_function_matches_simulation() {
    for law in [StepLaw::SimpleWalk, StepLaw::stable(1.5).unwrap()] {
        let want = hit_gf(2, 0.8, &law, &spec()).unwrap().value;
        let mut censored = 0;
        let est = mc_mean(50_000, |i| {
            let (v, c) = hit_gf_sample(&law, 2, 0.8, 400, 5, i);
            censored += usize::from(c);
            v
        });
        // a censored path would have contributed at most 0.8^400
        assert!(est.z_score(want) < 3.0, "{law:?} mc={est:?} want={want} censored={censored}");
    }
}

#[test]
fn holding_jumping_resolvent_matches_simulation() {
    let law = LatticeStableLaw::new(1.5).unwrap();
    let step = StepLaw::Stable(law.clone());
    let eta = PerturbationLaw::new(EtaFamily::OneSided { beta: 0.3 }).unwrap();
    let (lambda, v) = (1.0, 100.0);
    let d = DiscreteResolvent::new(&law, lambda, v, spec()).unwrap();
    let a = d.norming();
    for f in [
        Observable::Gaussian { center: 0.5, width: 1.0 },
        Observable::Hann { center: -0.3, width: 1.0 },
    ] {
        let want = d.holding_jumping_at_zero(&f, &eta).unwrap().value;
        let est = mc_mean(100_000, |i| {
            let s = hold_jump_sample(&step, Some(&eta), 0, v, lambda, 3, i, u64::MAX);
            f.eval(s.end as f64 / a)
        });
        assert!(est.z_score(want) < 3.0, "{f:?} mc={est:?} want={want}");
    }
    let one = mc_mean(1000, |i| {
        let s = hold_jump_sample(&step, Some(&eta), 0, v, lambda, 3, i, u64::MAX);
        Observable::One.eval(s.end as f64 / a)
    });
    assert_eq!(one.mean, 1.0);
}

#[test]
fn killed_resolvent_simulation_matches_formula() {
    let law = LatticeStableLaw::new(1.5).unwrap();
    let f = Observable::Gaussian { center: 0.5, width: 1.0 };
    let mode = KilledMode::MonteCarlo {
        n_paths: 40_000,
        seed: 8,
        step_budget: u64::MAX,
    };
    for &x in &[0.3, -1.0, 2.0] {
        let formula = killed_resolvent_v(x, 1.0, 100.0, &law, &f, KilledMode::Formula, &spec()).unwrap();
        let mc = killed_resolvent_v(x, 1.0, 100.0, &law, &f, mode, &spec()).unwrap();
        assert!(!mc.flagged);
        assert!((mc.value - formula.value).abs() < 3.0 * mc.err, "x={x} {mc:?} {formula:?}");
    }
    let tight = KilledMode::MonteCarlo {
        n_paths: 10_000,
        seed: 8,
        step_budget: 1000,
    };
    assert!(killed_resolvent_v(1.0, 1.0, 100.0, &law, &f, tight, &spec()).unwrap().flagged);
}

#[test]
fn resolvent_splitting_identity() {
    let law = LatticeStableLaw::new(1.5).unwrap();
    let step = StepLaw::Stable(law.clone());
    let eta = PerturbationLaw::new(EtaFamily::TwoSided { beta: 0.3, c_plus: 0.7 }).unwrap();
    let (lambda, v) = (1.0, 100.0);
    let a = law.norming_a(v).unwrap();
    let f = Observable::Gaussian { center: 0.5, width: 1.0 };
    let n = 40_000u64;
    let from_zero: Vec<_> = (0..n)
        .map(|i| hold_jump_sample(&step, Some(&eta), 0, v, lambda, 21, i, u64::MAX))
        .collect();
    for k in [1i64, 2, 5] {
        let from_x: Vec<_> = (0..n)
            .map(|i| hold_jump_sample(&step, Some(&eta), k, v, lambda, 22 + k as u64, i, u64::MAX))
            .collect();
        let c = splitting_check(&from_x, &from_zero, &f, a);
        assert!(c.residual.abs() < 3.0 * c.residual_se, "k={k} {c:?}");
    }
}
