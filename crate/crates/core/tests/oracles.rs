//! Independent oracles for the transforms and resolvents.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use skewwalk_core::distributions::{EtaFamily, LatticeStableLaw, PerturbationLaw, StepLaw};
use skewwalk_core::quadrature::QuadratureSpec;
use skewwalk_core::resolvent::{
    eta_star_integral, indicator_outside, killed_resolvent_v, power_cap, tail_functional, ContinuousResolvent,
    DiscreteResolvent, EtaStarMeasure, KilledMode, Observable,
};
use skewwalk_core::transforms::{
    discrete_hit_laplace_scaled, hit_gf, poisson_hit_laplace, stable_hit_laplace, u_s, StableResolvent,
};

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

/// `Σ_n s^n P{S_n = x}` on the cyclic group of order `2^18`, with the step
/// pmf tabulated directly and transformed by FFT.
fn green_by_series(law: &LatticeStableLaw, s: f64, xs: &[i64]) -> Vec<f64> {
    let n = 1usize << 18;
    let half = (n / 2) as i64;
    let mut p: Vec<Complex<f64>> = (0..n)
        .map(|j| {
            let k = if (j as i64) < half { j as i64 } else { j as i64 - n as i64 };
            Complex::new(if k == -half { 0.0 } else { law.pmf(k) }, 0.0)
        })
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut p);
    // term-by-term geometric series, truncated far below f64 resolution
    let terms = (40.0 / -s.ln()).ceil() as usize;
    let mut acc: Vec<Complex<f64>> = p
        .iter()
        .map(|&z| {
            let mut sum = Complex::new(0.0, 0.0);
            let mut pw = Complex::new(1.0, 0.0);
            for _ in 0..=terms {
                sum += pw;
                pw *= z * s;
            }
            sum
        })
        .collect();
    planner.plan_fft_inverse(n).process(&mut acc);
    xs.iter()
        .map(|&x| acc[x.rem_euclid(n as i64) as usize].re / n as f64)
        .collect()
}

#[test]
fn green_function_matches_convolution_series() {
    let law = LatticeStableLaw::new(1.5).unwrap();
    let step = StepLaw::Stable(law.clone());
    let xs = [0i64, 1, -1, 2, 3, 5, -8, 13, 40, 100];
    for s in [0.5, 0.9] {
        let oracle = green_by_series(&law, s, &xs);
        for (&x, &want) in xs.iter().zip(&oracle) {
            let got = u_s(x, s, &step, &spec()).unwrap().value;
            assert!((got - want).abs() < 1e-7, "x={x} s={s} got={got} want={want}");
        }
    }
}

#[test]
fn simple_walk_closed_form() {
    let step = StepLaw::SimpleWalk;
    for k in 1..=9 {
        let s = k as f64 / 10.0;
        let want = (1.0 - (1.0 - s * s).sqrt()) / s;
        let got = hit_gf(1, s, &step, &spec()).unwrap().value;
        assert!((got - want).abs() < 1e-8, "s={s}");
    }
    let third = hit_gf(1, 0.6, &step, &spec()).unwrap().value;
    assert!((third - 1.0 / 3.0).abs() < 1e-8);
    // two steps of first passage compose
    let two = hit_gf(2, 0.6, &step, &spec()).unwrap().value;
    assert!((two - 1.0 / 9.0).abs() < 1e-8);
}

#[test]
fn scaled_and_poisson_hitting_coincide() {
    let law = LatticeStableLaw::new(1.5).unwrap();
    let step = StepLaw::Stable(law.clone());
    for &(lambda, v) in &[(1.0, 1e2), (0.5, 1e3), (2.0, 1e4), (1.0, 1e5)] {
        let a = law.norming_a(v).unwrap();
        for &k in &[1i64, -2, 5, 17, -60] {
            let x = (k as f64 + 0.5) / a;
            let scaled = discrete_hit_laplace_scaled(x, lambda, v, &law, &spec()).unwrap().value;
            let poisson = poisson_hit_laplace(k, lambda, v, &step, &spec()).unwrap().value;
            assert!((scaled - poisson).abs() < 1e-7, "λ={lambda} v={v} k={k}");
        }
    }
}

#[test]
fn stable_density_closed_form_and_scaling() {
    let r = StableResolvent::new(1.5, 1.0, spec()).unwrap();
    let v1 = r.at_zero().value;
    let closed = 1.0 / (1.5 * (2.0 * std::f64::consts::PI / 3.0).sin());
    assert!((v1 - closed).abs() < 1e-6);
    assert!((v1 - 0.769_800_358_919_501).abs() < 1e-9);
    for lambda in [0.5, 2.0] {
        let rl = StableResolvent::new(1.5, lambda, spec()).unwrap();
        let want = lambda.powf(1.0 / 1.5 - 1.0) * v1;
        assert!((rl.at_zero().value - want).abs() < 1e-6);
    }
}

#[test]
fn killed_constant_approaches_continuous_limit() {
    let law = LatticeStableLaw::new(1.5).unwrap();
    let got = killed_resolvent_v(1.0, 1.0, 1e6, &law, &Observable::One, KilledMode::Formula, &spec()).unwrap();
    let h = stable_hit_laplace(1.0, 1.0, 1.5, &spec()).unwrap().value;
    assert!((got.value - (1.0 - h)).abs() < 5e-3, "{} {}", got.value, 1.0 - h);
    let zero = killed_resolvent_v(0.0, 1.0, 1e6, &law, &Observable::One, KilledMode::Formula, &spec()).unwrap();
    assert_eq!(zero.value, 0.0);
}

#[test]
fn killed_resolvent_general_f_approaches_continuous() {
    let law = LatticeStableLaw::new(1.5).unwrap();
    let f = Observable::Gaussian { center: 0.3, width: 0.7 };
    let cont = ContinuousResolvent::new(1.5, 1.0, spec()).unwrap();
    let mut prev = f64::INFINITY;
    for v in [1e3, 1e5, 1e7] {
        let d = DiscreteResolvent::new(&law, 1.0, v, spec()).unwrap();
        let mut err: f64 = 0.0;
        for &x in &[-2.0, -0.5, 0.4, 1.0, 3.0] {
            let want = cont.killed(&f, x).unwrap().value;
            err = err.max((d.killed(&f, x).unwrap().value - want).abs());
        }
        assert!(err < prev, "v={v} err={err}");
        prev = err;
    }
    assert!(prev < 1e-2);
}

#[test]
fn skew_resolvent_two_routes_agree() {
    let m = EtaStarMeasure::new(0.3, 0.7, 0.3).unwrap();
    let c = ContinuousResolvent::new(1.5, 1.0, spec()).unwrap();
    let f = Observable::Gaussian { center: 0.5, width: 1.0 };
    let fourier = c.skew_at_zero(&f, &m).unwrap();
    let loose = spec().with_abs_tol(1e-6).with_rel_tol(1e-5);
    let direct = c.skew_at_zero_direct(&f, &m, &loose).unwrap();
    assert!(
        (fourier.value - direct.value).abs() < 1e-6,
        "{} {}",
        fourier.value,
        direct.value
    );
}

#[test]
fn skew_resolvent_symmetry_reduction() {
    // f even and c₊ = c₋: the two-sided ratio equals the one-sided one
    let c = ContinuousResolvent::new(1.5, 1.0, spec()).unwrap();
    let f = Observable::Gaussian { center: 0.0, width: 1.0 };
    let two = c.skew_at_zero(&f, &EtaStarMeasure::new(0.3, 0.5, 0.5).unwrap()).unwrap();
    let one = c.skew_at_zero(&f, &EtaStarMeasure::new(0.3, 1.0, 0.0).unwrap()).unwrap();
    assert!((two.value - one.value).abs() < 1e-9);
}

#[test]
fn exit_weight_closed_form() {
    let c = ContinuousResolvent::new(1.5, 1.0, spec()).unwrap();
    let m = EtaStarMeasure::new(0.3, 1.0, 0.0).unwrap();
    let q = c.exponent_weight_quadrature(&m).unwrap().value;
    assert!((q / c.exponent_weight(&m) - 1.0).abs() < 1e-7);
}

#[test]
fn tail_functional_limits() {
    let eta = PerturbationLaw::new(EtaFamily::TwoSided { beta: 0.5, c_plus: 0.5 }).unwrap();
    let m = EtaStarMeasure::for_law(&eta).unwrap();
    let ind = indicator_outside(1.0);
    assert!((eta_star_integral(&ind, &m, &spec()).unwrap().value - 2.0).abs() < 1e-8);
    let r = tail_functional(&ind, &eta, &[1e3, 1e6], &spec()).unwrap();
    assert!((r[1].value - 2.0).abs() < 0.04);

    let g = power_cap(0.5, 0.3);
    let target = eta_star_integral(&g, &m, &spec()).unwrap().value;
    assert!((target - (1.0 / 0.3 + 2.0)).abs() < 1e-8);
    let r = tail_functional(&g, &eta, &[1e3, 1e6], &spec()).unwrap();
    assert!((r[1].value - target).abs() < (r[0].value - target).abs());

    // one-sided η sees only the positive half of an odd-looking g
    let one = PerturbationLaw::new(EtaFamily::OneSided { beta: 0.5 }).unwrap();
    let neg = skewwalk_core::resolvent::TestFunction::new(|x: f64| if x < -1.0 { 1.0 } else { 0.0 }, 1.0, 1.0, 1.0)
        .with_breaks(&[-1.0]);
    let r = tail_functional(&neg, &one, &[1e3], &spec()).unwrap();
    assert_eq!(r[0].value, 0.0);
}

#[test]
fn tail_functional_rejects_light_eta() {
    let eta = PerturbationLaw::new(EtaFamily::Geometric { q: 0.5 }).unwrap();
    assert!(tail_functional(&indicator_outside(1.0), &eta, &[10.0], &spec()).is_err());
}
