//! Resolvents at and around the perturbed point.
//!
//! The walk killed at 0 is handled through Fourier inversion. For the
//! Poissonized walk `S̃_v` at speed `v` with lattice `a(v)^{-1}ℤ`, write
//! `D(φ) = λ + v(1-ψ(φ/a))` and `Φ(φ) = a^{-1}Σ_z f(z/a)e^{-izφ/a}` (which
//! is `Σ_m F(φ + 2πam)` with `F` the Fourier transform of `f`). Then
//!
//! ```text
//! R f(k/a)   = (1/2π)∫ Φ(φ) e^{ikφ/a} / D(φ) dφ
//! V f(k/a)   = R f(k/a) - E_k e^{-λσ} R f(0)
//! E V f(η/a) = (1/2π)[∫ Φ(χ-1)/D + ∫Φ/D · ∫(1-χ)/D / ∫1/D]
//! E V 1(η/a) = λ^{-1} ∫(1-χ)/D / ∫1/D
//! ```
//!
//! with `χ(φ) = E e^{iηφ/a}`, all integrals over `[-πa, πa]`. The continuous
//! counterparts use `λ + |φ|^α` and replace `1-χ` by the exponent `κ` of
//! the measure `η*`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::distributions::{LatticeStableLaw, PerturbationLaw, StepLaw};
use crate::error::check;
use crate::quadrature::{integrate, merge_points, QuadratureSpec, TransformResult};
use crate::rng::{self, Role};
use crate::special::{gamma, sinc};
use crate::stats::MeanEstimate;
use crate::transforms::{graded_points, with_period_points, ScaledHitting, StableResolvent};
use crate::walk::Chain;
use crate::{Error, Result};

/// `η*(dx) = (c₋1{x<0} + c₊1{x>0})|x|^{-1-β} dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaStarMeasure {
    pub beta: f64,
    pub c_plus: f64,
    pub c_minus: f64,
}

impl EtaStarMeasure {
    pub fn new(beta: f64, c_plus: f64, c_minus: f64) -> Result<Self> {
        check(beta > 0.0 && beta < 1.0, "beta", beta, "must lie in (0, 1)")?;
        check(c_plus >= 0.0, "c_plus", c_plus, "must be nonnegative")?;
        check(c_minus >= 0.0, "c_minus", c_minus, "must be nonnegative")?;
        check(c_plus + c_minus > 0.0, "c_plus", c_plus, "c₊ + c₋ must be positive")?;
        Ok(Self { beta, c_plus, c_minus })
    }

    /// The measure attached to a heavy-tailed jump law.
    pub fn for_law(eta: &PerturbationLaw) -> Result<Self> {
        let beta = eta
            .beta()
            .ok_or(Error::Unsupported("η* needs a heavy-tailed η"))?;
        Self::new(beta, eta.c_plus(), eta.c_minus())
    }

    pub fn density(&self, x: f64) -> f64 {
        let c = if x > 0.0 {
            self.c_plus
        } else if x < 0.0 {
            self.c_minus
        } else {
            return 0.0;
        };
        c * libm::pow(x.abs(), -1.0 - self.beta)
    }

    /// `κ(φ) = ∫(1 - e^{iφx}) η*(dx)`.
    pub fn exponent(&self, phi: f64) -> Complex64 {
        let b = self.beta;
        let g = gamma(1.0 - b) / b;
        let mag = libm::pow(phi.abs(), b);
        let re = (self.c_plus + self.c_minus) * g * libm::cos(PI * b / 2.0) * mag;
        let im = -(self.c_plus - self.c_minus) * g * libm::sin(PI * b / 2.0) * mag * phi.signum();
        Complex64::new(re, im)
    }
}

/// A bounded function with a declared bound `|g(x)| ≤ c|x|^{β+γ}` near 0.
#[derive(Debug, Clone)]
pub struct TestFunction<F> {
    f: F,
    c: f64,
    gamma: f64,
    sup_norm: f64,
    breaks: Vec<f64>,
}

impl<F: Fn(f64) -> f64> TestFunction<F> {
    pub fn new(f: F, c: f64, gamma: f64, sup_norm: f64) -> Self {
        Self {
            f,
            c,
            gamma,
            sup_norm,
            breaks: Vec::new(),
        }
    }

    /// Points where `g` is not smooth, used as quadrature breakpoints.
    pub fn with_breaks(mut self, breaks: &[f64]) -> Self {
        self.breaks = breaks.to_vec();
        self
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// Verify the declared bound on a log grid in `0 < |x| ≤ 0.1`.
    pub fn check_modulus(&self, beta: f64) -> Result<()> {
        for k in 0..=110 {
            let x = libm::pow(10.0, -1.0 - k as f64 / 10.0);
            let bound = self.c * libm::pow(x, beta + self.gamma) * (1.0 + 1e-9);
            for s in [x, -x] {
                if self.eval(s).abs() > bound {
                    return Err(Error::ModulusViolation { x: s });
                }
            }
        }
        Ok(())
    }
}

/// `1{|x| > r}`.
pub fn indicator_outside(r: f64) -> TestFunction<impl Fn(f64) -> f64 + Clone> {
    TestFunction::new(move |x: f64| if x.abs() > r { 1.0 } else { 0.0 }, 1.0, 1.0, 1.0)
        .with_breaks(&[-r, r])
}

/// `min(|x|^{β+γ}, 1)`.
pub fn power_cap(beta: f64, gamma: f64) -> TestFunction<impl Fn(f64) -> f64 + Clone> {
    let p = beta + gamma;
    TestFunction::new(move |x: f64| libm::pow(x.abs(), p).min(1.0), 1.0, gamma, 1.0)
        .with_breaks(&[-1.0, 1.0])
}

/// `∫ g dη*`. Near 0 the substitution `|x| = u^{1/γ}` makes the integrand
/// bounded; beyond `|x| = 1` the substitution `t = |x|^{-β}` maps the power
/// tail onto `(0, 1]`.
pub fn eta_star_integral<F: Fn(f64) -> f64>(
    g: &TestFunction<F>,
    measure: &EtaStarMeasure,
    spec: &QuadratureSpec,
) -> Result<TransformResult> {
    g.check_modulus(measure.beta)?;
    let b = measure.beta;
    let gm = g.gamma;
    let mut total = TransformResult::exact(0.0);
    for (sign, weight) in [(1.0, measure.c_plus), (-1.0, measure.c_minus)] {
        if weight == 0.0 {
            continue;
        }
        let side: Vec<f64> = g
            .breaks
            .iter()
            .filter(|&&p| p * sign > 0.0)
            .map(|&p| p.abs())
            .collect();
        let near_breaks: Vec<f64> = side.iter().filter(|&&p| p < 1.0).map(|&p| libm::pow(p, gm)).collect();
        let far_breaks: Vec<f64> = side.iter().filter(|&&p| p > 1.0).map(|&p| libm::pow(p, -b)).collect();
        let near_pts = merge_points(graded_points(1e-6, 1.0, 4), &near_breaks);
        let near = integrate(
            |u| {
                if u <= 0.0 {
                    return 0.0;
                }
                let x = libm::pow(u, 1.0 / gm);
                g.eval(sign * x) * libm::pow(u, -b / gm - 1.0) / gm
            },
            &near_pts,
            spec,
        )?;
        let far_pts = merge_points(graded_points(1e-6, 1.0, 4), &far_breaks);
        let far = integrate(
            |t| {
                if t <= 0.0 {
                    return 0.0;
                }
                let x = libm::pow(t, -1.0 / b);
                if x.is_finite() {
                    g.eval(sign * x) / b
                } else {
                    g.eval(sign * f64::MAX) / b
                }
            },
            &far_pts,
            spec,
        )?;
        total = total.plus(near.plus(far).scaled(weight));
    }
    Ok(total)
}

/// Observables `f` with known Fourier transforms `F(φ) = ∫f(x)e^{-iφx}dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observable {
    One,
    /// `exp(-((x-c)/w)²)`.
    Gaussian { center: f64, width: f64 },
    /// `cos²(π(x-c)/(2w))` on `|x-c| ≤ w`, zero outside.
    Hann { center: f64, width: f64 },
}

/// `∫_{-1}^{1} cos²(πu/2) e^{-iωu} du = π² sin ω / (ω(π² - ω²))`.
fn hann_profile(omega: f64) -> f64 {
    let w = omega.abs();
    if w < 1.0 {
        PI * PI * sinc(w) / (PI * PI - w * w)
    } else {
        PI * PI * sinc(PI - w) / (w * (PI + w))
    }
}

impl Observable {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Observable::One => 1.0,
            Observable::Gaussian { center, width } => {
                let z = (x - center) / width;
                libm::exp(-z * z)
            }
            Observable::Hann { center, width } => {
                let z = (x - center) / width;
                if z.abs() <= 1.0 {
                    let c = libm::cos(0.5 * PI * z);
                    c * c
                } else {
                    0.0
                }
            }
        }
    }

    pub fn sup_norm(&self) -> f64 {
        1.0
    }

    pub fn center(&self) -> f64 {
        match *self {
            Observable::One => 0.0,
            Observable::Gaussian { center, .. } | Observable::Hann { center, .. } => center,
        }
    }

    /// `F(φ)`; not defined for `One`.
    pub fn fourier(&self, phi: f64) -> Complex64 {
        let (mag, c) = match *self {
            Observable::One => return Complex64::new(f64::NAN, f64::NAN),
            Observable::Gaussian { center, width } => {
                let z = width * phi;
                (width * libm::sqrt(PI) * libm::exp(-0.25 * z * z), center)
            }
            Observable::Hann { center, width } => (width * hann_profile(width * phi), center),
        };
        let p = -phi * c;
        Complex64::new(mag * libm::cos(p), mag * libm::sin(p))
    }

    /// Number of aliases kept on each side in `Σ_m F(φ + 2πam)`.
    fn aliases(&self) -> i32 {
        match self {
            Observable::One => 0,
            Observable::Gaussian { .. } => 1,
            Observable::Hann { .. } => 64,
        }
    }

    /// `a^{-1}Σ_z f(z/a)e^{-izφ/a}` by Poisson summation.
    pub fn lattice_transform(&self, phi: f64, a: f64) -> Complex64 {
        let m = self.aliases();
        let mut acc = Complex64::new(0.0, 0.0);
        // smallest terms first
        for j in (1..=m).rev() {
            let shift = 2.0 * PI * a * j as f64;
            acc += self.fourier(phi + shift) + self.fourier(phi - shift);
        }
        acc + self.fourier(phi)
    }

    /// Frequency range beyond which `|F|` is negligible.
    pub fn bandwidth(&self) -> f64 {
        match *self {
            Observable::One => 0.0,
            Observable::Gaussian { width, .. } => 13.0 / width,
            Observable::Hann { width, .. } => 2.0e4 / width,
        }
    }
}

/// Killed-at-zero resolvent of the Poissonized walk at one `(λ, v)`.
#[derive(Debug, Clone)]
pub struct DiscreteResolvent<'a> {
    hit: ScaledHitting<'a>,
}

impl<'a> DiscreteResolvent<'a> {
    pub fn new(law: &'a LatticeStableLaw, lambda: f64, v: f64, spec: QuadratureSpec) -> Result<Self> {
        Ok(Self {
            hit: ScaledHitting::new(law, lambda, v, spec)?,
        })
    }

    pub fn hitting(&self) -> &ScaledHitting<'a> {
        &self.hit
    }

    pub fn norming(&self) -> f64 {
        self.hit.norming()
    }

    fn lambda(&self) -> f64 {
        self.hit.lambda()
    }

    fn upper(&self, f: &Observable) -> f64 {
        match f {
            Observable::Gaussian { .. } => f.bandwidth(),
            _ => f64::INFINITY,
        }
    }

    /// `∫_0^{upper} g(φ)/D(φ) dφ`.
    fn integral<G: Fn(f64) -> f64>(&self, g: G, upper: f64, freq: f64) -> Result<TransformResult> {
        let pts = self.hit.points_to(upper, freq);
        integrate(|t| g(t) / self.hit.symbol(t), &pts, self.hit.spec())
    }

    /// Free resolvent `R f(k/a)`.
    pub fn free(&self, f: &Observable, k: i64) -> Result<TransformResult> {
        if let Observable::One = f {
            return Ok(TransformResult::exact(1.0 / self.lambda()));
        }
        let a = self.norming();
        let w = k as f64 / a;
        let r = self.integral(
            |t| {
                let p = f.lattice_transform(t, a);
                let (s, c) = (libm::sin(w * t), libm::cos(w * t));
                p.re * c - p.im * s
            },
            self.upper(f),
            (w - f.center()).abs(),
        )?;
        Ok(r.scaled(1.0 / PI))
    }

    /// `V̂ f(x) = V f(⌊xa⌋/a)`.
    pub fn killed(&self, f: &Observable, x: f64) -> Result<TransformResult> {
        let k = self.hit.start(x);
        if k == 0 {
            return Ok(TransformResult::exact(0.0));
        }
        if let Observable::One = f {
            return Ok(self.hit.complement(x)?.scaled(1.0 / self.lambda()));
        }
        let rk = self.free(f, k)?;
        let h = self.hit.value_at_lattice(k)?;
        let r0 = self.free(f, 0)?;
        Ok(rk.plus(h.times(r0).scaled(-1.0)))
    }

    /// `∫_0^{πa} Re(1-χ)/D`.
    fn eta_weight(&self, eta: &PerturbationLaw) -> Result<TransformResult> {
        let a = self.norming();
        let freq = match eta.family() {
            crate::distributions::EtaFamily::Constant { value } => value.unsigned_abs() as f64 / a,
            _ => 0.0,
        };
        self.integral(|t| eta.one_minus_chf(t / a).re, f64::INFINITY, freq)
    }

    /// `E V̂ 1(η/a)`.
    pub fn eta_expectation_one(&self, eta: &PerturbationLaw) -> Result<TransformResult> {
        let c = self.eta_weight(eta)?;
        Ok(c.ratio(self.hit.denominator()).scaled(1.0 / self.lambda()))
    }

    /// `E V̂ f(η/a)`.
    pub fn eta_expectation(&self, f: &Observable, eta: &PerturbationLaw) -> Result<TransformResult> {
        if let Observable::One = f {
            return self.eta_expectation_one(eta);
        }
        let a = self.norming();
        let upper = self.upper(f);
        let freq = f.center().abs();
        let first = self.integral(
            |t| {
                let p = f.lattice_transform(t, a);
                -(p * eta.one_minus_chf(t / a)).re
            },
            upper,
            freq,
        )?;
        let b = self.integral(|t| f.lattice_transform(t, a).re, upper, freq)?;
        let c = self.eta_weight(eta)?;
        let z = self.hit.denominator();
        Ok(first.plus(b.times(c).ratio(z)).scaled(1.0 / PI))
    }

    /// `E V̂f(η/a) / E V̂1(η/a)`.
    pub fn skew_ratio(&self, f: &Observable, eta: &PerturbationLaw) -> Result<TransformResult> {
        if let Observable::One = f {
            return Ok(TransformResult::exact(1.0));
        }
        let num = self.eta_expectation(f, eta)?;
        let den = self.eta_expectation_one(eta)?;
        Ok(num.ratio(den))
    }

    /// `λR f(0)` for the walk that holds at 0 for an exponential time of
    /// rate `v` and then jumps by `η/a`.
    pub fn holding_jumping_at_zero(&self, f: &Observable, eta: &PerturbationLaw) -> Result<TransformResult> {
        let inv_v = 1.0 / self.hit.v();
        let den = self.eta_expectation_one(eta)?.plus(TransformResult::exact(inv_v));
        let num = match f {
            Observable::One => den,
            _ => self
                .eta_expectation(f, eta)?
                .plus(TransformResult::exact(f.eval(0.0) * inv_v)),
        };
        Ok(num.ratio(den))
    }
}

pub fn holding_jumping_resolvent_at_zero(
    f: &Observable,
    lambda: f64,
    v: f64,
    law: &LatticeStableLaw,
    eta: &PerturbationLaw,
    spec: &QuadratureSpec,
) -> Result<TransformResult> {
    DiscreteResolvent::new(law, lambda, v, *spec)?.holding_jumping_at_zero(f, eta)
}

/// Killed-at-zero resolvent of the symmetric α-stable process.
#[derive(Debug, Clone)]
pub struct ContinuousResolvent {
    stable: StableResolvent,
    spec: QuadratureSpec,
}

impl ContinuousResolvent {
    pub fn new(alpha: f64, lambda: f64, spec: QuadratureSpec) -> Result<Self> {
        Ok(Self {
            stable: StableResolvent::new(alpha, lambda, spec)?,
            spec,
        })
    }

    pub fn stable(&self) -> &StableResolvent {
        &self.stable
    }

    fn symbol(&self, t: f64) -> f64 {
        self.stable.lambda() + libm::pow(t, self.stable.alpha())
    }

    fn integral<G: Fn(f64) -> f64>(&self, g: G, upper: f64, freq: f64) -> Result<TransformResult> {
        let scale = libm::pow(self.stable.lambda(), 1.0 / self.stable.alpha());
        let pts = merge_points(graded_points((scale * 1e-3).min(upper * 1e-3), upper, 8), &[1.0, scale]);
        let pts = with_period_points(pts, freq, 200_000);
        integrate(|t| g(t) / self.symbol(t), &pts, &self.spec)
    }

    /// `R f(y) = (1/π)∫_0^∞ Re[F(φ)e^{iφy}]/(λ+φ^α) dφ`.
    pub fn free(&self, f: &Observable, y: f64) -> Result<TransformResult> {
        if let Observable::One = f {
            return Ok(TransformResult::exact(1.0 / self.stable.lambda()));
        }
        let r = self.integral(
            |t| {
                let p = f.fourier(t);
                p.re * libm::cos(y * t) - p.im * libm::sin(y * t)
            },
            f.bandwidth(),
            (y - f.center()).abs(),
        )?;
        Ok(r.scaled(1.0 / PI))
    }

    /// `V f(y) = R f(y) - E_y e^{-λσ} R f(0)`.
    pub fn killed(&self, f: &Observable, y: f64) -> Result<TransformResult> {
        if y == 0.0 {
            return Ok(TransformResult::exact(0.0));
        }
        let h = self.stable.hit_laplace(y)?;
        if let Observable::One = f {
            return Ok(TransformResult {
                value: (1.0 - h.value) / self.stable.lambda(),
                ..h
            });
        }
        let ry = self.free(f, y)?;
        let r0 = self.free(f, 0.0)?;
        Ok(ry.plus(h.times(r0).scaled(-1.0)))
    }

    /// `∫_0^∞ Re κ(φ)/(λ+φ^α) dφ` in closed form.
    pub fn exponent_weight(&self, measure: &EtaStarMeasure) -> f64 {
        let (a, b, l) = (self.stable.alpha(), measure.beta, self.stable.lambda());
        let kc = gamma(1.0 - b) * libm::cos(PI * b / 2.0) / b;
        let e = (b + 1.0) / a;
        (measure.c_plus + measure.c_minus) * kc * libm::pow(l, e - 1.0) * PI / (a * libm::sin(PI * e))
    }

    /// The same weight by quadrature.
    pub fn exponent_weight_quadrature(&self, measure: &EtaStarMeasure) -> Result<TransformResult> {
        // substitute φ = s^{1/(1-β)}... tail handled with φ from the integrator
        let upper = 1e12;
        let pts = graded_points(1e-8, upper, 6);
        integrate(|t| measure.exponent(t).re / self.symbol(t), &pts, &self.spec).map(|r| {
            // remainder ∫_U^∞ φ^{β-α}: leading term of the power tail
            let (a, b) = (self.stable.alpha(), measure.beta);
            let kc = measure.exponent(1.0).re;
            let tail = kc * libm::pow(upper, b - a + 1.0) / (a - b - 1.0);
            TransformResult {
                value: r.value + tail,
                ..r
            }
        })
    }

    /// `∫ V f dη*`, through the exponent `κ`.
    pub fn eta_star_killed(&self, f: &Observable, measure: &EtaStarMeasure) -> Result<TransformResult> {
        let c = TransformResult::exact(self.exponent_weight(measure));
        let z = self.stable.at_zero().scaled(PI);
        if let Observable::One = f {
            return Ok(c.ratio(z).scaled(1.0 / self.stable.lambda()));
        }
        let upper = f.bandwidth();
        let freq = f.center().abs();
        let first = self.integral(|t| -(f.fourier(t) * measure.exponent(t)).re, upper, freq)?;
        let b = self.integral(|t| f.fourier(t).re, upper, freq)?;
        Ok(first.plus(b.times(c).ratio(z)).scaled(1.0 / PI))
    }

    /// `λR f(0) = ∫Vf dη* / ∫V1 dη*` for the skew process.
    pub fn skew_at_zero(&self, f: &Observable, measure: &EtaStarMeasure) -> Result<TransformResult> {
        check(
            measure.beta < self.stable.alpha() - 1.0,
            "beta",
            measure.beta,
            "must be below α - 1",
        )?;
        if let Observable::One = f {
            return Ok(TransformResult::exact(1.0));
        }
        let num = self.eta_star_killed(f, measure)?;
        let den = self.eta_star_killed(&Observable::One, measure)?;
        Ok(num.ratio(den))
    }

    /// The same ratio with both η*-integrals taken in real space over `V f`
    /// and `V 1`, as an independent route.
    pub fn skew_at_zero_direct(
        &self,
        f: &Observable,
        measure: &EtaStarMeasure,
        eta_spec: &QuadratureSpec,
    ) -> Result<TransformResult> {
        let alpha = self.stable.alpha();
        let gamma_mod = alpha - 1.0 - measure.beta;
        // |V g(y)| ≤ ‖g‖ V1(y) ≤ c|y|^{α-1} near 0
        let c0 = 4.0 / (self.stable.at_zero().value * self.stable.lambda());
        let r0 = self.free(f, 0.0)?.value;
        let mass = f.fourier(0.0).re;
        let v0 = self.stable.at_zero().value;
        let lambda = self.stable.lambda();
        let vf_at = |y: f64| -> f64 {
            if y == 0.0 {
                return 0.0;
            }
            if y.abs() > FAR_FIELD {
                // R f(y) ≈ v_λ(y)∫f once f is negligible at y
                return match self.stable.density(y) {
                    Ok(d) => d.value * (mass - r0 / v0),
                    Err(_) => f64::NAN,
                };
            }
            match (self.free(f, y), self.stable.hit_laplace(y)) {
                (Ok(r), Ok(h)) => r.value - h.value * r0,
                _ => f64::NAN,
            }
        };
        let v1_at = |y: f64| -> f64 {
            match self.stable.hit_laplace(y) {
                Ok(h) => (1.0 - h.value) / lambda,
                Err(_) => f64::NAN,
            }
        };
        let vf = TestFunction::new(vf_at, c0, gamma_mod, 1.0);
        let v1 = TestFunction::new(v1_at, c0, gamma_mod, 1.0);
        let num = eta_star_integral(&vf, measure, eta_spec)?;
        let den = eta_star_integral(&v1, measure, eta_spec)?;
        Ok(num.ratio(den))
    }
}

pub fn skew_resolvent_at_zero(
    f: &Observable,
    lambda: f64,
    measure: &EtaStarMeasure,
    alpha: f64,
    spec: &QuadratureSpec,
) -> Result<TransformResult> {
    ContinuousResolvent::new(alpha, lambda, *spec)?.skew_at_zero(f, measure)
}

/// Distance beyond which the direct route treats `f` as a point mass at its
/// centre.
const FAR_FIELD: f64 = 1e3;

/// How [`killed_resolvent_v`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KilledMode {
    Formula,
    MonteCarlo { n_paths: usize, seed: u64, step_budget: u64 },
}

/// How a value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Formula,
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Formula => "formula",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

/// A value with an error bar: a quadrature error estimate for formulas, a
/// standard error for Monte Carlo. `flagged` marks a truncated MC budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub err: f64,
    pub method: Method,
    pub flagged: bool,
}

impl From<TransformResult> for Estimate {
    fn from(r: TransformResult) -> Self {
        Self {
            value: r.value,
            err: r.err_estimate,
            method: Method::Formula,
            flagged: false,
        }
    }
}

/// `V̂_λ f(x)` for the Poissonized walk at speed `v` killed at 0.
pub fn killed_resolvent_v(
    x: f64,
    lambda: f64,
    v: f64,
    law: &LatticeStableLaw,
    f: &Observable,
    mode: KilledMode,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    match mode {
        KilledMode::Formula => Ok(DiscreteResolvent::new(law, lambda, v, *spec)?.killed(f, x)?.into()),
        KilledMode::MonteCarlo {
            n_paths,
            seed,
            step_budget,
        } => {
            check(lambda > 0.0, "lambda", lambda, "must be positive")?;
            let a = law.norming_a(v)?;
            let start = libm::floor(x * a) as i64;
            let step = StepLaw::Stable(law.clone());
            let mut used = 0u64;
            let mut vals = Vec::with_capacity(n_paths);
            let mut flagged = false;
            for i in 0..n_paths as u64 {
                let s = hold_jump_sample(&step, None, start, v, lambda, seed, i, u64::MAX);
                used += s.steps;
                vals.push(if s.hit.is_none() { f.eval(s.end as f64 / a) } else { 0.0 });
                if used > step_budget {
                    flagged = true;
                    break;
                }
            }
            let m = MeanEstimate::from_slice(&vals);
            Ok(Estimate {
                value: m.mean / lambda,
                err: m.std_err / lambda,
                method: Method::MonteCarlo,
                flagged,
            })
        }
    }
}

/// `sup_{x ∈ grid} E_{⌊xa⌋}(1 - e^{-(λ/v)σ}) / |x|^{α-1-δ}`.
pub fn hitting_bound_constant(hit: &ScaledHitting<'_>, delta: f64, x_grid: &[f64]) -> Result<f64> {
    let p = hit.law().alpha() - 1.0 - delta;
    let mut c: f64 = 0.0;
    for &x in x_grid {
        if x == 0.0 {
            continue;
        }
        let r = hit.complement(x)?.value / libm::pow(x.abs(), p);
        c = c.max(r);
    }
    Ok(c)
}

/// `E g(η/u) / (β P{|η| > u})` for each `u`, which tends to `∫ g dη*`.
///
/// The expectation sums the pmf exactly over `|k| ≤ 10⁵` (or up to the
/// breakpoints of `g` when they lie further out) and integrates the power
/// tail beyond with the midpoint continuous correction.
pub fn tail_functional<F: Fn(f64) -> f64>(
    g: &TestFunction<F>,
    eta: &PerturbationLaw,
    u_grid: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<TransformResult>> {
    let beta = eta
        .beta()
        .ok_or(Error::Unsupported("the tail functional needs a heavy-tailed η"))?;
    let measure = EtaStarMeasure::for_law(eta)?;
    g.check_modulus(beta)?;
    let zeta_b = crate::special::zeta(1.0 + beta);
    let mut out = Vec::with_capacity(u_grid.len());
    for &u in u_grid {
        check(u >= 1.0, "u", u, "must be at least 1")?;
        let head_end: u64 = 100_000;
        let mut head = 0.0;
        let mut comp = 0.0;
        for k in (1..=head_end).rev() {
            let kf = k as f64;
            let term = eta.pmf(k as i64) * g.eval(kf / u) + eta.pmf(-(k as i64)) * g.eval(-kf / u);
            // Kahan
            let y = term - comp;
            let t = head + y;
            comp = (t - head) - y;
            head = t;
        }
        let y0 = (head_end as f64 + 0.5) / u;
        let mut tail = TransformResult::exact(0.0);
        for (sign, weight) in [(1.0, measure.c_plus), (-1.0, measure.c_minus)] {
            if weight == 0.0 {
                continue;
            }
            // ∫_{y0}^∞ y^{-1-β} g(±y) dy = (y0^{-β}/β) ∫_0^1 g(±y0 t^{-1/β}) dt
            let breaks: Vec<f64> = g
                .breaks
                .iter()
                .filter(|&&p| p * sign > y0)
                .map(|&p| libm::pow(p.abs() / y0, -beta))
                .collect();
            let pts = merge_points(graded_points(1e-6, 1.0, 4), &breaks);
            let r = integrate(
                |t| {
                    if t <= 0.0 {
                        return 0.0;
                    }
                    let y = y0 * libm::pow(t, -1.0 / beta);
                    g.eval(sign * if y.is_finite() { y } else { f64::MAX })
                },
                &pts,
                spec,
            )?;
            let scale = weight * libm::pow(u, -beta) / zeta_b * libm::pow(y0, -beta) / beta;
            tail = tail.plus(r.scaled(scale));
        }
        let expectation = tail.plus(TransformResult::exact(head));
        out.push(expectation.scaled(1.0 / (beta * eta.tail(u))));
    }
    Ok(out)
}

/// One path of the Poissonized perturbed walk up to an independent
/// exponential time of rate `λ`: the number of jumps `K` before it is
/// geometric, `P{K = k} = (1-s)s^k` with `s = v/(v+λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HoldJumpSample {
    /// Lattice position after `K` jumps.
    pub end: i64,
    /// `K`, possibly cut at the cap.
    pub steps: u64,
    /// First jump index `n ≤ K` with `X(n) = 0`.
    pub hit: Option<u64>,
    pub capped: bool,
}

#[allow(clippy::too_many_arguments)]
pub fn hold_jump_sample(
    xi: &StepLaw,
    eta: Option<&PerturbationLaw>,
    start: i64,
    v: f64,
    lambda: f64,
    seed: u64,
    index: u64,
    cap: u64,
) -> HoldJumpSample {
    let mut kr = rng::stream(seed, Role::Killing, index);
    let k_full = rng::geometric_failures(&mut kr, v / (v + lambda));
    let k = k_full.min(cap);
    let mut chain = Chain::new(xi, eta, start, seed, index);
    let mut hit = if start == 0 { Some(0) } else { None };
    for _ in 0..k {
        chain.step();
        if hit.is_none() && chain.position() == 0 {
            hit = Some(chain.steps());
            if eta.is_none() {
                // killed: the remaining path is not needed
                break;
            }
        }
    }
    HoldJumpSample {
        end: chain.position(),
        steps: chain.steps(),
        hit,
        capped: k_full > cap,
    }
}

/// `e^{-λσ̃}` for one path of the walk on a rate-`ρ` Poisson clock, started
/// at `x`. Paths still away from 0 at time `40/λ` contribute 0, which biases
/// the mean by less than `e^{-40}`.
pub fn poisson_hit_sample(xi: &StepLaw, x: i64, lambda: f64, rho: f64, seed: u64, index: u64) -> f64 {
    if x == 0 {
        return 1.0;
    }
    let horizon = 40.0 / lambda;
    let mut clock = rng::stream(seed, Role::Clock, index);
    let mut chain = Chain::new(xi, None, x, seed, index);
    let mut t = 0.0;
    loop {
        t += rng::exponential(&mut clock, rho);
        if t > horizon {
            return 0.0;
        }
        chain.step();
        if chain.position() == 0 {
            return libm::exp(-lambda * t);
        }
    }
}

/// `s^σ` for one path from `x`, with censoring at `cap` steps counting 0.
pub fn hit_gf_sample(xi: &StepLaw, x: i64, s: f64, cap: u64, seed: u64, index: u64) -> (f64, bool) {
    match crate::walk::first_hit_zero(xi, x, cap, seed, index) {
        crate::walk::HitOutcome::Hit(n) => (libm::pow(s, n as f64), false),
        crate::walk::HitOutcome::Censored(_) => (0.0, true),
    }
}

/// The three terms of `λRf(x) = λVf(x) + E_x e^{-λσ} λRf(0)` estimated from
/// hold-and-jump samples, together with the residual of the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplittingCheck {
    pub resolvent: MeanEstimate,
    pub killed: MeanEstimate,
    pub hitting: MeanEstimate,
    pub resolvent_at_zero: MeanEstimate,
    pub residual: f64,
    /// Standard error of the residual: `√(SE(W)² + (Ĥ·SE(R₀))²)` with
    /// `W = (f(X_K/a) - R̂₀)1{K ≥ σ}`.
    pub residual_se: f64,
}

/// `from_x` are paths started at `⌊xa⌋`, `from_zero` independent paths from 0.
pub fn splitting_check(from_x: &[HoldJumpSample], from_zero: &[HoldJumpSample], f: &Observable, a: f64) -> SplittingCheck {
    let fx = |s: &HoldJumpSample| f.eval(s.end as f64 / a);
    let r: Vec<f64> = from_x.iter().map(fx).collect();
    let v: Vec<f64> = from_x.iter().map(|s| if s.hit.is_none() { fx(s) } else { 0.0 }).collect();
    let h: Vec<f64> = from_x.iter().map(|s| if s.hit.is_some() { 1.0 } else { 0.0 }).collect();
    let r0: Vec<f64> = from_zero.iter().map(fx).collect();
    let (r, v, h, r0) = (
        MeanEstimate::from_slice(&r),
        MeanEstimate::from_slice(&v),
        MeanEstimate::from_slice(&h),
        MeanEstimate::from_slice(&r0),
    );
    let w: Vec<f64> = from_x
        .iter()
        .map(|s| if s.hit.is_some() { fx(s) - r0.mean } else { 0.0 })
        .collect();
    let w = MeanEstimate::from_slice(&w);
    SplittingCheck {
        resolvent: r,
        killed: v,
        hitting: h,
        resolvent_at_zero: r0,
        residual: r.mean - v.mean - h.mean * r0.mean,
        residual_se: libm::sqrt(w.std_err * w.std_err + h.mean * h.mean * r0.std_err * r0.std_err),
    }
}

/// Sequential Monte Carlo mean over paths `0..n`.
pub fn mc_mean<G: FnMut(u64) -> f64>(n: usize, mut g: G) -> MeanEstimate {
    let vals: Vec<f64> = (0..n as u64).map(&mut g).collect();
    MeanEstimate::from_slice(&vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::EtaFamily;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn eta_star_closed_forms() {
        let m = EtaStarMeasure::new(0.5, 0.5, 0.5).unwrap();
        let r = eta_star_integral(&indicator_outside(1.0), &m, &spec()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-8, "{r:?}");
        let g = power_cap(0.5, 0.3);
        let r = eta_star_integral(&g, &m, &spec()).unwrap();
        assert!((r.value - (1.0 / 0.3 + 1.0 / 0.5)).abs() < 1e-8, "{r:?}");
        let odd = TestFunction::new(|x: f64| x * (-x * x).exp(), 1.0, 0.4, 1.0);
        let r = eta_star_integral(&odd, &m, &spec()).unwrap();
        assert!(r.value.abs() < 1e-9);
    }

    #[test]
    fn modulus_violation_is_rejected() {
        let m = EtaStarMeasure::new(0.5, 1.0, 0.0).unwrap();
        let bad = TestFunction::new(|x: f64| x.abs().sqrt(), 1.0, 0.3, 1.0);
        assert!(matches!(
            eta_star_integral(&bad, &m, &spec()),
            Err(Error::ModulusViolation { .. })
        ));
    }

    #[test]
    fn hann_profile_limits() {
        assert!((hann_profile(0.0) - 1.0).abs() < 1e-15);
        assert!((hann_profile(PI) - 0.5).abs() < 1e-12);
        assert!((hann_profile(1.0 - 1e-12) - hann_profile(1.0 + 1e-12)).abs() < 1e-10);
    }

    #[test]
    fn fourier_transforms_against_quadrature() {
        for f in [
            Observable::Gaussian { center: 0.4, width: 0.8 },
            Observable::Hann { center: -0.3, width: 1.2 },
        ] {
            for &phi in &[0.0, 0.7, 3.0, 11.0] {
                let re = integrate(|x| f.eval(x) * (phi * x).cos(), &[-6.0, -1.5, 0.0, 0.9, 6.0], &spec())
                    .unwrap()
                    .value;
                let im = integrate(|x| -f.eval(x) * (phi * x).sin(), &[-6.0, -1.5, 0.0, 0.9, 6.0], &spec())
                    .unwrap()
                    .value;
                let got = f.fourier(phi);
                assert!((got.re - re).abs() < 1e-8 && (got.im - im).abs() < 1e-8, "{f:?} {phi}");
            }
        }
    }

    #[test]
    fn lattice_transform_matches_direct_sum() {
        let a = 7.3;
        for f in [
            Observable::Gaussian { center: 0.2, width: 0.5 },
            Observable::Hann { center: 0.1, width: 1.0 },
        ] {
            for &phi in &[0.0, 1.3, 9.0] {
                let mut s = Complex64::new(0.0, 0.0);
                for z in -200i64..=200 {
                    let w = f.eval(z as f64 / a) / a;
                    let p = -(z as f64) * phi / a;
                    s += Complex64::new(w * p.cos(), w * p.sin());
                }
                assert!((f.lattice_transform(phi, a) - s).norm() < 1e-6, "{f:?} {phi}");
            }
        }
    }

    #[test]
    fn total_mass_is_exact() {
        let law = LatticeStableLaw::new(1.5).unwrap();
        let eta = PerturbationLaw::new(EtaFamily::OneSided { beta: 0.3 }).unwrap();
        let r = holding_jumping_resolvent_at_zero(&Observable::One, 1.0, 1e3, &law, &eta, &spec()).unwrap();
        assert_eq!(r.value, 1.0);
        let m = EtaStarMeasure::for_law(&eta).unwrap();
        let s = skew_resolvent_at_zero(&Observable::One, 1.0, &m, 1.5, &spec()).unwrap();
        assert_eq!(s.value, 1.0);
    }

    #[test]
    fn constant_eta_reduces_to_point_values() {
        let law = LatticeStableLaw::new(1.5).unwrap();
        let eta = PerturbationLaw::new(EtaFamily::Constant { value: 7 }).unwrap();
        let f = Observable::Gaussian { center: 0.0, width: 1.0 };
        let r = DiscreteResolvent::new(&law, 1.0, 1e3, spec()).unwrap();
        let a = r.norming();
        let x = 7.0 / a + 1e-12;
        let vf = r.killed(&f, x).unwrap().value;
        let v1 = r.killed(&Observable::One, x).unwrap().value;
        let want = (1.0 / 1e3 + vf) / (1.0 / 1e3 + v1);
        let got = r.holding_jumping_at_zero(&f, &eta).unwrap().value;
        assert!((got - want).abs() < 1e-7, "{got} {want}");
    }

    #[test]
    fn killed_bound_by_constant_function() {
        let law = LatticeStableLaw::new(1.5).unwrap();
        let r = DiscreteResolvent::new(&law, 1.0, 1e3, spec()).unwrap();
        let f = Observable::Hann { center: 0.5, width: 1.0 };
        for &x in &[-3.0, -0.7, 0.0, 0.2, 1.0, 4.0] {
            let vf = r.killed(&f, x).unwrap().value;
            let v1 = r.killed(&Observable::One, x).unwrap().value;
            assert!(vf.abs() <= f.sup_norm() * v1 + 1e-9, "x={x}");
        }
        assert_eq!(r.killed(&f, 0.0).unwrap().value, 0.0);
    }

    #[test]
    fn exponent_weight_closed_form() {
        let c = ContinuousResolvent::new(1.5, 1.0, spec()).unwrap();
        let m = EtaStarMeasure::new(0.3, 0.7, 0.3).unwrap();
        let q = c.exponent_weight_quadrature(&m).unwrap().value;
        assert!((q / c.exponent_weight(&m) - 1.0).abs() < 1e-7);
    }
}
