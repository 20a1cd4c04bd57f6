//! Generating functions and Laplace transforms of hitting times, for the
//! lattice walk and for the symmetric α-stable limit.
//!
//! Every transform is a ratio of Fourier inversion integrals with real
//! symmetric integrands, so all integrals are taken over `[0, π]` (or
//! `[0, πa]` in scaled form) and the factor 2 cancels in each ratio.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::distributions::{LatticeStableLaw, StepLaw};
use crate::error::check;
use crate::quadrature::{euler_alternating_sum, geometric_points, integrate, QuadratureSpec, TransformResult};
use crate::special::gamma;
use crate::Result;

/// Points `0, lo, ..., hi` spaced geometrically with `per_decade` points per
/// decade above `lo`.
pub(crate) fn graded_points(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let mut pts = Vec::new();
    pts.push(0.0);
    if lo >= hi {
        pts.push(hi);
        return pts;
    }
    let decades = libm::log10(hi / lo);
    let n = libm::ceil(decades * per_decade as f64).max(1.0) as usize;
    pts.extend(geometric_points(lo, hi, n));
    pts
}

/// Add breakpoints every half period of `cos(freq·θ)` (at most `max_panels`
/// of them) to a sorted point set starting at 0.
pub(crate) fn with_period_points(mut pts: Vec<f64>, freq: f64, max_panels: usize) -> Vec<f64> {
    let hi = pts[pts.len() - 1];
    let freq = freq.abs();
    if freq == 0.0 {
        return pts;
    }
    let mut h = PI / freq;
    if hi / h > max_panels as f64 {
        h = hi / max_panels as f64;
    }
    let mut t = h;
    while t < hi {
        pts.push(t);
        t += h;
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * b.abs().max(1e-300));
    pts
}

/// Smallest `θ ∈ (0, hi]` with `g(θ) ≥ level` for an increasing `g`, or `hi`.
pub(crate) fn crossover<F: Fn(f64) -> f64>(g: F, level: f64, hi: f64) -> f64 {
    if g(hi) <= level {
        return hi;
    }
    let (mut lo, mut up) = (0.0, hi);
    for _ in 0..100 {
        let mid = 0.5 * (lo + up);
        if g(mid) < level {
            lo = mid;
        } else {
            up = mid;
        }
    }
    0.5 * (lo + up)
}

const MAX_PERIOD_PANELS: usize = 200_000;

/// `u_s(x) = Σ_k s^k P{S(k) = x}` for a fixed law and `s`, with `u_s(0)`
/// computed once.
#[derive(Debug, Clone)]
pub struct GreenFunction<'a> {
    law: &'a StepLaw,
    s: f64,
    scale: f64,
    spec: QuadratureSpec,
    at_zero: TransformResult,
}

impl<'a> GreenFunction<'a> {
    pub fn new(law: &'a StepLaw, s: f64, spec: QuadratureSpec) -> Result<Self> {
        check((0.0..1.0).contains(&s), "s", s, "must lie in [0, 1)")?;
        spec.validate()?;
        let scale = if s == 0.0 {
            PI
        } else {
            crossover(|t| s * law.one_minus_psi(t), 1.0 - s, PI)
        };
        let mut g = Self {
            law,
            s,
            scale,
            spec,
            at_zero: TransformResult::exact(1.0),
        };
        g.at_zero = g.eval(0)?;
        Ok(g)
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    fn eval(&self, x: i64) -> Result<TransformResult> {
        if self.s == 0.0 {
            return Ok(TransformResult::exact(if x == 0 { 1.0 } else { 0.0 }));
        }
        let s = self.s;
        let law = self.law;
        let xf = x as f64;
        let pts = with_period_points(graded_points(self.scale * 1e-3, PI, 8), xf, MAX_PERIOD_PANELS);
        let r = integrate(
            |t| libm::cos(xf * t) / ((1.0 - s) + s * law.one_minus_psi(t)),
            &pts,
            &self.spec,
        )?;
        Ok(r.scaled(1.0 / PI))
    }

    /// `u_s(x)`; the law is symmetric so `u_s(x) = u_s(-x)`.
    pub fn value(&self, x: i64) -> Result<TransformResult> {
        if x == 0 {
            return Ok(self.at_zero);
        }
        self.eval(x)
    }

    pub fn at_zero(&self) -> TransformResult {
        self.at_zero
    }

    /// `E_x s^σ = u_s(-x)/u_s(0)`, `σ` the first hitting time of 0.
    pub fn hit(&self, x: i64) -> Result<TransformResult> {
        if x == 0 {
            return Ok(TransformResult::exact(1.0));
        }
        Ok(self.value(x)?.ratio(self.at_zero))
    }
}

pub fn u_s(x: i64, s: f64, law: &StepLaw, spec: &QuadratureSpec) -> Result<TransformResult> {
    GreenFunction::new(law, s, *spec)?.value(x)
}

pub fn hit_gf(x: i64, s: f64, law: &StepLaw, spec: &QuadratureSpec) -> Result<TransformResult> {
    check(s > 0.0 && s < 1.0, "s", s, "must lie in (0, 1)")?;
    GreenFunction::new(law, s, *spec)?.hit(x)
}

/// Hitting of 0 by the walk run on a Poisson clock of rate `ρ`.
#[derive(Debug, Clone)]
pub struct PoissonHitting<'a> {
    green: GreenFunction<'a>,
    lambda: f64,
    rho: f64,
}

impl<'a> PoissonHitting<'a> {
    pub fn new(law: &'a StepLaw, lambda: f64, rho: f64, spec: QuadratureSpec) -> Result<Self> {
        check(lambda > 0.0, "lambda", lambda, "must be positive")?;
        check(rho > 0.0, "rho", rho, "must be positive")?;
        Ok(Self {
            green: GreenFunction::new(law, rho / (lambda + rho), spec)?,
            lambda,
            rho,
        })
    }

    /// `E_x e^{-λσ̃}`.
    pub fn laplace(&self, x: i64) -> Result<TransformResult> {
        self.green.hit(x)
    }

    /// Resolvent density of the Poissonized walk, `û_λ(x) = u_s(x)/(λ+ρ)`.
    pub fn resolvent_density(&self, x: i64) -> Result<TransformResult> {
        Ok(self.green.value(x)?.scaled(1.0 / (self.lambda + self.rho)))
    }
}

pub fn poisson_hit_laplace(
    x: i64,
    lambda: f64,
    rho: f64,
    law: &StepLaw,
    spec: &QuadratureSpec,
) -> Result<TransformResult> {
    if x == 0 {
        check(lambda > 0.0 && rho > 0.0, "lambda", lambda, "rates must be positive")?;
        return Ok(TransformResult::exact(1.0));
    }
    PoissonHitting::new(law, lambda, rho, *spec)?.laplace(x)
}

/// Below this `|x|λ^{1/α}` the hitting transform uses its small-`x` expansion.
const SMALL_X: f64 = 1e-5;
/// Above this `|x|λ^{1/α}` the density uses its large-`x` expansion.
const LARGE_X: f64 = 1e4;

/// Resolvent density `v_λ(x) = (1/π)∫_0^∞ cos(xθ)/(λ+θ^α) dθ` of the
/// symmetric α-stable process with exponent `|θ|^α`.
#[derive(Debug, Clone)]
pub struct StableResolvent {
    alpha: f64,
    lambda: f64,
    spec: QuadratureSpec,
    at_zero: TransformResult,
}

/// Number of alternating tail panels fed to the Euler transform.
const TAIL_PANELS: usize = 40;

impl StableResolvent {
    pub fn new(alpha: f64, lambda: f64, spec: QuadratureSpec) -> Result<Self> {
        check(alpha > 1.0 && alpha < 2.0, "alpha", alpha, "must lie in (1, 2)")?;
        check(lambda > 0.0, "lambda", lambda, "must be positive")?;
        spec.validate()?;
        let mut r = Self {
            alpha,
            lambda,
            spec,
            at_zero: TransformResult::exact(0.0),
        };
        r.at_zero = r.density_at_zero()?;
        Ok(r)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `λ^{1/α-1}/(α sin(π/α))`.
    pub fn closed_form_at_zero(&self) -> f64 {
        libm::pow(self.lambda, 1.0 / self.alpha - 1.0) / (self.alpha * libm::sin(PI / self.alpha))
    }

    fn weight(&self, t: f64) -> f64 {
        1.0 / (self.lambda + libm::pow(t, self.alpha))
    }

    fn scale(&self) -> f64 {
        libm::pow(self.lambda, 1.0 / self.alpha)
    }

    fn density_at_zero(&self) -> Result<TransformResult> {
        // head on [0, A] by quadrature, tail by the convergent expansion of
        // 1/(λ+θ^α) in powers of λθ^{-α}
        let a = self.spec.tail_split.max(2.0 * self.scale());
        let pts = graded_points(self.scale() * 1e-3, a, 8);
        let head = integrate(|t| self.weight(t), &pts, &self.spec)?;
        let q = self.lambda * libm::pow(a, -self.alpha);
        let mut tail = 0.0;
        let mut term_pow = libm::pow(a, 1.0 - self.alpha);
        let mut sign = 1.0;
        let mut last = 0.0;
        for j in 0..200 {
            let e = self.alpha * (j as f64 + 1.0) - 1.0;
            last = sign * term_pow / e;
            tail += last;
            if last.abs() < 1e-18 {
                break;
            }
            term_pow *= q;
            sign = -sign;
        }
        Ok(TransformResult {
            value: (head.value + tail) / PI,
            err_estimate: (head.err_estimate + last.abs()) / PI,
            n_evals: head.n_evals,
        })
    }

    pub fn at_zero(&self) -> TransformResult {
        self.at_zero
    }

    /// `1/(λ+θ^α) = 1/λ - θ^α/λ² + θ^{2α}/λ³ - ...` transformed term by term.
    fn density_far(&self, x: f64) -> TransformResult {
        let (a, l) = (self.alpha, self.lambda);
        let lead = gamma(1.0 + a) * libm::sin(0.5 * PI * a) / (PI * l * l * libm::pow(x, 1.0 + a));
        let next = (gamma(1.0 + 2.0 * a) * libm::sin(PI * a)).abs() / (PI * l * l * l * libm::pow(x, 1.0 + 2.0 * a));
        TransformResult {
            value: lead,
            err_estimate: 2.0 * next,
            n_evals: 0,
        }
    }

    /// `v_λ(x)`: adaptive panels up to a zero of `cos(xθ)` beyond the tail
    /// split, then Euler-accelerated summation over the half-period panels.
    pub fn density(&self, x: f64) -> Result<TransformResult> {
        let x = x.abs();
        if x == 0.0 {
            return Ok(self.at_zero);
        }
        if x * self.scale() > LARGE_X {
            return Ok(self.density_far(x));
        }
        let k0 = libm::ceil(self.spec.tail_split.max(2.0 * self.scale()) * x / PI - 0.5).max(0.0);
        let split = (k0 + 0.5) * PI / x;
        let pts = with_period_points(graded_points(self.scale() * 1e-3, split, 8), x, MAX_PERIOD_PANELS);
        let head = integrate(|t| libm::cos(x * t) * self.weight(t), &pts, &self.spec)?;
        let mut terms = Vec::with_capacity(TAIL_PANELS);
        let mut n_evals = head.n_evals;
        let mut quad_err = 0.0;
        let panel_spec = self.spec.with_abs_tol(self.spec.abs_tol * 1e-2);
        for k in 0..TAIL_PANELS {
            let lo = (k0 + 0.5 + k as f64) * PI / x;
            let hi = lo + PI / x;
            let r = integrate(|t| libm::cos(x * t) * self.weight(t), &[lo, hi], &panel_spec)?;
            n_evals += r.n_evals;
            quad_err += r.err_estimate;
            terms.push(r.value);
        }
        let (tail, accel_err) = euler_alternating_sum(&terms);
        Ok(TransformResult {
            value: (head.value + tail) / PI,
            err_estimate: (head.err_estimate + quad_err + accel_err) / PI,
            n_evals,
        })
    }

    /// `E_x e^{-λσ} = v_λ(-x)/v_λ(0)`.
    pub fn hit_laplace(&self, x: f64) -> Result<TransformResult> {
        if x == 0.0 {
            return Ok(TransformResult::exact(1.0));
        }
        if x.abs() * self.scale() < SMALL_X {
            // v_λ(0) - v_λ(x) = |x|^{α-1}/(2Γ(α)sin(π(α-1)/2)) (1 + O(λ|x|^α))
            let a = self.alpha;
            let drop = libm::pow(x.abs(), a - 1.0) / (2.0 * gamma(a) * libm::sin(0.5 * PI * (a - 1.0)));
            let v0 = self.at_zero.value;
            let rel = self.lambda * libm::pow(x.abs(), a);
            return Ok(TransformResult {
                value: 1.0 - drop / v0,
                err_estimate: drop / v0 * (rel + self.at_zero.err_estimate / v0),
                n_evals: 0,
            });
        }
        Ok(self.density(x)?.ratio(self.at_zero))
    }
}

pub fn stable_resolvent_density(x: f64, lambda: f64, alpha: f64, spec: &QuadratureSpec) -> Result<TransformResult> {
    StableResolvent::new(alpha, lambda, *spec)?.density(x)
}

pub fn stable_hit_laplace(x: f64, lambda: f64, alpha: f64, spec: &QuadratureSpec) -> Result<TransformResult> {
    StableResolvent::new(alpha, lambda, *spec)?.hit_laplace(x)
}

/// Scaled hitting transform of the walk at speed `v`:
/// `E_{⌊xa(v)⌋} e^{-(λ/v)σ(S∘N)}` as a ratio of integrals over `[0, πa(v)]`
/// with denominator `λ + v(1-ψ(θ/a(v)))`.
#[derive(Debug, Clone)]
pub struct ScaledHitting<'a> {
    law: &'a LatticeStableLaw,
    lambda: f64,
    v: f64,
    a: f64,
    scale: f64,
    spec: QuadratureSpec,
    denominator: TransformResult,
}

impl<'a> ScaledHitting<'a> {
    pub fn new(law: &'a LatticeStableLaw, lambda: f64, v: f64, spec: QuadratureSpec) -> Result<Self> {
        check(lambda > 0.0, "lambda", lambda, "must be positive")?;
        check(v >= 1.0, "v", v, "must be at least 1")?;
        spec.validate()?;
        let a = law.norming_a(v)?;
        let top = PI * a;
        let scale = crossover(|t| v * law.one_minus_psi(t / a), lambda, top);
        let mut h = Self {
            law,
            lambda,
            v,
            a,
            scale,
            spec,
            denominator: TransformResult::exact(1.0),
        };
        h.denominator = h.integral(|_| 1.0, 0.0)?;
        Ok(h)
    }

    pub fn norming(&self) -> f64 {
        self.a
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn law(&self) -> &LatticeStableLaw {
        self.law
    }

    /// Lattice start `⌊x·a(v)⌋`.
    pub fn start(&self, x: f64) -> i64 {
        libm::floor(x * self.a) as i64
    }

    /// `λ + v(1 - ψ(θ/a))`.
    pub fn symbol(&self, theta: f64) -> f64 {
        self.lambda + self.v * self.law.one_minus_psi(theta / self.a)
    }

    /// Scale points of the integrand, for callers building their own grids.
    pub(crate) fn points(&self, freq: f64) -> Vec<f64> {
        self.points_to(PI * self.a, freq)
    }

    /// As [`Self::points`] but on `[0, upper]`, `upper ≤ πa`.
    pub(crate) fn points_to(&self, upper: f64, freq: f64) -> Vec<f64> {
        let upper = upper.min(PI * self.a);
        let mut pts = graded_points((self.scale * 1e-3).min(upper * 1e-3), upper, 8);
        pts = crate::quadrature::merge_points(pts, &[1.0, self.scale]);
        with_period_points(pts, freq, MAX_PERIOD_PANELS)
    }

    pub fn spec(&self) -> &QuadratureSpec {
        &self.spec
    }

    /// `∫_0^{πa} g(θ)/(λ + v(1-ψ(θ/a))) dθ` with period breakpoints for `freq`.
    pub(crate) fn integral<G: Fn(f64) -> f64>(&self, g: G, freq: f64) -> Result<TransformResult> {
        let pts = self.points(freq);
        integrate(|t| g(t) / self.symbol(t), &pts, &self.spec)
    }

    pub fn denominator(&self) -> TransformResult {
        self.denominator
    }

    /// `E_{⌊xa⌋} e^{-(λ/v)σ}`.
    pub fn value(&self, x: f64) -> Result<TransformResult> {
        let k = self.start(x);
        self.value_at_lattice(k)
    }

    pub fn value_at_lattice(&self, k: i64) -> Result<TransformResult> {
        if k == 0 {
            return Ok(TransformResult::exact(1.0));
        }
        let w = k as f64 / self.a;
        let num = self.integral(|t| libm::cos(w * t), w)?;
        Ok(num.ratio(self.denominator))
    }

    /// `E_{⌊xa⌋}(1 - e^{-(λ/v)σ})`, computed from the integral of
    /// `1 - cos` so it keeps its relative accuracy near `x = 0`.
    pub fn complement(&self, x: f64) -> Result<TransformResult> {
        let k = self.start(x);
        if k == 0 {
            return Ok(TransformResult::exact(0.0));
        }
        let w = k as f64 / self.a;
        let num = self.integral(
            |t| {
                let h = libm::sin(0.5 * w * t);
                2.0 * h * h
            },
            w,
        )?;
        Ok(num.ratio(self.denominator))
    }
}

pub fn discrete_hit_laplace_scaled(
    x: f64,
    lambda: f64,
    v: f64,
    law: &LatticeStableLaw,
    spec: &QuadratureSpec,
) -> Result<TransformResult> {
    ScaledHitting::new(law, lambda, v, *spec)?.value(x)
}

/// Pieces of the gap between `∫_{|θ|≤πa} dθ/(λ+v(1-ψ(θ/a)))` and
/// `∫_ℝ dθ/(λ+|θ|^α)`, split at `A` and `εa`:
///
/// ```text
/// I = ∫_{|θ|≤A} |1/D_v - 1/D|      J = ∫_{A≤|θ|≤εa} 1/D_v
/// K = ∫_{|θ|>A} 1/D                M = ∫_{εa≤|θ|≤πa} 1/D_v
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrandSplit {
    pub i: TransformResult,
    pub j: TransformResult,
    pub k: TransformResult,
    pub m: TransformResult,
    /// `∫_{|θ|≤πa} 1/D_v`.
    pub discrete: TransformResult,
    /// `∫_ℝ 1/D = 2π v_λ(0)`.
    pub continuous: TransformResult,
}

impl IntegrandSplit {
    /// `2A^{1-α}/(α-1) ≥ K(A)`.
    pub fn k_bound(alpha: f64, cut: f64) -> f64 {
        2.0 * libm::pow(cut, 1.0 - alpha) / (alpha - 1.0)
    }
}

pub fn integrand_split(hit: &ScaledHitting<'_>, cut: f64, eps: f64) -> Result<IntegrandSplit> {
    check(cut > 0.0, "cut", cut, "must be positive")?;
    check(eps > 0.0 && eps < PI, "eps", eps, "must lie in (0, π)")?;
    let alpha = hit.law().alpha();
    let lambda = hit.lambda();
    let a = hit.norming();
    let spec = hit.spec();
    let stable = StableResolvent::new(alpha, lambda, *spec)?;
    let limit = |t: f64| 1.0 / (lambda + libm::pow(t, alpha));
    let on = |lo: f64, hi: f64| -> Result<TransformResult> {
        if hi <= lo {
            return Ok(TransformResult::exact(0.0));
        }
        let pts: Vec<f64> = hit.points_to(PI * a, 0.0).into_iter().filter(|&p| p > lo && p < hi).collect();
        let pts = crate::quadrature::merge_points(alloc::vec![lo, hi], &pts);
        integrate(|t| 1.0 / hit.symbol(t), &pts, spec)
    };
    let head_pts: Vec<f64> = hit.points_to(cut, 0.0);
    let i = integrate(|t| (1.0 / hit.symbol(t) - limit(t)).abs(), &head_pts, spec)?;
    let head_limit = integrate(limit, &head_pts, spec)?;
    let continuous = stable.at_zero().scaled(2.0 * PI);
    let k = continuous.plus(head_limit.scaled(-2.0));
    let split = (eps * a).max(cut);
    let j = on(cut, split.min(PI * a))?;
    let m = on(split.min(PI * a), PI * a)?;
    Ok(IntegrandSplit {
        i: i.scaled(2.0),
        j: j.scaled(2.0),
        k,
        m: m.scaled(2.0),
        discrete: hit.denominator().scaled(2.0),
        continuous,
    })
}

/// `v(1 - ψ(θ/a(v)))`, which tends to `|θ|^α`.
pub fn scaled_exponent(law: &LatticeStableLaw, v: f64, a: f64, theta: f64) -> f64 {
    v * law.one_minus_psi(theta / a)
}
