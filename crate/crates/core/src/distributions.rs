//! Step laws for the lattice walk and laws of the jump from zero.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand_core::RngCore;

use crate::error::check;
use crate::rng::{self, Role};
use crate::special::{gamma, hurwitz_zeta, zeta, ZetaTrigSeries};
use crate::{Error, Result};

/// `K_α = -Γ(2-α)cos(πα/2)/(α-1)`, the constant of the stable characteristic
/// exponent attached to a tail `P{|ξ|>x} ~ x^{-α}`.
pub fn k_alpha(alpha: f64) -> f64 {
    -gamma(2.0 - alpha) * libm::cos(PI * alpha / 2.0) / (alpha - 1.0)
}

/// Sampler for `M ≥ 0` with `P{M=0} = p0` and `P{M=k} = w·k^{-(1+γ)}`.
///
/// Inverse CDF on `0..=m`, and above `m` rejection from the discretized Pareto
/// proposal `⌊(m+1)V^{-1/γ}⌋`, whose acceptance ratio is decreasing in `k`.
#[derive(Debug, Clone)]
struct PowerMagnitudeSampler {
    index: f64,
    cdf: Vec<f64>,
    m: u64,
    r_first: f64,
}

const SAMPLE_CAP: u64 = 1 << 62;

impl PowerMagnitudeSampler {
    fn new(index: f64, weight: f64, p0: f64, m: u64) -> Self {
        let mut cdf = Vec::with_capacity(m as usize + 1);
        let mut acc = p0;
        cdf.push(acc);
        for k in 1..=m {
            acc += weight * libm::pow(k as f64, -(1.0 + index));
            cdf.push(acc);
        }
        let r_first = Self::ratio(index, (m + 1) as f64);
        Self {
            index,
            cdf,
            m,
            r_first,
        }
    }

    // target / proposal up to a constant: k^{-1-γ} / (k^{-γ} - (k+1)^{-γ})
    fn ratio(index: f64, k: f64) -> f64 {
        1.0 / (k * -libm::expm1(-index * libm::log1p(1.0 / k)))
    }

    fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> u64 {
        let u = rng::uniform_open(rng);
        if u < self.cdf[self.m as usize] {
            return self.cdf.partition_point(|&c| c <= u) as u64;
        }
        let start = (self.m + 1) as f64;
        loop {
            let v = rng::uniform_open(rng);
            let x = libm::floor(start * libm::pow(v, -1.0 / self.index));
            let k = if x >= SAMPLE_CAP as f64 { SAMPLE_CAP } else { x as u64 };
            let w = rng::uniform_open(rng);
            if w * self.r_first <= Self::ratio(self.index, k as f64) {
                return k;
            }
        }
    }
}

/// Symmetric zeta-type lattice law: `P{ξ=±k} = C·k^{-(1+α)}` for `k ≥ 1`
/// and the remaining mass at 0.
#[derive(Debug, Clone)]
pub struct LatticeStableLaw {
    alpha: f64,
    c: f64,
    p0: f64,
    series: ZetaTrigSeries,
    sampler: PowerMagnitudeSampler,
}

impl LatticeStableLaw {
    /// The law without an atom at 0, `C = 1/(2ζ(1+α))`.
    pub fn new(alpha: f64) -> Result<Self> {
        check(alpha > 1.0 && alpha < 2.0, "alpha", alpha, "must lie in (1, 2)")?;
        Self::with_tail_constant(alpha, 0.5 / zeta(1.0 + alpha))
    }

    pub fn with_tail_constant(alpha: f64, c: f64) -> Result<Self> {
        check(alpha > 1.0 && alpha < 2.0, "alpha", alpha, "must lie in (1, 2)")?;
        let z = zeta(1.0 + alpha);
        check(
            c > 0.0 && 2.0 * c * z <= 1.0 + 1e-15,
            "tail_constant",
            c,
            "must satisfy 0 < 2Cζ(1+α) ≤ 1",
        )?;
        let p0 = 1.0 - 2.0 * c * z;
        // rounding residue of the default constant is not an atom
        let p0 = if p0 <= 8.0 * f64::EPSILON { 0.0 } else { p0 };
        Ok(Self {
            alpha,
            c,
            p0,
            series: ZetaTrigSeries::new(1.0 + alpha),
            sampler: PowerMagnitudeSampler::new(alpha, 2.0 * c, p0, 1024),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tail_constant(&self) -> f64 {
        self.c
    }

    pub fn pmf(&self, k: i64) -> f64 {
        if k == 0 {
            self.p0
        } else {
            self.c * libm::pow(k.unsigned_abs() as f64, -(1.0 + self.alpha))
        }
    }

    /// `P{|ξ| > x}`.
    pub fn tail(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 1.0;
        }
        2.0 * self.c * hurwitz_zeta(1.0 + self.alpha, libm::floor(x) + 1.0)
    }

    /// Continuous decreasing interpolant of the tail, equal to it on integers.
    pub fn tail_interp(&self, x: f64) -> f64 {
        2.0 * self.c * hurwitz_zeta(1.0 + self.alpha, x.max(0.0) + 1.0)
    }

    /// `1 - ψ(θ)`, accurate to full relative precision near `θ = 0`.
    pub fn one_minus_psi(&self, theta: f64) -> f64 {
        2.0 * self.c * self.series.zeta_minus_cos_sum(theta)
    }

    /// `ψ(θ) = E e^{iθξ}`.
    pub fn charfn(&self, theta: f64) -> f64 {
        1.0 - self.one_minus_psi(theta)
    }

    pub fn k_alpha(&self) -> f64 {
        k_alpha(self.alpha)
    }

    /// The closed-form large-`v` approximation of [`Self::norming_a`].
    pub fn norming_a_asymptotic(&self, v: f64) -> f64 {
        libm::pow(2.0 * self.c * self.k_alpha() * v / self.alpha, 1.0 / self.alpha)
    }

    /// `a(v)` solving `v·P{|ξ| > a} = 1/K_α` on the interpolated tail.
    ///
    /// This normalization makes `v(1 - ψ(θ/a(v))) → |θ|^α`.
    pub fn norming_a(&self, v: f64) -> Result<f64> {
        check(v > 0.0, "v", v, "must be positive")?;
        let target = 1.0 / (self.k_alpha() * v);
        let guess = self.norming_a_asymptotic(v);
        bisect_tail(|x| self.tail_interp(x), target, guess)
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> i64 {
        let bits = rng.next_u64();
        let m = self.sampler.sample(rng) as i64;
        if bits & 1 == 0 {
            m
        } else {
            -m
        }
    }
}

/// Solve `tail(x) = target` for a continuous decreasing tail.
fn bisect_tail<F: Fn(f64) -> f64>(tail: F, target: f64, guess: f64) -> Result<f64> {
    if tail(0.0) < target {
        return Err(Error::NormingBracket { lo: 0.0, hi: 0.0 });
    }
    let mut hi = 2.0 * guess.max(1.0);
    let mut steps = 0;
    while tail(hi) >= target {
        hi *= 2.0;
        steps += 1;
        if steps > 2000 || !hi.is_finite() {
            return Err(Error::NormingBracket { lo: 0.0, hi });
        }
    }
    let mut lo = if tail(0.5 * guess) >= target { 0.5 * guess } else { 0.0 };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if tail(mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Step law of the unperturbed walk.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum StepLaw {
    Stable(LatticeStableLaw),
    /// `P{ξ = ±1} = 1/2`.
    SimpleWalk,
}

impl StepLaw {
    pub fn stable(alpha: f64) -> Result<Self> {
        LatticeStableLaw::new(alpha).map(StepLaw::Stable)
    }

    pub fn as_stable(&self) -> Option<&LatticeStableLaw> {
        match self {
            StepLaw::Stable(l) => Some(l),
            StepLaw::SimpleWalk => None,
        }
    }

    pub fn pmf(&self, k: i64) -> f64 {
        match self {
            StepLaw::Stable(l) => l.pmf(k),
            StepLaw::SimpleWalk => {
                if k.abs() == 1 {
                    0.5
                } else {
                    0.0
                }
            }
        }
    }

    pub fn tail(&self, x: f64) -> f64 {
        match self {
            StepLaw::Stable(l) => l.tail(x),
            StepLaw::SimpleWalk => {
                if x < 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn one_minus_psi(&self, theta: f64) -> f64 {
        match self {
            StepLaw::Stable(l) => l.one_minus_psi(theta),
            StepLaw::SimpleWalk => {
                let h = libm::sin(0.5 * theta);
                2.0 * h * h
            }
        }
    }

    pub fn charfn(&self, theta: f64) -> f64 {
        1.0 - self.one_minus_psi(theta)
    }

    pub fn norming_a(&self, v: f64) -> Result<f64> {
        match self {
            StepLaw::Stable(l) => l.norming_a(v),
            StepLaw::SimpleWalk => Err(Error::Unsupported("norming of the simple walk")),
        }
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> i64 {
        match self {
            StepLaw::Stable(l) => l.sample(rng),
            StepLaw::SimpleWalk => {
                if rng.next_u64() >> 63 == 0 {
                    1
                } else {
                    -1
                }
            }
        }
    }

    /// `n` draws from the stream `(seed, Sample, 0)`.
    pub fn sample_seeded(&self, seed: u64, n: usize) -> Vec<i64> {
        let mut r = rng::stream(seed, Role::Sample, 0);
        (0..n).map(|_| self.sample(&mut r)).collect()
    }
}

/// The law of the jump `η` out of zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaFamily {
    /// `P{η = k} = k^{-(1+β)}/ζ(1+β)`, `k ≥ 1`.
    OneSided { beta: f64 },
    /// `|η|` as in `OneSided`, positive with probability `c_plus`.
    TwoSided { beta: f64, c_plus: f64 },
    Constant { value: i64 },
    /// `P{η = k} = (1-q)q^{k-1}`, `k ≥ 1`.
    Geometric { q: f64 },
}

#[derive(Debug, Clone)]
pub struct PerturbationLaw {
    family: EtaFamily,
    heavy: Option<HeavyTail>,
}

#[derive(Debug, Clone)]
struct HeavyTail {
    beta: f64,
    c_plus: f64,
    zeta: f64,
    series: ZetaTrigSeries,
    sampler: PowerMagnitudeSampler,
}

impl PerturbationLaw {
    pub fn new(family: EtaFamily) -> Result<Self> {
        let heavy = match family {
            EtaFamily::OneSided { beta } => Some(Self::heavy(beta, 1.0)?),
            EtaFamily::TwoSided { beta, c_plus } => {
                check((0.0..=1.0).contains(&c_plus), "c_plus", c_plus, "must lie in [0, 1]")?;
                Some(Self::heavy(beta, c_plus)?)
            }
            EtaFamily::Constant { value } => {
                check(value != 0, "eta_value", 0.0, "P{η=0} must be below 1")?;
                None
            }
            EtaFamily::Geometric { q } => {
                check(q > 0.0 && q < 1.0, "q", q, "must lie in (0, 1)")?;
                None
            }
        };
        Ok(Self { family, heavy })
    }

    fn heavy(beta: f64, c_plus: f64) -> Result<HeavyTail> {
        check(beta > 0.0 && beta < 1.0, "beta", beta, "must lie in (0, 1)")?;
        let z = zeta(1.0 + beta);
        Ok(HeavyTail {
            beta,
            c_plus,
            zeta: z,
            series: ZetaTrigSeries::new(1.0 + beta),
            sampler: PowerMagnitudeSampler::new(beta, 1.0 / z, 0.0, 1024),
        })
    }

    pub fn family(&self) -> EtaFamily {
        self.family
    }

    /// Tail index in heavy-tail mode, `None` when `E|η| < ∞`.
    pub fn beta(&self) -> Option<f64> {
        self.heavy.as_ref().map(|h| h.beta)
    }

    pub fn c_plus(&self) -> f64 {
        match self.family {
            EtaFamily::OneSided { .. } | EtaFamily::Geometric { .. } => 1.0,
            EtaFamily::TwoSided { c_plus, .. } => c_plus,
            EtaFamily::Constant { value } => {
                if value > 0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn c_minus(&self) -> f64 {
        1.0 - self.c_plus()
    }

    pub fn pmf(&self, k: i64) -> f64 {
        match self.family {
            EtaFamily::Constant { value } => {
                if k == value {
                    1.0
                } else {
                    0.0
                }
            }
            EtaFamily::Geometric { q } => {
                if k >= 1 {
                    (1.0 - q) * libm::pow(q, (k - 1) as f64)
                } else {
                    0.0
                }
            }
            _ => {
                let h = self.heavy.as_ref().unwrap();
                if k == 0 {
                    return 0.0;
                }
                let side = if k > 0 { h.c_plus } else { 1.0 - h.c_plus };
                side * libm::pow(k.unsigned_abs() as f64, -(1.0 + h.beta)) / h.zeta
            }
        }
    }

    /// `P{|η| > x}`.
    pub fn tail(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 1.0;
        }
        match self.family {
            EtaFamily::Constant { value } => {
                if (value.unsigned_abs() as f64) > x {
                    1.0
                } else {
                    0.0
                }
            }
            EtaFamily::Geometric { q } => libm::pow(q, libm::floor(x)),
            _ => {
                let h = self.heavy.as_ref().unwrap();
                hurwitz_zeta(1.0 + h.beta, libm::floor(x) + 1.0) / h.zeta
            }
        }
    }

    /// `P{η > x}`.
    pub fn tail_plus(&self, x: f64) -> f64 {
        match self.family {
            EtaFamily::Constant { value } => {
                if (value as f64) > x {
                    1.0
                } else {
                    0.0
                }
            }
            _ if x < 0.0 => 1.0 - self.tail_minus(libm::ceil(-x) - 1.0),
            _ => self.c_plus() * self.tail(x),
        }
    }

    /// `P{-η > x}`.
    pub fn tail_minus(&self, x: f64) -> f64 {
        match self.family {
            EtaFamily::Constant { value } => {
                if (-value as f64) > x {
                    1.0
                } else {
                    0.0
                }
            }
            _ if x < 0.0 => 1.0 - self.tail_plus(libm::ceil(-x) - 1.0),
            _ => self.c_minus() * self.tail(x),
        }
    }

    /// Continuous interpolant of the heavy tail.
    pub fn tail_interp(&self, x: f64) -> Option<f64> {
        self.heavy
            .as_ref()
            .map(|h| hurwitz_zeta(1.0 + h.beta, x.max(0.0) + 1.0) / h.zeta)
    }

    /// `c(v)` solving `v·P{|η| > c} = 1`, heavy-tail mode only.
    pub fn norming_c(&self, v: f64) -> Result<f64> {
        let h = self
            .heavy
            .as_ref()
            .ok_or(Error::Unsupported("c(v) needs a heavy-tailed η"))?;
        check(v >= 1.0, "v", v, "must be at least 1")?;
        let guess = libm::pow(v / (h.beta * h.zeta), 1.0 / h.beta);
        bisect_tail(|x| self.tail_interp(x).unwrap(), 1.0 / v, guess)
    }

    /// `1 - E e^{iθη}`, accurate near `θ = 0`.
    pub fn one_minus_chf(&self, theta: f64) -> Complex64 {
        match self.family {
            EtaFamily::Constant { value } => {
                let w = value as f64 * theta;
                let h = libm::sin(0.5 * w);
                Complex64::new(2.0 * h * h, -libm::sin(w))
            }
            EtaFamily::Geometric { q } => {
                let h = libm::sin(0.5 * theta);
                let num = Complex64::new(2.0 * h * h, -libm::sin(theta));
                let den = Complex64::new(1.0 - q * libm::cos(theta), -q * libm::sin(theta));
                num / den
            }
            _ => {
                let h = self.heavy.as_ref().unwrap();
                let re = h.series.zeta_minus_cos_sum(theta) / h.zeta;
                let im = -(2.0 * h.c_plus - 1.0) * h.series.sin_sum(theta) / h.zeta;
                Complex64::new(re, im)
            }
        }
    }

    pub fn chf(&self, theta: f64) -> Complex64 {
        Complex64::new(1.0, 0.0) - self.one_minus_chf(theta)
    }

    /// Draw one `η`. Heavy-tailed families draw the magnitude before the sign.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> i64 {
        match self.family {
            EtaFamily::Constant { value } => value,
            EtaFamily::Geometric { q } => 1 + rng::geometric_failures(rng, q).min(SAMPLE_CAP) as i64,
            _ => {
                let h = self.heavy.as_ref().unwrap();
                let m = h.sampler.sample(rng) as i64;
                if h.c_plus >= 1.0 || rng::uniform_open(rng) < h.c_plus {
                    m
                } else {
                    -m
                }
            }
        }
    }

    pub fn sample_seeded(&self, seed: u64, n: usize) -> Vec<i64> {
        let mut r = rng::stream(seed, Role::Sample, 0);
        (0..n).map(|_| self.sample(&mut r)).collect()
    }
}
