//! Globally adaptive Gauss–Kronrod (10/21 point) quadrature and Euler
//! acceleration for alternating series of integrals.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::{Error, Result};

/// Tolerances for a single integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Where unbounded oscillatory integrals switch from adaptive panels to
    /// between-zeros summation.
    pub tail_split: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            rel_tol: 1e-8,
            max_subdivisions: 200_000,
            tail_split: 20.0,
        }
    }
}

impl QuadratureSpec {
    pub fn with_abs_tol(self, abs_tol: f64) -> Self {
        Self { abs_tol, ..self }
    }

    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        Self { rel_tol, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        crate::error::check(self.abs_tol > 0.0, "abs_tol", self.abs_tol, "must be positive")?;
        crate::error::check(self.rel_tol > 0.0, "rel_tol", self.rel_tol, "must be positive")?;
        Ok(())
    }
}

/// A transform value together with the quadrature error estimate behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformResult {
    pub value: f64,
    pub err_estimate: f64,
    pub n_evals: usize,
}

impl TransformResult {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            err_estimate: 0.0,
            n_evals: 0,
        }
    }

    /// Scale value and error by a constant.
    pub fn scaled(self, c: f64) -> Self {
        Self {
            value: self.value * c,
            err_estimate: self.err_estimate * c.abs(),
            ..self
        }
    }

    /// Ratio with first-order error propagation.
    pub fn ratio(self, den: TransformResult) -> Self {
        let value = self.value / den.value;
        let err = (self.err_estimate + value.abs() * den.err_estimate) / den.value.abs();
        Self {
            value,
            err_estimate: err,
            n_evals: self.n_evals + den.n_evals,
        }
    }

    /// Product with first-order error propagation.
    pub fn times(self, other: TransformResult) -> Self {
        Self {
            value: self.value * other.value,
            err_estimate: self.err_estimate * other.value.abs() + other.err_estimate * self.value.abs(),
            n_evals: self.n_evals + other.n_evals,
        }
    }

    pub fn plus(self, other: TransformResult) -> Self {
        Self {
            value: self.value + other.value,
            err_estimate: self.err_estimate + other.err_estimate,
            n_evals: self.n_evals + other.n_evals,
        }
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_926_728_994_430,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9]
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// One 21-point Kronrod panel with the QUADPACK error heuristic.
fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = libm::pow(200.0 * err / res_asc, 1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.is_finite() {
        err = f64::INFINITY;
    }
    Panel { a, b, value, err }
}

/// Integrate `f` over `[points[0], points[last]]`, starting from the panels
/// delimited by `points` (which must be increasing) and bisecting the panel
/// with the largest error estimate until the total error meets the spec.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    spec: &QuadratureSpec,
) -> Result<TransformResult> {
    debug_assert!(points.len() >= 2);
    let mut heap = BinaryHeap::with_capacity(points.len() * 2);
    let mut n_evals = 0usize;
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in points.windows(2) {
        if w[1] > w[0] {
            let p = gk21(&mut f, w[0], w[1]);
            n_evals += 21;
            total += p.value;
            total_err += p.err;
            heap.push(p);
        }
    }
    let mut splits = 0usize;
    loop {
        let tol = spec.abs_tol.max(spec.rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if splits >= spec.max_subdivisions || mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            let value = heap.iter().map(|p| p.value).sum::<f64>();
            let err = heap.iter().map(|p| p.err).sum::<f64>();
            return Err(Error::Quadrature {
                value,
                err_estimate: err,
                n_evals,
            });
        }
        let left = gk21(&mut f, worst.a, mid);
        let right = gk21(&mut f, mid, worst.b);
        n_evals += 42;
        splits += 1;
        total += left.value + right.value - worst.value;
        total_err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
    }
    // re-sum to shed the drift of the running updates
    let mut parts: Vec<Panel> = heap.into_vec();
    parts.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = neumaier_sum(parts.iter().map(|p| p.value));
    let err = parts.iter().map(|p| p.err).sum::<f64>();
    if !value.is_finite() {
        return Err(Error::Quadrature {
            value,
            err_estimate: f64::INFINITY,
            n_evals,
        });
    }
    Ok(TransformResult {
        value,
        err_estimate: err,
        n_evals,
    })
}

/// Compensated summation.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Sum an alternating series from its leading terms by iterated averaging of
/// partial sums (the Euler transform). Returns the accelerated limit and
/// the spread of the last two averaging levels as an error estimate.
pub fn euler_alternating_sum(terms: &[f64]) -> (f64, f64) {
    if terms.is_empty() {
        return (0.0, 0.0);
    }
    let mut partial: Vec<f64> = Vec::with_capacity(terms.len());
    let mut s = 0.0;
    for t in terms {
        s += t;
        partial.push(s);
    }
    let mut prev_level_last = partial[partial.len() - 1];
    let mut err = terms[terms.len() - 1].abs();
    while partial.len() > 1 {
        let next: Vec<f64> = partial.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let last = next[next.len() - 1];
        err = (last - prev_level_last).abs();
        prev_level_last = last;
        partial = next;
    }
    (partial[0], err)
}

/// `n + 1` points spaced geometrically from `lo` to `hi` (both positive).
pub fn geometric_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let ratio = libm::pow(hi / lo, 1.0 / n as f64);
    let mut out = Vec::with_capacity(n + 1);
    let mut x = lo;
    for _ in 0..n {
        out.push(x);
        x *= ratio;
    }
    out.push(hi);
    out
}

/// Merge a sorted breakpoint list with extra points inside `(lo, hi)`.
pub fn merge_points(mut base: Vec<f64>, extra: &[f64]) -> Vec<f64> {
    let lo = base[0];
    let hi = base[base.len() - 1];
    base.extend(extra.iter().copied().filter(|&p| p > lo && p < hi));
    base.sort_by(f64::total_cmp);
    base.dedup();
    base
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn kronrod_rule_is_exact_for_degree_31() {
        for k in 0..=31 {
            let r = gk21(&mut |x: f64| x.powi(k), -1.0, 1.0);
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            assert!((r.value - exact).abs() < 1e-14, "degree {k}");
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2
        let spec = QuadratureSpec::default().with_abs_tol(1e-12).with_rel_tol(1e-12);
        let r = integrate(|x: f64| 1.0 / x.sqrt(), &[0.0, 1.0], &spec).unwrap();
        assert!((r.value - 2.0).abs() < 1e-10, "{r:?}");
        assert!(r.err_estimate <= 1e-11);
    }

    #[test]
    fn oscillatory_with_period_breaks() {
        // ∫_0^π cos(200θ)/(1+θ) dθ, reference value from 30-digit quadrature
        const REF: f64 = 2.353_877_575_350_940_3e-5;
        let n = 200.0;
        let pts: Vec<f64> = (0..=200).map(|k| PI * k as f64 / 200.0).collect();
        let spec = QuadratureSpec::default().with_abs_tol(1e-13).with_rel_tol(1e-12);
        let r = integrate(|t: f64| (n * t).cos() / (1.0 + t), &pts, &spec).unwrap();
        assert!((r.value - REF).abs() < 1e-12, "{}", r.value);
    }

    #[test]
    fn euler_sum_of_log2_series() {
        // Σ (-1)^{k+1}/k = ln 2
        let terms: Vec<f64> = (1..30).map(|k| if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64).collect();
        let (s, err) = euler_alternating_sum(&terms);
        assert!((s - core::f64::consts::LN_2).abs() < 1e-9, "{s}");
        assert!(err < 1e-6);
    }

    #[test]
    fn neumaier_recovers_small_terms() {
        let s = neumaier_sum([1e16, 1.0, -1e16, 1.0]);
        assert_eq!(s, 2.0);
    }
}
