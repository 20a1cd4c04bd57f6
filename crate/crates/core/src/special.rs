//! Special functions: Γ, the Riemann and Hurwitz zeta functions, and the
//! trigonometric zeta sums `Σ k^{-s} cos(kθ)`, `Σ k^{-s} sin(kθ)` evaluated
//! through their small-angle expansion.

use core::f64::consts::PI;

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// `B_{2j} / (2j)!` for `j = 1..=10`.
const BERNOULLI_OVER_FACTORIAL: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
    43867.0 / 5109094217170944000.0,
    -174611.0 / 802857662698291200000.0,
];

/// Hurwitz zeta `ζ(s, a) = Σ_{n≥0} (n + a)^{-s}` for `s > 1`, `a > 0`.
///
/// Euler–Maclaurin with the head summed until `a + N ≥ 16`; the truncated
/// Bernoulli tail sits far below double precision there.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    debug_assert!(s > 1.0 && a > 0.0);
    let mut head = 0.0;
    let mut w = a;
    while w < 16.0 {
        head += libm::pow(w, -s);
        w += 1.0;
    }
    let w_pow = libm::pow(w, -s);
    let mut tail = w * w_pow / (s - 1.0) + 0.5 * w_pow;
    // rising factorial s(s+1)...(s+2j-2) times w^{-s-2j+1}
    let mut rising = s;
    let mut power = w_pow / w;
    let inv_w2 = 1.0 / (w * w);
    for (j, coef) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        if j > 0 {
            let k = 2.0 * j as f64;
            rising *= (s + k - 1.0) * (s + k);
            power *= inv_w2;
        }
        tail += coef * rising * power;
    }
    head + tail
}

/// Riemann zeta for real `s ≠ 1`: Euler–Maclaurin on `s > 0`, the functional
/// equation on `s < 0`.
pub fn zeta(s: f64) -> f64 {
    if s > 1.0 {
        return hurwitz_zeta(s, 1.0);
    }
    if s > 0.0 {
        // analytic continuation of the same Euler-Maclaurin sum
        let n = 16.0;
        let mut head = 0.0;
        let mut k = 1.0;
        while k < n {
            head += libm::pow(k, -s);
            k += 1.0;
        }
        let w_pow = libm::pow(n, -s);
        let mut tail = n * w_pow / (s - 1.0) + 0.5 * w_pow;
        let mut rising = s;
        let mut power = w_pow / n;
        for (j, coef) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
            if j > 0 {
                let kk = 2.0 * j as f64;
                rising *= (s + kk - 1.0) * (s + kk);
                power /= n * n;
            }
            tail += coef * rising * power;
        }
        return head + tail;
    }
    if s == 0.0 {
        return -0.5;
    }
    let t = 1.0 - s;
    libm::pow(2.0, s) * libm::pow(PI, s - 1.0) * libm::sin(PI * s / 2.0) * gamma(t) * zeta(t)
}

/// `sin(x)/x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        libm::sin(x) / x
    }
}

/// Reduce an angle to `[-π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    if (-PI..=PI).contains(&theta) {
        return theta;
    }
    let two_pi = 2.0 * PI;
    let r = theta - two_pi * libm::round(theta / two_pi);
    r.clamp(-PI, PI)
}

const SERIES_TERMS: usize = 40;

/// The sums `Σ_{k≥1} k^{-s} cos(kθ)` and `Σ_{k≥1} k^{-s} sin(kθ)` for a fixed
/// non-integer `s > 1`.
///
/// Evaluated through
///
/// ```text
/// Σ k^{-s} e^{ikθ} = Γ(1-s)(-iθ)^{s-1} + Σ_{j≥0} ζ(s-j)(iθ)^j / j!,   |θ| < 2π,
/// ```
///
/// which keeps `ζ(s) - Σ k^{-s}cos(kθ)` accurate to full relative precision as
/// `θ → 0`, where the direct series would cancel catastrophically.
#[derive(Debug, Clone)]
pub struct ZetaTrigSeries {
    s: f64,
    zeta_s: f64,
    lead_cos: f64,
    lead_sin: f64,
    even: [f64; SERIES_TERMS],
    odd: [f64; SERIES_TERMS],
}

impl ZetaTrigSeries {
    pub fn new(s: f64) -> Self {
        debug_assert!(s > 1.0 && (s - libm::round(s)).abs() > 1e-9);
        let g = gamma(1.0 - s);
        let phase = PI * (s - 1.0) / 2.0;
        let mut even = [0.0; SERIES_TERMS];
        let mut odd = [0.0; SERIES_TERMS];
        let mut fact = 1.0; // j!
        for j in 1..2 * SERIES_TERMS + 1 {
            fact *= j as f64;
            let z = zeta(s - j as f64);
            let sign = if (j / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if j % 2 == 0 {
                // cos part: (-1)^{j/2} ζ(s-j) θ^j / j!, negated for ζ(s) - C(θ)
                even[j / 2 - 1] = -sign * z / fact;
            } else {
                odd[j / 2] = sign * z / fact;
            }
        }
        Self {
            s,
            zeta_s: zeta(s),
            lead_cos: -g * libm::cos(phase),
            lead_sin: -g * libm::sin(phase),
            even,
            odd,
        }
    }

    pub fn exponent(&self) -> f64 {
        self.s
    }

    pub fn zeta_s(&self) -> f64 {
        self.zeta_s
    }

    /// Coefficient of `|θ|^{s-1}` in `ζ(s) - Σ k^{-s}cos(kθ)`.
    pub fn leading_cos(&self) -> f64 {
        self.lead_cos
    }

    /// `ζ(s) - Σ_{k≥1} k^{-s} cos(kθ)`.
    pub fn zeta_minus_cos_sum(&self, theta: f64) -> f64 {
        let t = wrap_angle(theta).abs();
        if t == 0.0 {
            return 0.0;
        }
        let t2 = t * t;
        let mut acc = 0.0;
        for c in self.even.iter().rev() {
            acc = acc * t2 + c;
        }
        self.lead_cos * libm::pow(t, self.s - 1.0) + acc * t2
    }

    /// `Σ_{k≥1} k^{-s} sin(kθ)`.
    pub fn sin_sum(&self, theta: f64) -> f64 {
        let w = wrap_angle(theta);
        let t = w.abs();
        if t == 0.0 {
            return 0.0;
        }
        let t2 = t * t;
        let mut acc = 0.0;
        for c in self.odd.iter().rev() {
            acc = acc * t2 + c;
        }
        let v = self.lead_sin * libm::pow(t, self.s - 1.0) + acc * t;
        if w < 0.0 {
            -v
        } else {
            v
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    #[allow(clippy::excessive_precision)]
    fn zeta_known_values() {
        assert!((zeta(2.0) - PI * PI / 6.0).abs() < 1e-15);
        assert!((zeta(4.0) - PI.powi(4) / 90.0).abs() < 1e-15);
        // ζ(1/2), ζ(-1/2), ζ(3/2), ζ(5/2)
        assert!((zeta(0.5) + 1.460_354_508_809_586_8).abs() < 1e-13);
        assert!((zeta(-0.5) + 0.207_886_224_977_354_57).abs() < 1e-13);
        assert!((zeta(1.5) - 2.612_375_348_685_488_3).abs() < 1e-13);
        assert!((zeta(2.5) - 1.341_487_257_250_917_2).abs() < 1e-14);
    }

    #[test]
    fn hurwitz_matches_shifted_riemann() {
        // ζ(s, n+1) = ζ(s) - Σ_{k≤n} k^{-s}
        for &s in &[1.3, 2.5, 2.9] {
            let mut partial = 0.0;
            for k in 1..=40 {
                partial += (k as f64).powf(-s);
                let h = hurwitz_zeta(s, k as f64 + 1.0);
                assert!((h - (zeta(s) - partial)).abs() < 1e-13 * zeta(s), "s={s} k={k}");
            }
        }
    }

    #[test]
    fn trig_series_matches_direct_sum() {
        // direct sum with the tail bounded by summation by parts
        for &s in &[2.5, 1.3, 2.2] {
            let series = ZetaTrigSeries::new(s);
            for &theta in &[0.3, 1.0, 2.0, 3.1, -1.7] {
                let mut c = 0.0;
                let mut si = 0.0;
                for k in 1..400_000u64 {
                    let kf = k as f64;
                    let w = kf.powf(-s);
                    c += w * (kf * theta).cos();
                    si += w * (kf * theta).sin();
                }
                let tol = 3.0 * 400_000f64.powf(-s) / (theta / 2.0).sin().abs() + 1e-12;
                assert!((series.zeta_minus_cos_sum(theta) - (zeta(s) - c)).abs() < tol);
                assert!((series.sin_sum(theta) - si).abs() < tol, "s={s} theta={theta}");
            }
        }
    }

    #[test]
    fn wrap_angle_is_periodic() {
        let t = 0.7;
        assert!((wrap_angle(t + 2.0 * PI) - t).abs() < 1e-14);
        assert!((wrap_angle(t - 6.0 * PI) - t).abs() < 1e-13);
    }
}
