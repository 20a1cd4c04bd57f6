//! The walk perturbed at zero, its visit counter `T(n)`, hitting times and
//! the Poissonized scaled process.
//!
//! From a nonzero state the chain moves by the next unused ξ draw, from 0 by
//! the next unused η draw. The two draw sequences come from separate seeded
//! streams, so the `j`-th ξ increment is the `j`-th draw of its stream no
//! matter how the visits to 0 interleave.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;

use crate::distributions::{PerturbationLaw, StepLaw};
use crate::rng::{self, Role};
use crate::{Error, Result};

/// Step-by-step simulator of the perturbed chain.
#[derive(Debug, Clone)]
pub struct Chain<'a> {
    xi: &'a StepLaw,
    eta: Option<&'a PerturbationLaw>,
    x: i64,
    n: u64,
    zeros: u64,
    xi_rng: ChaCha8Rng,
    eta_rng: ChaCha8Rng,
}

impl<'a> Chain<'a> {
    /// Chain started at `x0` using the streams of path `index` under `seed`.
    /// With `eta = None` the walk is unperturbed and steps by ξ everywhere.
    pub fn new(xi: &'a StepLaw, eta: Option<&'a PerturbationLaw>, x0: i64, seed: u64, index: u64) -> Self {
        Self {
            xi,
            eta,
            x: x0,
            n: 0,
            zeros: u64::from(x0 == 0),
            xi_rng: rng::stream(seed, Role::Xi, index),
            eta_rng: rng::stream(seed, Role::Eta, index),
        }
    }

    pub fn position(&self) -> i64 {
        self.x
    }

    pub fn steps(&self) -> u64 {
        self.n
    }

    /// `T(n) = #{k ≤ n : X(k) = 0}`.
    pub fn zero_count(&self) -> u64 {
        self.zeros
    }

    /// Advance one step and return the increment, tagged with whether it
    /// was an η draw.
    #[inline]
    pub fn step(&mut self) -> (i64, bool) {
        let (dx, from_zero) = match self.eta {
            Some(eta) if self.x == 0 => (eta.sample(&mut self.eta_rng), true),
            _ => (self.xi.sample(&mut self.xi_rng), false),
        };
        self.x = self.x.saturating_add(dx);
        self.n += 1;
        if self.x == 0 {
            self.zeros += 1;
        }
        (dx, from_zero)
    }

    /// Run `k` steps.
    pub fn advance(&mut self, k: u64) {
        for _ in 0..k {
            self.step();
        }
    }
}

/// A recorded trajectory `X(0..=n)` with `T(0..=n)` and the increments drawn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSample {
    pub x0: i64,
    pub seed: u64,
    pub index: u64,
    pub values: Vec<i64>,
    pub zero_count: Vec<u64>,
    /// ξ increments in order of use.
    pub xi_draws: Vec<i64>,
    /// η increments in order of use.
    pub eta_draws: Vec<i64>,
}

impl PathSample {
    pub fn n_steps(&self) -> usize {
        self.values.len() - 1
    }

    /// First `n` with `X(n) = 0` in the recorded range.
    pub fn first_hit_zero(&self) -> HitOutcome {
        match self.values.iter().position(|&x| x == 0) {
            Some(n) => HitOutcome::Hit(n as u64),
            None => HitOutcome::Censored(self.n_steps() as u64),
        }
    }

    /// Rebuild `X(n)` from `X(0) + S_ξ(n - T(n-1)) + S_η(T(n-1))` using the
    /// recorded increments. Returns the first `n` where it disagrees.
    pub fn check_decomposition(&self) -> Option<usize> {
        let mut s_xi = Vec::with_capacity(self.xi_draws.len() + 1);
        s_xi.push(0i64);
        for &d in &self.xi_draws {
            s_xi.push(s_xi[s_xi.len() - 1].saturating_add(d));
        }
        let mut s_eta = Vec::with_capacity(self.eta_draws.len() + 1);
        s_eta.push(0i64);
        for &d in &self.eta_draws {
            s_eta.push(s_eta[s_eta.len() - 1].saturating_add(d));
        }
        for n in 1..self.values.len() {
            let t = self.zero_count[n - 1] as usize;
            let rebuilt = self.x0.saturating_add(s_xi[n - t]).saturating_add(s_eta[t]);
            if rebuilt != self.values[n] {
                return Some(n);
            }
        }
        None
    }
}

/// A chain together with its recorded path, extendable on demand.
#[derive(Debug, Clone)]
pub struct ChainRun<'a> {
    chain: Chain<'a>,
    path: PathSample,
}

impl<'a> ChainRun<'a> {
    pub fn new(xi: &'a StepLaw, eta: Option<&'a PerturbationLaw>, x0: i64, seed: u64, index: u64) -> Self {
        let chain = Chain::new(xi, eta, x0, seed, index);
        let path = PathSample {
            x0,
            seed,
            index,
            values: alloc::vec![x0],
            zero_count: alloc::vec![chain.zero_count()],
            xi_draws: Vec::new(),
            eta_draws: Vec::new(),
        };
        Self { chain, path }
    }

    /// Make sure `X(0..=n)` is recorded.
    pub fn ensure(&mut self, n: usize) {
        while self.path.values.len() <= n {
            let (dx, from_zero) = self.chain.step();
            if from_zero {
                self.path.eta_draws.push(dx);
            } else {
                self.path.xi_draws.push(dx);
            }
            self.path.values.push(self.chain.position());
            self.path.zero_count.push(self.chain.zero_count());
        }
    }

    pub fn path(&self) -> &PathSample {
        &self.path
    }

    pub fn into_path(self) -> PathSample {
        self.path
    }
}

pub fn simulate_chain(
    xi: &StepLaw,
    eta: &PerturbationLaw,
    x0: i64,
    n_steps: usize,
    seed: u64,
) -> Result<PathSample> {
    simulate_chain_indexed(xi, Some(eta), x0, n_steps, seed, 0)
}

pub fn simulate_chain_indexed(
    xi: &StepLaw,
    eta: Option<&PerturbationLaw>,
    x0: i64,
    n_steps: usize,
    seed: u64,
    index: u64,
) -> Result<PathSample> {
    crate::error::check(n_steps >= 1, "n_steps", n_steps as f64, "must be at least 1")?;
    let mut run = ChainRun::new(xi, eta, x0, seed, index);
    run.ensure(n_steps);
    Ok(run.into_path())
}

/// First passage to 0, or censoring at a step cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HitOutcome {
    Hit(u64),
    Censored(u64),
}

impl HitOutcome {
    pub fn hit(&self) -> Option<u64> {
        match *self {
            HitOutcome::Hit(n) => Some(n),
            HitOutcome::Censored(_) => None,
        }
    }

    pub fn is_censored(&self) -> bool {
        matches!(self, HitOutcome::Censored(_))
    }
}

/// `σ = inf{n ≥ 0 : X(n) = 0}` for the walk started at `x0`, stopped after
/// `cap` steps. Before σ the chain never sits at 0, so only ξ draws matter.
pub fn first_hit_zero(xi: &StepLaw, x0: i64, cap: u64, seed: u64, index: u64) -> HitOutcome {
    if x0 == 0 {
        return HitOutcome::Hit(0);
    }
    let mut chain = Chain::new(xi, None, x0, seed, index);
    while chain.steps() < cap {
        chain.step();
        if chain.position() == 0 {
            return HitOutcome::Hit(chain.steps());
        }
    }
    HitOutcome::Censored(cap)
}

/// Event times of a Poisson process on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonClock {
    pub rate: f64,
    pub event_times: Vec<f64>,
}

impl PoissonClock {
    pub fn generate(rate: f64, horizon: f64, seed: u64, index: u64) -> Result<Self> {
        crate::error::check(rate > 0.0, "rate", rate, "must be positive")?;
        let mut r = rng::stream(seed, Role::Clock, index);
        let mut t = 0.0;
        let mut event_times = Vec::new();
        loop {
            t += rng::exponential(&mut r, rate);
            if t > horizon {
                break;
            }
            event_times.push(t);
        }
        Ok(Self { rate, event_times })
    }

    /// `N(t)`.
    pub fn count(&self, t: f64) -> usize {
        self.event_times.partition_point(|&s| s <= t)
    }
}

/// Right-continuous step function `X(N(vt))/a`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonizedPath {
    pub jump_times: Vec<f64>,
    /// `values[k]` is the scaled state after `k` jumps.
    pub values: Vec<f64>,
    pub horizon: f64,
}

impl PoissonizedPath {
    pub fn at(&self, t: f64) -> f64 {
        self.values[self.jump_times.partition_point(|&s| s <= t)]
    }
}

/// Poissonize a chain at rate `v` on `[0, t_max]`, extending it as needed.
/// The clock uses stream `Clock` of the chain's seed and index.
pub fn poissonize(run: &mut ChainRun<'_>, v: f64, a: f64, t_max: f64) -> Result<PoissonizedPath> {
    crate::error::check(a > 0.0, "a", a, "must be positive")?;
    let seed = run.path().seed;
    let index = run.path().index;
    let clock = PoissonClock::generate(v, t_max, seed, index)?;
    let n = clock.event_times.len();
    run.ensure(n);
    let values = run.path().values[..=n].iter().map(|&x| x as f64 / a).collect();
    Ok(PoissonizedPath {
        jump_times: clock.event_times,
        values,
        horizon: t_max,
    })
}

/// Chain position after `k` steps from `start`, without recording.
pub fn position_after(
    xi: &StepLaw,
    eta: Option<&PerturbationLaw>,
    start: i64,
    k: u64,
    seed: u64,
    index: u64,
) -> i64 {
    let mut c = Chain::new(xi, eta, start, seed, index);
    c.advance(k);
    c.position()
}

/// One draw of `X_v(⌊vt⌋)/a` started from `⌊x·a⌋`.
#[allow(clippy::too_many_arguments)]
pub fn scaled_terminal(
    xi: &StepLaw,
    eta: Option<&PerturbationLaw>,
    x: f64,
    v: f64,
    a: f64,
    t: f64,
    seed: u64,
    index: u64,
) -> f64 {
    let start = libm::floor(x * a) as i64;
    let k = libm::floor(v * t) as u64;
    position_after(xi, eta, start, k, seed, index) as f64 / a
}

/// `n_paths` independent draws of `X_v(⌊vt⌋)/a(v)`, path `i` on stream `i`.
pub fn scaled_marginal(
    xi: &StepLaw,
    eta: Option<&PerturbationLaw>,
    x: f64,
    v: f64,
    t: f64,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    crate::error::check(v >= 1.0, "v", v, "must be at least 1")?;
    crate::error::check(t >= 0.0, "t", t, "must be nonnegative")?;
    let a = xi.norming_a(v)?;
    Ok((0..n_paths as u64)
        .map(|i| scaled_terminal(xi, eta, x, v, a, t, seed, i))
        .collect())
}

/// Check that a recorded path is long enough.
pub fn require_len(path: &PathSample, needed: usize) -> Result<()> {
    if path.values.len() <= needed {
        return Err(Error::PathTooShort {
            needed,
            available: path.n_steps(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::EtaFamily;

    #[test]
    fn constant_jump_from_zero() {
        let xi = StepLaw::stable(1.5).unwrap();
        let eta = PerturbationLaw::new(EtaFamily::Constant { value: 5 }).unwrap();
        let p = simulate_chain(&xi, &eta, 0, 2000, 3).unwrap();
        assert_eq!(p.zero_count[0], 1);
        assert_eq!(p.values[1], 5);
        for n in 0..p.n_steps() {
            if p.values[n] == 0 {
                assert_eq!(p.values[n + 1], 5);
            }
        }
    }

    #[test]
    fn counter_and_decomposition() {
        let xi = StepLaw::stable(1.5).unwrap();
        let eta = PerturbationLaw::new(EtaFamily::TwoSided { beta: 0.3, c_plus: 0.6 }).unwrap();
        for i in 0..10 {
            let run = simulate_chain_indexed(&xi, Some(&eta), 0, 5000, 11, i).unwrap();
            assert_eq!(run.check_decomposition(), None);
            for n in 1..run.values.len() {
                let d = run.zero_count[n] - run.zero_count[n - 1];
                assert_eq!(d, u64::from(run.values[n] == 0));
            }
        }
    }

    #[test]
    fn hitting_time_is_a_stopping_time() {
        let xi = StepLaw::SimpleWalk;
        let eta = PerturbationLaw::new(EtaFamily::Constant { value: 1 }).unwrap();
        let p = simulate_chain(&xi, &eta, 3, 400, 8).unwrap();
        if let HitOutcome::Hit(s) = p.first_hit_zero() {
            let mut q = p.clone();
            q.values.truncate(s as usize + 1);
            assert_eq!(q.first_hit_zero(), HitOutcome::Hit(s));
            assert_eq!(first_hit_zero(&xi, 3, 400, 8, 0), HitOutcome::Hit(s));
        }
        assert_eq!(first_hit_zero(&xi, 0, 10, 1, 0), HitOutcome::Hit(0));
    }

    #[test]
    fn poissonized_start_and_lazy_extension() {
        let xi = StepLaw::stable(1.5).unwrap();
        let eta = PerturbationLaw::new(EtaFamily::Geometric { q: 0.5 }).unwrap();
        let mut run = ChainRun::new(&xi, Some(&eta), 7, 2, 0);
        let p = poissonize(&mut run, 100.0, 10.0, 2.0).unwrap();
        assert_eq!(p.at(0.0), 0.7);
        assert!(run.path().n_steps() >= p.jump_times.len());
        let last = *p.jump_times.last().unwrap();
        assert_eq!(p.at(last), *p.values.last().unwrap());
    }
}
