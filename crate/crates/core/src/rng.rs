//! Seeded random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 generator keyed
//! by the user seed and a stream id, so independent consumers (the ξ and η
//! increments of one path, different paths, the Poisson clock) never share
//! state and each can be replayed on its own.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub use rand_chacha::ChaCha8Rng as StreamRng;

/// Stream roles. The role occupies the top byte of the stream id and the
/// path index the remaining bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Role {
    Xi = 1,
    Eta = 2,
    Clock = 3,
    Killing = 4,
    Sample = 5,
    Aux = 6,
}

pub fn stream(seed: u64, role: Role, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((role as u64) << 56) | (index & ((1 << 56) - 1)));
    rng
}

/// Uniform on the open interval (0, 1).
#[inline]
pub fn uniform_open<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Exponential with the given rate.
#[inline]
pub fn exponential<R: RngCore + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    -libm::log(uniform_open(rng)) / rate
}

/// Number of failures before the first success of a Bernoulli(1 - s) trial,
/// i.e. `P{K = k} = (1 - s) s^k`.
#[inline]
pub fn geometric_failures<R: RngCore + ?Sized>(rng: &mut R, s: f64) -> u64 {
    if s <= 0.0 {
        return 0;
    }
    let k = libm::floor(libm::log(uniform_open(rng)) / libm::log(s));
    if k >= 9.0e18 {
        u64::MAX / 2
    } else {
        k as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = stream(7, Role::Xi, 3);
        let mut b = stream(7, Role::Xi, 3);
        let mut c = stream(7, Role::Eta, 3);
        let xa: [u64; 4] = core::array::from_fn(|_| a.next_u64());
        let xb: [u64; 4] = core::array::from_fn(|_| b.next_u64());
        let xc: [u64; 4] = core::array::from_fn(|_| c.next_u64());
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    #[test]
    fn uniform_stays_inside_unit_interval() {
        let mut r = stream(1, Role::Aux, 0);
        for _ in 0..10_000 {
            let u = uniform_open(&mut r);
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn geometric_mean() {
        let mut r = stream(2, Role::Aux, 0);
        let s = 0.75;
        let n = 200_000;
        let mean = (0..n).map(|_| geometric_failures(&mut r, s) as f64).sum::<f64>() / n as f64;
        // E K = s/(1-s) = 3, sd = sqrt(s)/(1-s) ≈ 3.46
        assert!((mean - 3.0).abs() < 4.0 * 3.47 / (n as f64).sqrt());
    }
}
