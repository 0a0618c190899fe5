//! Per-trajectory random streams.
//!
//! Trajectory `i` of an ensemble with base seed `s` draws from a
//! xoshiro256++ generator seeded with `splitmix64(s ^ i)`. The generator's own
//! state expansion also runs SplitMix64, so the stream depends only on
//! `(s, i)`.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// One SplitMix64 output for state `x` (i.e. the finalizer applied to
/// `x + golden_gamma`).
#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trajectory_seed(base_seed: u64, traj_id: u64) -> u64 {
    splitmix64(base_seed ^ traj_id)
}

/// Random source owned by a single trajectory.
///
/// Uniforms are 53-bit: `(next_u64 >> 11) * 2^-53` in `[0, 1)`. Gaussians use
/// Box-Muller on exactly two uniforms per pair, caching the second deviate.
#[derive(Debug, Clone)]
pub struct Stream {
    rng: Xoshiro256PlusPlus,
    spare: Option<f64>,
    seed: u64,
}

/// Opens the stream for trajectory `traj_id`.
pub fn seed_stream(base_seed: u64, traj_id: u64) -> Stream {
    Stream::from_seed(trajectory_seed(base_seed, traj_id))
}

impl Stream {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            rng: Xoshiro256PlusPlus::seed_from_u64(seed),
            spare: None,
            seed,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal deviate.
    #[inline]
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // 1 - u lies in (0, 1], keeping the log finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }
}
