//! Seeded generator of randomized test inputs.
//!
//! [`TestProfileGenerator`] draws from ChaCha8 seeded with the run seed, so
//! every family below is reproducible from `(seed, call order)` alone. The
//! stream is identified by [`GENERATOR_NAME`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::params::ProblemParams;
use crate::profile::{bubble, scale, LogBump, RadialProfile};
use crate::quadrature::RadialGrid;

pub const GENERATOR_NAME: &str = "hslab-chacha8-v1";

#[derive(Debug, Clone)]
pub struct TestProfileGenerator {
    rng: ChaCha8Rng,
}

fn shell(r: f64, center: f64, width: f64) -> f64 {
    let z = (r - center) / width;
    (-z * z).exp()
}

impl TestProfileGenerator {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Valid `(n, p, s, mu)` with `n` in 2..=8, `1 < p < n`, `0 <= s < p`
    /// and `mu` in `[-1, 0.9 mu1)`.
    pub fn params(&mut self) -> ProblemParams {
        let n = self.rng.gen_range(2..=8u32);
        let p = self.rng.gen_range(1.1..(n as f64 - 0.1));
        let s = self.rng.gen_range(0.0..p);
        let mu1 = ((n as f64 - p) / p).powf(p);
        let mu = self.rng.gen_range(-1.0..0.9 * mu1);
        ProblemParams::new(n, p, s, mu).expect("generated parameters are valid")
    }

    /// Smooth positive profile with Gaussian decay and a few shells.
    pub fn smooth_bump(&mut self, grid: &RadialGrid) -> RadialProfile {
        let big = self.rng.gen_range(1.0..8.0);
        let shells: Vec<(f64, f64, f64)> = (0..self.rng.gen_range(1..=3))
            .map(|_| {
                (
                    self.rng.gen_range(0.0..1.0),
                    self.rng.gen_range(0.2..4.0),
                    self.rng.gen_range(0.2..1.5),
                )
            })
            .collect();
        let amp = self.rng.gen_range(0.5..2.0);
        RadialProfile::from_fn(grid, |r| {
            let sum: f64 = shells.iter().map(|(a, c, w)| a * shell(r, *c, *w)).sum();
            amp * (-(r / big) * (r / big)).exp() * (1.0 + sum)
        })
    }

    /// Positive profile that rises to a bump, dips, and rises again before
    /// decaying, so that it is far from its rearrangement.
    pub fn bump_with_dip(&mut self, grid: &RadialGrid) -> RadialProfile {
        let big = self.rng.gen_range(3.0..10.0);
        let c1 = self.rng.gen_range(0.5..1.5);
        let c2 = self.rng.gen_range(2.0..3.5);
        let w = self.rng.gen_range(0.2..0.5);
        let a = self.rng.gen_range(0.5..2.0);
        let b = self.rng.gen_range(0.3..0.8);
        let base = self.rng.gen_range(0.1..0.6);
        RadialProfile::from_fn(grid, |r| {
            (-(r / big) * (r / big)).exp()
                * (base + a * shell(r, c1, w) + (1.0 - b) * shell(r, c2, w)
                    - b * base * shell(r, 0.5 * (c1 + c2), w))
        })
    }

    /// Bubble times `1 + eps * (smooth mode in ln r)`.
    pub fn perturbed_bubble(
        &mut self,
        grid: &RadialGrid,
        params: &ProblemParams,
        eps: f64,
    ) -> RadialProfile {
        let b = bubble(grid, params);
        let center = self.rng.gen_range(-2.0..2.0);
        let width = self.rng.gen_range(0.5..2.0);
        let sign = if self.rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let values = b
            .values()
            .iter()
            .zip(grid.log_nodes())
            .map(|(v, t)| v * (1.0 + sign * eps * shell(*t, center, width)))
            .collect();
        RadialProfile::new(grid, values).expect("finite samples")
    }

    /// Competitor for the minimizer: a dilated bubble or a smooth bump.
    pub fn competitor(
        &mut self,
        grid: &RadialGrid,
        params: &ProblemParams,
    ) -> Result<RadialProfile> {
        if self.rng.gen_bool(0.5) {
            let k = self.rng.gen_range(-2.0f64..2.0).exp();
            let eps = self.rng.gen_range(0.0..0.3);
            let b = self.perturbed_bubble(grid, params, eps);
            scale(grid, &b, params.p, k)
        } else {
            Ok(self.smooth_bump(grid))
        }
    }

    /// Smooth `(u, eta)` pair for the dilation identity: a tilted Gaussian
    /// shell, returned as a function so it can be sampled on any grid, and
    /// a compactly supported log bump overlapping it.
    pub fn smooth_pair(&mut self) -> (impl Fn(f64) -> f64 + Clone, LogBump) {
        let c = self.rng.gen_range(0.5..3.0);
        let w = self.rng.gen_range(0.5..2.0);
        let tilt = self.rng.gen_range(-0.5..0.5);
        let center = self.rng.gen_range(-1.0..1.5);
        let width = self.rng.gen_range(1.5..3.0);
        let u = move |r: f64| shell(r, c, w) * (1.0 + tilt * r / (1.0 + r));
        (u, LogBump::new(center, width).expect("valid bump"))
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }
}
