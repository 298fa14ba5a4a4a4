//! Seeded sample points and random test data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::symexpr::Expr;

#[derive(Debug, Clone, PartialEq)]
pub struct SampleConfig {
    /// Lattice points per axis on `[lo, hi]`; 0 disables the lattice.
    pub grid: usize,
    /// Additional uniform points.
    pub extra: usize,
    pub seed: u64,
    pub lo: f64,
    pub hi: f64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self { grid: 3, extra: 64, seed: 0, lo: -1.0, hi: 1.0 }
    }
}

impl SampleConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    /// Lattice points followed by seeded uniform points, in a fixed order.
    pub fn points(&self, dim: usize) -> Vec<Vec<f64>> {
        let mut out = lattice(dim, self.grid, self.lo, self.hi);
        out.extend(uniform_points(dim, self.extra, self.seed, self.lo, self.hi));
        out
    }
}

pub fn lattice(dim: usize, per_axis: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    if per_axis == 0 {
        return Vec::new();
    }
    let coord = |k: usize| if per_axis == 1 { 0.5 * (lo + hi) } else { lo + (hi - lo) * k as f64 / (per_axis - 1) as f64 };
    let total = per_axis.pow(dim as u32);
    (0..total)
        .map(|mut idx| {
            (0..dim)
                .map(|_| {
                    let k = idx % per_axis;
                    idx /= per_axis;
                    coord(k)
                })
                .collect()
        })
        .collect()
}

pub fn uniform_points(dim: usize, count: usize, seed: u64, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..dim).map(|_| rng.gen_range(lo..hi)).collect()).collect()
}

/// Random polynomial in variables `0..nvars` with small integer coefficients
/// and total degree at most `max_degree`.
pub fn random_polynomial<R: Rng>(rng: &mut R, nvars: usize, max_degree: u32, terms: usize) -> Expr {
    Expr::sum((0..terms).map(|_| {
        let c = Expr::int(rng.gen_range(-3..=3));
        let mut budget = rng.gen_range(0..=max_degree);
        let mut factors = vec![c];
        while budget > 0 && nvars > 0 {
            factors.push(Expr::var(rng.gen_range(0..nvars)));
            budget -= 1;
        }
        Expr::product(factors)
    }))
    .simplify()
}
