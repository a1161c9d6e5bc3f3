//! Synthetic interleaved half-moons, the usual stress test for graph-based
//! clustering.
//!
//! Moons come in interlocking pairs like the classic two-moons data: pair `p`
//! is an upper arc `(cos t + 4p, sin t)` and a lower arc
//! `(1 - cos t + 4p, 1/2 - sin t)`, `t ~ U[0, pi]`. Arcs of one pair are about
//! 0.5 apart, neighboring pairs about 1. The planar points are padded with
//! zeros up to `dim` coordinates and every coordinate gets independent
//! Gaussian noise.
//!
//! The defaults (100 dimensions, noise 0.13) give a connected 10-NN graph on
//! 2000 points in which the moons are still separable by balanced cuts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoonsConfig {
    pub n_points: usize,
    pub n_moons: usize,
    /// Standard deviation of the per-coordinate noise.
    pub noise: f64,
    /// Ambient dimension, at least 2.
    pub dim: usize,
    pub seed: u64,
}

impl Default for MoonsConfig {
    fn default() -> Self {
        MoonsConfig { n_points: 2000, n_moons: 4, noise: 0.13, dim: 100, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub points: Vec<Vec<f64>>,
    /// Moon index of each point.
    pub labels: Vec<usize>,
}

/// Points are grouped by moon; the first `n_points % n_moons` moons get one
/// extra point.
pub fn generate_moons(cfg: &MoonsConfig) -> Result<Dataset> {
    if cfg.n_moons == 0 || cfg.n_points < cfg.n_moons {
        return Err(Error::Invalid("need at least one point per moon".into()));
    }
    if cfg.dim < 2 {
        return Err(Error::Invalid("moons need at least two dimensions".into()));
    }
    let noise = Normal::new(0.0, cfg.noise)
        .map_err(|_| Error::Invalid("noise must be a finite non-negative number".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut points = Vec::with_capacity(cfg.n_points);
    let mut labels = Vec::with_capacity(cfg.n_points);
    for m in 0..cfg.n_moons {
        let count = cfg.n_points / cfg.n_moons + usize::from(m < cfg.n_points % cfg.n_moons);
        for _ in 0..count {
            let t = rng.gen_range(0.0..std::f64::consts::PI);
            let shift = 4.0 * (m / 2) as f64;
            let (x, y) =
                if m % 2 == 0 { (t.cos() + shift, t.sin()) } else { (1.0 - t.cos() + shift, 0.5 - t.sin()) };
            let mut p = vec![0.0; cfg.dim];
            p[0] = x;
            p[1] = y;
            for v in &mut p {
                *v += noise.sample(&mut rng);
            }
            points.push(p);
            labels.push(m);
        }
    }
    Ok(Dataset { points, labels })
}
