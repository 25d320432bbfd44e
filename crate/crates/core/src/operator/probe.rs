//! Empirical coercivity of L on the orthogonal complement of its null space.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{RadialFunction, RadialOperator, WeightParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoercivityReport {
    pub samples: usize,
    pub seed: u64,
    /// ⟨Lg, g⟩/|g|²_σ for each probe, in draw order.
    pub ratios: Vec<f64>,
    pub min: f64,
    pub max: f64,
    /// Counts over ten equal bins spanning [min, max].
    pub histogram: Vec<usize>,
    pub all_positive: bool,
}

/// A smooth random radial profile: Σ_k c_k r^{2k} e^{−r²/(2s)}, k < 4.
pub fn random_probe(op: &RadialOperator, rng: &mut impl Rng) -> RadialFunction {
    let s: f64 = rng.gen_range(0.4..2.0);
    let c: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    let g = RadialFunction::from_fn(op.grid, |r| {
        let r2 = r * r;
        let poly = c[0] + r2 * (c[1] + r2 * (c[2] / 4.0 + r2 * c[3] / 24.0));
        poly * (-0.5 * r2 / s).exp()
    });
    op.remove_null(&g)
}

pub fn coercivity_probe(op: &RadialOperator, n_samples: usize, seed: u64) -> Result<CoercivityReport> {
    if n_samples == 0 {
        return Err(Error::Input("need at least one probe".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = WeightParams::default();
    let mut ratios = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let g = random_probe(op, &mut rng);
        let lg = op.apply_l(&g)?;
        ratios.push(lg.inner(&g) / op.norm_sigma(&g, &unit, false));
    }
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut histogram = vec![0usize; 10];
    for &x in &ratios {
        let b = if max > min { ((x - min) / (max - min) * 10.0) as usize } else { 0 };
        histogram[b.min(9)] += 1;
    }
    Ok(CoercivityReport { samples: n_samples, seed, all_positive: min > 0.0, ratios, min, max, histogram })
}
