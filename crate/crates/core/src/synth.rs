//! Seeded synthetic populations.
//!
//! The attribute count is exact (`round(N·P)` ones at random positions) and
//! `y` is drawn from a normal distribution conditional on `φ`.

use rand::seq::index;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::population::Population;

/// Conditional distributions of `y` given `φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub size: usize,
    pub proportion: f64,
    pub mean0: f64,
    pub sd0: f64,
    pub mean1: f64,
    pub sd1: f64,
}

impl SynthParams {
    /// Conditional parameters that give population mean `mean`, coefficient
    /// of variation `cv` and point-biserial correlation `rho` in expectation
    /// (common within-group standard deviation).
    pub fn from_targets(
        size: usize,
        proportion: f64,
        mean: f64,
        cv: f64,
        rho: f64,
    ) -> Result<Self> {
        if !(proportion > 0.0 && proportion < 1.0) {
            return Err(Error::DegenerateProportion(proportion));
        }
        if rho.is_nan() || rho.abs() >= 1.0 || cv.is_nan() || cv <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "need |rho| < 1 and cv > 0, got rho={rho}, cv={cv}"
            )));
        }
        let sd_total = cv * mean.abs();
        let spread = (proportion * (1.0 - proportion)).sqrt();
        let gap = rho * sd_total / spread;
        let sd_within = sd_total * (1.0 - rho * rho).sqrt();
        Ok(Self {
            size,
            proportion,
            mean0: mean - proportion * gap,
            sd0: sd_within,
            mean1: mean + (1.0 - proportion) * gap,
            sd1: sd_within,
        })
    }

    /// Number of units carrying the attribute, `⌊N·P⌉`.
    pub fn attribute_count(&self) -> usize {
        (self.size as f64 * self.proportion).round() as usize
    }
}

/// Generates a population; identical `(params, seed)` give identical output.
pub fn synthesize(params: &SynthParams, seed: u64) -> Result<Population> {
    let ones = params.attribute_count();
    if ones == 0 || ones >= params.size {
        return Err(Error::DegenerateProportion(
            ones as f64 / params.size as f64,
        ));
    }
    let normal = |m: f64, s: f64| {
        Normal::new(m, s).map_err(|e| Error::InvalidParameter(format!("normal({m}, {s}): {e}")))
    };
    let dist0 = normal(params.mean0, params.sd0)?;
    let dist1 = normal(params.mean1, params.sd1)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut phi = vec![false; params.size];
    for i in index::sample(&mut rng, params.size, ones).iter() {
        phi[i] = true;
    }
    let y = phi
        .iter()
        .map(|&b| {
            if b {
                dist1.sample(&mut rng)
            } else {
                dist0.sample(&mut rng)
            }
        })
        .collect();
    Population::new(y, phi)
}
