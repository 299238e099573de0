use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use super::{Result, VerifyError};
use crate::error::GeometryError;
use crate::metrics::MetricField;

/// Draws per case before giving up on finding admissible inputs.
pub const MAX_REJECTIONS: usize = 10_000;

/// Fraction of each chart interval kept for sampling.
const BOX_SHRINK: f64 = 0.9;

/// Seeded source of sample inputs.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: SplitMix64,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: SplitMix64::seed_from_u64(seed),
        }
    }

    /// Independent per-sample seeds drawn from a master stream.
    pub fn sample_seeds(seed: u64, samples: usize) -> Vec<u64> {
        let mut master = SplitMix64::seed_from_u64(seed);
        (0..samples).map(|_| master.random()).collect()
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.rng.random::<f64>()
    }

    /// `n` entries uniform in `[-scale, scale]`.
    pub fn vector(&mut self, n: usize, scale: f64) -> Vec<f64> {
        (0..n).map(|_| self.uniform(-scale, scale)).collect()
    }

    /// Uniform on the unit sphere.
    pub fn direction(&mut self, n: usize) -> Vec<f64> {
        loop {
            let v = self.vector(n, 1.0);
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            if (0.1..=1.0).contains(&norm) {
                return v.iter().map(|c| c / norm).collect();
            }
        }
    }

    /// Uniform in the chart box shrunk about its centre.
    pub fn point(&mut self, m: &MetricField) -> Vec<f64> {
        m.chart_box()
            .to_vec()
            .into_iter()
            .map(|(a, b)| {
                let (c, h) = (0.5 * (a + b), 0.5 * (b - a) * BOX_SHRINK);
                self.uniform(c - h, c + h)
            })
            .collect()
    }

    /// Repeats `draw` until it succeeds, treating inadmissible and
    /// degenerate inputs as rejections.
    pub fn retry<T>(
        &mut self,
        id: &str,
        mut draw: impl FnMut(&mut Sampler) -> std::result::Result<T, GeometryError>,
    ) -> Result<T> {
        for _ in 0..MAX_REJECTIONS {
            match draw(self) {
                Ok(t) => return Ok(t),
                Err(e) if is_rejection(&e) => continue,
                Err(e) => return Err(e.into()),
            }
        }
        Err(VerifyError::SamplerExhausted {
            id: id.to_string(),
            attempts: MAX_REJECTIONS,
        })
    }
}

fn is_rejection(e: &GeometryError) -> bool {
    matches!(
        e,
        GeometryError::OutsideChart { .. }
            | GeometryError::Inadmissible { .. }
            | GeometryError::Degenerate { .. }
            | GeometryError::DegenerateFlag { .. }
            | GeometryError::ChartExit { .. }
            | GeometryError::OutsideDomain { .. }
    )
}
