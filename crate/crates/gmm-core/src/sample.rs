//! Deterministic mixture sampling.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::mixture::MixtureParams;
use crate::stream::substream;

/// Points are generated in fixed-size shards, each from its own substream,
/// so a batch is a pure function of `(mix, n, seed)` regardless of how the
/// work is chunked.
pub const SHARD_SIZE: usize = 16_384;

/// A batch of `n` draws from a mixture, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    points: Vec<f64>,
    n: usize,
    d: usize,
    pub seed: u64,
    /// Which component generated each point. Diagnostic only; estimation
    /// code must not read it.
    pub component_labels: Option<Vec<u32>>,
}

impl SampleBatch {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.d)
    }

    /// Assembles a batch from raw rows. Rows length must be `n * d`.
    pub fn from_rows(points: Vec<f64>, d: usize, seed: u64) -> Self {
        assert_eq!(points.len() % d.max(1), 0, "row data not a multiple of d");
        let n = points.len() / d.max(1);
        SampleBatch {
            points,
            n,
            d,
            seed,
            component_labels: None,
        }
    }
}

/// Draws `n` i.i.d. points: component index from the weights, then a
/// spherical Gaussian around its mean with per-coordinate standard deviation
/// `sigma / sqrt(2 pi)`. Identical `(mix, n, seed)` give bit-identical
/// batches.
pub fn sample(mix: &MixtureParams, n: usize, seed: u64) -> SampleBatch {
    let d = mix.dim();
    let k = mix.k();
    let mut cum = Vec::with_capacity(k);
    let mut acc = 0.0;
    for c in mix.components() {
        acc += c.w;
        cum.push(acc);
    }
    let std: Vec<f64> = mix
        .components()
        .iter()
        .map(|c| c.sigma / (2.0 * std::f64::consts::PI).sqrt())
        .collect();

    let mut points = vec![0.0f64; n * d];
    let mut labels = vec![0u32; n];
    let shards = n.div_ceil(SHARD_SIZE);
    for s in 0..shards {
        let lo = s * SHARD_SIZE;
        let hi = ((s + 1) * SHARD_SIZE).min(n);
        let mut rng = substream(seed, "sample", &[s as u64]);
        for i in lo..hi {
            let u: f64 = rng.random();
            let j = cum.partition_point(|&c| c <= u).min(k - 1);
            labels[i] = j as u32;
            let comp = mix.component(j);
            let row = &mut points[i * d..(i + 1) * d];
            for (a, slot) in row.iter_mut().enumerate() {
                let z: f64 = rng.sample(StandardNormal);
                *slot = comp.mu[a] + std[j] * z;
            }
        }
    }
    SampleBatch {
        points,
        n,
        d,
        seed,
        component_labels: Some(labels),
    }
}
