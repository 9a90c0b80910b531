use rand::seq::index;
use rand::Rng;

use super::{seeded_rng, Dataset, DatasetError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Replacement {
    With,
    Without,
}

/// Size and randomness of one minibatch draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchSpec {
    pub size: usize,
    pub seed: u64,
    /// Independent stream of `seed`; optimizers use the iteration index.
    pub stream: u64,
    pub replacement: Replacement,
}

impl BatchSpec {
    pub fn new(size: usize, seed: u64) -> Self {
        Self {
            size,
            seed,
            stream: 0,
            replacement: Replacement::Without,
        }
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }
}

/// Uniform indices in `[0, n)`, deterministic in `(seed, stream)`.
pub fn draw_indices(n: usize, spec: &BatchSpec) -> Result<Vec<usize>, DatasetError> {
    if spec.size == 0 {
        return Err(DatasetError::EmptyBatch);
    }
    let mut rng = seeded_rng(spec.seed, spec.stream);
    match spec.replacement {
        Replacement::Without => {
            if spec.size > n {
                return Err(DatasetError::BatchTooLarge { size: spec.size, n });
            }
            Ok(index::sample(&mut rng, n, spec.size).into_vec())
        }
        Replacement::With => {
            if n == 0 {
                return Err(DatasetError::BatchTooLarge { size: spec.size, n });
            }
            Ok((0..spec.size).map(|_| rng.random_range(0..n)).collect())
        }
    }
}

pub fn draw_minibatch(ds: &Dataset, spec: &BatchSpec) -> Result<Vec<usize>, DatasetError> {
    draw_indices(ds.len(), spec)
}
