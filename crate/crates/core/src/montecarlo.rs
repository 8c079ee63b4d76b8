//! Chunked, order-independent Monte Carlo estimation of Bernoulli rates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::{substream, StreamRng};

/// Trials per RNG substream. Fixed so parallel and serial runs agree.
pub const CHUNK: u64 = 4096;

/// A binomial proportion estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub trials: u64,
    pub successes: u64,
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn from_counts(trials: u64, successes: u64) -> Self {
        let mean = if trials == 0 {
            0.0
        } else {
            successes as f64 / trials as f64
        };
        Self {
            trials,
            successes,
            mean,
            std_error: binomial_sigma(mean, trials),
        }
    }

    /// Standard deviation of the estimator if the true rate were `p`.
    pub fn sigma_at(&self, p: f64) -> f64 {
        binomial_sigma(p, self.trials)
    }

    /// `|mean - expected|` in units of the binomial sigma at `expected`.
    pub fn z_score(&self, expected: f64) -> f64 {
        let sigma = self.sigma_at(expected);
        let diff = (self.mean - expected).abs();
        if sigma == 0.0 {
            if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            diff / sigma
        }
    }

    pub fn within_sigma(&self, expected: f64, k: f64) -> bool {
        self.z_score(expected) <= k
    }

    /// One-sided check `mean <= ceiling + k·σ`, with σ taken at the larger of
    /// the observed rate and one success in `trials`.
    pub fn below(&self, ceiling: f64, k: f64) -> bool {
        let p = self.mean.max(1.0 / self.trials.max(1) as f64);
        self.mean <= ceiling + k * binomial_sigma(p, self.trials)
    }
}

pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    (p * (1.0 - p) / n as f64).max(0.0).sqrt()
}

/// Runs `trials` independent Bernoulli trials. Trial `i` draws from substream
/// `i / CHUNK` of `master_seed`; the count is a sum so the result does not
/// depend on the number of worker threads.
pub fn estimate<F>(master_seed: u64, trials: u64, trial: F) -> Estimate
where
    F: Fn(&mut StreamRng) -> bool + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    let successes: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(master_seed, c);
            let n = CHUNK.min(trials - c * CHUNK);
            (0..n).filter(|_| trial(&mut rng)).count() as u64
        })
        .sum();
    Estimate::from_counts(trials, successes)
}

/// Fallible variant of [`estimate`]; the first error in chunk order wins.
pub fn try_estimate<F, E>(master_seed: u64, trials: u64, trial: F) -> Result<Estimate, E>
where
    F: Fn(&mut StreamRng) -> Result<bool, E> + Sync,
    E: Send,
{
    let chunks = trials.div_ceil(CHUNK);
    let per_chunk: Vec<Result<u64, E>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(master_seed, c);
            let n = CHUNK.min(trials - c * CHUNK);
            let mut hits = 0;
            for _ in 0..n {
                if trial(&mut rng)? {
                    hits += 1;
                }
            }
            Ok(hits)
        })
        .collect();
    let mut successes = 0;
    for r in per_chunk {
        successes += r?;
    }
    Ok(Estimate::from_counts(trials, successes))
}
