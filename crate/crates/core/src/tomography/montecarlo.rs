use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::dataset::TomographyDataset;
use crate::error::{Error, Result};
use crate::gate::resample_counts;

pub const MIN_TRIALS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Uncertainty {
    pub mean: f64,
    pub stddev: f64,
    pub trials: usize,
    pub dropped: usize,
}

/// Poisson-resamples every count, re-runs `pipeline` on each resampled
/// dataset and reports the sample mean and standard deviation. Exact
/// datasets are evaluated once with zero spread. Trials whose pipeline
/// fails are dropped; more than 10% dropped is an error.
pub fn monte_carlo_uncertainty<F>(
    pipeline: F,
    dataset: &TomographyDataset,
    trials: usize,
    seed: u64,
) -> Result<Uncertainty>
where
    F: Fn(&TomographyDataset) -> Result<f64> + Sync,
{
    if trials < MIN_TRIALS {
        return Err(Error::InvalidConfig(format!("Monte Carlo needs at least {MIN_TRIALS} trials, got {trials}")));
    }
    if dataset.is_exact() {
        let value = pipeline(dataset)?;
        return Ok(Uncertainty { mean: value, stddev: 0.0, trials, dropped: 0 });
    }
    let values: Vec<Option<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let counts = resample_counts(&mut rng, dataset.counts()).ok()?;
            pipeline(&dataset.with_counts(counts)).ok().filter(|v| v.is_finite())
        })
        .collect();
    let kept: Vec<f64> = values.into_iter().flatten().collect();
    let dropped = trials - kept.len();
    if dropped * 10 > trials || kept.len() < 2 {
        return Err(Error::TooManyFailedTrials { dropped, trials });
    }
    let n = kept.len() as f64;
    let mean = kept.iter().sum::<f64>() / n;
    let var = kept.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(Uncertainty { mean, stddev: var.sqrt(), trials, dropped })
}
