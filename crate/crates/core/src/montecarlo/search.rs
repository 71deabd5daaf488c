use std::collections::BTreeMap;

use rayon::prelude::*;

use super::classify::classify_semisupervised;
use super::dataset::{DatasetSpec, LabelBlock};
use crate::error::{invalid, Error, Result};
use crate::overlap::ProblemParams;
use crate::risk::labeled_needed;

/// Empirical counterpart of the labeled-data requirement: the smallest number
/// of labels at confidence `kappa` whose semi-supervised error matches that of
/// `eta · n` certain labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSearch {
    pub p: usize,
    pub n: usize,
    pub lambda: f64,
    pub eta: f64,
    pub kappa: f64,
    pub seed: u64,
    pub reps: usize,
    pub t_max: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSearchResult {
    pub n_labeled: usize,
    /// Mean error of the certain-label reference.
    pub target_error: f64,
    /// Mean error at `n_labeled`.
    pub achieved_error: f64,
    /// Every `(n_ℓ, mean error)` evaluated, sorted by `n_ℓ`.
    pub evaluations: Vec<(usize, f64)>,
}

impl LabeledSearch {
    fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(invalid("reps must be positive"));
        }
        if self.t_max == 0 {
            return Err(invalid("t_max must be positive"));
        }
        labeled_needed(self.eta, self.kappa, self.n as u64)?;
        DatasetSpec::new(self.p, self.n, self.lambda, vec![])?;
        Ok(())
    }

    /// Mean over replicates of the exact fresh-sample error of the
    /// semi-supervised rule trained with `n_labeled` labels at `kappa`.
    /// Replicate `r` always sees the same features and annotator draws.
    pub fn mean_error(&self, n_labeled: usize, kappa: f64) -> Result<f64> {
        let fraction = n_labeled as f64 / self.n as f64;
        let spec = DatasetSpec::new(self.p, self.n, self.lambda, vec![LabelBlock::new(fraction, kappa)])?;
        let errors = (0..self.reps as u64)
            .into_par_iter()
            .map(|r| {
                let ds = spec.generate(self.seed, r)?;
                let params = ProblemParams::new(self.lambda, ds.ratio(), ds.realized_mixture())?;
                let out = classify_semisupervised(&ds, &params, self.t_max)?;
                Ok(out.test_error.unwrap_or(0.5))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(errors.iter().sum::<f64>() / errors.len() as f64)
    }

    /// Doubling from `η n` until the target is met, then bisection down to a
    /// single sample.
    pub fn run(&self) -> Result<LabeledSearchResult> {
        self.validate()?;
        let reference = ((self.eta * self.n as f64).round() as usize).clamp(1, self.n);
        let target = self.mean_error(reference, 1.0)?;

        let mut seen: BTreeMap<usize, f64> = BTreeMap::new();
        let mut eval = |m: usize| -> Result<f64> {
            if let Some(&e) = seen.get(&m) {
                return Ok(e);
            }
            let e = self.mean_error(m, self.kappa)?;
            seen.insert(m, e);
            Ok(e)
        };

        let mut lo = 0usize;
        let mut hi = reference;
        while eval(hi)? > target {
            if hi == self.n {
                return Err(Error::Infeasible(format!(
                    "target error {target:.6} not reached with all {} samples labeled at kappa = {}",
                    self.n, self.kappa
                )));
            }
            lo = hi;
            hi = (2 * hi).min(self.n);
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if eval(mid)? <= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let achieved = eval(hi)?;
        Ok(LabeledSearchResult {
            n_labeled: hi,
            target_error: target,
            achieved_error: achieved,
            evaluations: seen.into_iter().collect(),
        })
    }
}

/// Smallest `n_ℓ` at confidence `kappa` reaching the error of `eta · n`
/// certain labels, averaged over `reps` replicates.
#[allow(clippy::too_many_arguments)]
pub fn labeled_needed_empirical(
    p: usize,
    n: usize,
    lambda: f64,
    eta: f64,
    kappa: f64,
    seed: u64,
    reps: usize,
) -> Result<usize> {
    LabeledSearch { p, n, lambda, eta, kappa, seed, reps, t_max: 100 }.run().map(|r| r.n_labeled)
}
