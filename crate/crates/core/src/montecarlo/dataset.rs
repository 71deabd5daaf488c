use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use super::rng::{stream_rng, Stream};
use crate::error::{invalid, Result};
use crate::kernel::Epsilon;
use crate::overlap::EpsilonMixture;

/// Per-sample class probabilities `(d1, d2) = (P(y=-1), P(y=+1))` and
/// `ε = d2 - d1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelInfo {
    pub d1: f64,
    pub d2: f64,
    pub eps: Epsilon,
}

impl LabelInfo {
    pub const UNLABELED: LabelInfo = LabelInfo { d1: 0.5, d2: 0.5, eps: Epsilon::ZERO };

    pub fn from_eps(eps: Epsilon) -> Self {
        let (d1, d2) = eps.class_probabilities();
        LabelInfo { d1, d2, eps }
    }

    pub fn from_probabilities(d1: f64, d2: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&d1) || !(0.0..=1.0).contains(&d2) || (d1 + d2 - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("(d1, d2) = ({d1}, {d2}) is not a probability couple")));
        }
        Ok(LabelInfo { d1, d2, eps: Epsilon::new((d2 - d1).clamp(-1.0, 1.0))? })
    }

    pub fn is_labeled(&self) -> bool {
        self.eps.value() != 0.0
    }
}

/// A fraction of the samples labeled by an annotator who reports the true
/// class with probability `kappa`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelBlock {
    pub fraction: f64,
    pub kappa: f64,
}

impl LabelBlock {
    pub fn new(fraction: f64, kappa: f64) -> Self {
        LabelBlock { fraction, kappa }
    }
}

/// Synthetic sample with its hidden ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    p: usize,
    n: usize,
    /// Column-major `p × n`: sample `i` is `features[i*p..(i+1)*p]`.
    features: Vec<f64>,
    pub truth_labels: Vec<i8>,
    pub labels: Vec<LabelInfo>,
    pub truth_mean: Vec<f64>,
    pub n_labeled: usize,
    pub n_unlabeled: usize,
}

impl Dataset {
    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `c = n / p`.
    pub fn ratio(&self) -> f64 {
        self.n as f64 / self.p as f64
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.features[i * self.p..(i + 1) * self.p]
    }

    pub fn samples(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks_exact(self.p)
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    /// `‖μ‖²`.
    pub fn snr(&self) -> f64 {
        self.truth_mean.iter().map(|m| m * m).sum()
    }

    pub fn eps(&self) -> impl Iterator<Item = Epsilon> + '_ {
        self.labels.iter().map(|l| l.eps)
    }

    /// Empirical confidence distribution of this sample.
    pub fn realized_mixture(&self) -> EpsilonMixture {
        EpsilonMixture::from_samples(self.eps()).expect("dataset is nonempty")
    }

    /// `(1/n) Σ_i a_i x_i`.
    pub fn weighted_mean(&self, weights: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.p];
        for (x, &a) in self.samples().zip(weights) {
            if a != 0.0 {
                for (o, xi) in out.iter_mut().zip(x) {
                    *o += a * xi;
                }
            }
        }
        let inv = 1.0 / self.n as f64;
        out.iter_mut().for_each(|o| *o *= inv);
        out
    }

    /// `x_iᵀw` for every sample.
    pub fn project(&self, w: &[f64]) -> Vec<f64> {
        self.samples().map(|x| dot(x, w)).collect()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Shape and labeling of a synthetic dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub p: usize,
    pub n: usize,
    pub lambda: f64,
    pub labeling: Vec<LabelBlock>,
}

impl DatasetSpec {
    pub fn new(p: usize, n: usize, lambda: f64, labeling: Vec<LabelBlock>) -> Result<Self> {
        let spec = DatasetSpec { p, n, lambda, labeling };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if self.p == 0 || self.n == 0 {
            return Err(invalid(format!("dimensions must be positive, got p={} n={}", self.p, self.n)));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(invalid(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        let mut total = 0.0;
        for b in &self.labeling {
            if !(0.0..=1.0).contains(&b.fraction) {
                return Err(invalid(format!("label fraction must lie in [0, 1], got {}", b.fraction)));
            }
            if !(b.kappa > 0.5 && b.kappa <= 1.0) {
                return Err(invalid(format!("label confidence must lie in (0.5, 1], got {}", b.kappa)));
            }
            total += b.fraction;
        }
        if total > 1.0 + 1e-12 {
            return Err(invalid(format!("label fractions sum to {total} > 1")));
        }
        Ok(())
    }

    /// Limit of `ε̄²` for this labeling, `Σ fraction · (2κ - 1)²`.
    pub fn expected_eta(&self) -> f64 {
        self.labeling.iter().map(|b| b.fraction * (2.0 * b.kappa - 1.0).powi(2)).sum()
    }

    /// Draws replicate `replicate` of this design.
    ///
    /// Mean direction, class assignment, noise and annotator draws come from
    /// separate streams; the annotator stream always yields `n` uniforms, so
    /// two specs differing only in labeling share features and truth.
    pub fn generate(&self, seed: u64, replicate: u64) -> Result<Dataset> {
        self.validate()?;
        let (p, n) = (self.p, self.n);

        let mut rng = stream_rng(seed, replicate, Stream::Mean);
        let mut mu: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
        let norm = mu.iter().map(|m| m * m).sum::<f64>().sqrt();
        let scale = if norm > 0.0 { self.lambda.sqrt() / norm } else { 0.0 };
        mu.iter_mut().for_each(|m| *m *= scale);

        let mut rng = stream_rng(seed, replicate, Stream::Classes);
        let mut y: Vec<i8> = (0..n).map(|i| if i < n - n / 2 { 1 } else { -1 }).collect();
        y.shuffle(&mut rng);

        let mut rng = stream_rng(seed, replicate, Stream::Noise);
        let mut features = Vec::with_capacity(p * n);
        for &yi in &y {
            let s = f64::from(yi);
            features.extend(mu.iter().map(|m| s * m + rng.sample::<f64, _>(StandardNormal)));
        }

        let mut rng = stream_rng(seed, replicate, Stream::Labeler);
        let draws: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let mut labels = vec![LabelInfo::UNLABELED; n];
        let mut cumulative = 0.0;
        let mut start = 0usize;
        for b in &self.labeling {
            cumulative += b.fraction;
            let end = ((cumulative * n as f64).round() as usize).min(n);
            for i in start..end {
                let reported = if draws[i] < b.kappa { y[i] } else { -y[i] };
                let eps = Epsilon::from_confidence(b.kappa, reported)?;
                labels[i] = LabelInfo::from_eps(eps);
            }
            start = end.max(start);
        }
        let n_labeled = labels.iter().filter(|l| l.is_labeled()).count();

        Ok(Dataset { p, n, features, truth_labels: y, labels, truth_mean: mu, n_labeled, n_unlabeled: n - n_labeled })
    }
}

/// Balanced two-class sample `x_i = y_i μ + z_i` with `‖μ‖² = λ` and
/// annotator labels drawn per block.
pub fn generate_dataset(p: usize, n: usize, lambda: f64, labeling: &[LabelBlock], seed: u64) -> Result<Dataset> {
    DatasetSpec::new(p, n, lambda, labeling.to_vec())?.generate(seed, 0)
}
