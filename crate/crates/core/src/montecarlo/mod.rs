//! Desk-scale simulation of the two-class Gaussian mixture with uncertain
//! labels: data generation, the scalar-channel check, and the oracle,
//! supervised and semi-supervised classifiers used to confront the theory.

mod channel;
mod classify;
mod dataset;
mod rng;
mod search;

pub use channel::{channel_overlap_mc, channel_overlap_mc_replicate, ChannelSample, McEstimate};
pub use classify::{classify_oracle, classify_semisupervised, classify_supervised, ClassifierOutput};
pub use dataset::{generate_dataset, Dataset, DatasetSpec, LabelBlock, LabelInfo};
pub use rng::{stream_rng, Stream};
pub use search::{labeled_needed_empirical, LabeledSearch, LabeledSearchResult};

/// Misclassification probability of the linear rule `sign(xᵀw)` on a fresh
/// sample `x = yμ + z`: `Q(μᵀw / ‖w‖)`.
pub fn linear_rule_error(truth_mean: &[f64], direction: &[f64]) -> Option<f64> {
    let norm = direction.iter().map(|w| w * w).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return None;
    }
    let margin = truth_mean.iter().zip(direction).map(|(m, w)| m * w).sum::<f64>() / norm;
    crate::kernel::gaussian_tail(margin).ok()
}
