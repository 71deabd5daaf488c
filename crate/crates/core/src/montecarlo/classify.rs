use super::dataset::Dataset;
use super::linear_rule_error;
use crate::error::{invalid, Error, Result};
use crate::kernel::{denoiser_f, gaussian_tail, Epsilon};
use crate::overlap::{qu_from_qv, qv_from_qu, ProblemParams};

/// Stop once the mean absolute change of the soft scores drops below this.
const SCORE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierOutput {
    /// Soft scores in `[-1, 1]`.
    pub soft_scores: Vec<f64>,
    /// `sign(soft score)`, ties to `+1`.
    pub hard_labels: Vec<i8>,
    /// Error on samples with `ε = 0`; `None` when every sample is labeled.
    pub error_unlabeled: Option<f64>,
    pub error_all: f64,
    /// Exact misclassification probability of the learned linear rule on a
    /// fresh sample, computed from the hidden class mean.
    pub test_error: Option<f64>,
    pub iterations: usize,
}

fn hard_label(score: f64) -> i8 {
    if score >= 0.0 {
        1
    } else {
        -1
    }
}

fn finish(ds: &Dataset, soft_scores: Vec<f64>, test_error: Option<f64>, iterations: usize) -> ClassifierOutput {
    let hard_labels: Vec<i8> = soft_scores.iter().map(|&s| hard_label(s)).collect();
    let (mut wrong_all, mut wrong_u, mut n_u) = (0usize, 0usize, 0usize);
    for ((&h, &y), l) in hard_labels.iter().zip(&ds.truth_labels).zip(&ds.labels) {
        let wrong = h != y;
        wrong_all += usize::from(wrong);
        if !l.is_labeled() {
            n_u += 1;
            wrong_u += usize::from(wrong);
        }
    }
    ClassifierOutput {
        soft_scores,
        hard_labels,
        error_unlabeled: (n_u > 0).then(|| wrong_u as f64 / n_u as f64),
        error_all: wrong_all as f64 / ds.len() as f64,
        test_error,
        iterations,
    }
}

/// Known class centers: `ŷ_i = sign(x_iᵀμ)`, soft score `tanh(x_iᵀμ)`.
pub fn classify_oracle(ds: &Dataset) -> ClassifierOutput {
    let scores = ds.project(&ds.truth_mean);
    let soft = scores.iter().map(|s| s.tanh()).collect();
    let test = gaussian_tail(ds.snr().sqrt()).ok();
    finish(ds, soft, test, 1)
}

/// Plug-in direction from labeled samples only, `m̂ = (1/n) Σ ε_i x_i`.
pub fn classify_supervised(ds: &Dataset) -> Result<ClassifierOutput> {
    let eps: Vec<f64> = ds.eps().map(Epsilon::value).collect();
    let direction = ds.weighted_mean(&eps);
    if direction.iter().all(|&m| m == 0.0) {
        return Err(Error::Degenerate("supervised direction is zero: no labeled samples".into()));
    }
    let soft = ds.project(&direction).into_iter().map(f64::tanh).collect();
    Ok(finish(ds, soft, linear_rule_error(&ds.truth_mean, &direction), 1))
}

/// Iterative posterior-mean classifier calibrated by state evolution.
///
/// Each step forms `m̂ = (1/n) Σ v̂_i x_i`, removes each sample's own
/// contribution from its score, rescales the scores so that they behave like
/// `q_u y + √q_u g` with `q_u` taken from the state-evolution recursion, and
/// applies the denoiser `f_{ε_i}`.
pub fn classify_semisupervised(ds: &Dataset, params: &ProblemParams, t_max: usize) -> Result<ClassifierOutput> {
    if t_max == 0 {
        return Err(invalid("t_max must be at least 1"));
    }
    let ratio = ds.ratio();
    if (params.c - ratio).abs() > 1e-9 * ratio {
        return Err(invalid(format!("params.c = {} does not match n/p = {ratio}", params.c)));
    }
    let n = ds.len() as f64;
    let eps: Vec<Epsilon> = ds.eps().collect();
    let mixture = ds.realized_mixture();
    let self_weight: Vec<f64> = ds.samples().map(|x| x.iter().map(|v| v * v).sum::<f64>() / n).collect();

    let mut q_v = mixture.mean_squared();
    let mut soft: Vec<f64> = eps.iter().map(|e| e.value()).collect();
    let mut iterations = 0;

    for t in 1..=t_max {
        let q_u = qu_from_qv(params.lambda, params.c, q_v);
        q_v = qv_from_qu(&mixture, q_u);

        let next: Vec<f64> = if q_u > 0.0 {
            let direction = ds.weighted_mean(&soft);
            let raw: Vec<f64> =
                ds.project(&direction).into_iter().zip(&self_weight).zip(&soft).map(|((s, w), v)| s - w * v).collect();
            let mean_sq = raw.iter().map(|s| s * s).sum::<f64>() / n;
            let scale = (mean_sq / (q_u * (q_u + 1.0))).sqrt();
            if !(scale > 0.0) || !scale.is_finite() {
                return Err(Error::Degenerate(format!("score scale is {scale}")));
            }
            raw.iter().zip(&eps).map(|(s, &e)| denoiser_f(e, s / scale)).collect()
        } else {
            eps.iter().map(|&e| denoiser_f(e, 0.0)).collect()
        };

        let change = next.iter().zip(&soft).map(|(a, b)| (a - b).abs()).sum::<f64>() / n;
        soft = next;
        iterations = t;
        if change < SCORE_TOL {
            break;
        }
    }

    let direction = ds.weighted_mean(&soft);
    let test = linear_rule_error(&ds.truth_mean, &direction);
    Ok(finish(ds, soft, test, iterations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::{generate_dataset, LabelBlock};
    use crate::overlap::EpsilonMixture;

    fn params_for(ds: &Dataset, lambda: f64) -> ProblemParams {
        ProblemParams::new(lambda, ds.ratio(), ds.realized_mixture()).unwrap()
    }

    #[test]
    fn ties_go_to_plus_one() {
        assert_eq!(hard_label(0.0), 1);
        assert_eq!(hard_label(-0.0), 1);
        assert_eq!(hard_label(-1e-300), -1);
    }

    #[test]
    fn oracle_without_signal_is_a_coin_flip() {
        let ds = generate_dataset(5, 4000, 0.0, &[], 2).unwrap();
        let out = classify_oracle(&ds);
        // binomial sd ≈ 0.0079
        assert!((out.error_all - 0.5).abs() < 0.04);
        assert_eq!(out.test_error, Some(0.5));
    }

    #[test]
    fn oracle_separates_strong_signal() {
        let ds = generate_dataset(10, 10_000, 25.0, &[], 4).unwrap();
        assert_eq!(classify_oracle(&ds).error_all, 0.0);
    }

    #[test]
    fn supervised_needs_labels() {
        let ds = generate_dataset(5, 100, 1.0, &[], 1).unwrap();
        assert!(matches!(classify_supervised(&ds), Err(Error::Degenerate(_))));
    }

    #[test]
    fn supervised_is_deterministic() {
        let ds = generate_dataset(20, 400, 1.0, &[LabelBlock::new(0.3, 0.9)], 8).unwrap();
        assert_eq!(classify_supervised(&ds).unwrap(), classify_supervised(&ds).unwrap());
    }

    #[test]
    fn supervised_approaches_oracle_with_many_samples() {
        let ds = generate_dataset(10, 100_000, 1.0, &[LabelBlock::new(1.0, 1.0)], 6).unwrap();
        let sup = classify_supervised(&ds).unwrap();
        let orc = classify_oracle(&ds);
        assert!((sup.error_all - orc.error_all).abs() < 0.01);
    }

    #[test]
    fn fully_certain_labels_stay_fixed() {
        let ds = generate_dataset(50, 200, 2.0, &[LabelBlock::new(1.0, 1.0)], 3).unwrap();
        let out = classify_semisupervised(&ds, &params_for(&ds, 2.0), 20).unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(out.error_unlabeled, None);
        assert_eq!(out.error_all, 0.0);
        for (s, l) in out.soft_scores.iter().zip(&ds.labels) {
            assert_eq!(*s, l.eps.value());
        }
    }

    #[test]
    fn no_signal_gives_chance_error() {
        let ds = generate_dataset(200, 2000, 0.0, &[LabelBlock::new(0.2, 1.0)], 12).unwrap();
        let out = classify_semisupervised(&ds, &params_for(&ds, 0.0), 20).unwrap();
        let e = out.error_unlabeled.unwrap();
        assert!((e - 0.5).abs() < 0.05, "error {e}");
    }

    #[test]
    fn rejects_mismatched_ratio_and_zero_steps() {
        let ds = generate_dataset(10, 100, 1.0, &[LabelBlock::new(0.5, 1.0)], 1).unwrap();
        let wrong = ProblemParams::new(1.0, 3.0, EpsilonMixture::certainty(0.5).unwrap()).unwrap();
        assert!(classify_semisupervised(&ds, &wrong, 10).is_err());
        assert!(classify_semisupervised(&ds, &params_for(&ds, 1.0), 0).is_err());
    }
}
