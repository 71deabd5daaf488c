use rand::Rng;
use rand_distr::StandardNormal;

use super::rng::{stream_rng, Stream};
use crate::error::{invalid, Result};
use crate::kernel::{denoiser_f, Epsilon};

/// One use of the scalar channel `U = √q S + Z` with `E[S] = ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSample {
    pub s: i8,
    pub u: f64,
    pub eps: Epsilon,
}

impl ChannelSample {
    pub fn draw<R: Rng + ?Sized>(eps: Epsilon, q: f64, rng: &mut R) -> Self {
        let p_plus = 0.5 * (1.0 + eps.value());
        let s: i8 = if rng.random::<f64>() < p_plus { 1 } else { -1 };
        let z: f64 = rng.sample(StandardNormal);
        ChannelSample { s, u: q.sqrt() * f64::from(s) + z, eps }
    }

    /// `S · E[S | U]`, with the posterior mean `f_ε(√q U)`.
    pub fn overlap(&self, q: f64) -> f64 {
        f64::from(self.s) * denoiser_f(self.eps, q.sqrt() * self.u)
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
}

impl McEstimate {
    pub fn from_moments(sum: f64, sum_sq: f64, trials: u64) -> Self {
        let n = trials as f64;
        let mean = sum / n;
        let var = if trials > 1 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
        McEstimate { mean, std_error: (var / n).sqrt(), trials }
    }

    /// `(mean - target) / std_error`; zero when both the gap and the error vanish.
    pub fn z_score(&self, target: f64) -> f64 {
        let gap = self.mean - target;
        if self.std_error == 0.0 {
            if gap == 0.0 {
                0.0
            } else {
                gap.signum() * f64::INFINITY
            }
        } else {
            gap / self.std_error
        }
    }
}

/// Monte Carlo estimate of the channel overlap `E[S · E[S | U]]`.
pub fn channel_overlap_mc(eps: Epsilon, q: f64, trials: u64, seed: u64) -> Result<McEstimate> {
    channel_overlap_mc_replicate(eps, q, trials, seed, 0)
}

/// As [`channel_overlap_mc`], on the stream of replicate `replicate`.
pub fn channel_overlap_mc_replicate(
    eps: Epsilon,
    q: f64,
    trials: u64,
    seed: u64,
    replicate: u64,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(invalid("trials must be positive"));
    }
    if !(q >= 0.0) || !q.is_finite() {
        return Err(invalid(format!("q must be finite and >= 0, got {q}")));
    }
    let mut rng = stream_rng(seed, replicate, Stream::Channel);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..trials {
        let v = ChannelSample::draw(eps, q, &mut rng).overlap(q);
        sum += v;
        sum_sq += v * v;
    }
    Ok(McEstimate::from_moments(sum, sum_sq, trials))
}
