//! Scalar special functions and one-dimensional Gaussian expectations.
//!
//! Everything the overlap equations need lives here: the Gaussian tail
//! `Q(x)`, the posterior-mean denoiser `f_ε` of a ±1 signal, the overlap
//! integrand `ψ_ε` (closed form, series form and the cheap approximation
//! `ψ̃_ε`), and the Gaussian averages `F_ε(q) = E[ψ_ε(q + √q Z)]`.
//!
//! Sign convention: the two classes are `y = -1` (prior `d1`) and `y = +1`
//! (prior `d2`), and `ε = d2 - d1` is the prior mean of `y`. Only `ε²` enters
//! `ψ_ε` and `F_ε`, so the convention only matters for `f_ε`.

use std::sync::OnceLock;

use crate::error::{invalid, Result};

/// Number of nodes in the default Gauss-Hermite rule.
pub const DEFAULT_NODES: usize = 61;

/// Signed label confidence, `ε = d2 - d1 ∈ [-1, 1]`.
///
/// `ε = 0` is an unlabeled sample, `|ε| = 1` a sample labeled with certainty.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Epsilon(f64);

impl Epsilon {
    pub const ZERO: Epsilon = Epsilon(0.0);
    pub const PLUS_ONE: Epsilon = Epsilon(1.0);
    pub const MINUS_ONE: Epsilon = Epsilon(-1.0);

    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || value.abs() > 1.0 {
            return Err(invalid(format!("epsilon must lie in [-1, 1], got {value}")));
        }
        Ok(Epsilon(value))
    }

    /// Confidence `κ ∈ [0.5, 1]` attached to a reported class `±1`:
    /// `ε = reported · (2κ - 1)`.
    pub fn from_confidence(kappa: f64, reported: i8) -> Result<Self> {
        if !(0.5..=1.0).contains(&kappa) {
            return Err(invalid(format!("confidence must lie in [0.5, 1], got {kappa}")));
        }
        if reported != 1 && reported != -1 {
            return Err(invalid(format!("reported class must be ±1, got {reported}")));
        }
        Ok(Epsilon(f64::from(reported) * (2.0 * kappa - 1.0)))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn squared(self) -> f64 {
        self.0 * self.0
    }

    #[inline]
    pub fn is_certain(self) -> bool {
        self.0.abs() == 1.0
    }

    /// Class probabilities `(d1, d2) = (P(y = -1), P(y = +1))`.
    pub fn class_probabilities(self) -> (f64, f64) {
        ((1.0 - self.0) / 2.0, (1.0 + self.0) / 2.0)
    }
}

impl TryFrom<f64> for Epsilon {
    type Error = crate::Error;

    fn try_from(value: f64) -> Result<Self> {
        Epsilon::new(value)
    }
}

/// Quadrature rule for expectations under a standard normal `Z`.
///
/// Weights are probability weights: `E[g(Z)] ≈ Σ w_j g(z_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Gauss-Hermite rule with `n` nodes, rescaled from the `e^{-x²}` weight
    /// to the standard normal density and renormalized to sum to one.
    pub fn gauss_hermite(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("quadrature needs at least one node"));
        }
        let (x, w) = hermite_nodes(n);
        let nodes: Vec<f64> = x.iter().map(|xi| xi * std::f64::consts::SQRT_2).collect();
        let total: f64 = w.iter().sum();
        let weights = w.iter().map(|wi| wi / total).collect();
        Ok(QuadratureRule { nodes, weights })
    }

    /// The shared 61-node rule.
    pub fn standard() -> &'static QuadratureRule {
        static RULE: OnceLock<QuadratureRule> = OnceLock::new();
        RULE.get_or_init(|| QuadratureRule::gauss_hermite(DEFAULT_NODES).expect("default node count is positive"))
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ_j w_j g(z_j)`.
    pub fn expect<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&z, &w)| w * g(z)).sum()
    }
}

/// Physicists' Gauss-Hermite nodes and weights by Newton iteration on the
/// orthonormal Hermite recurrence. Nodes are returned in decreasing order and
/// are exactly symmetric.
fn hermite_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    const PI_M4: f64 = 0.751_125_544_464_942_5; // π^{-1/4}
    const MAX_IT: usize = 100;

    let nf = n as f64;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = n.div_ceil(2);
    let mut z = 0.0_f64;

    for i in 0..half {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut deriv = 0.0;
        for _ in 0..MAX_IT {
            let mut p1 = PI_M4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            deriv = (2.0 * nf).sqrt() * p2;
            let step = p1 / deriv;
            z -= step;
            if step.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        if 2 * i + 1 == n {
            z = 0.0;
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (deriv * deriv);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Gaussian tail `Q(x) = P(Z > x)`.
pub fn gaussian_tail(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(invalid(format!("gaussian_tail needs a finite argument, got {x}")));
    }
    Ok(0.5 * libm::erfc(x / std::f64::consts::SQRT_2))
}

/// Posterior mean of a ±1 signal with prior mean `eps` given the
/// log-likelihood-ratio half `t`: `f_ε(t) = (tanh t + ε) / (1 + ε tanh t)`.
pub fn denoiser_f(eps: Epsilon, t: f64) -> f64 {
    let e = eps.value();
    if eps.is_certain() {
        return e;
    }
    let th = t.tanh();
    ((th + e) / (1.0 + e * th)).clamp(-1.0, 1.0)
}

/// Overlap integrand `ψ_ε(t) = (tanh t + ε²(1 - tanh t - tanh² t)) / (1 - ε² tanh² t)`.
pub fn psi(eps: Epsilon, t: f64) -> f64 {
    if eps.is_certain() {
        return 1.0;
    }
    let e2 = eps.squared();
    let th = t.tanh();
    // numerator rearranged as tanh·(1 - ε²) + ε²(1 - tanh²)
    (th * (1.0 - e2) + e2 * (1.0 - th * th)) / (1.0 - e2 * th * th)
}

/// Partial sum of the series form of `ψ_ε` truncated at `k_max` terms.
pub fn psi_series(eps: Epsilon, t: f64, k_max: u32) -> Result<f64> {
    if eps.is_certain() {
        return Err(invalid("series form of psi requires |epsilon| < 1"));
    }
    if k_max == 0 {
        return Err(invalid("k_max must be positive"));
    }
    let e2 = eps.squared();
    let th = t.tanh();
    let ratio = e2 * th * th;
    let mut term = 1.0;
    let mut tail = 0.0;
    for _ in 0..k_max {
        term *= ratio;
        tail += term;
    }
    Ok(th + e2 * (1.0 - th) - (1.0 - e2) * (1.0 - th) * tail)
}

/// Approximate integrand `ψ̃_ε(t) = tanh t + ε²(1 - tanh t)`.
pub fn psi_tilde(eps: Epsilon, t: f64) -> f64 {
    let th = t.tanh();
    th + eps.squared() * (1.0 - th)
}

/// `E[g(q + √q Z)]` under `rule`; exactly `g(0)` at `q = 0`.
pub fn gauss_expect<G: Fn(f64) -> f64>(g: G, q: f64, rule: &QuadratureRule) -> Result<f64> {
    if !(q >= 0.0) || !q.is_finite() {
        return Err(invalid(format!("gauss_expect needs finite q >= 0, got {q}")));
    }
    if q == 0.0 {
        return Ok(g(0.0));
    }
    let s = q.sqrt();
    Ok(rule.expect(|z| g(q + s * z)))
}

fn checked_q(q: f64) -> f64 {
    assert!(q >= 0.0 && q.is_finite(), "q must be finite and nonnegative, got {q}");
    q
}

/// `F_ε(q) = E[ψ_ε(q + √q Z)]` with the standard rule.
///
/// # Panics
/// If `q` is negative or not finite.
pub fn big_f(eps: Epsilon, q: f64) -> f64 {
    big_f_with(eps, q, QuadratureRule::standard())
}

pub fn big_f_with(eps: Epsilon, q: f64, rule: &QuadratureRule) -> f64 {
    let q = checked_q(q);
    if eps.is_certain() {
        return 1.0;
    }
    gauss_expect(|t| psi(eps, t), q, rule).expect("q validated")
}

/// `F(q) = E[tanh(q + √q Z)]`, i.e. `F_0`.
pub fn big_f0(q: f64) -> f64 {
    big_f(Epsilon::ZERO, q)
}

/// `F̃_ε(q) = E[ψ̃_ε(q + √q Z)]`.
pub fn big_f_tilde(eps: Epsilon, q: f64) -> f64 {
    let q = checked_q(q);
    if eps.is_certain() {
        return 1.0;
    }
    gauss_expect(|t| psi_tilde(eps, t), q, QuadratureRule::standard()).expect("q validated")
}

/// Relative approximation error `|F_ε(q) - F̃_ε(q)| / F_ε(q)`.
pub fn approx_relative_error(eps: Epsilon, q: f64) -> f64 {
    let exact = big_f(eps, q);
    if exact == 0.0 {
        return 0.0;
    }
    (exact - big_f_tilde(eps, q)).abs() / exact
}
