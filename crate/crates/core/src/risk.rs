//! Decision metrics derived from the overlaps.

use crate::error::{invalid, Error, Result};
use crate::kernel::{big_f0, gaussian_tail};
use crate::overlap::{EpsilonMixture, OverlapSolution};

/// Risk summary of one solved operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskReport {
    pub bayes_risk: f64,
    pub oracle_risk: f64,
    pub usefulness: f64,
    pub q_u: f64,
    pub q_v: f64,
}

impl RiskReport {
    pub fn new(lambda: f64, solution: &OverlapSolution) -> Result<Self> {
        Ok(RiskReport {
            bayes_risk: bayes_risk(solution.q_u)?,
            oracle_risk: oracle_risk(lambda)?,
            usefulness: usefulness(solution.q_u)?,
            q_u: solution.q_u,
            q_v: solution.q_v,
        })
    }
}

/// Supervised, semi-supervised and oracle errors with the two reductions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionReport {
    pub e_sup: f64,
    pub e_semi: f64,
    pub e_oracle: f64,
    pub absolute_reduction: f64,
    pub oracle_relative_reduction: f64,
}

impl ReductionReport {
    pub fn new(e_sup: f64, e_semi: f64, e_oracle: f64) -> Result<Self> {
        Ok(ReductionReport {
            e_sup,
            e_semi,
            e_oracle,
            absolute_reduction: absolute_reduction(e_sup, e_semi)?,
            oracle_relative_reduction: oracle_relative_reduction(e_sup, e_semi, e_oracle)?,
        })
    }
}

fn check_nonneg(name: &str, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(invalid(format!("{name} must be finite and >= 0, got {x}")));
    }
    Ok(x)
}

fn check_probability(name: &str, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(invalid(format!("{name} must be a probability, got {x}")));
    }
    Ok(x)
}

/// Asymptotic Bayes risk `Q(√q_u)`.
pub fn bayes_risk(q_u: f64) -> Result<f64> {
    gaussian_tail(check_nonneg("q_u", q_u)?.sqrt())
}

/// Risk with known class centers, `Q(√λ)`.
pub fn oracle_risk(lambda: f64) -> Result<f64> {
    gaussian_tail(check_nonneg("lambda", lambda)?.sqrt())
}

/// Information value of an unlabeled sample relative to a certain one, `F(q_u)`.
pub fn usefulness(q_u: f64) -> Result<f64> {
    Ok(big_f0(check_nonneg("q_u", q_u)?))
}

/// `(E_sup - E_semi) / E_sup`.
pub fn absolute_reduction(e_sup: f64, e_semi: f64) -> Result<f64> {
    check_probability("e_sup", e_sup)?;
    check_probability("e_semi", e_semi)?;
    if e_sup == 0.0 {
        return Err(Error::Degenerate("absolute reduction undefined for e_sup = 0".into()));
    }
    Ok((e_sup - e_semi) / e_sup)
}

/// `(E_sup - E_semi) / (E_sup - E_oracle)`: share of the way to oracle error.
pub fn oracle_relative_reduction(e_sup: f64, e_semi: f64, e_oracle: f64) -> Result<f64> {
    check_probability("e_sup", e_sup)?;
    check_probability("e_semi", e_semi)?;
    check_probability("e_oracle", e_oracle)?;
    if e_sup == e_oracle {
        return Err(Error::Degenerate("oracle-relative reduction undefined for e_sup = e_oracle".into()));
    }
    Ok((e_sup - e_semi) / (e_sup - e_oracle))
}

/// Labeled samples at confidence `kappa` that match `eta · n` certain ones:
/// `n_ℓ = η n / (2κ - 1)²`. Callers round up.
pub fn labeled_needed(eta: f64, kappa: f64, n: u64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(invalid(format!("eta must lie in (0, 1], got {eta}")));
    }
    if !(0.5..=1.0).contains(&kappa) {
        return Err(invalid(format!("kappa must lie in [0.5, 1], got {kappa}")));
    }
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    let strength = (2.0 * kappa - 1.0).powi(2);
    if strength < eta {
        return Err(Error::Infeasible(format!(
            "(2κ - 1)² = {strength} is below eta = {eta}; even a fully labeled dataset cannot match"
        )));
    }
    Ok(eta / strength * n as f64)
}

/// `ε̄²`, the certainty fraction informationally equivalent to `mixture`.
pub fn effective_eta(mixture: &EpsilonMixture) -> f64 {
    mixture.mean_squared()
}
