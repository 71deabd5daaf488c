//! Self-consistent overlap equations.
//!
//! The feature-space overlap `q_u` and label-space overlap `q_v` solve
//!
//! ```text
//! q_u = λ · λ c q_v / (1 + λ c q_v)
//! q_v = Σ_j w_j F_{ε_j}(q_u)
//! ```
//!
//! where `(ε_j, w_j)` is the limiting distribution of label confidences and
//! `c = n / p`. The certainty case (`ε ∈ {0, 1}`) reduces to
//! `q_v = η + (1 - η) F(q_u)`; replacing every `F_ε` by its approximation
//! gives the same form with `η = ε̄²`.

use std::collections::BTreeMap;

use crate::error::{invalid, Error, Result};
use crate::kernel::{big_f, big_f0, Epsilon};

/// Tolerance on the total weight of a mixture.
const WEIGHT_TOL: f64 = 1e-12;

/// Discrete distribution of label confidences.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonMixture {
    atoms: Vec<(Epsilon, f64)>,
}

impl EpsilonMixture {
    pub fn new(atoms: Vec<(Epsilon, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(invalid("mixture needs at least one atom"));
        }
        if let Some((_, w)) = atoms.iter().find(|(_, w)| !(*w >= 0.0) || !w.is_finite()) {
            return Err(invalid(format!("mixture weights must be nonnegative, got {w}")));
        }
        let total: f64 = atoms.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(invalid(format!("mixture weights sum to {total}, expected 1")));
        }
        Ok(EpsilonMixture { atoms })
    }

    /// Fraction `η` labeled with certainty, the rest unlabeled.
    pub fn certainty(eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(invalid(format!("eta must lie in [0, 1], got {eta}")));
        }
        Self::new(vec![(Epsilon::PLUS_ONE, eta), (Epsilon::ZERO, 1.0 - eta)])
    }

    /// Every sample carries the same confidence.
    pub fn single(eps: Epsilon) -> Self {
        EpsilonMixture { atoms: vec![(eps, 1.0)] }
    }

    /// Empirical mixture of per-sample confidences, grouped by `|ε|`.
    pub fn from_samples<I: IntoIterator<Item = Epsilon>>(samples: I) -> Result<Self> {
        let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
        let mut n = 0usize;
        for e in samples {
            *counts.entry(e.value().abs().to_bits()).or_default() += 1;
            n += 1;
        }
        if n == 0 {
            return Err(invalid("cannot build a mixture from zero samples"));
        }
        let atoms = counts
            .into_iter()
            .map(|(bits, k)| (Epsilon::new(f64::from_bits(bits)).expect("validated"), k as f64 / n as f64))
            .collect();
        Ok(EpsilonMixture { atoms })
    }

    pub fn atoms(&self) -> &[(Epsilon, f64)] {
        &self.atoms
    }

    /// `ε̄² = Σ w_j ε_j²`.
    pub fn mean_squared(&self) -> f64 {
        self.atoms.iter().map(|(e, w)| w * e.squared()).sum::<f64>().clamp(0.0, 1.0)
    }

    pub fn all_certain(&self) -> bool {
        self.atoms.iter().all(|(e, w)| *w == 0.0 || e.is_certain())
    }
}

/// Inputs of the overlap equations.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemParams {
    /// Signal-to-noise ratio `λ = ¼‖μ₁ - μ₂‖²`.
    pub lambda: f64,
    /// Samples per dimension, `c = n / p`.
    pub c: f64,
    pub mixture: EpsilonMixture,
}

impl ProblemParams {
    pub fn new(lambda: f64, c: f64, mixture: EpsilonMixture) -> Result<Self> {
        validate_lambda_c(lambda, c)?;
        Ok(ProblemParams { lambda, c, mixture })
    }

    pub fn certainty(lambda: f64, c: f64, eta: f64) -> Result<Self> {
        Self::new(lambda, c, EpsilonMixture::certainty(eta)?)
    }
}

fn validate_lambda_c(lambda: f64, c: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(invalid(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(invalid(format!("c must be finite and > 0, got {c}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-10, max_iter: 10_000, damping: 0.5 }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(invalid(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter must be positive"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(invalid(format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        Ok(())
    }
}

/// A solution of the overlap equations with convergence diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapSolution {
    pub q_u: f64,
    pub q_v: f64,
    /// Largest defect of the two equations at `(q_u, q_v)`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `|q_u|` difference between the runs started from `q_v = 1` and from
    /// `q_v = max(ε̄², 1e-6)`. Above `tol` means two distinct fixed points.
    pub branch_gap: f64,
}

impl OverlapSolution {
    pub fn multiple_fixed_points(&self, tol: f64) -> bool {
        self.branch_gap > tol
    }
}

/// `q_u = λ² c q_v / (1 + λ c q_v)`.
pub fn qu_from_qv(lambda: f64, c: f64, q_v: f64) -> f64 {
    let lc = lambda * c * q_v;
    lambda * lc / (1.0 + lc)
}

/// `q_v = Σ_j w_j F_{ε_j}(q_u)`.
pub fn qv_from_qu(mixture: &EpsilonMixture, q_u: f64) -> f64 {
    mixture.atoms().iter().filter(|(_, w)| *w > 0.0).map(|(e, w)| w * big_f(*e, q_u)).sum()
}

/// Largest defect of the two equations at `(q_u, q_v)`.
pub fn residual(params: &ProblemParams, q_u: f64, q_v: f64) -> f64 {
    let du = (q_u - qu_from_qv(params.lambda, params.c, q_v)).abs();
    let dv = (q_v - qv_from_qu(&params.mixture, q_u)).abs();
    du.max(dv)
}

fn iterate<M>(lambda: f64, c: f64, qv_map: M, init: f64, opts: &SolverOptions) -> OverlapSolution
where
    M: Fn(f64) -> f64,
{
    let mut q_v = init;
    let mut it = 0;
    loop {
        let q_u = qu_from_qv(lambda, c, q_v);
        let target = qv_map(q_u);
        // the first equation holds by construction
        let defect = (target - q_v).abs();
        let converged = defect < opts.tol;
        if converged || it == opts.max_iter {
            return OverlapSolution { q_u, q_v, residual: defect, iterations: it, converged, branch_gap: 0.0 };
        }
        q_v = (1.0 - opts.damping) * q_v + opts.damping * target;
        it += 1;
    }
}

fn solve_with_map<M>(lambda: f64, c: f64, floor: f64, qv_map: M, opts: &SolverOptions) -> Result<OverlapSolution>
where
    M: Fn(f64) -> f64,
{
    opts.validate()?;
    validate_lambda_c(lambda, c)?;
    if floor == 0.0 && lambda * lambda * c <= 1.0 {
        // no labels: q_v = F(q_u) < q_u <= λ²c q_v leaves only the origin
        return Ok(OverlapSolution {
            q_u: 0.0,
            q_v: 0.0,
            residual: 0.0,
            iterations: 0,
            converged: true,
            branch_gap: 0.0,
        });
    }
    let upper = iterate(lambda, c, &qv_map, 1.0, opts);
    if !upper.converged {
        return Err(Error::NotConverged { last: upper });
    }
    let lower = iterate(lambda, c, &qv_map, floor.max(1e-6), opts);
    if !lower.converged {
        return Err(Error::NotConverged { last: lower });
    }
    let gap = (upper.q_u - lower.q_u).abs();
    let mut best = if lower.q_u > upper.q_u + opts.tol { lower } else { upper };
    best.iterations = upper.iterations + lower.iterations;
    best.branch_gap = gap;
    Ok(best)
}

/// Damped alternating iteration of the full system, run from `q_v = 1` and
/// from `q_v = max(ε̄², 1e-6)`; the larger-`q_u` fixed point is returned.
pub fn solve_overlaps(params: &ProblemParams, opts: &SolverOptions) -> Result<OverlapSolution> {
    let mixture = &params.mixture;
    solve_with_map(params.lambda, params.c, mixture.mean_squared(), |q_u| qv_from_qu(mixture, q_u), opts)
}

/// Certainty labeling: fraction `eta` labeled with certainty, the rest unlabeled.
pub fn solve_certainty(lambda: f64, c: f64, eta: f64, opts: &SolverOptions) -> Result<OverlapSolution> {
    let params = ProblemParams::certainty(lambda, c, eta)?;
    solve_overlaps(&params, opts)
}

/// Approximate system `q_v = ε̄² + (1 - ε̄²) F(q_u)`.
pub fn solve_approx(params: &ProblemParams, opts: &SolverOptions) -> Result<OverlapSolution> {
    let eta = params.mixture.mean_squared();
    solve_with_map(params.lambda, params.c, eta, |q_u| eta + (1.0 - eta) * big_f0(q_u), opts)
}

/// Relative changes `(|Δq_u| / q_u, |Δq_v| / q_v)` when `q_v` moves by `delta`
/// through the first equation.
pub fn sensitivity_ratio(lambda: f64, c: f64, q_v: f64, delta: f64) -> Result<(f64, f64)> {
    validate_lambda_c(lambda, c)?;
    let moved = q_v + delta;
    if !(q_v > 0.0 && q_v <= 1.0) || !(moved > 0.0 && moved <= 1.0) {
        return Err(invalid(format!("q_v and q_v + delta must lie in (0, 1], got {q_v} and {moved}")));
    }
    let base = qu_from_qv(lambda, c, q_v);
    let d_u = (qu_from_qv(lambda, c, moved) - base).abs();
    let rel_u = if base == 0.0 { 0.0 } else { d_u / base };
    Ok((rel_u, delta.abs() / q_v))
}

/// Limit of `(|Δq_u| / q_u) / (|Δq_v| / q_v)` as the perturbation vanishes.
pub fn contraction_factor(lambda: f64, c: f64, q_v: f64) -> f64 {
    1.0 / (1.0 + lambda * c * q_v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eps(v: f64) -> Epsilon {
        Epsilon::new(v).unwrap()
    }

    #[test]
    fn mixture_validation() {
        assert!(EpsilonMixture::new(vec![]).is_err());
        assert!(EpsilonMixture::new(vec![(Epsilon::ZERO, 0.5)]).is_err());
        assert!(EpsilonMixture::new(vec![(Epsilon::ZERO, -0.1), (Epsilon::PLUS_ONE, 1.1)]).is_err());
        assert!(EpsilonMixture::certainty(1.5).is_err());
        let m = EpsilonMixture::from_samples([eps(0.5), eps(-0.5), Epsilon::ZERO, Epsilon::ZERO]).unwrap();
        assert_eq!(m.atoms().len(), 2);
        assert!((m.mean_squared() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn params_validation() {
        let m = EpsilonMixture::certainty(0.2).unwrap();
        assert!(ProblemParams::new(-1.0, 1.0, m.clone()).is_err());
        assert!(ProblemParams::new(1.0, 0.0, m.clone()).is_err());
        assert!(ProblemParams::new(1.0, f64::NAN, m).is_err());
    }

    #[test]
    fn qu_map_examples() {
        assert_eq!(qu_from_qv(0.0, 3.0, 0.7), 0.0);
        assert_eq!(qu_from_qv(2.0, 3.0, 0.0), 0.0);
        assert_eq!(qu_from_qv(1.0, 1.0, 1.0), 0.5);
    }

    #[test]
    fn qv_map_examples() {
        assert_eq!(qv_from_qu(&EpsilonMixture::single(Epsilon::PLUS_ONE), 0.4), 1.0);
        assert_eq!(qv_from_qu(&EpsilonMixture::single(Epsilon::ZERO), 0.0), 0.0);
        let eta = 0.3;
        let m = EpsilonMixture::certainty(eta).unwrap();
        for q in [0.0, 0.2, 1.5, 8.0] {
            let direct = eta + (1.0 - eta) * big_f0(q);
            assert!((qv_from_qu(&m, q) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_signal_forces_zero_overlap() {
        let m = EpsilonMixture::new(vec![(eps(0.4), 0.5), (Epsilon::ZERO, 0.5)]).unwrap();
        let p = ProblemParams::new(0.0, 2.0, m.clone()).unwrap();
        let s = solve_overlaps(&p, &SolverOptions::default()).unwrap();
        assert_eq!(s.q_u, 0.0);
        assert!((s.q_v - qv_from_qu(&m, 0.0)).abs() < 1e-10);
    }

    #[test]
    fn pinned_label_overlap() {
        let p = ProblemParams::new(0.25, 5.0, EpsilonMixture::single(Epsilon::PLUS_ONE)).unwrap();
        let s = solve_overlaps(&p, &SolverOptions::default()).unwrap();
        assert_eq!(s.q_v, 1.0);
        assert!((s.q_u - 0.25 * 1.25 / 2.25).abs() < 1e-15);
    }

    #[test]
    fn mixed_solution_resubstitutes() {
        let p = ProblemParams::certainty(1.0, 1.0, 0.2).unwrap();
        let s = solve_overlaps(&p, &SolverOptions::default()).unwrap();
        assert!(s.converged);
        let du = (s.q_u - qu_from_qv(1.0, 1.0, s.q_v)).abs();
        let dv = (s.q_v - (0.2 + 0.8 * big_f0(s.q_u))).abs();
        assert!(du < 1e-9 && dv < 1e-9);
        assert!(residual(&p, s.q_u, s.q_v) < 1e-9);
        assert!(s.q_v >= p.mixture.mean_squared());
    }

    #[test]
    fn certainty_wrapper_examples() {
        let opts = SolverOptions::default();
        let s = solve_certainty(1.7, 2.0, 1.0, &opts).unwrap();
        assert_eq!(s.q_v, 1.0);
        assert!((s.q_u - 1.7 * 1.7 * 2.0 / (1.0 + 1.7 * 2.0)).abs() < 1e-14);
        assert_eq!(solve_certainty(0.0, 2.0, 0.4, &opts).unwrap().q_u, 0.0);
    }

    #[test]
    fn approx_is_exact_for_certainty_mixtures() {
        let opts = SolverOptions::default();
        for m in [EpsilonMixture::single(Epsilon::MINUS_ONE), EpsilonMixture::single(Epsilon::ZERO)] {
            let p = ProblemParams::new(1.5, 2.0, m).unwrap();
            let a = solve_approx(&p, &opts).unwrap();
            let e = solve_overlaps(&p, &opts).unwrap();
            assert_eq!((a.q_u, a.q_v), (e.q_u, e.q_v));
        }
    }

    #[test]
    fn approx_error_propagates_contracted() {
        let opts = SolverOptions::default();
        let e5 = eps(0.5);
        let p = ProblemParams::new(1.0, 1.0, EpsilonMixture::single(e5)).unwrap();
        let a = solve_approx(&p, &opts).unwrap();
        let e = solve_overlaps(&p, &opts).unwrap();
        // pointwise approximation error at the exact solution is within the grid bound
        let pointwise = crate::kernel::approx_relative_error(e5, e.q_u);
        assert!(pointwise <= 0.08, "pointwise = {pointwise}");
        // feedback through the fixed point amplifies it to ≈ 0.087 in q_v,
        // while q_u moves by only ≈ 0.061
        let rel_v = (a.q_v - e.q_v).abs() / e.q_v;
        let rel_u = (a.q_u - e.q_u).abs() / e.q_u;
        assert!((rel_v - 0.0869).abs() < 1e-3, "rel_v = {rel_v}");
        assert!((rel_u - 0.0609).abs() < 1e-3, "rel_u = {rel_u}");
        assert!(rel_u <= rel_v);
    }

    #[test]
    fn sensitivity_examples() {
        let (ru, rv) = sensitivity_ratio(1.0, 1.0, 1.0, -1e-6).unwrap();
        assert!((ru / rv - 0.5).abs() < 1e-3);
        assert!((contraction_factor(1.0, 1.0, 1.0) - 0.5).abs() < 1e-15);
        assert_eq!(sensitivity_ratio(0.0, 1.0, 0.5, 0.1).unwrap().0, 0.0);
        assert_eq!(sensitivity_ratio(2.0, 3.0, 0.5, 0.0).unwrap(), (0.0, 0.0));
        assert!(sensitivity_ratio(1.0, 1.0, 0.9, 0.2).is_err());
        assert!(sensitivity_ratio(1.0, 1.0, 0.0, 0.2).is_err());
    }

    #[test]
    fn solver_option_validation() {
        let p = ProblemParams::certainty(1.0, 1.0, 0.2).unwrap();
        for bad in [
            SolverOptions { tol: 0.0, ..Default::default() },
            SolverOptions { max_iter: 0, ..Default::default() },
            SolverOptions { damping: 0.0, ..Default::default() },
            SolverOptions { damping: 1.5, ..Default::default() },
        ] {
            assert!(matches!(solve_overlaps(&p, &bad), Err(Error::InvalidArgument(_))));
        }
    }

    #[test]
    fn non_convergence_carries_last_iterate() {
        let p = ProblemParams::certainty(2.0, 1.0, 0.2).unwrap();
        let opts = SolverOptions { max_iter: 3, ..Default::default() };
        match solve_overlaps(&p, &opts) {
            Err(Error::NotConverged { last }) => {
                assert_eq!(last.iterations, 3);
                assert!(!last.converged);
                assert!(last.residual >= opts.tol);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn subcritical_unlabeled_has_trivial_solution() {
        // λ²c < 1 and no labels: only q = 0 is a fixed point
        let p = ProblemParams::new(0.5, 2.0, EpsilonMixture::single(Epsilon::ZERO)).unwrap();
        let s = solve_overlaps(&p, &SolverOptions::default()).unwrap();
        assert!(s.q_u < 1e-8, "{s:?}");
    }

    #[test]
    fn critical_point_without_labels_is_exactly_zero() {
        let p = ProblemParams::new(1.0, 1.0, EpsilonMixture::certainty(0.0).unwrap()).unwrap();
        let s = solve_overlaps(&p, &SolverOptions::default()).unwrap();
        assert_eq!((s.q_u, s.q_v, s.residual), (0.0, 0.0, 0.0));
        assert!(s.converged);
    }

    #[test]
    fn supercritical_without_labels_finds_positive_overlap() {
        let p = ProblemParams::new(2.0, 1.0, EpsilonMixture::certainty(0.0).unwrap()).unwrap();
        let s = solve_overlaps(&p, &SolverOptions::default()).unwrap();
        assert!(s.q_u > 0.1, "{s:?}");
        assert!(residual(&p, s.q_u, s.q_v) < 1e-9);
    }
}
