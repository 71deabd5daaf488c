use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use ussl_core::montecarlo::{classify_oracle, classify_semisupervised, classify_supervised, DatasetSpec, LabelBlock};
use ussl_core::overlap::{qu_from_qv, solve_certainty, ProblemParams};
use ussl_core::risk::{absolute_reduction, bayes_risk, oracle_relative_reduction, oracle_risk};
use ussl_core::Error;

use crate::config::{require, Common, Grid};
use crate::error::Result;
use crate::output::Table;
use crate::Sweep;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReductionParams {
    /// Dimension for both sweeps.
    pub p: usize,
    /// Sample count for the lambda sweep; the c sweep uses `round(c p)`.
    pub n: usize,
    /// Signal strength for the c sweep.
    pub lambda: f64,
    /// Fraction of certain labels.
    pub eta: f64,
    pub lambda_grid: Grid,
    pub c_grid: Grid,
    /// Fill the `algo_*` columns by simulation; `nan` otherwise.
    pub monte_carlo: bool,
    pub t_max: usize,
}

impl Default for ReductionParams {
    fn default() -> Self {
        ReductionParams {
            p: 200,
            n: 200,
            lambda: 2.0,
            eta: 0.2,
            lambda_grid: Grid::range(0.25, 4.0, 0.25).unwrap(),
            c_grid: Grid::range(0.5, 10.0, 0.5).unwrap(),
            monte_carlo: true,
            t_max: 100,
        }
    }
}

/// A reduction that is undefined because the denominator vanishes is reported as `nan`.
fn or_nan(r: ussl_core::Result<f64>) -> Result<f64> {
    match r {
        Ok(v) => Ok(v),
        Err(Error::Degenerate(_)) => Ok(f64::NAN),
        Err(e) => Err(e.into()),
    }
}

/// `(absolute, oracle-relative)` from the three risks.
fn reductions(e_sup: f64, e_semi: f64, e_oracle: f64) -> Result<(f64, f64)> {
    Ok((or_nan(absolute_reduction(e_sup, e_semi))?, or_nan(oracle_relative_reduction(e_sup, e_semi, e_oracle))?))
}

/// Theory: the supervised risk uses the labeled overlap alone, `q_v = η`.
pub fn theory_bounds(lambda: f64, c: f64, eta: f64, common: &Common) -> Result<(f64, f64)> {
    let e_sup = bayes_risk(qu_from_qv(lambda, c, eta))?;
    let e_semi = bayes_risk(solve_certainty(lambda, c, eta, &common.solver())?.q_u)?;
    reductions(e_sup, e_semi, oracle_risk(lambda)?)
}

/// Simulation: mean fresh-sample errors of the three classifiers over replicates.
fn simulated(p: usize, n: usize, lambda: f64, eta: f64, t_max: usize, common: &Common) -> Result<(f64, f64)> {
    let spec = DatasetSpec::new(p, n, lambda, vec![LabelBlock::new(eta, 1.0)])?;
    let errs = (0..common.reps as u64)
        .into_par_iter()
        .map(|r| -> Result<[f64; 3]> {
            let ds = spec.generate(common.seed, r)?;
            let params = ProblemParams::new(lambda, ds.ratio(), ds.realized_mixture())?;
            let sup = classify_supervised(&ds)?.test_error.unwrap_or(0.5);
            let semi = classify_semisupervised(&ds, &params, t_max)?.test_error.unwrap_or(0.5);
            let orc = classify_oracle(&ds).test_error.unwrap_or(0.5);
            Ok([sup, semi, orc])
        })
        .collect::<Result<Vec<_>>>()?;
    let k = errs.len() as f64;
    let mean = |j: usize| errs.iter().map(|e| e[j]).sum::<f64>() / k;
    reductions(mean(0), mean(1), mean(2))
}

pub fn run(p: &ReductionParams, sweep: Sweep, common: &Common) -> Result<Vec<Table>> {
    require(p.p > 0, || "p must be positive".into())?;
    let (name, column, grid) = match sweep {
        Sweep::Lambda => ("reduction_lambda.dat", "lambda", &p.lambda_grid),
        Sweep::C => ("reduction_alpha.dat", "alpha", &p.c_grid),
    };
    let points: Vec<(f64, f64, usize)> = grid
        .values()
        .iter()
        .map(|&x| match sweep {
            Sweep::Lambda => Ok((x, p.n as f64 / p.p as f64, p.n)),
            Sweep::C => {
                let n = (x * p.p as f64).round() as usize;
                require(n > 0, || format!("c = {x} gives no samples at p = {}", p.p))?;
                Ok((p.lambda, x, n))
            }
        })
        .collect::<Result<_>>()?;

    let mut table = Table::new(name, &[column, "algo_abs", "algo_oracle", "bound_abs", "bound_oracle"]);
    for (&x, &(lambda, c, n)) in grid.values().iter().zip(&points) {
        let (bound_abs, bound_oracle) = theory_bounds(lambda, c, p.eta, common)?;
        let (algo_abs, algo_oracle) =
            if p.monte_carlo { simulated(p.p, n, lambda, p.eta, p.t_max, common)? } else { (f64::NAN, f64::NAN) };
        table.push_f64(&[x, algo_abs, algo_oracle, bound_abs, bound_oracle]);
    }
    Ok(vec![table])
}
