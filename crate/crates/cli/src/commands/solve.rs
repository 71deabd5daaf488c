use serde::{Deserialize, Serialize};
use ussl_core::overlap::{residual, solve_overlaps, EpsilonMixture, ProblemParams};
use ussl_core::risk::effective_eta;
use ussl_core::RiskReport;

use crate::config::{blocks_mixture, Block, Common, Grid};
use crate::error::Result;
use crate::output::{fmt_f64, Table};

pub const COLUMNS: [&str; 12] = [
    "lambda",
    "c",
    "eta_eff",
    "q_u",
    "q_v",
    "bayes_risk",
    "oracle_risk",
    "usefulness",
    "residual",
    "iterations",
    "converged",
    "branch_gap",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveParams {
    pub lambda: Grid,
    pub c: Grid,
    /// Fraction of certain labels; ignored when `blocks` is set.
    pub eta: f64,
    pub blocks: Option<Vec<Block>>,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams { lambda: Grid::new(vec![2.0]).unwrap(), c: Grid::new(vec![1.0]).unwrap(), eta: 0.2, blocks: None }
    }
}

pub fn run(p: &SolveParams, common: &Common) -> Result<Vec<Table>> {
    let mixture = match &p.blocks {
        Some(blocks) => blocks_mixture(blocks)?,
        None => EpsilonMixture::certainty(p.eta)?,
    };
    let opts = common.solver();
    let mut table = Table::new("solve.dat", &COLUMNS);
    for &lambda in p.lambda.values() {
        for &c in p.c.values() {
            let params = ProblemParams::new(lambda, c, mixture.clone())?;
            let sol = solve_overlaps(&params, &opts)?;
            let risk = RiskReport::new(lambda, &sol)?;
            let mut row: Vec<String> = [
                lambda,
                c,
                effective_eta(&mixture),
                sol.q_u,
                sol.q_v,
                risk.bayes_risk,
                risk.oracle_risk,
                risk.usefulness,
                residual(&params, sol.q_u, sol.q_v),
            ]
            .iter()
            .map(|&x| fmt_f64(x))
            .collect();
            row.push(sol.iterations.to_string());
            row.push(u8::from(sol.converged).to_string());
            row.push(fmt_f64(sol.branch_gap));
            table.push(row);
        }
    }
    Ok(vec![table])
}
