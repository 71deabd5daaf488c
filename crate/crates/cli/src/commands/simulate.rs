use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use ussl_core::montecarlo::{classify_oracle, classify_semisupervised, classify_supervised, DatasetSpec};
use ussl_core::overlap::{solve_overlaps, ProblemParams};
use ussl_core::risk::bayes_risk;

use crate::config::{blocks_mixture, Block, Common};
use crate::error::Result;
use crate::output::Table;

pub const COLUMNS: [&str; 7] = ["rep", "err_oracle", "err_sup", "err_semi", "test_semi", "theory_risk", "delta"];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateParams {
    pub n: usize,
    pub p: usize,
    pub lambda: f64,
    pub blocks: Vec<Block>,
    pub t_max: usize,
}

impl Default for SimulateParams {
    fn default() -> Self {
        SimulateParams { n: 2000, p: 2000, lambda: 2.0, blocks: vec![Block { fraction: 0.2, kappa: 1.0 }], t_max: 100 }
    }
}

/// Errors are measured on the unlabeled samples, or on all samples when none are unlabeled.
pub fn run(p: &SimulateParams, common: &Common) -> Result<Vec<Table>> {
    let labeling = p.blocks.iter().map(|b| b.to_core()).collect();
    let spec = DatasetSpec::new(p.p, p.n, p.lambda, labeling)?;
    let c = p.n as f64 / p.p as f64;
    let population = ProblemParams::new(p.lambda, c, blocks_mixture(&p.blocks)?)?;
    let theory = bayes_risk(solve_overlaps(&population, &common.solver())?.q_u)?;

    let rows = (0..common.reps as u64)
        .into_par_iter()
        .map(|r| -> Result<[f64; 7]> {
            let ds = spec.generate(common.seed, r)?;
            let params = ProblemParams::new(p.lambda, ds.ratio(), ds.realized_mixture())?;
            let orc = classify_oracle(&ds);
            let semi = classify_semisupervised(&ds, &params, p.t_max)?;
            let err_sup = match classify_supervised(&ds) {
                Ok(s) => s.error_unlabeled.unwrap_or(s.error_all),
                Err(ussl_core::Error::Degenerate(_)) => f64::NAN,
                Err(e) => return Err(e.into()),
            };
            let err_semi = semi.error_unlabeled.unwrap_or(semi.error_all);
            Ok([
                r as f64,
                orc.error_unlabeled.unwrap_or(orc.error_all),
                err_sup,
                err_semi,
                semi.test_error.unwrap_or(f64::NAN),
                theory,
                err_semi - theory,
            ])
        })
        .collect::<Result<Vec<_>>>()?;

    let mut table = Table::new("simulate.dat", &COLUMNS);
    for row in rows {
        table.push_f64(&row);
    }
    Ok(vec![table])
}
