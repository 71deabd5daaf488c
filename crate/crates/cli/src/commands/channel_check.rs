use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use ussl_core::kernel::{big_f, Epsilon};
use ussl_core::montecarlo::channel_overlap_mc_replicate;

use crate::config::{require, Common, Grid};
use crate::error::Result;
use crate::output::Table;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelCheckParams {
    pub eps: Grid,
    pub q: Grid,
    pub trials: u64,
}

impl Default for ChannelCheckParams {
    fn default() -> Self {
        ChannelCheckParams {
            eps: Grid::range(0.0, 1.0, 0.25).unwrap(),
            q: Grid::new(vec![0.1, 0.5, 1.0, 2.0, 5.0]).unwrap(),
            trials: 1_000_000,
        }
    }
}

/// Grid point `k` (row-major, eps outer) draws from replicate stream `k`.
pub fn run(p: &ChannelCheckParams, common: &Common) -> Result<Vec<Table>> {
    require(p.trials > 0, || "trials must be positive".into())?;
    let points: Vec<(f64, f64)> =
        p.eps.values().iter().flat_map(|&e| p.q.values().iter().map(move |&q| (e, q))).collect();
    let rows = points
        .par_iter()
        .enumerate()
        .map(|(k, &(e, q))| -> Result<[f64; 6]> {
            let eps = Epsilon::new(e)?;
            let est = channel_overlap_mc_replicate(eps, q, p.trials, common.seed, k as u64)?;
            let theory = big_f(eps, q);
            Ok([e, q, est.mean, est.std_error, theory, est.z_score(theory)])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new("channel_check.dat", &["eps", "q", "mc", "std_error", "theory", "z"]);
    for row in rows {
        table.push_f64(&row);
    }
    Ok(vec![table])
}
