use serde::{Deserialize, Serialize};
use ussl_core::kernel::{approx_relative_error, Epsilon};

use crate::config::{require, Grid};
use crate::error::Result;
use crate::output::Table;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApproxErrorParams {
    pub eps: Grid,
    pub q: Grid,
}

impl Default for ApproxErrorParams {
    fn default() -> Self {
        ApproxErrorParams { eps: Grid::range(0.0, 1.0, 0.01).unwrap(), q: Grid::range(0.1, 10.0, 0.1).unwrap() }
    }
}

pub fn run(p: &ApproxErrorParams) -> Result<Vec<Table>> {
    require(p.q.values()[0] > 0.0, || "q grid must be positive".into())?;
    let mut table = Table::new("approx_error.dat", &["eps", "q", "rel_error"]);
    for &e in p.eps.values() {
        let eps = Epsilon::new(e)?;
        for &q in p.q.values() {
            table.push_f64(&[e, q, approx_relative_error(eps, q)]);
        }
    }
    Ok(vec![table])
}
