use serde::{Deserialize, Serialize};
use ussl_core::risk::{bayes_risk, usefulness};

use crate::config::require;
use crate::error::Result;
use crate::output::Table;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UsefulnessParams {
    /// `q_u` runs over zero and `points` log-spaced values in `[q_min, q_max]`.
    pub q_min: f64,
    pub q_max: f64,
    pub points: usize,
}

impl Default for UsefulnessParams {
    fn default() -> Self {
        UsefulnessParams { q_min: 1e-3, q_max: 25.0, points: 200 }
    }
}

pub fn run(p: &UsefulnessParams) -> Result<Vec<Table>> {
    require(p.q_min > 0.0 && p.q_max > p.q_min && p.q_max.is_finite(), || {
        format!("need 0 < q_min < q_max, got {} and {}", p.q_min, p.q_max)
    })?;
    require(p.points >= 2, || "points must be at least 2".into())?;
    let (lo, hi) = (p.q_min.ln(), p.q_max.ln());
    let step = (hi - lo) / (p.points - 1) as f64;
    let mut qs = vec![0.0];
    qs.extend((0..p.points).map(|i| if i + 1 == p.points { p.q_max } else { (lo + i as f64 * step).exp() }));

    // abscissa is the Bayes risk, so walk q_u downwards
    let mut table = Table::new("usefulness.dat", &["eps", "y"]);
    for &q in qs.iter().rev() {
        table.push_f64(&[bayes_risk(q)?, usefulness(q)?]);
    }
    Ok(vec![table])
}
