use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use ussl_core::montecarlo::LabeledSearch;
use ussl_core::risk::labeled_needed;
use ussl_core::Error;

use crate::config::{require, Common, Grid};
use crate::error::Result;
use crate::output::Table;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabeledNeededParams {
    pub n: usize,
    pub p: usize,
    pub lambda: f64,
    /// One column pair per value.
    pub etas: Vec<f64>,
    /// Points per theoretical curve, from the smallest feasible confidence to 1.
    pub th_points: usize,
    /// Confidence levels searched by simulation.
    pub kappa: Grid,
    pub empirical: bool,
    pub t_max: usize,
}

impl Default for LabeledNeededParams {
    fn default() -> Self {
        LabeledNeededParams {
            n: 1000,
            p: 200,
            lambda: 0.25,
            etas: vec![1.0 / 50.0, 1.0 / 20.0, 1.0 / 10.0, 1.0 / 5.0, 1.0 / 2.0],
            th_points: 100,
            kappa: Grid::range(0.55, 1.0, 0.05).unwrap(),
            empirical: true,
            t_max: 100,
        }
    }
}

fn pair_columns(a: &str, b: &str, k: usize) -> Vec<String> {
    (1..=k).flat_map(|j| [format!("{a}{j}"), format!("{b}{j}")]).collect()
}

/// The curve starts where `(2κ - 1)² = η`, i.e. at `n_ℓ = n`.
pub fn theory_curve(eta: f64, n: usize, points: usize) -> Result<Vec<(f64, f64)>> {
    let k0 = 0.5 * (1.0 + eta.sqrt());
    let step = (1.0 - k0) / (points - 1) as f64;
    (0..points)
        .map(|i| {
            let kappa = if i + 1 == points { 1.0 } else { k0 + i as f64 * step };
            match labeled_needed(eta, kappa, n as u64) {
                Ok(v) => Ok((kappa, v)),
                // the first point can round just below the boundary
                Err(Error::Infeasible(_)) if i == 0 => Ok((kappa, n as f64)),
                Err(e) => Err(e.into()),
            }
        })
        .collect()
}

pub fn run(p: &LabeledNeededParams, common: &Common) -> Result<Vec<Table>> {
    require(!p.etas.is_empty(), || "etas is empty".into())?;
    require(p.th_points >= 2, || "th_points must be at least 2".into())?;
    for &eta in &p.etas {
        labeled_needed(eta, 1.0, p.n as u64)?;
    }

    let curves = p.etas.iter().map(|&eta| theory_curve(eta, p.n, p.th_points)).collect::<Result<Vec<_>>>()?;
    let mut th = Table::with_columns("epsilon_conf_th.dat", pair_columns("x", "y", p.etas.len()));
    for i in 0..p.th_points {
        th.push_f64(&curves.iter().flat_map(|c| [c[i].0, c[i].1]).collect::<Vec<_>>());
    }
    let mut tables = vec![th];

    if p.empirical {
        for &k in p.kappa.values() {
            require((0.5..=1.0).contains(&k) && k > 0.5, || format!("kappa {k} outside (0.5, 1]"))?;
        }
        let tasks: Vec<(f64, f64)> =
            p.kappa.values().iter().flat_map(|&k| p.etas.iter().map(move |&eta| (k, eta))).collect();
        let found = tasks
            .par_iter()
            .map(|&(kappa, eta)| -> Result<f64> {
                if (2.0 * kappa - 1.0).powi(2) < eta {
                    return Ok(f64::NAN);
                }
                let search = LabeledSearch {
                    p: p.p,
                    n: p.n,
                    lambda: p.lambda,
                    eta,
                    kappa,
                    seed: common.seed,
                    reps: common.reps,
                    t_max: p.t_max,
                };
                match search.run() {
                    Ok(r) => Ok(r.n_labeled as f64),
                    Err(Error::Infeasible(_)) => Ok(f64::NAN),
                    Err(e) => Err(e.into()),
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut emp = Table::with_columns("epsilon_conf_emp.dat", pair_columns("conf", "nl", p.etas.len()));
        for (row, &kappa) in found.chunks(p.etas.len()).zip(p.kappa.values()) {
            emp.push_f64(&row.iter().flat_map(|&nl| [kappa, nl]).collect::<Vec<_>>());
        }
        tables.push(emp);
    }
    Ok(tables)
}
