//! Parameter sweeps.
//!
//! Every `(grid value, seed)` cell realizes its own channels from its seed, so
//! cells are independent and may run on any worker in any order. Rows are
//! sorted by `(scheme, grid index, seed)` before they are returned.
//!
//! `sweep.csv` columns: `scheme,grid_value,seed,power_mw,power_dbm,converged,iterations,outcome`;
//! the power columns are empty for failed runs.
//!
//! `summary.csv` columns: `scheme,grid_value,n_runs,n_ok,mean_power_mw,stderr_power_mw,mean_power_dbm`,
//! computed over the successful runs of each `(scheme, grid value)`.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::config::SweepSpec;
use super::outcome_label;
use crate::baselines::{solve_scheme, BaselineResult, Scheme};
use crate::linalg::linear_to_db;
use crate::scenario::realize_channels;
use crate::{Result, Termination};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub scheme: Scheme,
    pub grid_value: f64,
    pub seed: u64,
    pub power_mw: Option<f64>,
    pub power_dbm: Option<f64>,
    /// Every SCA run of the scheme met the relative-change tolerance.
    pub converged: bool,
    /// Subproblems solved, summed over the scheme's slots.
    pub iterations: usize,
    /// `converged`, `max_iters` or the failure label.
    pub outcome: String,
}

impl SweepRow {
    fn new(scheme: Scheme, grid_value: f64, seed: u64, result: Result<BaselineResult>) -> Self {
        match result {
            Ok(r) => {
                let converged = r.traces.iter().all(|t| t.termination == Termination::Converged);
                Self {
                    scheme,
                    grid_value,
                    seed,
                    power_mw: Some(r.total_power_mw),
                    power_dbm: Some(linear_to_db(r.total_power_mw)),
                    converged,
                    iterations: r.traces.iter().map(|t| t.iterations_used).sum(),
                    outcome: if converged { "converged" } else { "max_iters" }.into(),
                }
            }
            Err(e) => Self {
                scheme,
                grid_value,
                seed,
                power_mw: None,
                power_dbm: None,
                converged: false,
                iterations: 0,
                outcome: outcome_label(&e).into(),
            },
        }
    }
}

/// Runs every `(scheme, grid value, seed)` triple once on the current rayon
/// pool.
pub fn run_sweep(spec: &SweepSpec) -> Vec<SweepRow> {
    let seeds: Vec<u64> = spec.seeds().collect();
    let cells: Vec<(usize, u64)> =
        (0..spec.grid.len()).flat_map(|g| seeds.iter().map(move |&s| (g, s))).collect();
    let mut rows: Vec<(usize, SweepRow)> = cells
        .par_iter()
        .flat_map_iter(|&(g, seed)| {
            let value = spec.grid[g];
            let cfg = spec.variable.apply(&spec.base_config, value).with_seed(seed);
            let ch = realize_channels(&cfg, seed);
            spec.schemes
                .iter()
                .map(|&scheme| {
                    let result = solve_scheme(scheme, &ch, &cfg, &spec.sca, spec.hd_convention);
                    (g, SweepRow::new(scheme, value, seed, result))
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let scheme_rank = |s: Scheme| spec.schemes.iter().position(|&x| x == s).unwrap_or(usize::MAX);
    rows.sort_by_key(|(g, r)| (scheme_rank(r.scheme), *g, r.seed));
    rows.into_iter().map(|(_, r)| r).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub scheme: Scheme,
    pub grid_value: f64,
    pub n_runs: usize,
    pub n_ok: usize,
    pub mean_power_mw: Option<f64>,
    pub stderr_power_mw: Option<f64>,
    pub mean_power_dbm: Option<f64>,
}

/// Mean and standard error of the power per `(scheme, grid value)`, in the
/// order the pairs first appear in `rows`.
pub fn summarize(rows: &[SweepRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(Scheme, f64)> = vec![];
    for r in rows {
        if !keys.iter().any(|&(s, v)| s == r.scheme && v == r.grid_value) {
            keys.push((r.scheme, r.grid_value));
        }
    }
    keys.into_iter()
        .map(|(scheme, grid_value)| {
            let cell: Vec<&SweepRow> = rows.iter().filter(|r| r.scheme == scheme && r.grid_value == grid_value).collect();
            let ok: Vec<f64> = cell.iter().filter_map(|r| r.power_mw).collect();
            let n = ok.len();
            let mean = (n > 0).then(|| ok.iter().sum::<f64>() / n as f64);
            let stderr = mean.filter(|_| n > 1).map(|m| {
                let var = ok.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
                (var / n as f64).sqrt()
            });
            SummaryRow {
                scheme,
                grid_value,
                n_runs: cell.len(),
                n_ok: n,
                mean_power_mw: mean,
                stderr_power_mw: stderr,
                mean_power_dbm: mean.map(linear_to_db),
            }
        })
        .collect()
}

pub fn write_rows<W: Write, T: Serialize>(rows: &[T], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}
