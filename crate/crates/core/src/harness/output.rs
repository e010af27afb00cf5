//! Artifacts written by the command-line tool.
//!
//! | file              | columns / content                                          |
//! |-------------------|------------------------------------------------------------|
//! | `trace.csv`       | `iteration,objective_mw,objective_dbm,status`              |
//! | `sinr.csv`        | `constraint,sinr_db,threshold_db,slack_db`                 |
//! | `design.json`     | recovered beams, radar covariance, powers and combiners    |
//! | `beampattern.csv` | `angle_deg,gain_db`, preceded by `#` marker comments       |
//!
//! Complex numbers in `design.json` are `[re, im]` pairs and matrices are
//! lists of rows.

use std::io::Write;

use serde::Serialize;

use crate::linalg::linear_to_db;
use crate::sca::{JointSolution, SolverTrace};
use crate::scenario::SystemConfig;
use crate::{CMat, CVec, Error, Result};

#[derive(Serialize)]
struct TraceRow {
    iteration: usize,
    objective_mw: f64,
    objective_dbm: f64,
    status: &'static str,
}

fn status_name(s: crate::conic::ConicStatus) -> &'static str {
    match s {
        crate::conic::ConicStatus::Optimal => "optimal",
        crate::conic::ConicStatus::Infeasible => "infeasible",
        crate::conic::ConicStatus::NumericalFailure => "numerical_failure",
    }
}

/// One row per accepted SCA iterate. The status is that of the subproblem
/// which produced the iterate; rejected initialization attempts are skipped.
pub fn write_trace_csv<W: Write>(trace: &SolverTrace, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let skipped = trace.statuses.len() - trace.iterations_used;
    let statuses = &trace.statuses[skipped..];
    for (i, (&obj, &status)) in trace.objectives.iter().zip(statuses).enumerate() {
        out.serialize(TraceRow {
            iteration: i + 1,
            objective_mw: obj,
            objective_dbm: linear_to_db(obj),
            status: status_name(status),
        })?;
    }
    out.flush()?;
    Ok(())
}

/// `(name, threshold_db)` for every constraint, in [`SinrReport::entries`]
/// order.
///
/// [`SinrReport::entries`]: crate::SinrReport::entries
fn thresholds_db(cfg: &SystemConfig) -> Vec<f64> {
    std::iter::once(cfg.radar_sinr_db).chain(cfg.ul_sinr_db.iter().copied()).chain(cfg.dl_sinr_db.iter().copied()).collect()
}

#[derive(Serialize)]
struct SinrRow<'a> {
    constraint: &'a str,
    sinr_db: f64,
    threshold_db: f64,
    slack_db: f64,
}

pub fn write_sinr_csv<W: Write>(sol: &JointSolution, cfg: &SystemConfig, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let thresholds = thresholds_db(cfg);
    for (((name, sinr), (_, slack)), threshold) in sol.sinrs.entries().iter().zip(sol.slack_db.entries()).zip(thresholds) {
        out.serialize(SinrRow { constraint: name, sinr_db: linear_to_db(*sinr), threshold_db: threshold, slack_db: slack })?;
    }
    out.flush()?;
    Ok(())
}

fn vec_pairs(v: &CVec) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn mat_rows(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    m.row_iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect()
}

#[derive(Serialize)]
struct DesignFile {
    total_power_mw: f64,
    total_power_dbm: f64,
    v_dl: Vec<Vec<[f64; 2]>>,
    v0: Vec<Vec<[f64; 2]>>,
    p_ul_mw: Vec<f64>,
    u: Vec<[f64; 2]>,
    w_ul: Vec<Vec<[f64; 2]>>,
}

pub fn write_design_json<W: Write>(sol: &JointSolution, mut w: W) -> Result<()> {
    let p = sol.total_power_mw();
    let file = DesignFile {
        total_power_mw: p,
        total_power_dbm: linear_to_db(p),
        v_dl: sol.transmit.v_dl.iter().map(vec_pairs).collect(),
        v0: mat_rows(&sol.transmit.v0),
        p_ul_mw: sol.transmit.p_ul.clone(),
        u: vec_pairs(&sol.receive.u),
        w_ul: sol.receive.w_ul.iter().map(vec_pairs).collect(),
    };
    serde_json::to_writer_pretty(&mut w, &file).map_err(std::io::Error::from)?;
    writeln!(w)?;
    Ok(())
}

/// One-line result: outcome, total power and the dB slack of every
/// constraint.
pub fn summary_line(sol: &JointSolution) -> String {
    let mut line = format!(
        "{} total_power_dbm={:.4} iterations={}",
        if sol.trace.converged() { "converged" } else { "not_converged" },
        linear_to_db(sol.total_power_mw()),
        sol.trace.iterations_used
    );
    for (name, slack) in sol.slack_db.entries() {
        line.push_str(&format!(" {name}={slack:+.4}"));
    }
    line
}

/// Angles from −90° to 90° inclusive in steps of `step` degrees.
pub fn angle_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 180.0) || (180.0 / step - (180.0 / step).round()).abs() > 1e-9 {
        return Err(Error::Config(format!("grid_step: {step} must be positive and divide 180")));
    }
    let n = (180.0 / step).round() as usize;
    Ok((0..=n).map(|i| -90.0 + i as f64 * step).collect())
}

#[derive(Serialize)]
struct BeamRow {
    angle_deg: f64,
    gain_db: f64,
}

pub fn write_beampattern_csv<W: Write>(cfg: &SystemConfig, angles: &[f64], gains: &[f64], mut w: W) -> Result<()> {
    writeln!(w, "# target_deg={}", cfg.target_angle_deg)?;
    let interferers: Vec<String> = cfg.interferer_angles_deg.iter().map(|a| a.to_string()).collect();
    writeln!(w, "# interferer_deg={}", interferers.join(";"))?;
    let mut out = csv::Writer::from_writer(w);
    for (&angle_deg, &g) in angles.iter().zip(gains) {
        out.serialize(BeamRow { angle_deg, gain_db: linear_to_db(g) })?;
    }
    out.flush()?;
    Ok(())
}
