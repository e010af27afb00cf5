//! Successive convex approximation for the joint power-minimization problem.
//!
//! With the closed-form combiners substituted, the radar and uplink SINR
//! constraints read
//!
//! ```text
//! a_t0ᴴ Q a_t0 · a_r0ᴴ Ψ⁻¹ a_r0 ≥ τʳ/|β₀|²        p_k · h_kᴴ Φ_k⁻¹ h_k ≥ τ_k
//! ```
//!
//! and the downlink constraints are linear in the relaxed beams `V_l`. The
//! map `Ψ ↦ aᴴΨ⁻¹a` is convex, so its tangent at the previous iterate `Ψ₀`,
//! `2aᴴΨ₀⁻¹a − zᴴΨz` with `z = Ψ₀⁻¹a`, is a global under-estimator that is
//! affine in the design. Replacing both inverse quadratic forms by their
//! tangents gives a convex subproblem whose feasible set is inside the true
//! one and contains the previous iterate, so the objective never increases.
//!
//! After convergence each relaxed `V_l` is replaced by the rank-one
//! `v_l = V_l g_l / √(g_lᴴ V_l g_l)` and the remainder is moved into the radar
//! covariance, which keeps `Q`, the total power and every SINR unchanged.

use serde::{Deserialize, Serialize};

use crate::conic::{self, AffineFunctional, ConicProblem, ConicSolution, ConicStatus, PsdVar, Relation, ScalarVar, SolverOptions};
use crate::linalg::{self, cholesky, hermitian_part, hquad, linear_to_db, outer, project_psd};
use crate::metrics::{self, interference_matrices, Design, RelaxedDesign, SinrReport, TransmitDesign};
use crate::receivers::{self, optimal_receivers, phi_matrices, psi_matrix, ReceiveDesign};
use crate::scenario::{ChannelSet, SystemConfig};
use crate::{CMat, CVec, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScaSettings {
    pub max_iters: usize,
    /// Stop once `|f_{i-1} − f_i| / f_{i-1}` drops below this.
    pub rel_obj_tol: f64,
    /// Total power of the first initialization attempt.
    pub init_power_mw: f64,
    /// Factor applied to the initialization power after an infeasible attempt.
    pub init_growth: f64,
    pub max_init_attempts: usize,
    /// Allowed SINR shortfall of the recovered design, dB.
    pub feas_tol_db: f64,
}

impl Default for ScaSettings {
    fn default() -> Self {
        Self {
            max_iters: 50,
            rel_obj_tol: 1e-4,
            init_power_mw: 1.0,
            init_growth: 10.0,
            max_init_attempts: 8,
            feas_tol_db: 0.01,
        }
    }
}

impl ScaSettings {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if !(self.rel_obj_tol > 0.0) {
            return Err(Error::Config("rel_obj_tol must be positive".into()));
        }
        if !(self.init_growth > 1.0) {
            return Err(Error::Config("init_growth must exceed 1".into()));
        }
        if !(self.init_power_mw > 0.0) {
            return Err(Error::Config("init_power_mw must be positive".into()));
        }
        if self.max_init_attempts == 0 {
            return Err(Error::Config("max_init_attempts must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIters,
    InfeasibleInit,
    SubproblemFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverTrace {
    /// Total power (mW) after each accepted iteration.
    pub objectives: Vec<f64>,
    /// Subproblem status of every solve, initialization attempts included.
    pub statuses: Vec<ConicStatus>,
    pub termination: Termination,
    /// SINRs of the final relaxed iterate under the closed-form combiners.
    pub final_sinrs: SinrReport,
    pub iterations_used: usize,
    /// Initialization power that produced the first feasible subproblem.
    pub init_power_mw: f64,
}

impl SolverTrace {
    fn new() -> Self {
        Self {
            objectives: vec![],
            statuses: vec![],
            termination: Termination::MaxIters,
            final_sinrs: SinrReport { radar: 0.0, uplink: vec![], downlink: vec![] },
            iterations_used: 0,
            init_power_mw: f64::NAN,
        }
    }

    pub fn final_objective(&self) -> Option<f64> {
        self.objectives.last().copied()
    }

    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }
}

/// Which constraint families and variables the subproblem carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProblemVariant {
    pub radar_constraint: bool,
    /// Whether a dedicated radar covariance `V_0` is optimized (else fixed to 0).
    pub radar_covariance: bool,
}

impl Default for ProblemVariant {
    fn default() -> Self {
        Self { radar_constraint: true, radar_covariance: true }
    }
}

impl ProblemVariant {
    pub const COMM_ONLY: Self = Self { radar_constraint: false, radar_covariance: false };
}

/// First-order expansion of `Ψ ↦ aᴴΨ⁻¹a` at `Ψ₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseQuadraticCut {
    /// `Ψ₀⁻¹ a`.
    pub z: CVec,
    /// `aᴴΨ₀⁻¹a`.
    pub value: f64,
}

impl InverseQuadraticCut {
    pub fn at(psi_prev: &CMat, a: &CVec) -> Result<Self> {
        let z = cholesky(psi_prev, "expansion point")?.solve(a);
        let value = a.dotc(&z).re;
        Ok(Self { z, value })
    }

    /// `aᴴΨ₀⁻¹a − aᴴΨ₀⁻¹(Ψ − Ψ₀)Ψ₀⁻¹a`.
    pub fn evaluate(&self, psi: &CMat) -> f64 {
        2.0 * self.value - hquad(&self.z, psi)
    }
}

pub fn linearize_radar(psi_prev: &CMat, a_r0: &CVec) -> Result<InverseQuadraticCut> {
    InverseQuadraticCut::at(psi_prev, a_r0)
}

pub fn linearize_uplink(phi_k_prev: &CMat, h_k: &CVec) -> Result<InverseQuadraticCut> {
    InverseQuadraticCut::at(phi_k_prev, h_k)
}

/// Convex subproblem plus the handles of its variables.
#[derive(Debug, Clone)]
pub struct Subproblem {
    pub problem: ConicProblem,
    pub v_dl: Vec<PsdVar>,
    pub v0: Option<PsdVar>,
    pub p_ul: Vec<ScalarVar>,
    n_tx: usize,
}

impl Subproblem {
    pub fn design(&self, sol: &ConicSolution) -> RelaxedDesign {
        let n = self.n_tx;
        RelaxedDesign {
            v_dl: self.v_dl.iter().map(|v| project_psd(&sol.psd_values[v.0])).collect(),
            v0: match self.v0 {
                Some(v) => project_psd(&sol.psd_values[v.0]),
                None => CMat::zeros(n, n),
            },
            p_ul: self.p_ul.iter().map(|s| sol.scalar_values[s.0].max(0.0)).collect(),
        }
    }

    fn transmit_vars(&self) -> Vec<PsdVar> {
        self.v_dl.iter().copied().chain(self.v0).collect()
    }
}

/// Builds the convex subproblem linearized at `prev`.
pub fn build_subproblem(
    prev: &RelaxedDesign,
    ch: &ChannelSet,
    cfg: &SystemConfig,
    variant: ProblemVariant,
) -> Result<Subproblem> {
    let n = ch.n_tx;
    let th = cfg.thresholds();
    let mut problem = ConicProblem::new();
    let v_dl: Vec<PsdVar> = (0..ch.n_dl()).map(|l| problem.add_psd_var(format!("V{}", l + 1), n)).collect();
    let v0 = variant.radar_covariance.then(|| problem.add_psd_var("V0", n));
    let p_ul: Vec<ScalarVar> = (0..ch.n_ul()).map(|k| problem.add_scalar_var(format!("p{}", k + 1))).collect();
    let sub = Subproblem { problem, v_dl, v0, p_ul, n_tx: n };
    let tx = sub.transmit_vars();
    let mut problem = sub.problem.clone();

    let mut objective = AffineFunctional::new();
    for &v in &tx {
        objective = objective.psd(v, CMat::identity(n, n));
    }
    for &p in &sub.p_ul {
        objective = objective.scalar(p, 1.0);
    }
    problem.minimize(objective);

    let q_prev = prev.covariance();
    let (b, c) = interference_matrices(ch);
    let noise = ch.noise_bs;

    // tangent of the whitened quadratic form in (V, p), skipping user `skip`
    let tangent = |cut: &InverseQuadraticCut, mix: &CMat, skip: Option<usize>| {
        let mut f = AffineFunctional::constant(2.0 * cut.value - noise * cut.z.norm_squared());
        for (k, (&p, h)) in sub.p_ul.iter().zip(&ch.h_ul).enumerate() {
            if Some(k) != skip {
                f = f.scalar(p, -h.dotc(&cut.z).norm_sqr());
            }
        }
        let mz = mix.adjoint() * &cut.z;
        let coeff = -outer(&mz, &mz);
        for &v in &tx {
            f = f.psd(v, coeff.clone());
        }
        f
    };

    if variant.radar_constraint {
        let psi_prev = psi_matrix(ch, &b, &q_prev, &prev.p_ul);
        let cut = linearize_radar(&psi_prev, ch.a_r0())?;
        let x = tangent(&cut, &b, None);
        let steer = outer(ch.a_t0(), ch.a_t0());
        let y = tx.iter().fold(AffineFunctional::new(), |f, &v| f.psd(v, steer.clone()));
        problem.add_hyperbolic(x, y, th.radar / ch.target_gain());
    }

    let phis = phi_matrices(ch, &c, &q_prev, &prev.p_ul);
    for (k, phi_prev) in phis.iter().enumerate() {
        let cut = linearize_uplink(phi_prev, &ch.h_ul[k])?;
        let x = tangent(&cut, &c, Some(k));
        let y = AffineFunctional::new().scalar(sub.p_ul[k], 1.0);
        problem.add_hyperbolic(x, y, th.uplink[k]);
    }

    for (l, g) in ch.g_dl.iter().enumerate() {
        let gg = outer(g, g);
        let mut f = AffineFunctional::new();
        for (j, &v) in sub.v_dl.iter().enumerate() {
            let w = if j == l { 1.0 / th.downlink[l] } else { -1.0 };
            f = f.psd(v, gg.scale(w));
        }
        if let Some(v) = sub.v0 {
            f = f.psd(v, -gg.clone());
        }
        problem.add_linear(f, Relation::Ge, ch.noise_dl[l]);
    }

    Ok(Subproblem { problem, ..sub })
}

/// Starting point with total power `p0`: matched downlink beams, isotropic
/// radar covariance, equal uplink powers.
pub fn initial_design(ch: &ChannelSet, p0: f64, variant: ProblemVariant) -> RelaxedDesign {
    let n = ch.n_tx;
    let share = p0 / (ch.n_dl() as f64 + 1.0);
    let v_dl = ch
        .g_dl
        .iter()
        .map(|g| {
            let gn = g.unscale(g.norm());
            outer(&gn, &gn).scale(share)
        })
        .collect();
    let v0 = if variant.radar_covariance {
        CMat::identity(n, n).scale(share / n as f64)
    } else {
        CMat::zeros(n, n)
    };
    let p_ul = vec![p0 / ch.n_ul().max(1) as f64; ch.n_ul()];
    RelaxedDesign { v_dl, v0, p_ul }
}

fn solve_at(
    prev: &RelaxedDesign,
    ch: &ChannelSet,
    cfg: &SystemConfig,
    variant: ProblemVariant,
) -> Result<(ConicStatus, RelaxedDesign)> {
    let sub = build_subproblem(prev, ch, cfg, variant)?;
    let sol = conic::solve(&sub.problem, &SolverOptions::default());
    Ok((sol.status, sub.design(&sol)))
}

pub fn run_sca(ch: &ChannelSet, cfg: &SystemConfig, s: &ScaSettings) -> Result<(RelaxedDesign, SolverTrace)> {
    run_sca_with(ch, cfg, s, ProblemVariant::default())
}

/// Iterates the linearized subproblem until the relative objective change
/// falls below `s.rel_obj_tol` or `s.max_iters` subproblems have been solved.
/// A failed run is reported through `trace.termination`, not as an error.
pub fn run_sca_with(
    ch: &ChannelSet,
    cfg: &SystemConfig,
    s: &ScaSettings,
    variant: ProblemVariant,
) -> Result<(RelaxedDesign, SolverTrace)> {
    s.validate()?;
    let mut trace = SolverTrace::new();

    let mut current = None;
    let mut p0 = s.init_power_mw;
    for _ in 0..s.max_init_attempts {
        let start = initial_design(ch, p0, variant);
        let (status, next) = solve_at(&start, ch, cfg, variant)?;
        trace.statuses.push(status);
        if status == ConicStatus::Optimal {
            trace.init_power_mw = p0;
            current = Some(next);
            break;
        }
        p0 *= s.init_growth;
    }
    let Some(mut current) = current else {
        trace.termination = Termination::InfeasibleInit;
        let start = initial_design(ch, s.init_power_mw, variant);
        trace.final_sinrs = receivers::reduced_sinrs(&start, ch)?;
        return Ok((start, trace));
    };
    trace.objectives.push(current.total_power());
    trace.iterations_used = 1;

    trace.termination = Termination::MaxIters;
    while trace.iterations_used < s.max_iters {
        let (status, next) = solve_at(&current, ch, cfg, variant)?;
        trace.statuses.push(status);
        trace.iterations_used += 1;
        if status != ConicStatus::Optimal {
            trace.termination = Termination::SubproblemFailure;
            break;
        }
        let prev_obj = current.total_power();
        let obj = next.total_power();
        current = next;
        trace.objectives.push(obj);
        let rel = (prev_obj - obj).abs() / prev_obj.abs().max(f64::MIN_POSITIVE);
        if rel < s.rel_obj_tol {
            trace.termination = Termination::Converged;
            break;
        }
    }
    trace.final_sinrs = receivers::reduced_sinrs(&current, ch)?;
    Ok((current, trace))
}

/// Rank-one recovery that preserves `Q`, the total power and every SINR.
pub fn extract_rank_one(hat: &RelaxedDesign, ch: &ChannelSet) -> Result<TransmitDesign> {
    let q = hat.covariance();
    let mut v0 = q.clone();
    let mut v_dl = Vec::with_capacity(hat.v_dl.len());
    for (l, (v, g)) in hat.v_dl.iter().zip(&ch.g_dl).enumerate() {
        let vg = v * g;
        let gain = g.dotc(&vg).re;
        if !(gain > 1e-12 * linalg::trace_re(v)) {
            return Err(Error::DegenerateSolution { user: l, value: gain });
        }
        let beam = vg.unscale(gain.sqrt());
        v0 -= outer(&beam, &beam);
        v_dl.push(beam);
    }
    let v0 = hermitian_part(&v0);
    let trace = linalg::trace_re(&q).max(f64::MIN_POSITIVE);
    if let Some(&lo) = linalg::eigenvalues(&v0).first() {
        if lo < -linalg::PSD_TOL * trace {
            return Err(Error::Domain(format!("recovered radar covariance is indefinite ({lo:e})")));
        }
    }
    Ok(TransmitDesign { v_dl, v0, p_ul: hat.p_ul.clone() })
}

/// Recovered transmit design, combiners and diagnostics.
#[derive(Debug, Clone)]
pub struct JointSolution {
    pub transmit: TransmitDesign,
    pub receive: ReceiveDesign,
    pub relaxed: RelaxedDesign,
    pub trace: SolverTrace,
    /// SINRs of `transmit` received with `receive`.
    pub sinrs: SinrReport,
    /// `SINR − threshold` in dB for every constraint.
    pub slack_db: SinrReport,
}

impl JointSolution {
    pub fn total_power_mw(&self) -> f64 {
        self.transmit.total_power()
    }
}

fn slack(sinr: f64, threshold_db: f64) -> f64 {
    linear_to_db(sinr) - threshold_db
}

pub fn solve_joint(ch: &ChannelSet, cfg: &SystemConfig, s: &ScaSettings) -> Result<JointSolution> {
    solve_joint_with(ch, cfg, s, ProblemVariant::default())
}

/// Runs the SCA loop, recovers rank-one beams and the optimal combiners, then
/// re-checks every active SINR constraint against `s.feas_tol_db`.
pub fn solve_joint_with(
    ch: &ChannelSet,
    cfg: &SystemConfig,
    s: &ScaSettings,
    variant: ProblemVariant,
) -> Result<JointSolution> {
    let (relaxed, trace) = run_sca_with(ch, cfg, s, variant)?;
    match trace.termination {
        Termination::InfeasibleInit => {
            return Err(Error::InfeasibleInit { attempts: s.max_init_attempts, trace: Box::new(trace) })
        }
        Termination::SubproblemFailure => {
            let iteration = trace.iterations_used;
            return Err(Error::SubproblemFailure { iteration, trace: Box::new(trace) });
        }
        Termination::Converged | Termination::MaxIters => {}
    }
    let transmit = extract_rank_one(&relaxed, ch)?;
    let receive = optimal_receivers(&transmit, ch)?;
    let sinrs = SinrReport {
        radar: metrics::radar_sinr(&transmit, &receive.u, ch)?,
        uplink: metrics::uplink_sinr(&transmit, &receive.w_ul, ch)?,
        downlink: metrics::downlink_sinr(&transmit, ch),
    };
    let slack_db = SinrReport {
        radar: slack(sinrs.radar, cfg.radar_sinr_db),
        uplink: sinrs.uplink.iter().zip(&cfg.ul_sinr_db).map(|(&x, &t)| slack(x, t)).collect(),
        downlink: sinrs.downlink.iter().zip(&cfg.dl_sinr_db).map(|(&x, &t)| slack(x, t)).collect(),
    };
    let mut checks: Vec<(String, f64)> = slack_db.entries();
    if !variant.radar_constraint {
        checks.retain(|(name, _)| name != "radar");
    }
    if let Some((name, worst)) = checks.into_iter().min_by(|a, b| a.1.total_cmp(&b.1)) {
        if !(worst >= -s.feas_tol_db) {
            return Err(Error::ConstraintViolation { constraint: name, violation_db: -worst });
        }
    }
    Ok(JointSolution { transmit, receive, relaxed, trace, sinrs, slack_db })
}
