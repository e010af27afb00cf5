//! Convex subproblem interface: minimize a real affine objective over complex
//! Hermitian PSD matrix variables and nonnegative scalars, subject to affine
//! (in)equalities and hyperbolic constraints `x·y ≥ c` with `x, y ≥ 0`.
//!
//! Problems are lowered onto the Clarabel interior-point solver:
//!
//! * A Hermitian `H` (n×n) becomes a real symmetric variable `X` (2n×2n)
//!   constrained to the PSD cone. Any PSD `X` maps back to the PSD Hermitian
//!   `H = ½[(X₁₁ + X₂₂) + j(X₂₁ − X₁₂)]`, and `Re Tr(C H) = ½ Tr(Ĉ X)` where
//!   `Ĉ = [Re C, −Im C; Im C, Re C]`, so no block-structure equalities are
//!   needed.
//! * `x·y ≥ c` becomes the second-order cone `‖(x − y, 2√c)‖ ≤ x + y`.
//! * Every constraint row is divided by its largest coefficient magnitude
//!   before solving, and the objective by its own; reported values are in the
//!   original units.

use std::fmt::Write as _;
use std::io::Write;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

use crate::linalg::{eigenvalues, trace_pair, trace_re};
use crate::{CMat, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PsdVar(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScalarVar(pub usize);

/// `Σ Re Tr(C_v H_v) + Σ a_s x_s + constant`, coefficients `C_v` Hermitian.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AffineFunctional {
    pub psd_terms: Vec<(PsdVar, CMat)>,
    pub scalar_terms: Vec<(ScalarVar, f64)>,
    pub constant: f64,
}

impl AffineFunctional {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self { constant: c, ..Self::default() }
    }

    pub fn psd(mut self, var: PsdVar, coeff: CMat) -> Self {
        self.psd_terms.push((var, coeff));
        self
    }

    pub fn scalar(mut self, var: ScalarVar, coeff: f64) -> Self {
        self.scalar_terms.push((var, coeff));
        self
    }

    pub fn plus_constant(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }

    pub fn evaluate(&self, psd: &[CMat], scalars: &[f64]) -> f64 {
        let mut acc = self.constant;
        for (v, c) in &self.psd_terms {
            acc += trace_pair(c, &psd[v.0]);
        }
        for (s, a) in &self.scalar_terms {
            acc += a * scalars[s.0];
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub f: AffineFunctional,
    pub relation: Relation,
    pub bound: f64,
}

/// `x·y ≥ c`, `x ≥ 0`, `y ≥ 0`, with `c ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperbolicConstraint {
    pub x: AffineFunctional,
    pub y: AffineFunctional,
    pub c: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConicProblem {
    pub psd_vars: Vec<(String, usize)>,
    /// Nonnegative scalar variables.
    pub scalar_vars: Vec<String>,
    pub objective: AffineFunctional,
    pub linear: Vec<LinearConstraint>,
    pub hyperbolic: Vec<HyperbolicConstraint>,
}

impl ConicProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_psd_var(&mut self, name: impl Into<String>, dim: usize) -> PsdVar {
        self.psd_vars.push((name.into(), dim));
        PsdVar(self.psd_vars.len() - 1)
    }

    pub fn add_scalar_var(&mut self, name: impl Into<String>) -> ScalarVar {
        self.scalar_vars.push(name.into());
        ScalarVar(self.scalar_vars.len() - 1)
    }

    pub fn minimize(&mut self, f: AffineFunctional) {
        self.objective = f;
    }

    pub fn add_linear(&mut self, f: AffineFunctional, relation: Relation, bound: f64) {
        self.linear.push(LinearConstraint { f, relation, bound });
    }

    pub fn add_hyperbolic(&mut self, x: AffineFunctional, y: AffineFunctional, c: f64) {
        assert!(c >= 0.0, "hyperbolic constant must be nonnegative");
        self.hyperbolic.push(HyperbolicConstraint { x, y, c });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConicStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicSolution {
    pub status: ConicStatus,
    pub psd_values: Vec<CMat>,
    pub scalar_values: Vec<f64>,
    pub objective_value: f64,
    /// Worst constraint violation in row-normalized units.
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: u32,
    pub verbose: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { gap_tol: 1e-8, feas_tol: 1e-8, max_iter: 200, verbose: false }
    }
}

/// Residual above which an `AlmostSolved` exit is not accepted as optimal.
pub const ACCEPT_RESIDUAL: f64 = 1e-7;

// ---------------------------------------------------------------------------
// complex <-> real embedding

/// `[Re H, −Im H; Im H, Re H]`.
pub fn embed_hermitian(h: &CMat) -> nalgebra::DMatrix<f64> {
    let n = h.nrows();
    let mut x = nalgebra::DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            x[(i, j)] = z.re;
            x[(i + n, j + n)] = z.re;
            x[(i, j + n)] = -z.im;
            x[(i + n, j)] = z.im;
        }
    }
    x
}

/// Hermitian matrix represented by a real symmetric `2n×2n` matrix.
pub fn extract_hermitian(x: &nalgebra::DMatrix<f64>) -> CMat {
    let n = x.nrows() / 2;
    CMat::from_fn(n, n, |i, j| {
        let re = 0.5 * (x[(i, j)] + x[(i + n, j + n)]);
        let im = 0.5 * (x[(i + n, j)] - x[(i, j + n)]);
        C64::new(re, im)
    })
}

fn svec_len(m: usize) -> usize {
    m * (m + 1) / 2
}

/// Coefficients `k` with `Re Tr(C H) = kᵀ svec(X)` for the embedded variable.
fn svec_coefficients(c: &CMat) -> Vec<f64> {
    let e = embed_hermitian(c);
    let m = e.nrows();
    let mut out = Vec::with_capacity(svec_len(m));
    for j in 0..m {
        for i in 0..=j {
            let v = if i == j {
                0.5 * e[(i, i)]
            } else {
                0.5 * (e[(i, j)] + e[(j, i)]) * std::f64::consts::FRAC_1_SQRT_2
            };
            out.push(v);
        }
    }
    out
}

fn svec_to_matrix(v: &[f64], m: usize) -> nalgebra::DMatrix<f64> {
    let mut x = nalgebra::DMatrix::zeros(m, m);
    let mut idx = 0;
    for j in 0..m {
        for i in 0..=j {
            if i == j {
                x[(i, i)] = v[idx];
            } else {
                let s = v[idx] * std::f64::consts::FRAC_1_SQRT_2;
                x[(i, j)] = s;
                x[(j, i)] = s;
            }
            idx += 1;
        }
    }
    x
}

// ---------------------------------------------------------------------------
// lowering

struct Layout {
    psd_offsets: Vec<usize>,
    scalar_offset: usize,
    n: usize,
}

impl Layout {
    fn new(p: &ConicProblem) -> Self {
        let mut offsets = Vec::with_capacity(p.psd_vars.len());
        let mut at = 0;
        for (_, dim) in &p.psd_vars {
            offsets.push(at);
            at += svec_len(2 * dim);
        }
        Self { psd_offsets: offsets, scalar_offset: at, n: at + p.scalar_vars.len() }
    }
}

/// Sparse coefficient row plus constant.
struct Row {
    coeffs: Vec<(usize, f64)>,
    constant: f64,
}

impl Row {
    fn lower(f: &AffineFunctional, layout: &Layout) -> Self {
        let mut coeffs = Vec::new();
        for (v, c) in &f.psd_terms {
            let off = layout.psd_offsets[v.0];
            for (i, k) in svec_coefficients(c).into_iter().enumerate() {
                if k != 0.0 {
                    coeffs.push((off + i, k));
                }
            }
        }
        for (s, a) in &f.scalar_terms {
            if *a != 0.0 {
                coeffs.push((layout.scalar_offset + s.0, *a));
            }
        }
        coeffs.sort_by_key(|&(i, _)| i);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
        for (i, k) in coeffs {
            match merged.last_mut() {
                Some((j, acc)) if *j == i => *acc += k,
                _ => merged.push((i, k)),
            }
        }
        Self { coeffs: merged, constant: f.constant }
    }

    fn scale(&self) -> f64 {
        let m = self
            .coeffs
            .iter()
            .map(|(_, k)| k.abs())
            .fold(self.constant.abs(), f64::max);
        if m > 0.0 && m.is_finite() {
            m
        } else {
            1.0
        }
    }
}

struct Lowered {
    layout: Layout,
    q: Vec<f64>,
    triplets: (Vec<usize>, Vec<usize>, Vec<f64>),
    b: Vec<f64>,
    cones: Vec<SupportedConeT<f64>>,
    /// Row scale of each linear constraint.
    linear_scales: Vec<f64>,
    /// `(x scale, y scale)` of each hyperbolic constraint.
    hyper_scales: Vec<(f64, f64)>,
}

impl Lowered {
    fn push(&mut self, row: usize, col: usize, v: f64) {
        self.triplets.0.push(row);
        self.triplets.1.push(col);
        self.triplets.2.push(v);
    }

    fn build(p: &ConicProblem) -> Self {
        let layout = Layout::new(p);
        let obj = Row::lower(&p.objective, &layout);
        let obj_scale = obj.coeffs.iter().map(|(_, k)| k.abs()).fold(0.0, f64::max);
        let obj_scale = if obj_scale > 0.0 { obj_scale } else { 1.0 };
        let mut q = vec![0.0; layout.n];
        for &(i, k) in &obj.coeffs {
            q[i] = k / obj_scale;
        }
        let mut me = Self {
            layout,
            q,
            triplets: (vec![], vec![], vec![]),
            b: vec![],
            cones: vec![],
            linear_scales: vec![],
            hyper_scales: vec![],
        };

        // variable cones
        for (v, (_, dim)) in p.psd_vars.iter().enumerate() {
            let off = me.layout.psd_offsets[v];
            let len = svec_len(2 * dim);
            let row0 = me.b.len();
            for i in 0..len {
                me.push(row0 + i, off + i, -1.0);
                me.b.push(0.0);
            }
            me.cones.push(SupportedConeT::PSDTriangleConeT(2 * dim));
        }
        if !p.scalar_vars.is_empty() {
            let row0 = me.b.len();
            for s in 0..p.scalar_vars.len() {
                me.push(row0 + s, me.layout.scalar_offset + s, -1.0);
                me.b.push(0.0);
            }
            me.cones.push(SupportedConeT::NonnegativeConeT(p.scalar_vars.len()));
        }

        // affine constraints; inequality rows first, then equalities
        me.linear_scales = vec![1.0; p.linear.len()];
        for eq_pass in [false, true] {
            let mut count = 0;
            for (ci, con) in p.linear.iter().enumerate() {
                if (con.relation == Relation::Eq) != eq_pass {
                    continue;
                }
                let mut row = Row::lower(&con.f, &me.layout);
                row.constant -= con.bound;
                let s = row.scale();
                me.linear_scales[ci] = s;
                // slack = sign * (k·z + constant) / s
                let sign = if con.relation == Relation::Ge { 1.0 } else { -1.0 };
                let r = me.b.len();
                for &(i, k) in &row.coeffs {
                    me.push(r, i, -sign * k / s);
                }
                me.b.push(sign * row.constant / s);
                count += 1;
            }
            if count > 0 {
                me.cones.push(if eq_pass {
                    SupportedConeT::ZeroConeT(count)
                } else {
                    SupportedConeT::NonnegativeConeT(count)
                });
            }
        }

        for h in &p.hyperbolic {
            let x = Row::lower(&h.x, &me.layout);
            let y = Row::lower(&h.y, &me.layout);
            let (sx, sy) = (x.scale(), y.scale());
            me.hyper_scales.push((sx, sy));
            let r = me.b.len();
            for &(i, k) in &x.coeffs {
                me.push(r, i, -k / sx);
                me.push(r + 1, i, -k / sx);
            }
            for &(i, k) in &y.coeffs {
                me.push(r, i, -k / sy);
                me.push(r + 1, i, k / sy);
            }
            let (kx, ky) = (x.constant / sx, y.constant / sy);
            me.b.push(kx + ky);
            me.b.push(kx - ky);
            me.b.push(2.0 * (h.c / (sx * sy)).sqrt());
            me.cones.push(SupportedConeT::SecondOrderConeT(3));
        }
        me
    }

    fn matrix(&self) -> CscMatrix<f64> {
        let (i, j, v) = self.triplets.clone();
        CscMatrix::new_from_triplets(self.b.len(), self.layout.n, i, j, v)
    }
}

fn residual(p: &ConicProblem, low: &Lowered, psd: &[CMat], scalars: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for s in scalars {
        worst = worst.max(-s);
    }
    for h in psd {
        let lo = eigenvalues(h).first().copied().unwrap_or(0.0);
        worst = worst.max(-lo / trace_re(h).abs().max(1.0));
    }
    for (con, &s) in p.linear.iter().zip(&low.linear_scales) {
        let g = (con.f.evaluate(psd, scalars) - con.bound) / s;
        let v = match con.relation {
            Relation::Ge => -g,
            Relation::Le => g,
            Relation::Eq => g.abs(),
        };
        worst = worst.max(v);
    }
    for (h, &(sx, sy)) in p.hyperbolic.iter().zip(&low.hyper_scales) {
        let x = h.x.evaluate(psd, scalars) / sx;
        let y = h.y.evaluate(psd, scalars) / sy;
        let c = h.c / (sx * sy);
        worst = worst.max(-x).max(-y).max(c - x * y);
    }
    worst
}

/// Solves `p`. Never panics on solver trouble; failures surface in `status`.
pub fn solve(p: &ConicProblem, opts: &SolverOptions) -> ConicSolution {
    let low = Lowered::build(p);
    let a = low.matrix();
    let pmat = CscMatrix::zeros((low.layout.n, low.layout.n));
    let settings = DefaultSettings::<f64> {
        verbose: opts.verbose,
        tol_gap_abs: opts.gap_tol,
        tol_gap_rel: opts.gap_tol,
        tol_feas: opts.feas_tol,
        max_iter: opts.max_iter,
        max_threads: 1,
        ..DefaultSettings::default()
    };

    let failed = |status| ConicSolution {
        status,
        psd_values: p.psd_vars.iter().map(|(_, d)| CMat::zeros(*d, *d)).collect(),
        scalar_values: vec![0.0; p.scalar_vars.len()],
        objective_value: f64::NAN,
        max_residual: f64::INFINITY,
    };

    let mut solver = match DefaultSolver::new(&pmat, &low.q, &a, &low.b, &low.cones, settings) {
        Ok(s) => s,
        Err(_) => return failed(ConicStatus::NumericalFailure),
    };
    solver.solve();
    let sol = &solver.solution;

    let psd_values: Vec<CMat> = p
        .psd_vars
        .iter()
        .enumerate()
        .map(|(v, (_, dim))| {
            let off = low.layout.psd_offsets[v];
            let m = 2 * dim;
            let x = svec_to_matrix(&sol.x[off..off + svec_len(m)], m);
            extract_hermitian(&x)
        })
        .collect();
    let scalar_values = sol.x[low.layout.scalar_offset..].to_vec();
    let max_residual = residual(p, &low, &psd_values, &scalar_values);
    let objective_value = p.objective.evaluate(&psd_values, &scalar_values);

    let status = match sol.status {
        SolverStatus::Solved => ConicStatus::Optimal,
        SolverStatus::AlmostSolved if max_residual <= ACCEPT_RESIDUAL => ConicStatus::Optimal,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => ConicStatus::Infeasible,
        _ => ConicStatus::NumericalFailure,
    };
    ConicSolution { status, psd_values, scalar_values, objective_value, max_residual }
}

/// Writes the lowered real-valued problem as text for external cross-checks.
///
/// ```text
/// # fdisac conic dump v1
/// vars <n> rows <m>
/// cone <first_row> <kind> <dim>      kind ∈ zero | nonneg | soc | psd_triangle
/// <var> <coefficient> obj            objective entries (row-normalized)
/// <var> <coefficient> <row>          constraint matrix A in  A z + s = b, s ∈ K
/// rhs <row> <value>                  nonzero entries of b
/// ```
///
/// PSD cones use the column-major upper-triangle vectorization with
/// off-diagonal entries scaled by √2.
pub fn write_debug_dump<W: Write>(p: &ConicProblem, mut w: W) -> Result<()> {
    let low = Lowered::build(p);
    let mut out = String::new();
    let _ = writeln!(out, "# fdisac conic dump v1");
    let _ = writeln!(out, "vars {} rows {}", low.layout.n, low.b.len());
    let mut row = 0;
    for cone in &low.cones {
        let (kind, dim, rows) = match cone {
            SupportedConeT::ZeroConeT(d) => ("zero", *d, *d),
            SupportedConeT::NonnegativeConeT(d) => ("nonneg", *d, *d),
            SupportedConeT::SecondOrderConeT(d) => ("soc", *d, *d),
            SupportedConeT::PSDTriangleConeT(d) => ("psd_triangle", *d, svec_len(*d)),
            _ => ("other", 0, 0),
        };
        let _ = writeln!(out, "cone {row} {kind} {dim}");
        row += rows;
    }
    for (i, &k) in low.q.iter().enumerate() {
        if k != 0.0 {
            let _ = writeln!(out, "{i} {k:.17e} obj");
        }
    }
    let a = low.matrix();
    for col in 0..a.n {
        for idx in a.colptr[col]..a.colptr[col + 1] {
            let _ = writeln!(out, "{col} {:.17e} {}", a.nzval[idx], a.rowval[idx]);
        }
    }
    for (r, &v) in low.b.iter().enumerate() {
        if v != 0.0 {
            let _ = writeln!(out, "rhs {r} {v:.17e}");
        }
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}
