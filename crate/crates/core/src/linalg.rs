//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::{Cholesky, Dyn, SymmetricEigen};

use crate::{CMat, CVec, Error, Result, C64};

/// Relative tolerance below which negative eigenvalues of a nominally PSD
/// matrix are treated as round-off.
pub const PSD_TOL: f64 = 1e-9;

/// `a b^H`.
pub fn outer(a: &CVec, b: &CVec) -> CMat {
    a * b.adjoint()
}

/// `a^H m b`.
pub fn quad(a: &CVec, m: &CMat, b: &CVec) -> C64 {
    a.dotc(&(m * b))
}

/// Real part of `a^H m a`, the value of a Hermitian quadratic form.
pub fn hquad(a: &CVec, m: &CMat) -> f64 {
    quad(a, m, a).re
}

/// `(m + m^H) / 2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn trace_re(m: &CMat) -> f64 {
    m.trace().re
}

/// Real trace pairing `Re Tr(a b)`.
pub fn trace_pair(a: &CMat, b: &CMat) -> f64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

pub fn frobenius(m: &CMat) -> f64 {
    m.norm()
}

/// Cholesky factor of a Hermitian positive-definite matrix.
pub fn cholesky(m: &CMat, what: &'static str) -> Result<Cholesky<C64, Dyn>> {
    Cholesky::new(hermitian_part(m)).ok_or(Error::NotPositiveDefinite(what))
}

/// Solves `m x = b` for Hermitian positive-definite `m`.
pub fn solve_pd(m: &CMat, b: &CVec, what: &'static str) -> Result<CVec> {
    Ok(cholesky(m, what)?.solve(b))
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

pub fn eigenvalues(m: &CMat) -> Vec<f64> {
    hermitian_eigen(m).0
}

/// Checks that `m` is Hermitian PSD up to `PSD_TOL * trace` and returns the
/// eigen-clipped matrix together with a factor `f` with `f f^H` equal to it.
pub fn psd_factor(m: &CMat, what: &str) -> Result<(CMat, CMat)> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Domain(format!("{what} is not square")));
    }
    let tr = trace_re(m).abs();
    let (vals, vecs) = hermitian_eigen(m);
    let floor = -PSD_TOL * tr.max(f64::MIN_POSITIVE);
    if let Some(&lo) = vals.first() {
        if lo < floor {
            return Err(Error::Domain(format!(
                "{what} is not PSD (min eigenvalue {lo:e}, trace {tr:e})"
            )));
        }
    }
    let mut factor = vecs.clone();
    for (j, &lam) in vals.iter().enumerate() {
        let s = lam.max(0.0).sqrt();
        factor.column_mut(j).scale_mut(s);
    }
    let clipped = &factor * factor.adjoint();
    Ok((clipped, factor))
}

/// Projection of a Hermitian matrix onto the PSD cone.
pub fn project_psd(m: &CMat) -> CMat {
    let (vals, vecs) = hermitian_eigen(m);
    let mut scaled = vecs.clone();
    for (j, &lam) in vals.iter().enumerate() {
        scaled.column_mut(j).scale_mut(lam.max(0.0));
    }
    scaled * vecs.adjoint()
}

pub fn is_psd(m: &CMat) -> bool {
    let tr = trace_re(m).abs();
    eigenvalues(m)
        .first()
        .is_none_or(|&lo| lo >= -PSD_TOL * tr.max(f64::MIN_POSITIVE))
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}
