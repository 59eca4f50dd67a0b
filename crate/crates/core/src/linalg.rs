//! Thin wrappers around dense complex decompositions: a thin SVD with a
//! guaranteed descending singular-value order, and a condition-guarded
//! Hermitian positive-definite inverse.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::{Cholesky, DMatrix, DVector, SVD};
use num_complex::Complex64;

use crate::error::CoreError;

/// Iteration budget for the SVD; generous for the matrix sizes in play and
/// only reached on pathological input.
const SVD_MAX_ITERATIONS: usize = 100_000;

/// Thin SVD `A = U diag(s) V^H` with singular values sorted descending
/// (ties keep their original order). Returns `(U, s, V^H)` with `U` of size
/// N×r, `s` of length r, and `V^H` of size r×M for r = min(N, M).
pub fn thin_svd_sorted(
    a: &DMatrix<Complex64>,
) -> Result<(DMatrix<Complex64>, DVector<f64>, DMatrix<Complex64>), CoreError> {
    let svd = SVD::try_new(a.clone(), true, true, f64::EPSILON, SVD_MAX_ITERATIONS)
        .ok_or_else(|| CoreError::NumericalFailure("SVD did not converge".into()))?;
    let u = svd.u.expect("requested U");
    let v_h = svd.v_t.expect("requested V^H");
    let s = svd.singular_values;

    let r = s.len();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&i, &j| {
        s[j].partial_cmp(&s[i])
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });

    let u_sorted = DMatrix::from_fn(u.nrows(), r, |i, j| u[(i, order[j])]);
    let s_sorted = DVector::from_fn(r, |j, _| s[order[j]]);
    let v_h_sorted = DMatrix::from_fn(r, v_h.ncols(), |j, i| v_h[(order[j], i)]);
    Ok((u_sorted, s_sorted, v_h_sorted))
}

/// Spectral condition number of a Hermitian matrix (ratio of extreme
/// singular values); infinite when the matrix is singular.
pub fn condition_number(a: &DMatrix<Complex64>) -> Result<f64, CoreError> {
    let svd = SVD::try_new(a.clone(), false, false, f64::EPSILON, SVD_MAX_ITERATIONS)
        .ok_or_else(|| CoreError::NumericalFailure("SVD did not converge".into()))?;
    let s = svd.singular_values;
    let max = s.iter().cloned().fold(0.0f64, f64::max);
    let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 || !min.is_finite() {
        return Ok(f64::INFINITY);
    }
    Ok(max / min)
}

/// Inverse of a Hermitian positive-definite matrix via Cholesky, rejected
/// when the condition number exceeds `max_condition`.
pub fn hermitian_inverse_guarded(
    a: &DMatrix<Complex64>,
    max_condition: f64,
) -> Result<DMatrix<Complex64>, CoreError> {
    let cond = condition_number(a)?;
    if !cond.is_finite() || cond > max_condition {
        return Err(CoreError::RankDeficient(format!(
            "condition number {cond:.3e} exceeds {max_condition:.1e}"
        )));
    }
    let chol = Cholesky::new(a.clone()).ok_or_else(|| {
        CoreError::RankDeficient("matrix is not positive definite".into())
    })?;
    Ok(chol.inverse())
}
