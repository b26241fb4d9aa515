use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct LeastSquaresFit {
    /// `n_terms × m` weights.
    pub weights: DMatrix<f64>,
    /// Frobenius norm of `F·W − T`.
    pub residual: f64,
    /// 2-norm condition number of the column-scaled feature matrix.
    pub condition: f64,
}

/// Solves `min ‖F·W − T‖_F` by Householder QR of the column-scaled features.
pub fn fit_least_squares(features: &DMatrix<f64>, targets: &DMatrix<f64>) -> Result<LeastSquaresFit> {
    let (rows, cols) = features.shape();
    if targets.nrows() != rows {
        return Err(Error::DimensionMismatch {
            expected: rows,
            got: targets.nrows(),
        });
    }
    if rows < cols {
        return Err(Error::invalid(
            "least squares problem",
            format!("{rows} samples for {cols} unknowns"),
        ));
    }
    if features.iter().any(|v| !v.is_finite()) || targets.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("least squares problem", "non-finite entries"));
    }

    let scales: Vec<f64> = features.column_iter().map(|c| c.norm()).collect();
    if scales.contains(&0.0) {
        return Err(Error::RankDeficient { condition: f64::INFINITY });
    }
    let mut scaled = features.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col /= scales[j];
    }

    let qr = scaled.qr();
    let r = qr.r();
    let sv = r.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition.is_nan() || condition > MAX_CONDITION {
        return Err(Error::RankDeficient { condition });
    }

    let mut qt = targets.clone();
    qr.q_tr_mul(&mut qt);
    let rhs = qt.rows(0, cols).into_owned();
    let mut weights = r
        .solve_upper_triangular(&rhs)
        .ok_or(Error::RankDeficient { condition })?;
    for (j, mut row) in weights.row_iter_mut().enumerate() {
        row /= scales[j];
    }
    let residual = (features * &weights - targets).norm();
    Ok(LeastSquaresFit {
        weights,
        residual,
        condition,
    })
}
