//! Ridge-regularised least squares over small dense systems.
//!
//! Both the per-arm and per-group estimators are refit every exploit round, so
//! the sufficient statistics (`XᵀX`, `XᵀY`) are kept as running sums and the
//! raw observations are retained alongside them for auditing.

use alloc::vec::Vec;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{invalid_input, Error, Result};

/// Observation contexts, one row per observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl DesignMatrix {
    pub fn new(dim: usize) -> Self {
        Self { dim, data: Vec::new() }
    }

    pub fn from_rows<R: AsRef<[f64]>>(dim: usize, rows: &[R]) -> Result<Self> {
        let mut m = Self::new(dim);
        for row in rows {
            m.push(row.as_ref())?;
        }
        Ok(m)
    }

    pub fn push(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.dim {
            return Err(invalid_input!("row has dimension {}, expected {}", row.len(), self.dim));
        }
        self.data.extend_from_slice(row);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.data.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim.max(1))
    }
}

/// Observed rewards aligned with the rows of a [`DesignMatrix`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RewardVector(pub Vec<f64>);

impl RewardVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for RewardVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Running sufficient statistics of a linear least-squares problem.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    dim: usize,
    gram: Vec<f64>,
    moment: Vec<f64>,
    count: usize,
}

impl LeastSquares {
    pub fn new(dim: usize) -> Self {
        Self { dim, gram: alloc::vec![0.0; dim * dim], moment: alloc::vec![0.0; dim], count: 0 }
    }

    pub fn from_observations(x: &DesignMatrix, y: &RewardVector) -> Result<Self> {
        if x.len() != y.len() {
            return Err(invalid_input!("design matrix has {} rows but {} rewards", x.len(), y.len()));
        }
        let mut ls = Self::new(x.dim());
        for (row, &r) in x.rows().zip(y.as_slice()) {
            ls.push(row, r)?;
        }
        Ok(ls)
    }

    pub fn push(&mut self, x: &[f64], y: f64) -> Result<()> {
        if x.len() != self.dim {
            return Err(invalid_input!("context has dimension {}, expected {}", x.len(), self.dim));
        }
        let d = self.dim;
        for i in 0..d {
            let xi = x[i];
            self.moment[i] += xi * y;
            for j in 0..d {
                self.gram[i * d + j] += xi * x[j];
            }
        }
        self.count += 1;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Factorizes `XᵀX + ridge·I`.
    pub fn solver(&self, ridge: f64) -> Result<RidgeSolver> {
        if !(ridge >= 0.0) || !ridge.is_finite() {
            return Err(invalid_input!("ridge must be a finite nonnegative number, got {ridge}"));
        }
        let d = self.dim;
        let mut a = DMatrix::from_row_slice(d, d, &self.gram);
        for i in 0..d {
            a[(i, i)] += ridge;
        }
        let scale = (0..d).map(|i| a[(i, i)]).fold(0.0_f64, f64::max);
        let chol = Cholesky::new(a).ok_or_else(|| {
            Error::Singular(alloc::format!("XᵀX + {ridge}·I is not positive definite"))
        })?;
        // Cholesky succeeds on matrices that are singular up to rounding; treat
        // a vanishing pivot as singular.
        let l = chol.l_dirty();
        let tol = f64::EPSILON * scale * d as f64;
        if (0..d).any(|i| l[(i, i)] * l[(i, i)] <= tol) {
            return Err(Error::Singular(alloc::format!(
                "XᵀX + {ridge}·I is numerically singular"
            )));
        }
        Ok(RidgeSolver { chol, moment: DVector::from_column_slice(&self.moment) })
    }

    pub fn fit(&self, ridge: f64) -> Result<Vec<f64>> {
        Ok(self.solver(ridge)?.coefficients())
    }
}

/// A factorized ridge system, reused for the coefficient solve and any number of
/// quadratic forms at query contexts.
pub struct RidgeSolver {
    chol: Cholesky<f64, Dyn>,
    moment: DVector<f64>,
}

impl RidgeSolver {
    pub fn coefficients(&self) -> Vec<f64> {
        self.chol.solve(&self.moment).as_slice().to_vec()
    }

    /// `xᵀ(XᵀX + ridge·I)⁻¹x`.
    pub fn quadratic_form(&self, x: &[f64]) -> Result<f64> {
        let d = self.moment.len();
        if x.len() != d {
            return Err(invalid_input!("context has dimension {}, expected {d}", x.len()));
        }
        if x.iter().all(|&v| v == 0.0) {
            return Ok(0.0);
        }
        let mut v = DVector::from_column_slice(x);
        let l = self.chol.l_dirty();
        // forward substitution against the lower factor
        for i in 0..d {
            let mut s = v[i];
            for j in 0..i {
                s -= l[(i, j)] * v[j];
            }
            v[i] = s / l[(i, i)];
        }
        Ok(v.norm_squared())
    }
}

/// Minimizer of `‖Xβ − Y‖² + ridge·‖β‖²`.
pub fn ols_fit(x: &DesignMatrix, y: &RewardVector, ridge: f64) -> Result<Vec<f64>> {
    LeastSquares::from_observations(x, y)?.fit(ridge)
}

/// `σ²·xᵀ(XᵀX + ridge·I)⁻¹x`, the variance of the fitted mean at `x`.
pub fn predictive_variance(x_design: &DesignMatrix, x: &[f64], sigma2: f64, ridge: f64) -> Result<f64> {
    if x.len() != x_design.dim() {
        return Err(invalid_input!("context has dimension {}, expected {}", x.len(), x_design.dim()));
    }
    if !(sigma2 > 0.0) {
        return Err(invalid_input!("sigma2 must be positive, got {sigma2}"));
    }
    if x.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let mut ls = LeastSquares::new(x_design.dim());
    for row in x_design.rows() {
        ls.push(row, 0.0)?;
    }
    Ok(sigma2 * ls.solver(ridge)?.quadratic_form(x)?)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
