use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::ArrayView2;

use crate::error::{Error, Result};

/// Principal-component projection fit on a training pool.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `d` × `k`, orthonormal columns in order of decreasing eigenvalue.
    pub basis: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
}

impl PcaModel {
    pub fn from_parts(mean: Vec<f64>, basis: DMatrix<f64>, eigenvalues: Vec<f64>) -> Result<Self> {
        if basis.nrows() != mean.len() {
            return Err(Error::DimensionMismatch {
                expected: mean.len(),
                actual: basis.nrows(),
            });
        }
        if basis.ncols() != eigenvalues.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.ncols(),
                actual: eigenvalues.len(),
            });
        }
        Ok(Self {
            mean,
            basis,
            eigenvalues,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn output_dim(&self) -> usize {
        self.basis.ncols()
    }

    /// `basisᵀ (x - mean)`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                actual: x.len(),
            });
        }
        Ok(self
            .basis
            .column_iter()
            .map(|col| {
                col.iter()
                    .zip(x.iter().zip(&self.mean))
                    .map(|(b, (v, m))| b * (v - m))
                    .sum()
            })
            .collect())
    }
}

/// Fits a `k`-component PCA on the rows of `data` (covariance divisor N−1).
pub fn pca_fit(data: ArrayView2<'_, f64>, k: usize) -> Result<PcaModel> {
    let (n, d) = data.dim();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "PCA needs at least 2 rows, got {n}"
        )));
    }
    if k == 0 || k > d {
        return Err(Error::InvalidArgument(format!(
            "cannot keep {k} components of {d}-dimensional data"
        )));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("PCA training data"));
    }

    let mut mean = vec![0.0; d];
    for row in data.rows() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }

    let mut cov = DMatrix::<f64>::zeros(d, d);
    let mut centered = vec![0.0; d];
    for row in data.rows() {
        for ((c, v), m) in centered.iter_mut().zip(row).zip(&mean) {
            *c = v - m;
        }
        for i in 0..d {
            let ci = centered[i];
            for j in i..d {
                cov[(i, j)] += ci * centered[j];
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            let v = cov[(i, j)] / (n - 1) as f64;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }

    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut basis = DMatrix::<f64>::zeros(d, k);
    let mut eigenvalues = Vec::with_capacity(k);
    for (out, &src) in order.iter().take(k).enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        let scale = col.amax();
        if let Some(first) = col.iter().find(|v| v.abs() > 1e-12 * scale) {
            if *first < 0.0 {
                col.neg_mut();
            }
        }
        basis.set_column(out, &col);
        eigenvalues.push(eig.eigenvalues[src].max(0.0));
    }

    Ok(PcaModel {
        mean,
        basis,
        eigenvalues,
    })
}
