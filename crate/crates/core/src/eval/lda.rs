use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LdaProjection {
    /// `D` × `k`, orthonormal columns P₁..P_k.
    pub basis: DMatrix<f64>,
    /// `N` × `k`, rows projected after subtracting the global mean.
    pub projected: Array2<f64>,
    pub classes: Vec<String>,
    pub requested_k: usize,
}

impl LdaProjection {
    pub fn k(&self) -> usize {
        self.basis.ncols()
    }

    /// `utt_id class p1 .. pk` rows with a header line.
    pub fn to_tsv(&self, utt_ids: &[String]) -> Result<String> {
        if utt_ids.len() != self.projected.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.projected.nrows(),
                actual: utt_ids.len(),
            });
        }
        let mut out = String::from("utt_id\tclass");
        for j in 0..self.k() {
            write!(out, "\tp{}", j + 1).unwrap();
        }
        out.push('\n');
        for ((id, class), row) in utt_ids.iter().zip(&self.classes).zip(self.projected.rows()) {
            write!(out, "{id}\t{class}").unwrap();
            for v in row {
                write!(out, "\t{v:.6}").unwrap();
            }
            out.push('\n');
        }
        Ok(out)
    }

    pub fn write_tsv(&self, path: impl AsRef<Path>, utt_ids: &[String]) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_tsv(utt_ids)?).map_err(|e| Error::io(path, e))
    }
}

/// Fisher LDA on the rows of `x`. `k` is clamped to `#classes − 1` and `D`.
pub fn lda_fit_project(
    x: ArrayView2<'_, f64>,
    classes: &[String],
    k: usize,
) -> Result<LdaProjection> {
    let (n, d) = x.dim();
    if classes.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: classes.len(),
        });
    }
    if k == 0 {
        return Err(Error::InvalidArgument("LDA needs k >= 1".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("LDA input"));
    }
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, c) in classes.iter().enumerate() {
        groups.entry(c.as_str()).or_default().push(i);
    }
    if groups.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "LDA needs at least 2 classes, got {}",
            groups.len()
        )));
    }
    let k_eff = k.min(groups.len() - 1).min(d);
    if k_eff < k {
        log::warn!(
            "LDA k reduced from {k} to {k_eff} ({} classes, dim {d})",
            groups.len()
        );
    }

    let row = |i: usize| DVector::from_iterator(d, x.row(i).iter().copied());
    let mut mean = DVector::<f64>::zeros(d);
    for i in 0..n {
        mean += row(i);
    }
    mean /= n as f64;

    let mut s_w = DMatrix::<f64>::zeros(d, d);
    let mut s_b = DMatrix::<f64>::zeros(d, d);
    for members in groups.values() {
        let mut m_c = DVector::<f64>::zeros(d);
        for &i in members {
            m_c += row(i);
        }
        m_c /= members.len() as f64;
        for &i in members {
            let c = row(i) - &m_c;
            s_w.ger(1.0, &c, &c, 1.0);
        }
        let diff = &m_c - &mean;
        s_b.ger(members.len() as f64, &diff, &diff, 1.0);
    }

    let trace = s_w.trace();
    if trace.is_nan() || trace <= 0.0 {
        return Err(Error::DegenerateData("within-class scatter is zero".into()));
    }
    let ridge = 1e-6 * trace / d as f64;
    for i in 0..d {
        s_w[(i, i)] += ridge;
    }
    let chol = s_w
        .cholesky()
        .ok_or(Error::NotPositiveDefinite("within-class scatter"))?;
    let l_inv = chol
        .l()
        .try_inverse()
        .ok_or(Error::NotPositiveDefinite("within-class scatter"))?;
    let mut m = &l_inv * &s_b * l_inv.transpose();
    m = (&m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let lt_inv = l_inv.transpose();
    let mut basis = DMatrix::<f64>::zeros(d, k_eff);
    for (j, &src) in order.iter().take(k_eff).enumerate() {
        let mut v = &lt_inv * eig.eigenvectors.column(src);
        // Gram-Schmidt against the already accepted directions, twice.
        for _ in 0..2 {
            for p in 0..j {
                let prev = basis.column(p).into_owned();
                let proj = prev.dot(&v);
                v.axpy(-proj, &prev, 1.0);
            }
        }
        let norm = v.norm();
        if norm.is_nan() || norm <= 0.0 {
            return Err(Error::DegenerateData("LDA direction collapsed".into()));
        }
        v /= norm;
        let scale = v.amax();
        if let Some(first) = v.iter().find(|e| e.abs() > 1e-12 * scale) {
            if *first < 0.0 {
                v.neg_mut();
            }
        }
        basis.set_column(j, &v);
    }

    let mut projected = Array2::<f64>::zeros((n, k_eff));
    for i in 0..n {
        let c = row(i) - &mean;
        for j in 0..k_eff {
            projected[[i, j]] = basis.column(j).dot(&c);
        }
    }

    Ok(LdaProjection {
        basis,
        projected,
        classes: classes.to_vec(),
        requested_k: k,
    })
}
