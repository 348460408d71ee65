use std::ops::AddAssign;

use ndarray::{Array2, ArrayView2};

use super::gmm::DiagonalGmm;
use crate::error::{Error, Result};

/// Zeroth- and first-order Baum-Welch statistics of one utterance.
///
/// First-order sums are left uncentered so that statistics of
/// concatenated utterances are the sums of the parts.
#[derive(Debug, Clone, PartialEq)]
pub struct BwStats {
    pub n: Vec<f64>,
    /// C × d
    pub f: Array2<f64>,
}

impl BwStats {
    pub fn zeros(components: usize, dim: usize) -> Self {
        Self {
            n: vec![0.0; components],
            f: Array2::zeros((components, dim)),
        }
    }

    pub fn n_components(&self) -> usize {
        self.n.len()
    }

    pub fn dim(&self) -> usize {
        self.f.ncols()
    }

    pub fn total_count(&self) -> f64 {
        self.n.iter().sum()
    }

    pub fn is_finite(&self) -> bool {
        self.n.iter().chain(self.f.iter()).all(|v| v.is_finite())
    }
}

impl AddAssign<&BwStats> for BwStats {
    fn add_assign(&mut self, rhs: &BwStats) {
        for (a, b) in self.n.iter_mut().zip(&rhs.n) {
            *a += b;
        }
        self.f += &rhs.f;
    }
}

pub fn collect_bw_stats(g: &DiagonalGmm, frames: ArrayView2<'_, f64>) -> Result<BwStats> {
    if frames.ncols() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            actual: frames.ncols(),
        });
    }
    let frames = frames.as_standard_layout();
    let mut stats = BwStats::zeros(g.n_components(), g.dim());
    let mut post = vec![0.0; g.n_components()];
    for row in frames.rows() {
        let x = row.as_slice().unwrap();
        g.posteriors_into(x, &mut post);
        for (c, &p) in post.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            stats.n[c] += p;
            for (fv, &xv) in stats.f.row_mut(c).iter_mut().zip(x) {
                *fv += p * xv;
            }
        }
    }
    Ok(stats)
}
