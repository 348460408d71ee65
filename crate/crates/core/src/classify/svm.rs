//! L2-regularized hinge-loss linear SVM trained by dual coordinate descent.
//!
//! The bias is learned as the weight of an extra constant-1 feature, so it
//! is regularized together with the other weights.

use ndarray::ArrayView2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::label::{require_both_classes, Label};

#[derive(Debug, Clone, PartialEq)]
pub struct SvmParams {
    pub c: f64,
    /// Multipliers on `c` for each class.
    pub human_weight: f64,
    pub spoof_weight: f64,
    pub max_epochs: usize,
    /// Training stops once the duality gap drops below `gap_tol · N`.
    pub gap_tol: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            human_weight: 1.0,
            spoof_weight: 1.0,
            max_epochs: 1000,
            gap_tol: 1e-6,
        }
    }
}

impl SvmParams {
    fn bound(&self, y: Label) -> f64 {
        self.c
            * match y {
                Label::Human => self.human_weight,
                Label::Spoof => self.spoof_weight,
            }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub c_param: f64,
}

impl LinearSvmModel {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }
}

/// `w·x + b`; positive means human.
pub fn svm_score(m: &LinearSvmModel, x: &[f64]) -> Result<f64> {
    if x.len() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            actual: x.len(),
        });
    }
    Ok(dot(&m.weights, x) + m.bias)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Primal objective `½(‖w‖² + b²) + Σ C_i max(0, 1 − y_i(w·x_i + b))`.
pub fn svm_objective(
    m: &LinearSvmModel,
    x: ArrayView2<'_, f64>,
    y: &[Label],
    params: &SvmParams,
) -> f64 {
    let reg = 0.5 * (dot(&m.weights, &m.weights) + m.bias * m.bias);
    let loss: f64 = x
        .rows()
        .into_iter()
        .zip(y)
        .map(|(row, &label)| {
            let margin =
                label.sign() * (row.dot(&ndarray::ArrayView1::from(&m.weights[..])) + m.bias);
            params.bound(label) * (1.0 - margin).max(0.0)
        })
        .sum();
    reg + loss
}

pub fn svm_train(
    x: ArrayView2<'_, f64>,
    y: &[Label],
    params: &SvmParams,
    seed: u64,
) -> Result<LinearSvmModel> {
    let (n, d) = x.dim();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: y.len(),
        });
    }
    if n < 2 {
        return Err(Error::InvalidArgument(
            "SVM needs at least two samples".into(),
        ));
    }
    require_both_classes(y)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("SVM training features"));
    }
    if params.c.is_nan() || params.c <= 0.0 {
        return Err(Error::InvalidArgument("SVM c must be positive".into()));
    }

    // Rows augmented with the constant bias feature.
    let rows: Vec<Vec<f64>> = x
        .rows()
        .into_iter()
        .map(|r| r.iter().copied().chain(std::iter::once(1.0)).collect())
        .collect();
    let q_diag: Vec<f64> = rows.iter().map(|r| dot(r, r)).collect();
    let signs: Vec<f64> = y.iter().map(|l| l.sign()).collect();
    let bounds: Vec<f64> = y.iter().map(|&l| params.bound(l)).collect();

    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; d + 1];
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for epoch in 0..params.max_epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let g = signs[i] * dot(&w, &rows[i]) - 1.0;
            let pg = if alpha[i] == 0.0 {
                g.min(0.0)
            } else if alpha[i] == bounds[i] {
                g.max(0.0)
            } else {
                g
            };
            if pg != 0.0 {
                let old = alpha[i];
                alpha[i] = (old - g / q_diag[i]).clamp(0.0, bounds[i]);
                let step = (alpha[i] - old) * signs[i];
                for (wv, xv) in w.iter_mut().zip(&rows[i]) {
                    *wv += step * xv;
                }
            }
        }

        let w_sq = dot(&w, &w);
        let hinge: f64 = rows
            .iter()
            .zip(&signs)
            .zip(&bounds)
            .map(|((r, s), u)| u * (1.0 - s * dot(&w, r)).max(0.0))
            .sum();
        let gap = w_sq + hinge - alpha.iter().sum::<f64>();
        if gap < params.gap_tol * n as f64 {
            log::debug!("svm converged after {} epochs (gap {gap:.3e})", epoch + 1);
            break;
        }
    }

    let bias = w.pop().unwrap();
    Ok(LinearSvmModel {
        weights: w,
        bias,
        c_param: params.c,
    })
}
