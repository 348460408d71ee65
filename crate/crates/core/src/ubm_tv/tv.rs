//! Total-variability factor analysis on UBM mean supervectors.
//!
//! The supervector of component `c` occupies rows `c·d .. (c+1)·d` of T.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::gmm::DiagonalGmm;
use super::ivector::IVector;
use super::stats::BwStats;
use crate::error::{Error, Result};
use crate::linalg::add_scaled;

/// Utterances per E-step batch; fixed for a thread-independent reduction order.
const UTT_CHUNK: usize = 128;
const INIT_RANGE: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct TvModel {
    pub t_matrix: DMatrix<f64>,
    pub ubm: DiagonalGmm,
    pub rank: usize,
    /// `T_cᵀ Σ_c⁻¹ T_c` per component.
    precision: Vec<DMatrix<f64>>,
    /// `Σ⁻¹ T`
    t_weighted: DMatrix<f64>,
}

impl PartialEq for TvModel {
    fn eq(&self, other: &Self) -> bool {
        self.t_matrix == other.t_matrix && self.ubm == other.ubm
    }
}

/// Latent-factor posterior of one utterance.
struct Posterior {
    chol: Cholesky<f64, Dyn>,
    b: DVector<f64>,
    mean: DVector<f64>,
}

impl Posterior {
    /// `½ bᵀ L⁻¹ b − ½ ln|L|`, the utterance's T-dependent log-likelihood term.
    fn objective(&self) -> f64 {
        let log_det: f64 = self.chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum();
        0.5 * self.b.dot(&self.mean) - log_det
    }
}

impl TvModel {
    pub fn new(t_matrix: DMatrix<f64>, ubm: DiagonalGmm) -> Result<Self> {
        let (c, d) = (ubm.n_components(), ubm.dim());
        if t_matrix.nrows() != c * d {
            return Err(Error::DimensionMismatch {
                expected: c * d,
                actual: t_matrix.nrows(),
            });
        }
        if t_matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("total variability matrix"));
        }
        let rank = t_matrix.ncols();
        let mut t_weighted = t_matrix.clone();
        for k in 0..c {
            for j in 0..d {
                let inv = 1.0 / ubm.variances()[[k, j]];
                t_weighted.row_mut(k * d + j).scale_mut(inv);
            }
        }
        let precision = (0..c)
            .into_par_iter()
            .map(|k| {
                let tc = t_matrix.rows(k * d, d);
                let wc = t_weighted.rows(k * d, d);
                tc.transpose() * wc
            })
            .collect();
        Ok(Self {
            t_matrix,
            ubm,
            rank,
            precision,
            t_weighted,
        })
    }

    fn check_stats(&self, stats: &BwStats) -> Result<()> {
        if stats.n_components() != self.ubm.n_components() {
            return Err(Error::DimensionMismatch {
                expected: self.ubm.n_components(),
                actual: stats.n_components(),
            });
        }
        if stats.dim() != self.ubm.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ubm.dim(),
                actual: stats.dim(),
            });
        }
        if !stats.is_finite() {
            return Err(Error::NonFinite("Baum-Welch statistics"));
        }
        Ok(())
    }

    /// Centered first-order supervector `f_c − n_c m_c`.
    fn centered_supervector(&self, stats: &BwStats) -> DVector<f64> {
        let d = self.ubm.dim();
        let means = self.ubm.means();
        DVector::from_fn(stats.n.len() * d, |i, _| {
            let (k, j) = (i / d, i % d);
            stats.f[[k, j]] - stats.n[k] * means[[k, j]]
        })
    }

    fn posterior(&self, stats: &BwStats) -> Result<Posterior> {
        let mut l = DMatrix::<f64>::identity(self.rank, self.rank);
        for (p, &n) in self.precision.iter().zip(&stats.n) {
            if n != 0.0 {
                add_scaled(&mut l, n, p);
            }
        }
        let b = self.t_weighted.tr_mul(&self.centered_supervector(stats));
        let chol = Cholesky::new(l).ok_or(Error::NotPositiveDefinite("i-vector precision"))?;
        let mean = chol.solve(&b);
        Ok(Posterior { chol, b, mean })
    }
}

/// Posterior mean of the latent factor given an utterance's statistics.
pub fn extract_ivector(tv: &TvModel, stats: &BwStats) -> Result<IVector> {
    tv.check_stats(stats)?;
    let post = tv.posterior(stats)?;
    Ok(IVector::new(post.mean.iter().copied().collect()))
}

#[derive(Debug, Clone)]
pub struct TvTraining {
    pub model: TvModel,
    /// Log-likelihood of the statistics (up to a T-independent constant)
    /// before each EM step, followed by the value for the final T.
    pub objective: Vec<f64>,
}

struct UttPosterior {
    mean: DVector<f64>,
    second_moment: DMatrix<f64>,
    objective: f64,
}

fn e_step_batch(model: &TvModel, batch: &[BwStats]) -> Result<Vec<UttPosterior>> {
    batch
        .par_iter()
        .map(|s| {
            let post = model.posterior(s)?;
            let cov = post.chol.inverse();
            let second_moment = cov + &post.mean * post.mean.transpose();
            Ok(UttPosterior {
                objective: post.objective(),
                mean: post.mean,
                second_moment,
            })
        })
        .collect()
}

fn total_objective(model: &TvModel, stats: &[BwStats]) -> Result<f64> {
    let parts: Vec<f64> = stats
        .par_iter()
        .map(|s| model.posterior(s).map(|p| p.objective()))
        .collect::<Result<_>>()?;
    Ok(parts.iter().sum())
}

/// Trains T by EM on per-utterance Baum-Welch statistics.
pub fn tv_train(
    stats: &[BwStats],
    ubm: &DiagonalGmm,
    rank: usize,
    iters: usize,
    seed: u64,
) -> Result<TvTraining> {
    let (c, d) = (ubm.n_components(), ubm.dim());
    if rank == 0 || rank > c * d {
        return Err(Error::InvalidArgument(format!(
            "rank {rank} must be between 1 and the supervector dimension {}",
            c * d
        )));
    }
    if stats.len() < rank {
        return Err(Error::InsufficientUtterances {
            have: stats.len(),
            rank,
        });
    }
    let mut model = TvModel::new(DMatrix::zeros(c * d, rank), ubm.clone())?;
    for s in stats {
        model.check_stats(s)?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t_init = DMatrix::from_fn(c * d, rank, |_, _| {
        rng.random_range(-INIT_RANGE..INIT_RANGE)
    });
    model = TvModel::new(t_init, ubm.clone())?;

    let mut objective = Vec::with_capacity(iters + 1);
    for _ in 0..iters {
        let mut acc_a = vec![DMatrix::<f64>::zeros(rank, rank); c];
        let mut acc_c = vec![DMatrix::<f64>::zeros(d, rank); c];
        let mut counts = vec![0.0; c];
        let mut obj = 0.0;
        for batch in stats.chunks(UTT_CHUNK) {
            let posts = e_step_batch(&model, batch)?;
            obj += posts.iter().map(|p| p.objective).sum::<f64>();
            let means = ubm.means();
            acc_a
                .par_iter_mut()
                .zip(acc_c.par_iter_mut())
                .enumerate()
                .for_each(|(k, (a, cc))| {
                    for (s, p) in batch.iter().zip(&posts) {
                        let n = s.n[k];
                        if n == 0.0 {
                            continue;
                        }
                        add_scaled(a, n, &p.second_moment);
                        let centered = DVector::from_fn(d, |j, _| s.f[[k, j]] - n * means[[k, j]]);
                        cc.ger(1.0, &centered, &p.mean, 1.0);
                    }
                });
            for s in batch {
                for (t, n) in counts.iter_mut().zip(&s.n) {
                    *t += n;
                }
            }
        }
        objective.push(obj);

        let mut t_new = model.t_matrix.clone();
        for k in 0..c {
            if counts[k] == 0.0 {
                continue;
            }
            let chol = Cholesky::new(acc_a[k].clone())
                .ok_or(Error::SingularAccumulator { component: k })?;
            let block = chol.solve(&acc_c[k].transpose()).transpose();
            if block.iter().any(|v| !v.is_finite()) {
                return Err(Error::SingularAccumulator { component: k });
            }
            t_new.rows_mut(k * d, d).copy_from(&block);
        }
        model = TvModel::new(t_new, ubm.clone())?;
    }
    objective.push(total_objective(&model, stats)?);
    Ok(TvTraining { model, objective })
}
