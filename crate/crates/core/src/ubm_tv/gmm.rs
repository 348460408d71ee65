use std::f64::consts::PI;

use ndarray::{s, Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Frames per accumulation chunk. Fixed so that reductions happen in the
/// same order regardless of the thread count.
pub(crate) const CHUNK: usize = 1024;
const VARIANCE_FLOOR_FACTOR: f64 = 1e-3;
const MIN_VARIANCE: f64 = 1e-12;
/// Upper bound on the frames scanned by the k-means++ seeding.
const SEEDING_POOL: usize = 50_000;

/// Gaussian mixture with diagonal covariances.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalGmm {
    weights: Vec<f64>,
    means: Array2<f64>,
    variances: Array2<f64>,
    inv_variances: Array2<f64>,
    /// `ln w_c - ½ Σ_j ln(2π σ²_cj)`
    log_consts: Vec<f64>,
}

impl DiagonalGmm {
    pub fn new(weights: Vec<f64>, means: Array2<f64>, variances: Array2<f64>) -> Result<Self> {
        let c = weights.len();
        if c == 0 {
            return Err(Error::InvalidArgument(
                "GMM needs at least one component".into(),
            ));
        }
        if means.nrows() != c || variances.dim() != means.dim() {
            return Err(Error::DimensionMismatch {
                expected: c,
                actual: means.nrows(),
            });
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| w.is_nan() || *w < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "GMM weights must be nonnegative and sum to 1 (sum {total})"
            )));
        }
        if variances.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::InvalidArgument(
                "GMM variances must be positive".into(),
            ));
        }
        if means.iter().any(|m| !m.is_finite()) {
            return Err(Error::NonFinite("GMM means"));
        }
        let inv_variances = variances.mapv(|v| 1.0 / v);
        let log_consts = variances
            .rows()
            .into_iter()
            .zip(&weights)
            .map(|(var, &w)| w.ln() - 0.5 * var.iter().map(|v| (2.0 * PI * v).ln()).sum::<f64>())
            .collect();
        Ok(Self {
            weights,
            means,
            variances,
            inv_variances,
            log_consts,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &Array2<f64> {
        &self.means
    }

    pub fn variances(&self) -> &Array2<f64> {
        &self.variances
    }

    pub fn n_components(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.means.ncols()
    }

    /// Writes `ln(w_c N(x; μ_c, Σ_c))` into `out` and returns the frame's
    /// log-likelihood; `out` is then overwritten with the posteriors.
    pub(crate) fn posteriors_into(&self, x: &[f64], out: &mut [f64]) -> f64 {
        for (c, o) in out.iter_mut().enumerate() {
            let mean = self.means.row(c);
            let inv = self.inv_variances.row(c);
            let mut q = 0.0;
            for ((&xv, &m), &iv) in x.iter().zip(mean.iter()).zip(inv.iter()) {
                let d = xv - m;
                q += d * d * iv;
            }
            *o = self.log_consts[c] - 0.5 * q;
        }
        let max = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = out.iter().map(|&l| (l - max).exp()).sum();
        let log_total = max + sum.ln();
        for o in out.iter_mut() {
            *o = (*o - log_total).exp();
        }
        log_total
    }

    pub fn log_likelihood(&self, x: &[f64]) -> f64 {
        let mut scratch = vec![0.0; self.n_components()];
        self.posteriors_into(x, &mut scratch)
    }
}

/// Component posteriors of one frame, computed in the log domain.
pub fn gmm_posteriors(g: &DiagonalGmm, frame: &[f64]) -> Result<Vec<f64>> {
    if frame.len() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            actual: frame.len(),
        });
    }
    let mut out = vec![0.0; g.n_components()];
    g.posteriors_into(frame, &mut out);
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct GmmTraining {
    pub gmm: DiagonalGmm,
    /// Total log-likelihood of the training frames before each EM step,
    /// followed by the value for the final model.
    pub log_likelihoods: Vec<f64>,
}

struct Accumulator {
    n: Vec<f64>,
    f: Array2<f64>,
    s: Array2<f64>,
    ll: f64,
}

impl Accumulator {
    fn zeros(c: usize, d: usize) -> Self {
        Self {
            n: vec![0.0; c],
            f: Array2::zeros((c, d)),
            s: Array2::zeros((c, d)),
            ll: 0.0,
        }
    }

    fn merge(&mut self, other: &Accumulator) {
        for (a, b) in self.n.iter_mut().zip(&other.n) {
            *a += b;
        }
        self.f += &other.f;
        self.s += &other.s;
        self.ll += other.ll;
    }
}

fn e_step(g: &DiagonalGmm, frames: ArrayView2<'_, f64>) -> Accumulator {
    let (n, d) = frames.dim();
    let c = g.n_components();
    let ranges: Vec<(usize, usize)> = (0..n)
        .step_by(CHUNK)
        .map(|a| (a, (a + CHUNK).min(n)))
        .collect();
    let partials: Vec<Accumulator> = ranges
        .par_iter()
        .map(|&(a, b)| {
            let mut acc = Accumulator::zeros(c, d);
            let mut post = vec![0.0; c];
            for row in frames.slice(s![a..b, ..]).rows() {
                let x = row.as_slice().expect("standard layout");
                acc.ll += g.posteriors_into(x, &mut post);
                for (k, &p) in post.iter().enumerate() {
                    if p == 0.0 {
                        continue;
                    }
                    acc.n[k] += p;
                    let mut fr = acc.f.row_mut(k);
                    let fr = fr.as_slice_mut().unwrap();
                    for (fv, &xv) in fr.iter_mut().zip(x) {
                        *fv += p * xv;
                    }
                    let mut sr = acc.s.row_mut(k);
                    let sr = sr.as_slice_mut().unwrap();
                    for (sv, &xv) in sr.iter_mut().zip(x) {
                        *sv += p * xv * xv;
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = Accumulator::zeros(c, d);
    for p in &partials {
        total.merge(p);
    }
    total
}

fn global_moments(frames: ArrayView2<'_, f64>) -> (Vec<f64>, Vec<f64>) {
    let (n, d) = frames.dim();
    let mut mean = vec![0.0; d];
    for row in frames.rows() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut var = vec![0.0; d];
    for row in frames.rows() {
        for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    var.iter_mut().for_each(|s| *s /= n as f64);
    (mean, var)
}

/// k-means++ seeding: first mean uniform, then proportional to the squared
/// distance from the closest mean chosen so far.
fn seed_means(frames: ArrayView2<'_, f64>, c: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let n = frames.nrows();
    let pool: Vec<usize> = if n > SEEDING_POOL {
        let mut idx = rand::seq::index::sample(rng, n, SEEDING_POOL).into_vec();
        idx.sort_unstable();
        idx
    } else {
        (0..n).collect()
    };
    let dist = |a: usize, m: &[f64]| -> f64 {
        frames
            .row(a)
            .iter()
            .zip(m)
            .map(|(x, y)| (x - y) * (x - y))
            .sum()
    };
    let mut means = Array2::zeros((c, frames.ncols()));
    let first = pool[rng.random_range(0..pool.len())];
    means.row_mut(0).assign(&frames.row(first));
    let mut d2: Vec<f64> = pool
        .iter()
        .map(|&i| dist(i, means.row(0).as_slice().unwrap()))
        .collect();
    for k in 1..c {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = pool.len() - 1;
            for (j, &w) in d2.iter().enumerate() {
                if target < w {
                    chosen = j;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..pool.len())
        };
        means.row_mut(k).assign(&frames.row(pool[pick]));
        let m = means.row(k).to_vec();
        for (j, &i) in pool.iter().enumerate() {
            d2[j] = d2[j].min(dist(i, &m));
        }
    }
    means
}

/// Trains a diagonal-covariance UBM by EM.
pub fn gmm_em_train(
    frames: ArrayView2<'_, f64>,
    components: usize,
    iters: usize,
    seed: u64,
) -> Result<GmmTraining> {
    let (n, d) = frames.dim();
    if components == 0 || d == 0 {
        return Err(Error::InvalidArgument(
            "GMM needs at least one component and one dimension".into(),
        ));
    }
    let needed = components * 10;
    if n < needed {
        return Err(Error::TooFewFrames {
            frames: n,
            components,
            needed,
        });
    }
    if frames.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("GMM training frames"));
    }
    let frames = frames.as_standard_layout();
    let frames = frames.view();

    let (_, global_var) = global_moments(frames);
    if global_var.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateData(
            "all training frames are identical".into(),
        ));
    }
    let floor: Vec<f64> = global_var
        .iter()
        .map(|v| (VARIANCE_FLOOR_FACTOR * v).max(MIN_VARIANCE))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let means = seed_means(frames, components, &mut rng);
    let variances = Array2::from_shape_fn((components, d), |(_, j)| global_var[j].max(floor[j]));
    let weights = vec![1.0 / components as f64; components];
    let mut gmm = DiagonalGmm::new(weights, means, variances)?;

    let mut log_likelihoods = Vec::with_capacity(iters + 1);
    for _ in 0..iters {
        let acc = e_step(&gmm, frames);
        log_likelihoods.push(acc.ll);
        gmm = m_step(&gmm, &acc, &floor)?;
    }
    log_likelihoods.push(e_step(&gmm, frames).ll);
    Ok(GmmTraining {
        gmm,
        log_likelihoods,
    })
}

fn m_step(prev: &DiagonalGmm, acc: &Accumulator, floor: &[f64]) -> Result<DiagonalGmm> {
    let (c, d) = prev.means.dim();
    let total: f64 = acc.n.iter().sum();
    let mut weights: Vec<f64> = acc.n.iter().map(|n| n / total).collect();
    let wsum: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= wsum);
    let mut means = prev.means.clone();
    let mut variances = prev.variances.clone();
    for k in 0..c {
        let nk = acc.n[k];
        if nk < 1e-10 {
            continue;
        }
        for j in 0..d {
            let m = acc.f[[k, j]] / nk;
            means[[k, j]] = m;
            variances[[k, j]] = (acc.s[[k, j]] / nk - m * m).max(floor[j]);
        }
    }
    DiagonalGmm::new(weights, means, variances)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand_distr::{Distribution, StandardNormal};

    fn g2() -> DiagonalGmm {
        DiagonalGmm::new(
            vec![0.5, 0.5],
            array![[-1.0, 0.0], [1.0, 0.0]],
            array![[1.0, 2.0], [1.0, 2.0]],
        )
        .unwrap()
    }

    #[test]
    fn posteriors_basic() {
        let one = DiagonalGmm::new(vec![1.0], array![[0.0, 0.0]], array![[1.0, 1.0]]).unwrap();
        assert_eq!(gmm_posteriors(&one, &[3.0, -2.0]).unwrap(), vec![1.0]);
        let p = gmm_posteriors(&g2(), &[0.0, 5.0]).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
        // far from both components: no underflow to all zeros
        let p = gmm_posteriors(&g2(), &[1e4, 0.0]).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((p[1] - 1.0).abs() < 1e-12);
        assert!(gmm_posteriors(&g2(), &[0.0]).is_err());
    }

    #[test]
    fn constructor_validates() {
        assert!(
            DiagonalGmm::new(vec![0.7, 0.7], array![[0.0], [1.0]], array![[1.0], [1.0]]).is_err()
        );
        assert!(
            DiagonalGmm::new(vec![0.5, 0.5], array![[0.0], [1.0]], array![[1.0], [0.0]]).is_err()
        );
        assert!(DiagonalGmm::new(vec![1.0], array![[0.0], [1.0]], array![[1.0], [1.0]]).is_err());
    }

    #[test]
    fn single_component_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = Array2::from_shape_fn((200, 3), |(_, j)| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z * (j + 1) as f64 + j as f64
        });
        let t = gmm_em_train(x.view(), 1, 1, 0).unwrap();
        let (mean, var) = global_moments(x.view());
        assert_eq!(t.gmm.weights(), &[1.0]);
        for j in 0..3 {
            assert!((t.gmm.means()[[0, j]] - mean[j]).abs() < 1e-10);
            assert!((t.gmm.variances()[[0, j]] - var[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn recovers_separated_clusters() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = Array2::from_shape_fn((2000, 2), |(i, j)| {
            let z: f64 = StandardNormal.sample(&mut rng);
            let center = if j == 0 {
                if i < 1000 {
                    -10.0
                } else {
                    10.0
                }
            } else {
                0.0
            };
            center + z
        });
        let t = gmm_em_train(x.view(), 2, 10, 5).unwrap();
        let mut mx: Vec<(f64, f64)> = t
            .gmm
            .means()
            .rows()
            .into_iter()
            .map(|r| (r[0], r[1]))
            .collect();
        mx.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert!((mx[0].0 + 10.0).abs() < 0.1 && mx[0].1.abs() < 0.1);
        assert!((mx[1].0 - 10.0).abs() < 0.1 && mx[1].1.abs() < 0.1);
        for w in t.log_likelihoods.windows(2) {
            assert!(w[1] >= w[0] - 1e-8 * w[0].abs());
        }
    }

    #[test]
    fn rejects_degenerate_inputs() {
        let same = Array2::from_elem((100, 3), 0.5);
        assert!(matches!(
            gmm_em_train(same.view(), 2, 3, 0),
            Err(Error::DegenerateData(_))
        ));
        let few = Array2::from_shape_fn((15, 2), |(i, j)| (i + j) as f64);
        assert!(matches!(
            gmm_em_train(few.view(), 2, 3, 0),
            Err(Error::TooFewFrames { .. })
        ));
    }

    #[test]
    fn seeded_training_is_reproducible() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = Array2::from_shape_fn((3000, 4), |_| rng.random_range(-1.0..1.0));
        let a = gmm_em_train(x.view(), 4, 4, 9).unwrap();
        let b = gmm_em_train(x.view(), 4, 4, 9).unwrap();
        assert_eq!(a.gmm, b.gmm);
        assert_eq!(a.log_likelihoods, b.log_likelihoods);
    }
}
