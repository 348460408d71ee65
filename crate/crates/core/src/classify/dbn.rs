//! Deep belief network: RBM layer-wise pretraining followed by supervised
//! fine-tuning of a sigmoid network with a two-way softmax head.
//!
//! Row 0 of the head scores the spoof class, row 1 the human class.

use nalgebra::{DMatrix, DVector};
use ndarray::ArrayView2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::label::{require_both_classes, Label};
use crate::linalg::add_scaled;

const INIT_STD: f64 = 0.01;
pub const DEFAULT_BATCH: usize = 64;

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn class_index(l: Label) -> usize {
    match l {
        Label::Spoof => 0,
        Label::Human => 1,
    }
}

/// Columns of the returned matrix are the selected rows of `x`.
fn batch_matrix(x: ArrayView2<'_, f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(x.ncols(), idx.len(), |r, c| x[[idx[c], r]])
}

fn random_weights(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let normal = Normal::new(0.0, INIT_STD).unwrap();
    DMatrix::from_fn(rows, cols, |_, _| normal.sample(rng))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RbmLayer {
    /// hidden × visible
    pub weights: DMatrix<f64>,
    pub visible_bias: DVector<f64>,
    pub hidden_bias: DVector<f64>,
    /// Unit-variance Gaussian visible units instead of Bernoulli ones.
    pub gaussian_visible: bool,
}

impl RbmLayer {
    fn hidden_probs(&self, v: &DMatrix<f64>) -> DMatrix<f64> {
        let mut h = &self.weights * v;
        for mut col in h.column_iter_mut() {
            col += &self.hidden_bias;
        }
        h.apply(|x| *x = sigmoid(*x));
        h
    }

    fn visible_mean(&self, h: &DMatrix<f64>) -> DMatrix<f64> {
        let mut v = self.weights.tr_mul(h);
        for mut col in v.column_iter_mut() {
            col += &self.visible_bias;
        }
        if !self.gaussian_visible {
            v.apply(|x| *x = sigmoid(*x));
        }
        v
    }
}

#[derive(Debug, Clone)]
pub struct RbmPretraining {
    pub layers: Vec<RbmLayer>,
    /// Mean squared reconstruction error per epoch, per layer.
    pub reconstruction_errors: Vec<Vec<f64>>,
}

/// Greedy CD-1 pretraining of a stack of RBMs. The first layer has
/// Gaussian visible units; hidden probabilities of each layer feed the next.
pub fn rbm_pretrain(
    x: ArrayView2<'_, f64>,
    layer_dims: &[usize],
    epochs: usize,
    lr: f64,
    seed: u64,
) -> Result<RbmPretraining> {
    if layer_dims.is_empty() || layer_dims.contains(&0) {
        return Err(Error::InvalidArgument(
            "RBM stack needs at least one nonempty layer".into(),
        ));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("RBM training data"));
    }
    let n = x.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // visible data for the current layer, one sample per column
    let all: Vec<usize> = (0..n).collect();
    let mut data = batch_matrix(x, &all);
    let mut layers = Vec::with_capacity(layer_dims.len());
    let mut errors = Vec::with_capacity(layer_dims.len());

    for (li, &hidden) in layer_dims.iter().enumerate() {
        let visible = data.nrows();
        let mut layer = RbmLayer {
            weights: random_weights(hidden, visible, &mut rng),
            visible_bias: DVector::zeros(visible),
            hidden_bias: DVector::zeros(hidden),
            gaussian_visible: li == 0,
        };
        let mut order: Vec<usize> = (0..n).collect();
        let mut curve = Vec::with_capacity(epochs);
        for _ in 0..epochs {
            order.shuffle(&mut rng);
            let mut sq_err = 0.0;
            for batch in order.chunks(DEFAULT_BATCH) {
                let v0 = DMatrix::from_fn(visible, batch.len(), |r, c| data[(r, batch[c])]);
                let h0 = layer.hidden_probs(&v0);
                let h0_sample = h0.map(|p| if rng.random::<f64>() < p { 1.0 } else { 0.0 });
                let v1 = layer.visible_mean(&h0_sample);
                let h1 = layer.hidden_probs(&v1);
                let scale = lr / batch.len() as f64;
                let grad_w = &h0 * v0.transpose() - &h1 * v1.transpose();
                add_scaled(&mut layer.weights, scale, &grad_w);
                let dv = &v0 - &v1;
                sq_err += dv.norm_squared();
                layer.visible_bias.axpy(scale, &row_sums(&dv), 1.0);
                layer.hidden_bias.axpy(scale, &row_sums(&(&h0 - &h1)), 1.0);
            }
            curve.push(sq_err / n.max(1) as f64);
        }
        data = layer.hidden_probs(&data);
        layers.push(layer);
        errors.push(curve);
    }
    Ok(RbmPretraining {
        layers,
        reconstruction_errors: errors,
    })
}

fn row_sums(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_fn(m.nrows(), |r, _| m.row(r).sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    /// out × in
    pub weights: DMatrix<f64>,
    pub bias: DVector<f64>,
}

impl DenseLayer {
    fn forward(&self, input: &DMatrix<f64>) -> DMatrix<f64> {
        let mut z = &self.weights * input;
        for mut col in z.column_iter_mut() {
            col += &self.bias;
        }
        z
    }

    fn zeros_like(&self) -> Self {
        Self {
            weights: DMatrix::zeros(self.weights.nrows(), self.weights.ncols()),
            bias: DVector::zeros(self.bias.len()),
        }
    }
}

/// Sigmoid hidden layers followed by a 2-way softmax head.
#[derive(Debug, Clone, PartialEq)]
pub struct DbnModel {
    pub hidden: Vec<DenseLayer>,
    pub head: DenseLayer,
}

/// Gradient with the same layout as [`DbnModel`].
pub type DbnGradient = DbnModel;

impl DbnModel {
    pub fn input_dim(&self) -> usize {
        self.hidden.first().unwrap_or(&self.head).weights.ncols()
    }

    pub fn validate(&self) -> Result<()> {
        let mut dim = self.input_dim();
        for layer in self.hidden.iter().chain(std::iter::once(&self.head)) {
            if layer.weights.ncols() != dim || layer.bias.len() != layer.weights.nrows() {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: layer.weights.ncols(),
                });
            }
            dim = layer.weights.nrows();
        }
        if dim != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                actual: dim,
            });
        }
        Ok(())
    }

    /// Activations of every hidden layer, then the head logits.
    fn forward(&self, input: &DMatrix<f64>) -> (Vec<DMatrix<f64>>, DMatrix<f64>) {
        let mut acts = Vec::with_capacity(self.hidden.len());
        let mut cur = input.clone();
        for layer in &self.hidden {
            let mut a = layer.forward(&cur);
            a.apply(|x| *x = sigmoid(*x));
            acts.push(a.clone());
            cur = a;
        }
        let logits = self.head.forward(&cur);
        (acts, logits)
    }

    fn logits(&self, x: &[f64]) -> Result<[f64; 2]> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                actual: x.len(),
            });
        }
        let (_, z) = self.forward(&DMatrix::from_column_slice(x.len(), 1, x));
        Ok([z[(0, 0)], z[(1, 0)]])
    }

    /// `[p(spoof|x), p(human|x)]`.
    pub fn probabilities(&self, x: &[f64]) -> Result<[f64; 2]> {
        let z = self.logits(x)?;
        let m = z[0].max(z[1]);
        let e = [(z[0] - m).exp(), (z[1] - m).exp()];
        let s = e[0] + e[1];
        Ok([e[0] / s, e[1] / s])
    }

    /// Mean cross-entropy over the rows of `x` and its gradient.
    pub fn loss_and_gradient(
        &self,
        x: ArrayView2<'_, f64>,
        y: &[Label],
        weight_decay: f64,
    ) -> (f64, DbnGradient) {
        let idx: Vec<usize> = (0..x.nrows()).collect();
        self.batch_loss_and_gradient(&batch_matrix(x, &idx), y, weight_decay)
    }

    fn batch_loss_and_gradient(
        &self,
        input: &DMatrix<f64>,
        y: &[Label],
        weight_decay: f64,
    ) -> (f64, DbnGradient) {
        let b = input.ncols() as f64;
        let (acts, logits) = self.forward(input);
        let mut delta = DMatrix::zeros(2, input.ncols());
        let mut loss = 0.0;
        for (c, &label) in y.iter().enumerate() {
            let z = [logits[(0, c)], logits[(1, c)]];
            let m = z[0].max(z[1]);
            let lse = m + ((z[0] - m).exp() + (z[1] - m).exp()).ln();
            let target = class_index(label);
            loss -= z[target] - lse;
            for k in 0..2 {
                let p = (z[k] - lse).exp();
                delta[(k, c)] = (p - if k == target { 1.0 } else { 0.0 }) / b;
            }
        }
        loss /= b;

        let mut grad = DbnModel {
            hidden: self.hidden.iter().map(DenseLayer::zeros_like).collect(),
            head: self.head.zeros_like(),
        };
        let head_input = acts.last().unwrap_or(input);
        grad.head.weights = &delta * head_input.transpose();
        grad.head.bias = row_sums(&delta);
        let mut back = self.head.weights.tr_mul(&delta);
        for l in (0..self.hidden.len()).rev() {
            let a = &acts[l];
            let local = back.zip_map(a, |g, s| g * s * (1.0 - s));
            let below = if l == 0 { input } else { &acts[l - 1] };
            grad.hidden[l].weights = &local * below.transpose();
            grad.hidden[l].bias = row_sums(&local);
            back = self.hidden[l].weights.tr_mul(&local);
        }

        if weight_decay > 0.0 {
            for (g, layer) in grad
                .hidden
                .iter_mut()
                .chain(std::iter::once(&mut grad.head))
                .zip(self.hidden.iter().chain(std::iter::once(&self.head)))
            {
                loss += 0.5 * weight_decay * layer.weights.norm_squared();
                add_scaled(&mut g.weights, weight_decay, &layer.weights);
            }
        }
        (loss, grad)
    }

    /// All parameters in a fixed order (per layer: weights column-major, then bias).
    pub fn flat_params(&self) -> Vec<f64> {
        self.hidden
            .iter()
            .chain(std::iter::once(&self.head))
            .flat_map(|l| l.weights.iter().chain(l.bias.iter()).copied())
            .collect()
    }

    pub fn set_flat_params(&mut self, params: &[f64]) {
        let mut it = params.iter().copied();
        for l in self
            .hidden
            .iter_mut()
            .chain(std::iter::once(&mut self.head))
        {
            for v in l.weights.iter_mut().chain(l.bias.iter_mut()) {
                *v = it.next().expect("parameter vector too short");
            }
        }
    }

    fn step(&mut self, grad: &DbnGradient, lr: f64) {
        for (l, g) in self
            .hidden
            .iter_mut()
            .chain(std::iter::once(&mut self.head))
            .zip(grad.hidden.iter().chain(std::iter::once(&grad.head)))
        {
            add_scaled(&mut l.weights, -lr, &g.weights);
            l.bias.axpy(-lr, &g.bias, 1.0);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DbnParams {
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub weight_decay: f64,
}

impl Default for DbnParams {
    fn default() -> Self {
        Self {
            epochs: 50,
            lr: 0.1,
            batch_size: DEFAULT_BATCH,
            weight_decay: 0.0,
        }
    }
}

/// Stacks the pretrained layers under a softmax head and fine-tunes the
/// whole network with mini-batch gradient descent on cross-entropy.
pub fn dbn_train(
    pretrained: &[RbmLayer],
    x: ArrayView2<'_, f64>,
    y: &[Label],
    params: &DbnParams,
    seed: u64,
) -> Result<DbnModel> {
    if y.len() != x.nrows() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            actual: y.len(),
        });
    }
    require_both_classes(y)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("DBN training data"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hidden: Vec<DenseLayer> = pretrained
        .iter()
        .map(|r| DenseLayer {
            weights: r.weights.clone(),
            bias: r.hidden_bias.clone(),
        })
        .collect();
    let top = hidden.last().map_or(x.ncols(), |l| l.weights.nrows());
    let mut model = DbnModel {
        hidden,
        head: DenseLayer {
            weights: random_weights(2, top, &mut rng),
            bias: DVector::zeros(2),
        },
    };
    if model.input_dim() != x.ncols() {
        return Err(Error::DimensionMismatch {
            expected: model.input_dim(),
            actual: x.ncols(),
        });
    }
    model.validate()?;

    let mut order: Vec<usize> = (0..x.nrows()).collect();
    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(params.batch_size.max(1)) {
            let input = batch_matrix(x, batch);
            let labels: Vec<Label> = batch.iter().map(|&i| y[i]).collect();
            let (_, grad) = model.batch_loss_and_gradient(&input, &labels, params.weight_decay);
            model.step(&grad, params.lr);
        }
    }
    Ok(model)
}

/// `ln p(human|x) − ln p(spoof|x)`.
pub fn dbn_score(m: &DbnModel, x: &[f64]) -> Result<f64> {
    let z = m.logits(x)?;
    Ok(z[1] - z[0])
}
