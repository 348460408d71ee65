//! Full balanced wavelet packet decomposition with periodic extension.

use crate::error::{Error, Result};

/// Daubechies scaling filter with 4 vanishing moments (8 taps).
pub const DB4_LOW_PASS: [f64; 8] = [
    0.230_377_813_308_896_5,
    0.714_846_570_552_915_6,
    0.630_880_767_929_858_9,
    -0.027_983_769_416_859_854,
    -0.187_034_811_719_093_08,
    0.030_841_381_835_560_764,
    0.032_883_011_666_885_2,
    -0.010_597_401_785_069_032,
];

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletPacketTree {
    pub depth: usize,
    pub low_pass: [f64; 8],
    pub high_pass: [f64; 8],
    /// `leaf_order[band]` is the natural (Paley) tree index of the leaf that
    /// covers frequency band `band`, counted from DC upwards.
    pub leaf_order: Vec<usize>,
}

impl WaveletPacketTree {
    pub fn db4(depth: usize) -> Self {
        let low_pass = DB4_LOW_PASS;
        let mut high_pass = [0.0; 8];
        for (n, g) in high_pass.iter_mut().enumerate() {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            *g = sign * low_pass[7 - n];
        }
        let leaf_order = (0..1usize << depth).map(|b| b ^ (b >> 1)).collect();
        Self {
            depth,
            low_pass,
            high_pass,
            leaf_order,
        }
    }

    pub fn n_leaves(&self) -> usize {
        1 << self.depth
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if !len.is_power_of_two() || len < self.n_leaves() {
            return Err(Error::InvalidArgument(format!(
                "wavelet packet input length {len} must be a power of two >= {}",
                self.n_leaves()
            )));
        }
        Ok(())
    }
}

impl Default for WaveletPacketTree {
    fn default() -> Self {
        Self::db4(6)
    }
}

fn analysis(x: &[f64], filter: &[f64; 8]) -> Vec<f64> {
    let n = x.len();
    (0..n / 2)
        .map(|k| {
            filter
                .iter()
                .enumerate()
                .map(|(i, h)| h * x[(2 * k + i) % n])
                .sum()
        })
        .collect()
}

fn synthesis(low: &[f64], high: &[f64], tree: &WaveletPacketTree) -> Vec<f64> {
    let n = low.len() * 2;
    let mut out = vec![0.0; n];
    for k in 0..low.len() {
        for i in 0..8 {
            out[(2 * k + i) % n] += tree.low_pass[i] * low[k] + tree.high_pass[i] * high[k];
        }
    }
    out
}

/// Decomposes `frame` into `2^depth` leaf signals, returned in ascending
/// frequency order.
pub fn wpt_decompose(frame: &[f64], tree: &WaveletPacketTree) -> Result<Vec<Vec<f64>>> {
    tree.check_len(frame.len())?;
    let mut nodes = vec![frame.to_vec()];
    for _ in 0..tree.depth {
        nodes = nodes
            .iter()
            .flat_map(|x| [analysis(x, &tree.low_pass), analysis(x, &tree.high_pass)])
            .collect();
    }
    Ok(tree
        .leaf_order
        .iter()
        .map(|&natural| std::mem::take(&mut nodes[natural]))
        .collect())
}

/// Inverse of [`wpt_decompose`].
pub fn wpt_reconstruct(leaves: &[Vec<f64>], tree: &WaveletPacketTree) -> Result<Vec<f64>> {
    if leaves.len() != tree.n_leaves() {
        return Err(Error::DimensionMismatch {
            expected: tree.n_leaves(),
            actual: leaves.len(),
        });
    }
    let leaf_len = leaves[0].len();
    if leaf_len == 0 || leaves.iter().any(|l| l.len() != leaf_len) {
        return Err(Error::InvalidArgument(
            "wavelet packet leaves must be nonempty and equally long".into(),
        ));
    }
    let mut nodes = vec![Vec::new(); tree.n_leaves()];
    for (band, &natural) in tree.leaf_order.iter().enumerate() {
        nodes[natural] = leaves[band].clone();
    }
    while nodes.len() > 1 {
        nodes = nodes
            .chunks(2)
            .map(|pair| synthesis(&pair[0], &pair[1], tree))
            .collect();
    }
    Ok(nodes.pop().unwrap())
}
