use std::f64::consts::PI;

/// Orthonormal DCT-II.
pub fn apply_dct(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let nf = n as f64;
    (0..n)
        .map(|j| {
            let alpha = if j == 0 {
                (1.0 / nf).sqrt()
            } else {
                (2.0 / nf).sqrt()
            };
            let s: f64 = x
                .iter()
                .enumerate()
                .map(|(i, &v)| v * (PI * (2 * i + 1) as f64 * j as f64 / (2.0 * nf)).cos())
                .sum();
            alpha * s
        })
        .collect()
}
