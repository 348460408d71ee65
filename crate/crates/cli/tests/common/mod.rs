//! Independent reference implementations used by the integration tests.

#![allow(dead_code)]

use spoofguard_core::nalgebra::DMatrix;

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix.
/// Returns eigenvalues (descending) and matching unit eigenvectors as columns.
pub fn jacobi_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        if off < 1e-30 * m.norm_squared().max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (values, vectors)
}

/// Modified Gram-Schmidt on the columns of `a`.
pub fn orthonormal_columns(a: &DMatrix<f64>) -> DMatrix<f64> {
    let mut q = a.clone();
    for j in 0..q.ncols() {
        for p in 0..j {
            let proj = q.column(p).dot(&q.column(j));
            let col_p = q.column(p).into_owned();
            let mut col_j = q.column_mut(j);
            col_j.axpy(-proj, &col_p, 1.0);
        }
        let norm = q.column(j).norm();
        q.column_mut(j).scale_mut(1.0 / norm);
    }
    q
}

/// Largest principal angle (radians) between the column spans of `a` and `b`.
pub fn max_principal_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let qa = orthonormal_columns(a);
    let qb = orthonormal_columns(b);
    let m = qa.transpose() * qb;
    let (values, _) = jacobi_eigen(&(m.transpose() * &m));
    let smallest = values.iter().copied().fold(f64::INFINITY, f64::min);
    smallest.max(0.0).sqrt().min(1.0).acos()
}

/// EER by brute force: FAR/FRR evaluated just below and just above every
/// distinct score, crossing read off with linear interpolation.
pub fn eer_oracle(genuine: &[f64], spoof: &[f64]) -> f64 {
    let mut distinct: Vec<f64> = genuine.iter().chain(spoof).copied().collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let min_gap = distinct
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let eps = if min_gap.is_finite() {
        min_gap / 4.0
    } else {
        0.5
    };
    let mut candidates: Vec<f64> = distinct.iter().flat_map(|&s| [s - eps, s + eps]).collect();
    candidates.sort_by(f64::total_cmp);

    let rates = |t: f64| {
        let frr = genuine.iter().filter(|&&g| g < t).count() as f64 / genuine.len() as f64;
        let far = spoof.iter().filter(|&&s| s >= t).count() as f64 / spoof.len() as f64;
        (frr, far)
    };
    let points: Vec<(f64, f64)> = candidates.iter().map(|&t| rates(t)).collect();
    for k in 0..points.len() {
        let (frr, far) = points[k];
        let d = far - frr;
        if d == 0.0 {
            return 100.0 * frr;
        }
        if d < 0.0 {
            let (frr0, far0) = points[k - 1];
            let d0 = far0 - frr0;
            let alpha = d0 / (d0 - d);
            return 100.0 * (frr0 + alpha * (frr - frr0));
        }
    }
    unreachable!("the last candidate lies above every score")
}
