use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct IVector {
    pub values: Vec<f64>,
    /// Set once the vector has been centered and length-normalized.
    pub normalized: bool,
}

impl IVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self {
            values,
            normalized: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Centers `v` on the training mean and scales it to unit length.
pub fn postprocess_ivector(v: &IVector, training_mean: &[f64]) -> Result<IVector> {
    if v.normalized {
        return Err(Error::InvalidArgument(
            "i-vector is already normalized".into(),
        ));
    }
    if v.dim() != training_mean.len() {
        return Err(Error::DimensionMismatch {
            expected: training_mean.len(),
            actual: v.dim(),
        });
    }
    let centered: Vec<f64> = v
        .values
        .iter()
        .zip(training_mean)
        .map(|(a, m)| a - m)
        .collect();
    let norm = centered.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !norm.is_finite() || norm <= 0.0 {
        return Err(Error::ZeroAfterCentering);
    }
    Ok(IVector {
        values: centered.into_iter().map(|x| x / norm).collect(),
        normalized: true,
    })
}

/// Concatenates per-feature i-vectors in the given order.
pub fn fuse_ivectors(parts: &[IVector]) -> Result<IVector> {
    let first = parts.first().ok_or(Error::Fusion("no parts to fuse"))?;
    if parts.iter().any(|p| p.normalized != first.normalized) {
        return Err(Error::Fusion("parts mix normalized and raw i-vectors"));
    }
    Ok(IVector {
        values: parts
            .iter()
            .flat_map(|p| p.values.iter().copied())
            .collect(),
        normalized: first.normalized && parts.len() == 1,
    })
}

/// Element-wise mean of a set of i-vectors.
pub fn ivector_mean(vectors: &[IVector]) -> Result<Vec<f64>> {
    let first = vectors
        .first()
        .ok_or_else(|| Error::InvalidArgument("cannot average zero i-vectors".into()))?;
    let mut mean = vec![0.0; first.dim()];
    for v in vectors {
        if v.dim() != mean.len() {
            return Err(Error::DimensionMismatch {
                expected: mean.len(),
                actual: v.dim(),
            });
        }
        for (m, x) in mean.iter_mut().zip(&v.values) {
            *m += x;
        }
    }
    let n = vectors.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    Ok(mean)
}
