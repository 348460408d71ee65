use crate::error::{Error, Result};

/// Teager-Kaiser energy, `s[t]² - s[t-1]·s[t+1]` over the interior points.
pub fn tke(s: &[f64]) -> Result<Vec<f64>> {
    if s.len() < 3 {
        return Err(Error::SignalTooShort {
            len: s.len(),
            min: 3,
        });
    }
    Ok(s.windows(3).map(|w| w[1] * w[1] - w[0] * w[2]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_and_ramp() {
        assert!(tke(&[0.3; 10]).unwrap().iter().all(|&v| v == 0.0));
        let ramp: Vec<f64> = (0..20).map(|t| t as f64).collect();
        assert!(tke(&ramp).unwrap().iter().all(|&v| v == 1.0));
        assert!(tke(&[1.0, 2.0]).is_err());
    }

    proptest! {
        #[test]
        fn sign_flip_invariant(s in prop::collection::vec(-1.0f64..1.0, 3..64)) {
            let neg: Vec<f64> = s.iter().map(|v| -v).collect();
            prop_assert_eq!(tke(&s).unwrap(), tke(&neg).unwrap());
        }
    }
}
