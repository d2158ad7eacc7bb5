use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qa::OcclusionMask;
use crate::raster::{check_aligned, LstGrid};

/// Error statistics of a reconstruction against truth, in kelvin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mae: f64,
    pub rmse: f64,
    /// Mean of `reconstructed - truth`.
    pub bias: f64,
    pub count: usize,
}

impl Metrics {
    /// Accumulates `reconstructed - truth` differences.
    pub fn from_errors(errors: impl IntoIterator<Item = f64>) -> Option<Self> {
        let (mut abs, mut sq, mut sum, mut n) = (0.0, 0.0, 0.0, 0usize);
        for e in errors {
            abs += e.abs();
            sq += e * e;
            sum += e;
            n += 1;
        }
        (n > 0).then(|| {
            let k = n as f64;
            Metrics {
                mae: abs / k,
                rmse: (sq / k).sqrt(),
                bias: sum / k,
                count: n,
            }
        })
    }

    /// Pools several reports as if their pixels had been scored together.
    pub fn pooled<'a>(parts: impl IntoIterator<Item = &'a Metrics>) -> Option<Self> {
        let (mut abs, mut sq, mut sum, mut n) = (0.0, 0.0, 0.0, 0usize);
        for m in parts {
            let k = m.count as f64;
            abs += m.mae * k;
            sq += m.rmse * m.rmse * k;
            sum += m.bias * k;
            n += m.count;
        }
        (n > 0).then(|| {
            let k = n as f64;
            Metrics {
                mae: abs / k,
                rmse: (sq / k).sqrt(),
                bias: sum / k,
                count: n,
            }
        })
    }
}

/// Scores `reconstructed` against `truth` over the pixels set in `mask`.
///
/// Pixels invalid in either grid are skipped.
pub fn score(reconstructed: &LstGrid, truth: &LstGrid, mask: &OcclusionMask) -> Result<Metrics> {
    check_aligned(&[reconstructed, truth, mask])?;
    let errors = mask
        .occluded()
        .iter()
        .enumerate()
        .filter(|&(i, m)| *m && reconstructed.valid()[i] && truth.valid()[i])
        .map(|(i, _)| reconstructed.values()[i] - truth.values()[i]);
    Metrics::from_errors(errors).ok_or(Error::EmptyMask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{GeoRef, GridShape};
    use proptest::prelude::*;

    fn georef() -> GeoRef {
        GeoRef::new((0.0, 0.0), (30.0, -30.0), "EPSG:32615").unwrap()
    }

    fn grid(values: Vec<f64>) -> LstGrid {
        LstGrid::from_values(GridShape::new(1, values.len()).unwrap(), georef(), values).unwrap()
    }

    fn mask(m: Vec<bool>) -> OcclusionMask {
        OcclusionMask::new(GridShape::new(1, m.len()).unwrap(), georef(), m).unwrap()
    }

    #[test]
    fn perfect_reconstruction() {
        let t = grid(vec![300.0, 301.0, 302.0]);
        let m = score(&t, &t, &mask(vec![true, true, false])).unwrap();
        assert_eq!((m.mae, m.rmse, m.bias, m.count), (0.0, 0.0, 0.0, 2));
    }

    #[test]
    fn constant_offset() {
        let t = grid(vec![300.0, 301.0, 302.0, 303.0]);
        let r = grid(vec![302.0, 303.0, 304.0, 305.0]);
        let m = score(&r, &t, &mask(vec![true; 4])).unwrap();
        assert_eq!((m.mae, m.rmse, m.bias), (2.0, 2.0, 2.0));
    }

    #[test]
    fn symmetric_errors() {
        let t = grid(vec![300.0; 5]);
        let r = grid(vec![301.0, 299.0, 303.0, 297.0, 350.0]);
        let m = score(&r, &t, &mask(vec![true, true, true, true, false])).unwrap();
        assert_eq!(m.mae, 2.0);
        assert!((m.rmse - 5f64.sqrt()).abs() < 1e-12);
        assert_eq!(m.bias, 0.0);
    }

    #[test]
    fn empty_mask_is_an_error() {
        let t = grid(vec![300.0; 3]);
        assert!(matches!(
            score(&t, &t, &mask(vec![false; 3])),
            Err(Error::EmptyMask)
        ));
    }

    #[test]
    fn pooling_matches_joint_scoring() {
        let a = Metrics::from_errors([1.0, -2.0]).unwrap();
        let b = Metrics::from_errors([3.0]).unwrap();
        let joint = Metrics::from_errors([1.0, -2.0, 3.0]).unwrap();
        let pooled = Metrics::pooled([&a, &b]).unwrap();
        assert!((pooled.mae - joint.mae).abs() < 1e-12);
        assert!((pooled.rmse - joint.rmse).abs() < 1e-12);
        assert!((pooled.bias - joint.bias).abs() < 1e-12);
        assert_eq!(pooled.count, 3);
    }

    proptest! {
        #[test]
        fn ordering_of_statistics(errors in prop::collection::vec(-20.0f64..20.0, 1..64)) {
            let m = Metrics::from_errors(errors).unwrap();
            prop_assert!(m.rmse + 1e-12 >= m.mae);
            prop_assert!(m.mae + 1e-12 >= m.bias.abs());
        }

        #[test]
        fn offset_moves_bias_exactly(
            truth in prop::collection::vec(250.0f64..330.0, 16),
            noise in prop::collection::vec(-3.0f64..3.0, 16),
            k in -10.0f64..10.0,
        ) {
            let t = grid(truth.clone());
            let r = grid(truth.iter().zip(&noise).map(|(a, b)| a + b).collect());
            let rk = grid(truth.iter().zip(&noise).map(|(a, b)| a + b + k).collect());
            let m = mask(vec![true; 16]);
            let base = score(&r, &t, &m).unwrap();
            let shifted = score(&rk, &t, &m).unwrap();
            prop_assert!((shifted.bias - base.bias - k).abs() < 1e-9);
        }
    }
}
