// SPDX-License-Identifier: Apache-2.0
//! Unnormalized DCT-II, c[k] = sum_n x[n] cos(pi k (2n + 1) / (2 M)).

use super::FrontendError;
use crate::fixedpoint::{apply_shift_add, approx_csd, FixedValue, QFormat, ShiftAddApprox};
use crate::Real;

/// Fraction bits of the fixed MFCC accumulator; inputs are widened before shifting.
pub const MFCC_FRAC_BITS: u32 = 12;

/// Fixed MFCC format, Q20.12.
pub fn mfcc_format() -> QFormat {
    QFormat::new(32, MFCC_FRAC_BITS, true).expect("valid format")
}

/// `n_mfcc` rows of `n_mel` cosines.
pub fn dct_coefficients(n_mel: usize, n_mfcc: usize) -> Vec<Vec<f64>> {
    (0..n_mfcc)
        .map(|k| {
            (0..n_mel)
                .map(|n| {
                    (std::f64::consts::PI * (k * (2 * n + 1)) as f64 / (2 * n_mel) as f64).cos()
                })
                .collect()
        })
        .collect()
}

/// DCT-II with caller-supplied coefficient rows.
pub fn dct_ii_with<T: Real>(x: &[T], coeffs: &[Vec<f64>]) -> Result<Vec<T>, FrontendError> {
    if let Some(row) = coeffs.first() {
        if row.len() != x.len() {
            return Err(FrontendError::DimensionMismatch {
                expected: row.len(),
                got: x.len(),
            });
        }
    }
    Ok(coeffs
        .iter()
        .map(|row| {
            row.iter()
                .zip(x)
                .fold(T::zero(), |acc, (&c, &v)| acc + T::of(c) * v)
        })
        .collect())
}

pub fn dct_ii<T: Real>(x: &[T], n_mfcc: usize) -> Result<Vec<T>, FrontendError> {
    if n_mfcc > x.len() {
        return Err(FrontendError::DimensionMismatch {
            expected: x.len(),
            got: n_mfcc,
        });
    }
    dct_ii_with(x, &dct_coefficients(x.len(), n_mfcc))
}

/// Shift-add coefficient rows, each cosine approximated with two CSD terms.
pub fn dct_csd_coefficients(
    n_mel: usize,
    n_mfcc: usize,
    bit_width: u32,
) -> Vec<Vec<ShiftAddApprox>> {
    dct_coefficients(n_mel, n_mfcc)
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|c| approx_csd(c, 2, bit_width.saturating_sub(1)))
                .collect()
        })
        .collect()
}

/// Fixed DCT over log-format inputs. Each product is a shift-add on the
/// input widened to `mfcc_format()`; the sum saturates.
pub fn dct_ii_fixed(
    x: &[FixedValue],
    coeffs: &[Vec<ShiftAddApprox>],
) -> Result<Vec<FixedValue>, FrontendError> {
    let out = mfcc_format();
    if let Some(row) = coeffs.first() {
        if row.len() != x.len() {
            return Err(FrontendError::DimensionMismatch {
                expected: row.len(),
                got: x.len(),
            });
        }
    }
    let wide: Vec<FixedValue> = x
        .iter()
        .map(|v| {
            let up = MFCC_FRAC_BITS as i64 - v.format().frac_bits() as i64;
            let raw = if up >= 0 {
                (v.raw() as i128) << up
            } else {
                (v.raw() as i128) >> -up
            };
            out.from_raw(raw)
        })
        .collect();
    Ok(coeffs
        .iter()
        .map(|row| {
            let acc = row.iter().zip(&wide).fold(0i128, |acc, (c, &v)| {
                out.saturate(acc + apply_shift_add(v, c).raw() as i128) as i128
            });
            out.from_raw(acc)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixedpoint::quantize;
    use crate::frontend::log_format;
    use proptest::prelude::*;

    /// Inverse of the unnormalized DCT-II (a scaled DCT-III).
    fn idct(c: &[f64]) -> Vec<f64> {
        let m = c.len();
        (0..m)
            .map(|n| {
                c[0] / m as f64
                    + (1..m)
                        .map(|k| {
                            2.0 / m as f64
                                * c[k]
                                * (std::f64::consts::PI * (k * (2 * n + 1)) as f64 / (2 * m) as f64)
                                    .cos()
                        })
                        .sum::<f64>()
            })
            .collect()
    }

    #[test]
    fn constant_input_only_dc() {
        let c = dct_ii(&[0.7f64; 8], 8).unwrap();
        assert!((c[0] - 5.6).abs() < 1e-9);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-9));
        assert!(dct_ii(&[0.0f64; 8], 9).is_err());
        assert!(dct_ii_with(&[0.0f64; 7], &dct_coefficients(8, 8)).is_err());
    }

    proptest! {
        #[test]
        fn roundtrip(x in prop::collection::vec(-10.0f64..10.0, 8)) {
            let back = idct(&dct_ii(&x, 8).unwrap());
            for (a, b) in back.iter().zip(&x) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn csd_coefficients_within_bound(x in prop::collection::vec(-1.0f64..1.0, 8)) {
            let csd = dct_csd_coefficients(8, 8, 7);
            let vals: Vec<Vec<f64>> = csd.iter().map(|r| r.iter().map(ShiftAddApprox::value).collect()).collect();
            let approx = dct_ii_with(&x, &vals).unwrap();
            let exact = dct_ii(&x, 8).unwrap();
            for (a, b) in approx.iter().zip(&exact) {
                prop_assert!((a - b).abs() <= 8.0 / 16.0);
            }
        }

        #[test]
        fn fixed_matches_shift_add_values(x in prop::collection::vec(-30.0f64..10.0, 8)) {
            let lf = log_format();
            let xq: Vec<_> = x.iter().map(|&v| quantize(v, lf)).collect();
            let csd = dct_csd_coefficients(8, 8, 7);
            let vals: Vec<Vec<f64>> = csd.iter().map(|r| r.iter().map(ShiftAddApprox::value).collect()).collect();
            let want = dct_ii_with(&xq.iter().map(|v| v.to_real()).collect::<Vec<_>>(), &vals).unwrap();
            let got = dct_ii_fixed(&xq, &csd).unwrap();
            for (g, w) in got.iter().zip(&want) {
                // one floor per shifter at 2^-12
                prop_assert!((g.to_real() - w).abs() <= 16.0 * mfcc_format().ulp());
            }
        }
    }
}
