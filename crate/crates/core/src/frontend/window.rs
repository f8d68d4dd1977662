// SPDX-License-Identifier: Apache-2.0
//! Hanning window and its multiplierless approximations.

use serde::Serialize;

use super::{FrontendError, WindowPolicy};
use crate::fixedpoint::{
    apply_shift_add, approx_csd, fx_arith, quantize, ArithOp, CsdTerm, FixedValue, ShiftAddApprox,
};
use crate::Real;

/// Symmetric Hanning window, w[n] = 0.5 (1 - cos(2 pi n / (N - 1))).
pub fn hanning<T: Real>(n: usize) -> Vec<T> {
    let denom = T::of(n.saturating_sub(1).max(1) as f64);
    (0..n)
        .map(|i| T::of(0.5) * (T::one() - (T::TAU() * T::of(i as f64) / denom).cos()))
        .collect()
}

/// Window coefficients realized under one policy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Window {
    pub policy: WindowPolicy,
    /// Effective real coefficient values.
    pub values: Vec<f64>,
    /// Shift-and-add form, present for `single_shift` and `csd2`.
    pub shift_add: Option<Vec<ShiftAddApprox>>,
}

impl Window {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Total power-of-two terms across all coefficients; zero for policies without shifters.
    pub fn term_count(&self) -> usize {
        self.shift_add
            .as_ref()
            .map_or(0, |c| c.iter().map(|a| a.terms().len()).sum())
    }

    pub fn apply_float<T: Real>(&self, frame: &[T]) -> Vec<T> {
        frame
            .iter()
            .zip(&self.values)
            .map(|(&x, &w)| x * T::of(w))
            .collect()
    }

    /// Fixed-point windowing: shift-add for the approximated policies, a
    /// rounded multiply by the quantized coefficient for `exact`.
    pub fn apply_fixed(&self, frame: &[FixedValue]) -> Vec<FixedValue> {
        match (&self.shift_add, self.policy) {
            (Some(coeffs), _) => frame
                .iter()
                .zip(coeffs)
                .map(|(&x, c)| apply_shift_add(x, c))
                .collect(),
            (None, WindowPolicy::Rectangular) => frame.to_vec(),
            (None, _) => frame
                .iter()
                .zip(&self.values)
                .map(|(&x, &w)| fx_arith(x, quantize(w, x.format()), ArithOp::Mul))
                .collect(),
        }
    }
}

fn nearest_power_of_two(w: f64) -> ShiftAddApprox {
    if w <= 0.0 {
        return ShiftAddApprox::from_terms(Vec::new(), w).expect("empty term list");
    }
    let shift = (-w.log2()).round().clamp(0.0, 62.0) as u32;
    ShiftAddApprox::from_terms(
        vec![CsdTerm {
            negative: false,
            shift,
        }],
        w,
    )
    .expect("single term")
}

/// Window of length `n` under `policy`; `bit_width` bounds the CSD shifts.
pub fn window_coefficients(
    n: usize,
    policy: WindowPolicy,
    bit_width: u32,
) -> Result<Window, FrontendError> {
    if n < 8 {
        return Err(FrontendError::InvalidConfig(format!(
            "window length {n} is below 8"
        )));
    }
    let exact: Vec<f64> = hanning(n);
    let (values, shift_add) = match policy {
        WindowPolicy::Exact => (exact, None),
        WindowPolicy::Rectangular => (vec![1.0; n], None),
        WindowPolicy::SingleShift | WindowPolicy::Csd2 => {
            let approx: Vec<ShiftAddApprox> = exact
                .iter()
                .map(|&w| {
                    if policy == WindowPolicy::SingleShift {
                        nearest_power_of_two(w)
                    } else {
                        approx_csd(w, 2, bit_width.saturating_sub(1))
                    }
                })
                .collect();
            (
                approx.iter().map(ShiftAddApprox::value).collect(),
                Some(approx),
            )
        }
    };
    Ok(Window {
        policy,
        values,
        shift_add,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixedpoint::QFormat;

    fn data(bits: u32) -> QFormat {
        QFormat::data(bits).unwrap()
    }

    #[test]
    fn exact_endpoints_and_center() {
        let w: Vec<f64> = hanning(32);
        assert_eq!(w[0], 0.0);
        assert!(w[31].abs() < 1e-15);
        let odd: Vec<f64> = hanning(33);
        assert!((odd[16] - 1.0).abs() < 1e-15);
        // symmetric
        for i in 0..16 {
            assert!((w[i] - w[31 - i]).abs() < 1e-15);
        }
    }

    #[test]
    fn single_shift_is_powers_of_two() {
        let w = window_coefficients(32, WindowPolicy::SingleShift, 7).unwrap();
        for (i, v) in w.values.iter().enumerate() {
            if *v != 0.0 {
                assert_eq!(v.log2().fract(), 0.0, "coefficient {i} = {v}");
            }
        }
        assert_eq!(w.values[0], 0.0);
        let exact: Vec<f64> = hanning(32);
        // log-domain rounding: within a factor sqrt(2) of the exact value
        for (a, e) in w.values.iter().zip(&exact) {
            if *e > 1e-12 {
                assert!((a / e).log2().abs() <= 0.5 + 1e-12);
            }
        }
    }

    #[test]
    fn csd2_and_rectangular() {
        let w = window_coefficients(32, WindowPolicy::Csd2, 7).unwrap();
        assert!(w
            .shift_add
            .as_ref()
            .unwrap()
            .iter()
            .all(|a| a.terms().len() <= 2));
        assert!(w
            .shift_add
            .as_ref()
            .unwrap()
            .iter()
            .flat_map(|a| a.terms())
            .all(|t| t.shift <= 6));
        let r = window_coefficients(32, WindowPolicy::Rectangular, 7).unwrap();
        assert!(r.values.iter().all(|&v| v == 1.0));
        assert!(window_coefficients(4, WindowPolicy::Exact, 7).is_err());
    }

    #[test]
    fn shift_add_windowing_vs_direct_multiply_exhaustive_7bit() {
        // One floor per shifter against one rounded multiply by the same
        // (exactly representable) coefficient: |diff| <= terms ulp, so a
        // single-shift window stays within one ulp.
        let f = data(7);
        for policy in [WindowPolicy::SingleShift, WindowPolicy::Csd2] {
            let w = window_coefficients(32, policy, 7).unwrap();
            let coeffs = w.shift_add.as_ref().unwrap();
            for raw in f.raw_min()..=f.raw_max() {
                let x = f.from_raw(raw as i128);
                let frame = vec![x; 32];
                let sa = w.apply_fixed(&frame);
                for (i, (got, c)) in sa.iter().zip(coeffs).enumerate() {
                    let cq = quantize(c.value(), f);
                    if (cq.to_real() - c.value()).abs() > 0.0 {
                        // coefficient 1.0 is not representable in Q1.6; compare to the real product
                        let diff = (got.to_real() - x.to_real() * c.value()).abs();
                        assert!(
                            diff <= c.terms().len() as f64 * f.ulp(),
                            "{policy:?} raw={raw} i={i}"
                        );
                        continue;
                    }
                    let direct = fx_arith(x, cq, ArithOp::Mul);
                    let ulps = (got.raw() - direct.raw()).abs();
                    assert!(
                        ulps as usize <= c.terms().len().max(1),
                        "{policy:?} raw={raw} i={i} ulps={ulps}"
                    );
                    if policy == WindowPolicy::SingleShift {
                        assert!(ulps <= 1);
                    }
                }
            }
        }
    }

    #[test]
    fn all_ones_frame_equals_window() {
        let w = window_coefficients(32, WindowPolicy::Exact, 7).unwrap();
        let y = w.apply_float(&[1.0f64; 32]);
        assert_eq!(y, w.values);
    }
}
