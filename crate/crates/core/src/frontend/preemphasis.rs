// SPDX-License-Identifier: Apache-2.0
//! First-order high-pass y[n] = x[n] - alpha * x[n-1], with x[-1] = 0.

use super::PreemphasisConfig;
use crate::fixedpoint::{apply_shift_add, fx_arith, ArithOp, FixedValue, ShiftAddApprox};
use crate::Real;

pub fn preemphasis_float<T: Real>(x: &[T], cfg: PreemphasisConfig) -> Vec<T> {
    let alpha = T::of(cfg.alpha());
    let mut prev = T::zero();
    x.iter()
        .map(|&v| {
            let y = v - alpha * prev;
            prev = v;
            y
        })
        .collect()
}

/// Fixed-point form: alpha * x[n-1] = x[n-1] - (x[n-1] >> k), one subtractor and one shifter.
pub fn preemphasis_fixed(x: &[FixedValue], cfg: PreemphasisConfig) -> Vec<FixedValue> {
    let Some(first) = x.first() else {
        return Vec::new();
    };
    let alpha = ShiftAddApprox::one_minus_pow2(cfg.k);
    let mut prev = FixedValue::zero(first.format());
    x.iter()
        .map(|&v| {
            let y = fx_arith(v, apply_shift_add(prev, &alpha), ArithOp::Sub);
            prev = v;
            y
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixedpoint::{quantize, QFormat};

    #[test]
    fn impulse_response_float() {
        let cfg = PreemphasisConfig::new(5).unwrap();
        let y = preemphasis_float(&[1.0, 0.0, 0.0, 0.0], cfg);
        assert_eq!(y, vec![1.0, -31.0 / 32.0, 0.0, 0.0]);
        let y32 = preemphasis_float(&[1.0f32, 0.0, 0.0], cfg);
        assert_eq!(y32, vec![1.0f32, -0.96875, 0.0]);
    }

    #[test]
    fn impulse_response_fixed() {
        // Q2.5 holds 1.0 exactly
        let f = QFormat::new(7, 5, true).unwrap();
        let x: Vec<_> = [1.0, 0.0, 0.0].iter().map(|&v| quantize(v, f)).collect();
        let y: Vec<f64> = preemphasis_fixed(&x, PreemphasisConfig::new(5).unwrap())
            .iter()
            .map(|v| v.to_real())
            .collect();
        assert_eq!(y, vec![1.0, -0.96875, 0.0]);
    }

    #[test]
    fn constant_steady_state_is_two_to_minus_k() {
        for k in 1..=6 {
            let cfg = PreemphasisConfig::new(k).unwrap();
            let c = 0.5;
            let y = preemphasis_float(&[c; 16], cfg);
            assert_eq!(y[0], c);
            assert!(y[1..].iter().all(|&v| v == c * (-(k as f64)).exp2()));

            let f = QFormat::data(12).unwrap();
            let xq = vec![quantize(c, f); 16];
            let yq = preemphasis_fixed(&xq, cfg);
            assert!(yq[1..]
                .iter()
                .all(|v| v.to_real() == c * (-(k as f64)).exp2()));
        }
    }

    #[test]
    fn empty_input() {
        assert!(preemphasis_fixed(&[], PreemphasisConfig::new(5).unwrap()).is_empty());
    }
}
