// SPDX-License-Identifier: Apache-2.0
//! Base-2 log compression with a floor.

use crate::fixedpoint::{round_shift, FixedValue, QFormat};
use crate::Real;

/// Fraction bits of the fixed log output.
pub const LOG_FRAC_BITS: u32 = 4;

/// Log output format, Q12.4.
pub fn log_format() -> QFormat {
    QFormat::new(16, LOG_FRAC_BITS, true).expect("valid format")
}

const TABLE_BITS: u32 = 12;

/// round(log2(1 + i/16) * 2^12), i = 0..=16.
const LOG2_TABLE: [i64; 17] = [
    0, 358, 696, 1016, 1319, 1607, 1882, 2145, 2396, 2637, 2869, 3092, 3307, 3514, 3715, 3908, 4096,
];

/// log2(max(e, floor)).
pub fn log_compress<T: Real>(energies: &[T], floor: T) -> Vec<T> {
    energies.iter().map(|&e| e.max(floor).log2()).collect()
}

/// Fixed log2 of `raw * 2^-frac_bits`, returned with `LOG_FRAC_BITS`
/// fraction bits. Non-positive inputs are floored to one raw step. The
/// integer part is the MSB position; the fraction is interpolated between
/// 16 table points of log2(1 + m).
pub fn log2_fixed_raw(raw: i64, frac_bits: u32) -> i64 {
    let v = raw.max(1) as u64;
    let msb = 63 - v.leading_zeros();
    let rest = v - (1u64 << msb);
    // mantissa fraction normalized to 16 bits
    let m16 = if msb >= 16 {
        rest >> (msb - 16)
    } else {
        rest << (16 - msb)
    };
    let idx = (m16 >> TABLE_BITS) as usize;
    let within = (m16 & ((1 << TABLE_BITS) - 1)) as i64;
    let (lo, hi) = (LOG2_TABLE[idx], LOG2_TABLE[idx + 1]);
    let frac = lo + (((hi - lo) * within) >> TABLE_BITS);
    let full = ((msb as i64 - frac_bits as i64) << TABLE_BITS) + frac;
    round_shift(full as i128, TABLE_BITS - LOG_FRAC_BITS) as i64
}

/// Fixed log compression into the `log_format()`; the floor is one step of the input format.
pub fn log_compress_fixed(energies: &[FixedValue]) -> Vec<FixedValue> {
    let out = log_format();
    energies
        .iter()
        .map(|e| out.from_raw(log2_fixed_raw(e.raw(), e.format().frac_bits()) as i128))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixedpoint::quantize;

    #[test]
    fn table_matches_formula() {
        for (i, &t) in LOG2_TABLE.iter().enumerate() {
            assert_eq!(t, ((1.0 + i as f64 / 16.0).log2() * 4096.0).round() as i64);
        }
    }

    #[test]
    fn float_values() {
        let y = log_compress(&[1.0f64, 8.0, 0.0, -3.0], 2f64.powi(-12));
        assert_eq!(y, vec![0.0, 3.0, -12.0, -12.0]);
    }

    #[test]
    fn powers_of_two_exact() {
        for k in -12..=18i32 {
            let raw = 1i64 << (k + 12);
            assert_eq!(log2_fixed_raw(raw, 12), (k as i64) << LOG_FRAC_BITS);
        }
        assert_eq!(log2_fixed_raw(0, 12), -12 << LOG_FRAC_BITS);
        assert_eq!(log2_fixed_raw(-5, 12), -12 << LOG_FRAC_BITS);
    }

    #[test]
    fn sweep_error_within_sixteenth() {
        // geometric grid over [1, 2^20] plus every integer below 4096
        let mut worst = 0.0f64;
        let mut check = |raw: i64| {
            let got = log2_fixed_raw(raw, 0) as f64 / 16.0;
            worst = worst.max((got - (raw as f64).log2()).abs());
        };
        (1..4096).for_each(&mut check);
        let mut x = 1.0f64;
        while x <= 1048576.0 {
            check(x as i64);
            x *= 1.0009;
        }
        assert!(worst <= 1.0 / 16.0, "worst {worst}");
    }

    #[test]
    fn fixed_compress_uses_input_floor() {
        let pf = QFormat::new(14, 12, true).unwrap();
        let e = [quantize(0.0, pf), quantize(1.0, pf), quantize(0.25, pf)];
        let y: Vec<f64> = log_compress_fixed(&e).iter().map(|v| v.to_real()).collect();
        assert_eq!(y, vec![-12.0, 0.0, -2.0]);
    }
}
