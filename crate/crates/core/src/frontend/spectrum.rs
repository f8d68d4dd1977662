// SPDX-License-Identifier: Apache-2.0
//! One-sided power spectrum |X[k]|², k = 0..=N/2.

use num_complex::Complex;

use super::{power_format, FixedComplex};
use crate::fixedpoint::{FixedValue, QFormat};
use crate::Real;

pub fn power_spectrum<T: Real>(spectrum: &[Complex<T>]) -> Vec<T> {
    spectrum
        .iter()
        .take(spectrum.len() / 2 + 1)
        .map(|c| c.norm_sqr())
        .collect()
}

/// Fixed squares: the product of two Q(b, b-1) values already has the
/// power format's 2(b-1) fraction bits, so only saturation applies.
pub fn power_spectrum_fixed(spectrum: &[FixedComplex], data: QFormat) -> Vec<FixedValue> {
    let pf = power_format(data.total_bits());
    spectrum
        .iter()
        .take(spectrum.len() / 2 + 1)
        .map(|c| {
            let (re, im) = (c.re as i128, c.im as i128);
            pf.from_raw(re * re + im * im)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{dft_reference, fft_r22sdf};

    #[test]
    fn impulse_and_zero() {
        let mut x = vec![Complex::new(0.0f64, 0.0); 32];
        x[0] = Complex::new(0.5, 0.0);
        let p = power_spectrum(&fft_r22sdf(&x).unwrap());
        assert_eq!(p.len(), 17);
        assert!(p.iter().all(|&v| (v - 0.25).abs() < 1e-12));
        let z = power_spectrum(&fft_r22sdf(&vec![Complex::new(0.0f64, 0.0); 32]).unwrap());
        assert!(z.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn parseval_on_real_input() {
        // real input: interior bins count twice
        let n = 64;
        let x: Vec<Complex<f64>> = (0..n)
            .map(|i| Complex::new(((i * 37) % 11) as f64 / 11.0 - 0.4, 0.0))
            .collect();
        let p = power_spectrum(&dft_reference(&x));
        let sum: f64 = p[0] + p[n / 2] + 2.0 * p[1..n / 2].iter().sum::<f64>();
        let energy: f64 = x.iter().map(|c| c.norm_sqr()).sum();
        assert!((sum / n as f64 - energy).abs() < 1e-9);
    }

    #[test]
    fn fixed_square_is_exact_or_saturated() {
        let d = QFormat::data(7).unwrap();
        let s = [
            FixedComplex::new(32, -16),
            FixedComplex::new(-64, -64),
            FixedComplex::new(0, 0),
            FixedComplex::new(1, 0),
        ];
        let p = power_spectrum_fixed(&s, d);
        assert_eq!(p.len(), 3);
        assert_eq!(p[0].to_real(), 0.25 + 0.0625);
        assert_eq!(p[1].raw(), p[1].format().raw_max());
        assert_eq!(p[2].raw(), 0);
    }
}
