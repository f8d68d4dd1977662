// SPDX-License-Identifier: Apache-2.0
//! Spectral measurements over whole buffers and window sequences.

use std::f64::consts::PI;

use num_complex::Complex;
use rustfft::FftPlanner;

use super::{SignalBuffer, SignalError};
use crate::Real;

/// One-sided periodogram: power per bin k = 0..=n/2, interior bins doubled
/// so that the bins sum to the total signal energy times n.
pub fn periodogram(s: &SignalBuffer) -> Vec<f64> {
    let n = s.len();
    if n == 0 {
        return Vec::new();
    }
    let mut buf: Vec<Complex<f64>> = s.samples().iter().map(|&x| Complex::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    (0..=n / 2)
        .map(|k| {
            let p = buf[k].norm_sqr();
            if k == 0 || (n.is_multiple_of(2) && k == n / 2) {
                p
            } else {
                2.0 * p
            }
        })
        .collect()
}

/// Fraction of periodogram power in bins at or below `cutoff` (DC included).
pub fn band_power_fraction(s: &SignalBuffer, cutoff: f64) -> Result<f64, SignalError> {
    let nyquist = s.sample_rate() / 2.0;
    if !(cutoff > 0.0 && cutoff <= nyquist) {
        return Err(SignalError::InvalidCutoff { cutoff, nyquist });
    }
    if s.is_empty() {
        return Err(SignalError::EmptySignal);
    }
    let p = periodogram(s);
    let total: f64 = p.iter().sum();
    if total == 0.0 {
        return Err(SignalError::EmptySignal);
    }
    let bin_hz = s.sample_rate() / s.len() as f64;
    let below: f64 = p
        .iter()
        .enumerate()
        .filter(|(k, _)| *k as f64 * bin_hz <= cutoff)
        .map(|(_, v)| v)
        .sum();
    Ok((below / total).clamp(0.0, 1.0))
}

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let half = x / 2.0;
    for k in 1..64 {
        term *= (half / k as f64).powi(2);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Kaiser-windowed sinc low-pass with unit DC gain.
///
/// `cutoff` and `transition` are fractions of the sample rate; the design
/// targets 60 dB of stopband attenuation.
pub fn design_lowpass(cutoff: f64, transition: f64) -> Vec<f64> {
    const ATTEN_DB: f64 = 60.0;
    let beta = 0.1102 * (ATTEN_DB - 8.7);
    let taps = ((ATTEN_DB - 8.0) / (2.285 * 2.0 * PI * transition)).ceil() as usize;
    let taps = taps | 1;
    let center = (taps / 2) as f64;
    let i0_beta = bessel_i0(beta);
    let mut h: Vec<f64> = (0..taps)
        .map(|i| {
            let m = i as f64 - center;
            let sinc = if m == 0.0 {
                2.0 * cutoff
            } else {
                (2.0 * PI * cutoff * m).sin() / (PI * m)
            };
            let r = m / center.max(1.0);
            let w = bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / i0_beta;
            sinc * w
        })
        .collect();
    let dc: f64 = h.iter().sum();
    h.iter_mut().for_each(|v| *v /= dc);
    h
}

/// Anti-alias filter then keep every `factor`-th sample.
///
/// The low-pass cuts off at 0.45 of the output Nyquist frequency and is
/// applied zero-phase (centered), so output sample i lines up with input
/// sample i * factor.
pub fn decimate(s: &SignalBuffer, factor: usize) -> Result<SignalBuffer, SignalError> {
    if factor == 0 {
        return Err(SignalError::InvalidFactor(factor));
    }
    if factor == 1 {
        return Ok(s.clone());
    }
    let out_nyquist = 0.5 / factor as f64;
    let cutoff = 0.45 * out_nyquist;
    let h = design_lowpass(cutoff, cutoff * 0.5);
    let center = h.len() / 2;
    let x = s.samples();
    let out: Vec<f64> = (0..x.len())
        .step_by(factor)
        .map(|n| {
            h.iter()
                .enumerate()
                .filter_map(|(m, hm)| {
                    let idx = n as isize + center as isize - m as isize;
                    (idx >= 0 && (idx as usize) < x.len()).then(|| hm * x[idx as usize])
                })
                .sum()
        })
        .collect();
    SignalBuffer::clipped(out, s.sample_rate() / factor as f64)
}

fn circular_distance(k: f64, f: f64, n: f64) -> f64 {
    let d = (k - f).rem_euclid(n);
    d.min(n - d)
}

/// Leakage of a window: the worst, over a tone at bin N/4 and one at bin
/// N/4 + 1/2, of the windowed-tone DFT energy outside the bins within one
/// bin of the tone and of its image, divided by the total energy.
pub fn spectral_leakage<T: Real>(window: &[T]) -> Result<f64, SignalError> {
    let n = window.len();
    if n < 8 {
        return Err(SignalError::WindowTooShort(n));
    }
    if window.iter().all(|w| w.is_zero()) {
        return Err(SignalError::DegenerateWindow);
    }
    let nf = n as f64;
    let nt = T::of(nf);
    let worst = [nf / 4.0, nf / 4.0 + 0.5]
        .into_iter()
        .map(|f| {
            let ft = T::of(f);
            let x: Vec<T> = window
                .iter()
                .enumerate()
                .map(|(i, &w)| w * (T::TAU() * ft * T::of(i as f64) / nt).cos())
                .collect();
            let (mut inside, mut total) = (T::zero(), T::zero());
            for k in 0..n {
                let kt = T::of(k as f64);
                let (mut re, mut im) = (T::zero(), T::zero());
                for (i, &xi) in x.iter().enumerate() {
                    let ang = T::TAU() * kt * T::of(i as f64) / nt;
                    re += xi * ang.cos();
                    im -= xi * ang.sin();
                }
                let p = re * re + im * im;
                total += p;
                let kf = k as f64;
                if circular_distance(kf, f, nf) <= 1.0 || circular_distance(kf, nf - f, nf) <= 1.0 {
                    inside += p;
                }
            }
            if total.is_zero() {
                0.0
            } else {
                ((total - inside) / total).as_f64()
            }
        })
        .fold(0.0, f64::max);
    Ok(worst.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{gen_signal, SignalKind, Tone};

    fn sine(freq: f64, sr: f64, n: usize) -> SignalBuffer {
        gen_signal(
            &SignalKind::Sine {
                freq,
                amp: 0.5,
                phase: 0.3,
            },
            0,
            sr,
            n,
        )
        .unwrap()
    }

    #[test]
    fn band_power_examples() {
        assert!(
            (band_power_fraction(&sine(1000.0, 8000.0, 8000), 2000.0).unwrap() - 1.0).abs() < 1e-6
        );
        assert!(band_power_fraction(&sine(5000.0, 16000.0, 16000), 4000.0).unwrap() < 1e-6);
        let two = gen_signal(
            &SignalKind::Multitone {
                tones: vec![
                    Tone {
                        freq: 1000.0,
                        amp: 0.4,
                    },
                    Tone {
                        freq: 6000.0,
                        amp: 0.4,
                    },
                ],
            },
            1,
            16000.0,
            16000,
        )
        .unwrap();
        assert!((band_power_fraction(&two, 4000.0).unwrap() - 0.5).abs() < 0.01);
    }

    #[test]
    fn band_power_errors_and_nyquist() {
        let s = sine(1000.0, 8000.0, 100);
        assert!(matches!(
            band_power_fraction(&s, 0.0),
            Err(SignalError::InvalidCutoff { .. })
        ));
        assert!(matches!(
            band_power_fraction(&s, 4001.0),
            Err(SignalError::InvalidCutoff { .. })
        ));
        assert!((band_power_fraction(&s, 4000.0).unwrap() - 1.0).abs() < 1e-12);
        let empty = SignalBuffer::new(vec![], 8000.0).unwrap();
        assert!(matches!(
            band_power_fraction(&empty, 1000.0),
            Err(SignalError::EmptySignal)
        ));
        let silent = SignalBuffer::new(vec![0.0; 16], 8000.0).unwrap();
        assert!(matches!(
            band_power_fraction(&silent, 1000.0),
            Err(SignalError::EmptySignal)
        ));
    }

    /// Filter magnitude at `f` (fraction of sample rate) by direct evaluation.
    fn response(h: &[f64], f: f64) -> f64 {
        let (re, im) = h.iter().enumerate().fold((0.0, 0.0), |(re, im), (m, hm)| {
            let a = 2.0 * PI * f * m as f64;
            (re + hm * a.cos(), im - hm * a.sin())
        });
        (re * re + im * im).sqrt()
    }

    #[test]
    fn decimate_identity_and_invalid() {
        let s = sine(1000.0, 16000.0, 256);
        assert_eq!(decimate(&s, 1).unwrap(), s);
        assert!(matches!(
            decimate(&s, 0),
            Err(SignalError::InvalidFactor(0))
        ));
    }

    #[test]
    fn decimate_passband_tone() {
        let s = sine(1000.0, 16000.0, 16000);
        let d = decimate(&s, 2).unwrap();
        assert_eq!(d.sample_rate(), 8000.0);
        assert_eq!(d.len(), 8000);
        let h = design_lowpass(0.45 * 0.25, 0.45 * 0.25 * 0.5);
        let gain = response(&h, 1000.0 / 16000.0);
        assert!((gain - 1.0).abs() < 0.05, "designed gain {gain}");
        // steady-state amplitude away from the edges
        let mid = &d.samples()[200..7800];
        let amp = (2.0 * mid.iter().map(|v| v * v).sum::<f64>() / mid.len() as f64).sqrt();
        assert!((amp / 0.5 - 1.0).abs() < 0.05, "amplitude {amp}");
        assert!((amp - 0.5 * gain).abs() < 1e-3);
    }

    #[test]
    fn decimate_rejects_alias() {
        let s = sine(7000.0, 16000.0, 16000);
        let h = design_lowpass(0.45 * 0.25, 0.45 * 0.25 * 0.5);
        assert!(20.0 * response(&h, 7000.0 / 16000.0).log10() <= -40.0);
        let d = decimate(&s, 2).unwrap();
        let mid = &d.samples()[200..7800];
        let out_power = mid.iter().map(|v| v * v).sum::<f64>() / mid.len() as f64;
        let in_power = s.energy() / s.len() as f64;
        assert!(10.0 * (out_power / in_power).log10() <= -40.0);
    }

    fn hanning(n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / (n as f64 - 1.0)).cos()))
            .collect()
    }

    #[test]
    fn leakage_examples() {
        let rect = vec![1.0f64; 32];
        let l = spectral_leakage(&rect).unwrap();
        assert!(l > 0.10, "rect {l}");
        // the on-bin tone alone: an integer-period cosine sits in bins N/4 and 3N/4
        let n = 32;
        let on_bin_only = {
            let x: Vec<f64> = (0..n)
                .map(|i| (2.0 * PI * 8.0 * i as f64 / n as f64).cos())
                .collect();
            let mut outside = 0.0;
            for k in 0..n {
                let (re, im) = x.iter().enumerate().fold((0.0, 0.0), |(re, im), (i, v)| {
                    let a = 2.0 * PI * (k * i) as f64 / n as f64;
                    (re + v * a.cos(), im - v * a.sin())
                });
                if !(7..=9).contains(&k) && !(23..=25).contains(&k) {
                    outside += re * re + im * im;
                }
            }
            outside
        };
        assert!(on_bin_only < 1e-20);
        let h = spectral_leakage(&hanning(32)).unwrap();
        assert!(h <= 0.10, "hanning {h}");
    }

    #[test]
    fn leakage_errors_and_scaling() {
        assert!(matches!(
            spectral_leakage(&[0.0f64; 16]),
            Err(SignalError::DegenerateWindow)
        ));
        assert!(matches!(
            spectral_leakage(&[1.0f64; 4]),
            Err(SignalError::WindowTooShort(4))
        ));
        let w = hanning(64);
        let scaled: Vec<f64> = w.iter().map(|v| v * 3.7).collect();
        let a = spectral_leakage(&w).unwrap();
        let b = spectral_leakage(&scaled).unwrap();
        assert!((a - b).abs() < 1e-12);
        let w32: Vec<f32> = hanning(32).iter().map(|&v| v as f32).collect();
        assert!(
            (spectral_leakage(&w32).unwrap() - spectral_leakage(&hanning(32)).unwrap()).abs()
                < 1e-4
        );
    }
}
