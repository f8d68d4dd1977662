// SPDX-License-Identifier: Apache-2.0
//! Mel scale and the mel filterbank.

use serde::{Deserialize, Serialize};

use super::{FrontendError, MelShape};
use crate::fixedpoint::{round_shift, FixedValue};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MelDirection {
    ToMel,
    ToHz,
}

pub fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

pub fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

pub fn mel_map(x: f64, direction: MelDirection) -> Result<f64, FrontendError> {
    if x.is_nan() || x < 0.0 {
        return Err(FrontendError::NegativeInput(x));
    }
    Ok(match direction {
        MelDirection::ToMel => hz_to_mel(x),
        MelDirection::ToHz => mel_to_hz(x),
    })
}

/// `n_mel` filters over the N/2 + 1 one-sided bins.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MelFilterbank<T> {
    pub shape: MelShape,
    pub sample_rate: f64,
    pub fft_size: usize,
    /// Band edges in Hz, equally spaced in mel. Rectangular filters use n_mel + 1
    /// edges. Triangular filters use n_mel + 2 points: the rectangular band
    /// centers plus the two outer feet clamped to [0, sr/2].
    pub edges_hz: Vec<f64>,
    /// Row-major, `n_mel` rows of N/2 + 1 weights.
    pub weights: Vec<Vec<T>>,
}

impl<T: Real> MelFilterbank<T> {
    pub fn n_mel(&self) -> usize {
        self.weights.len()
    }

    pub fn n_bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    /// Indices of the bins with nonzero weight in filter `j`.
    pub fn support(&self, j: usize) -> Vec<usize> {
        self.weights[j]
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .map(|(k, _)| k)
            .collect()
    }
}

/// Contiguous bin ranges, one per band. A band whose edges hold no bin
/// center borrows the next free bin, so every filter is nonempty and every
/// bin belongs to exactly one filter. Needs `n_mel <= N/2`.
fn rectangular_rows(edges_hz: &[f64], centers: &[f64]) -> Vec<Vec<f64>> {
    let n_mel = edges_hz.len() - 1;
    let bins = centers.len();
    // first bin of each band, forced strictly increasing with room for the rest
    let mut start: Vec<usize> = (0..n_mel)
        .map(|j| {
            if j == 0 {
                0
            } else {
                centers.partition_point(|&f| f < edges_hz[j])
            }
        })
        .collect();
    for j in 1..n_mel {
        start[j] = start[j].max(start[j - 1] + 1);
    }
    for (j, s) in start.iter_mut().enumerate() {
        *s = (*s).min(bins - (n_mel - j));
    }
    start.push(bins);
    (0..n_mel)
        .map(|j| {
            (0..bins)
                .map(|k| {
                    if (start[j]..start[j + 1]).contains(&k) {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// Triangle over `[lo, mid, hi]`; one that covers no bin center falls back
/// to the bin nearest its peak.
fn triangular_row(lmh: &[f64], centers: &[f64], bin_hz: f64) -> Vec<f64> {
    let (lo, mid, hi) = (lmh[0], lmh[1], lmh[2]);
    let row: Vec<f64> = centers
        .iter()
        .map(|&f| {
            if f >= lo && f <= mid {
                (f - lo) / (mid - lo)
            } else if f > mid && f <= hi {
                (hi - f) / (hi - mid)
            } else {
                0.0
            }
        })
        .collect();
    if row.iter().any(|&w| w != 0.0) {
        return row;
    }
    let k = ((mid / bin_hz).round() as usize).min(centers.len() - 1);
    (0..centers.len())
        .map(|i| if i == k { 1.0 } else { 0.0 })
        .collect()
}

/// Builds the filterbank. Rectangular filters partition bins 0..=N/2.
pub fn build_mel_filterbank<T: Real>(
    sample_rate: f64,
    fft_size: usize,
    n_mel: usize,
    shape: MelShape,
) -> Result<MelFilterbank<T>, FrontendError> {
    let max = fft_size / 2;
    if n_mel == 0 || n_mel > max {
        return Err(FrontendError::TooManyFilters { n_mel, max });
    }
    let top = hz_to_mel(sample_rate / 2.0);
    let step = top / n_mel as f64;
    let edges_hz: Vec<f64> = match shape {
        MelShape::Rectangular => (0..=n_mel).map(|i| mel_to_hz(step * i as f64)).collect(),
        // peaks at the rectangular band centers, feet at the neighbouring centers
        MelShape::Triangular => (0..n_mel + 2)
            .map(|i| mel_to_hz((step * (i as f64 - 0.5)).clamp(0.0, top)))
            .collect(),
    };
    let bin_hz = sample_rate / fft_size as f64;
    let centers: Vec<f64> = (0..=max).map(|k| k as f64 * bin_hz).collect();

    let weights: Vec<Vec<f64>> = match shape {
        MelShape::Rectangular => rectangular_rows(&edges_hz, &centers),
        MelShape::Triangular => (0..n_mel)
            .map(|j| triangular_row(&edges_hz[j..j + 3], &centers, bin_hz))
            .collect(),
    };
    let weights = weights
        .into_iter()
        .map(|row| row.into_iter().map(T::of).collect())
        .collect();
    Ok(MelFilterbank {
        shape,
        sample_rate,
        fft_size,
        edges_hz,
        weights,
    })
}

fn check_len(got: usize, expected: usize) -> Result<(), FrontendError> {
    if got == expected {
        Ok(())
    } else {
        Err(FrontendError::DimensionMismatch { expected, got })
    }
}

pub fn mel_energies<T: Real>(power: &[T], fb: &MelFilterbank<T>) -> Result<Vec<T>, FrontendError> {
    check_len(power.len(), fb.n_bins())?;
    Ok(fb
        .weights
        .iter()
        .map(|row| {
            row.iter()
                .zip(power)
                .fold(T::zero(), |acc, (&w, &p)| acc + w * p)
        })
        .collect())
}

/// Fixed mel energies in the power format. Weights are quantized to
/// `weight_frac_bits` fraction bits; the rectangular weight 1 makes every
/// product exact, so rectangular filters reduce to saturating bin sums.
pub fn mel_energies_fixed<T: Real>(
    power: &[FixedValue],
    fb: &MelFilterbank<T>,
    weight_frac_bits: u32,
) -> Result<Vec<FixedValue>, FrontendError> {
    check_len(power.len(), fb.n_bins())?;
    let Some(fmt) = power.first().map(|p| p.format()) else {
        return Ok(Vec::new());
    };
    let scale = (weight_frac_bits as f64).exp2();
    Ok(fb
        .weights
        .iter()
        .map(|row| {
            let acc = row.iter().zip(power).fold(0i128, |acc, (&w, p)| {
                let wq = (w.as_f64() * scale).round() as i128;
                let term = round_shift(p.raw() as i128 * wq, weight_frac_bits);
                fmt.saturate(acc + term) as i128
            });
            fmt.from_raw(acc)
        })
        .collect())
}
