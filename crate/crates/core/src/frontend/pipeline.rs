// SPDX-License-Identifier: Apache-2.0
//! End-to-end MFCC front end in either arithmetic mode.

use num_complex::Complex;
use serde::Serialize;

use super::dct::{dct_csd_coefficients, dct_ii_fixed};
use super::{
    build_mel_filterbank, dct_ii, fft_r22sdf, fft_r22sdf_fixed, frame_fixed, frame_float,
    log_compress, log_compress_fixed, mel_energies, mel_energies_fixed, power_spectrum,
    power_spectrum_fixed, preemphasis_fixed, preemphasis_float, window_coefficients, FixedComplex,
    FrontendError, MelFilterbank, Mode, PipelineConfig,
};
use crate::fixedpoint::quantize;
use crate::signal::SignalBuffer;
use crate::Real;

/// Log-mel spectrogram, one row of `n_mel` values per frame.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogMel<T> {
    pub n_mel: usize,
    pub frames: Vec<Vec<T>>,
}

impl<T: Real> LogMel<T> {
    fn frobenius(&self) -> f64 {
        self.frames
            .iter()
            .flatten()
            .map(|v| v.as_f64().powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MfccFrame {
    pub index: usize,
    pub coeffs: Vec<f64>,
    /// Raw accumulator words in fixed mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raw: Option<Vec<i64>>,
}

/// Intermediate results of one run. Power spectra are normalized by 1/N in both modes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineTrace<T> {
    pub power: Vec<Vec<T>>,
    pub log_mel: LogMel<T>,
    pub mfcc: Vec<MfccFrame>,
}

fn filterbank<T: Real>(cfg: &PipelineConfig) -> Result<MelFilterbank<T>, FrontendError> {
    build_mel_filterbank(cfg.sample_rate, cfg.fft_size, cfg.n_mel, cfg.mel_shape)
}

/// Floating-point oracle over samples of any precision.
pub fn analyze_float<T: Real>(
    x: &[T],
    cfg: &PipelineConfig,
) -> Result<PipelineTrace<T>, FrontendError> {
    cfg.validate()?;
    let n = cfg.fft_size;
    let window = window_coefficients(n, cfg.window, cfg.bit_width)?;
    let fb = filterbank::<T>(cfg)?;
    let floor = T::of(cfg.log_floor());
    let scale = T::one() / T::of(n as f64);
    let frames = frame_float(&preemphasis_float(x, cfg.preemphasis()), &window, cfg.hop())?;

    let mut power = Vec::with_capacity(frames.len());
    let mut log_mel = Vec::with_capacity(frames.len());
    let mut mfcc = Vec::with_capacity(frames.len());
    for (index, fr) in frames.iter().enumerate() {
        let cx: Vec<Complex<T>> = fr
            .iter()
            .map(|&v| Complex::new(v * scale, T::zero()))
            .collect();
        let p = power_spectrum(&fft_r22sdf(&cx)?);
        let lm = log_compress(&mel_energies(&p, &fb)?, floor);
        let c = dct_ii(&lm, cfg.n_mfcc)?;
        mfcc.push(MfccFrame {
            index,
            coeffs: c.iter().map(|v| v.as_f64()).collect(),
            raw: None,
        });
        power.push(p);
        log_mel.push(lm);
    }
    Ok(PipelineTrace {
        power,
        log_mel: LogMel {
            n_mel: cfg.n_mel,
            frames: log_mel,
        },
        mfcc,
    })
}

/// Bit-accurate fixed-point run; values are reported as reals.
pub fn analyze_fixed(x: &[f64], cfg: &PipelineConfig) -> Result<PipelineTrace<f64>, FrontendError> {
    cfg.validate()?;
    let data = cfg.data_format();
    let window = window_coefficients(cfg.fft_size, cfg.window, cfg.bit_width)?;
    let fb = filterbank::<f64>(cfg)?;
    let dct = dct_csd_coefficients(cfg.n_mel, cfg.n_mfcc, cfg.bit_width);
    let xq: Vec<_> = x.iter().map(|&v| quantize(v, data)).collect();
    let frames = frame_fixed(
        &preemphasis_fixed(&xq, cfg.preemphasis()),
        &window,
        cfg.hop(),
    )?;

    let mut power = Vec::with_capacity(frames.len());
    let mut log_mel = Vec::with_capacity(frames.len());
    let mut mfcc = Vec::with_capacity(frames.len());
    for (index, fr) in frames.iter().enumerate() {
        let cx: Vec<FixedComplex> = fr.iter().map(|v| FixedComplex::new(v.raw(), 0)).collect();
        let p = power_spectrum_fixed(&fft_r22sdf_fixed(&cx, data)?, data);
        let lm = log_compress_fixed(&mel_energies_fixed(&p, &fb, cfg.bit_width - 1)?);
        let c = dct_ii_fixed(&lm, &dct)?;
        mfcc.push(MfccFrame {
            index,
            coeffs: c.iter().map(|v| v.to_real()).collect(),
            raw: Some(c.iter().map(|v| v.raw()).collect()),
        });
        power.push(p.iter().map(|v| v.to_real()).collect());
        log_mel.push(lm.iter().map(|v| v.to_real()).collect());
    }
    Ok(PipelineTrace {
        power,
        log_mel: LogMel {
            n_mel: cfg.n_mel,
            frames: log_mel,
        },
        mfcc,
    })
}

/// Runs the configured mode on a signal at the configured rate.
pub fn analyze(
    s: &SignalBuffer,
    cfg: &PipelineConfig,
) -> Result<PipelineTrace<f64>, FrontendError> {
    if (s.sample_rate() - cfg.sample_rate).abs() > 1e-6 {
        return Err(FrontendError::SampleRateMismatch {
            signal: s.sample_rate(),
            config: cfg.sample_rate,
        });
    }
    match cfg.mode {
        Mode::Float => analyze_float(s.samples(), cfg),
        Mode::Fixed => analyze_fixed(s.samples(), cfg),
    }
}

pub fn mfcc_pipeline(
    s: &SignalBuffer,
    cfg: &PipelineConfig,
) -> Result<Vec<MfccFrame>, FrontendError> {
    analyze(s, cfg).map(|t| t.mfcc)
}

/// ||A - B||_F / ||B||_F with B the reference.
pub fn spectrogram_distance<T: Real>(a: &LogMel<T>, b: &LogMel<T>) -> Result<f64, FrontendError> {
    if a.frames.len() != b.frames.len() {
        return Err(FrontendError::DimensionMismatch {
            expected: b.frames.len(),
            got: a.frames.len(),
        });
    }
    let mut diff = 0.0;
    for (ra, rb) in a.frames.iter().zip(&b.frames) {
        if ra.len() != rb.len() {
            return Err(FrontendError::DimensionMismatch {
                expected: rb.len(),
                got: ra.len(),
            });
        }
        diff += ra
            .iter()
            .zip(rb)
            .map(|(&x, &y)| (x - y).as_f64().powi(2))
            .sum::<f64>();
    }
    let norm = b.frobenius();
    if norm == 0.0 {
        return Err(FrontendError::ZeroReference);
    }
    Ok(diff.sqrt() / norm)
}
