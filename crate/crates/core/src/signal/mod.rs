// SPDX-License-Identifier: Apache-2.0
//! Audio buffers, WAV I/O, deterministic test signals and spectral measurements.

mod generate;
mod spectral;
mod wav;

pub use generate::{gen_signal, SignalKind, SpeechlikeParams, Tone, SPEECH_TONES_HZ};
pub use spectral::{band_power_fraction, decimate, design_lowpass, periodogram, spectral_leakage};
pub use wav::{decode_wav, encode_wav, read_wav, write_wav};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("unsupported WAV format: {0}")]
    UnsupportedFormat(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid signal parameters: {0}")]
    InvalidParams(String),
    #[error("signal is empty")]
    EmptySignal,
    #[error("invalid decimation factor {0}")]
    InvalidFactor(usize),
    #[error("cutoff {cutoff} Hz outside (0, {nyquist}]")]
    InvalidCutoff { cutoff: f64, nyquist: f64 },
    #[error("window is degenerate (all zeros)")]
    DegenerateWindow,
    #[error("window length {0} is below the minimum of 8")]
    WindowTooShort(usize),
}

/// Mono audio with samples in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct SignalBuffer {
    samples: Vec<f64>,
    sample_rate: f64,
}

impl SignalBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self, SignalError> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(SignalError::InvalidParams(format!(
                "sample rate {sample_rate}"
            )));
        }
        if let Some(bad) = samples.iter().find(|s| !s.is_finite() || s.abs() > 1.0) {
            return Err(SignalError::InvalidParams(format!(
                "sample {bad} outside [-1, 1]"
            )));
        }
        Ok(SignalBuffer {
            samples,
            sample_rate,
        })
    }

    /// Like [`SignalBuffer::new`] but clips samples into [-1, 1] (NaN becomes 0).
    pub fn clipped(samples: Vec<f64>, sample_rate: f64) -> Result<Self, SignalError> {
        let samples = samples
            .into_iter()
            .map(|s| if s.is_nan() { 0.0 } else { s.clamp(-1.0, 1.0) })
            .collect();
        SignalBuffer::new(samples, sample_rate)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s * s).sum()
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.abs()))
    }
}
