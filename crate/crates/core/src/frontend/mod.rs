// SPDX-License-Identifier: Apache-2.0
//! The MFCC front end: pre-emphasis, framing and windowing, R2²SDF FFT,
//! power spectrum, mel filterbank, log compression and DCT.
//!
//! Every stage has a floating-point oracle and a bit-accurate fixed-point
//! implementation. The fixed FFT halves its output at every butterfly stage,
//! so both modes report spectra normalized by 1/N to stay comparable.

mod config;
mod dct;
mod fft;
mod frame;
mod log;
mod mel;
mod pipeline;
mod preemphasis;
mod spectrum;
mod window;

pub use config::{
    power_format, MelShape, Mode, PipelineConfig, PreemphasisConfig, WindowPolicy, FFT_SIZES,
};
pub use dct::{
    dct_coefficients, dct_csd_coefficients, dct_ii, dct_ii_fixed, dct_ii_with, mfcc_format,
    MFCC_FRAC_BITS,
};
pub use fft::{dft_reference, fft_r22sdf, fft_r22sdf_fixed, FixedComplex};
pub use frame::{frame_count, frame_fixed, frame_float};
pub use log::{log2_fixed_raw, log_compress, log_compress_fixed, log_format, LOG_FRAC_BITS};
pub use mel::{
    build_mel_filterbank, hz_to_mel, mel_energies, mel_energies_fixed, mel_map, mel_to_hz,
    MelDirection, MelFilterbank,
};
pub use pipeline::{
    analyze, analyze_fixed, analyze_float, mfcc_pipeline, spectrogram_distance, LogMel, MfccFrame,
    PipelineTrace,
};
pub use preemphasis::{preemphasis_fixed, preemphasis_float};
pub use spectrum::{power_spectrum, power_spectrum_fixed};
pub use window::{hanning, window_coefficients, Window};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrontendError {
    #[error("invalid pipeline configuration: {0}")]
    InvalidConfig(String),
    #[error("signal of {len} samples is shorter than one {frame}-sample frame")]
    SignalTooShort { len: usize, frame: usize },
    #[error("FFT size {0} is not one of 16, 32, 64, 128, 256")]
    InvalidSize(usize),
    #[error("{n_mel} mel filters exceed the limit of {max}")]
    TooManyFilters { n_mel: usize, max: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("reference spectrogram has zero norm")]
    ZeroReference,
    #[error("negative input {0} to the mel map")]
    NegativeInput(f64),
    #[error("signal sample rate {signal} Hz differs from configured {config} Hz")]
    SampleRateMismatch { signal: f64, config: f64 },
}
