// SPDX-License-Identifier: Apache-2.0
//! Keyword-spotting front-end model and design-space exploration.
//!
//! The crate is split the same way the hardware is reasoned about:
//!
//! * [`fixedpoint`]: Q-format values, saturating arithmetic and
//!   shift-and-add (CSD) constants.
//! * [`signal`]: audio buffers, WAV I/O, deterministic test signals and
//!   spectral measurements.
//! * [`frontend`]: the MFCC pipeline in bit-accurate fixed-point and
//!   floating-point oracle modes.
//! * [`dse`]: the architecture-phase decisions, cost model and Pareto
//!   utilities.
//!
//! Floating-point oracles are generic over [`Real`] (`f32` or `f64`); the
//! aliases below pin the `f64` instantiations used by the pipeline.

pub mod dse;
pub mod fixedpoint;
pub mod frontend;
pub mod scalar;
pub mod signal;

pub use scalar::Real;

/// Complex sample used by the floating-point FFT path.
pub type Complex64 = num_complex::Complex<f64>;
/// Complex sample for single-precision oracle runs.
pub type Complex32 = num_complex::Complex<f32>;

/// Double-precision mel filterbank.
pub type MelFilterbank64 = frontend::MelFilterbank<f64>;
/// Double-precision log-mel spectrogram.
pub type LogMel64 = frontend::LogMel<f64>;
/// Double-precision pipeline trace, the form both modes report.
pub type PipelineTrace64 = frontend::PipelineTrace<f64>;
