// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::FrontendError;
use crate::fixedpoint::QFormat;

/// FFT sizes the R2²SDF model accepts.
pub const FFT_SIZES: [usize; 5] = [16, 32, 64, 128, 256];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Fixed,
    Float,
}

/// How window coefficients are realized, cheapest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowPolicy {
    Rectangular,
    SingleShift,
    Csd2,
    Exact,
}

impl WindowPolicy {
    pub const ALL: [WindowPolicy; 4] = [
        WindowPolicy::Rectangular,
        WindowPolicy::SingleShift,
        WindowPolicy::Csd2,
        WindowPolicy::Exact,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MelShape {
    Rectangular,
    Triangular,
}

/// Pre-emphasis coefficient alpha = 1 - 2^-k.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PreemphasisConfig {
    pub k: u32,
}

impl PreemphasisConfig {
    pub fn new(k: u32) -> Result<Self, FrontendError> {
        if !(1..=31).contains(&k) {
            return Err(FrontendError::InvalidConfig(format!(
                "pre-emphasis shift {k} outside 1..=31"
            )));
        }
        Ok(PreemphasisConfig { k })
    }

    pub fn alpha(&self) -> f64 {
        1.0 - (-(self.k as f64)).exp2()
    }

    /// Whether alpha lies in the usual [0.9, 1) band (k >= 4).
    pub fn is_admissible(&self) -> bool {
        self.k >= 4
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub sample_rate: f64,
    /// Datapath word length; samples use a signed format with `bit_width - 1` fraction bits.
    pub bit_width: u32,
    pub preemphasis_k: u32,
    pub fft_size: usize,
    /// Defaults to half the FFT size.
    #[serde(default)]
    pub hop: Option<usize>,
    pub window: WindowPolicy,
    pub mel_shape: MelShape,
    #[serde(default = "default_bands")]
    pub n_mel: usize,
    #[serde(default = "default_bands")]
    pub n_mfcc: usize,
    pub mode: Mode,
}

fn default_bands() -> usize {
    8
}

impl Default for PipelineConfig {
    /// The selected smart-microphone point: 8 kHz, 7-bit, alpha = 31/32, 32-point FFT.
    fn default() -> Self {
        PipelineConfig {
            sample_rate: 8000.0,
            bit_width: 7,
            preemphasis_k: 5,
            fft_size: 32,
            hop: None,
            window: WindowPolicy::Csd2,
            mel_shape: MelShape::Rectangular,
            n_mel: 8,
            n_mfcc: 8,
            mode: Mode::Fixed,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), FrontendError> {
        let bad = |m: String| Err(FrontendError::InvalidConfig(m));
        if !(self.sample_rate.is_finite() && self.sample_rate > 0.0) {
            return bad(format!("sample rate {}", self.sample_rate));
        }
        if !(2..=16).contains(&self.bit_width) {
            return bad(format!("bit width {} outside 2..=16", self.bit_width));
        }
        PreemphasisConfig::new(self.preemphasis_k)?;
        if !FFT_SIZES.contains(&self.fft_size) {
            return Err(FrontendError::InvalidSize(self.fft_size));
        }
        if self.hop() == 0 {
            return bad("hop must be at least 1".into());
        }
        if self.n_mel == 0 || self.n_mel > self.fft_size / 2 {
            return Err(FrontendError::TooManyFilters {
                n_mel: self.n_mel,
                max: self.fft_size / 2,
            });
        }
        if self.n_mfcc == 0 || self.n_mfcc > self.n_mel {
            return bad(format!(
                "n_mfcc {} must be in 1..={}",
                self.n_mfcc, self.n_mel
            ));
        }
        Ok(())
    }

    pub fn hop(&self) -> usize {
        self.hop.unwrap_or(self.fft_size / 2)
    }

    pub fn preemphasis(&self) -> PreemphasisConfig {
        PreemphasisConfig {
            k: self.preemphasis_k,
        }
    }

    /// Sample and FFT datapath format.
    pub fn data_format(&self) -> QFormat {
        QFormat::data(self.bit_width).expect("validated bit width")
    }

    /// Power-spectrum and mel-energy format: full product width, 2(b-1) fraction bits.
    pub fn power_format(&self) -> QFormat {
        power_format(self.bit_width)
    }

    /// Log floor epsilon, one step of the power format.
    pub fn log_floor(&self) -> f64 {
        self.power_format().ulp()
    }
}

pub fn power_format(bit_width: u32) -> QFormat {
    QFormat::new(2 * bit_width, 2 * (bit_width - 1), true).expect("bit width within 2..=16")
}
