// SPDX-License-Identifier: Apache-2.0
//! Design points, the cost proxies and Pareto filtering.

use serde::{Deserialize, Serialize};

use crate::frontend::{MelShape, Mode, PipelineConfig, WindowPolicy};

/// Candidate sample rates in Hz; 44.1 kHz is the microphone's native rate.
pub const SAMPLE_RATES: [f64; 4] = [4000.0, 8000.0, 16000.0, 44100.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignPoint {
    pub sample_rate: f64,
    pub bit_width: u32,
    pub preemphasis_k: u32,
    pub fft_size: usize,
    pub window: WindowPolicy,
    pub mel_shape: MelShape,
    pub n_mel: usize,
    pub n_mfcc: usize,
}

impl DesignPoint {
    /// Unreduced starting point: native rate, a 14-bit microphone word,
    /// 256-point analysis with the exact window and triangular filters.
    pub fn baseline() -> Self {
        DesignPoint {
            sample_rate: 44100.0,
            bit_width: 14,
            preemphasis_k: 5,
            fft_size: 256,
            window: WindowPolicy::Exact,
            mel_shape: MelShape::Triangular,
            n_mel: 8,
            n_mfcc: 8,
        }
    }

    /// The cost-normalization anchor, (8 kHz, 7-bit, 32-point).
    pub fn reference() -> Self {
        DesignPoint {
            sample_rate: 8000.0,
            bit_width: 7,
            preemphasis_k: 5,
            fft_size: 32,
            window: WindowPolicy::Csd2,
            mel_shape: MelShape::Rectangular,
            ..DesignPoint::baseline()
        }
    }

    pub fn pipeline(&self, mode: Mode, hop: Option<usize>) -> PipelineConfig {
        PipelineConfig {
            sample_rate: self.sample_rate,
            bit_width: self.bit_width,
            preemphasis_k: self.preemphasis_k,
            fft_size: self.fft_size,
            hop,
            window: self.window,
            mel_shape: self.mel_shape,
            n_mel: self.n_mel,
            n_mfcc: self.n_mfcc,
            mode,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cost {
    pub power_proxy: f64,
    pub area_proxy: f64,
}

/// Power scales with rate, word length and FFT work; area drops the rate term.
/// Both are 1.0 at [`DesignPoint::reference`].
pub fn cost_model(p: &DesignPoint) -> Cost {
    let n = p.fft_size as f64;
    let fft = n * n.log2() / (32.0 * 5.0);
    let bits = p.bit_width as f64 / 7.0;
    Cost {
        power_proxy: p.sample_rate / 8000.0 * bits * fft,
        area_proxy: bits * fft,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMetrics {
    pub power_proxy: f64,
    pub area_proxy: f64,
    /// Corpus power kept below the point's Nyquist frequency.
    pub power_retention: f64,
    /// Mean fraction of frame power in FFT bins 0 and 1 after pre-emphasis.
    pub dc_bin_fraction: f64,
    pub leakage: f64,
    /// Log-mel distance to the 256-point floating-point reference.
    pub spectro_error: f64,
    /// Log-mel distance between rectangular and triangular filters.
    pub mel_shape_delta: f64,
}

fn dominates(a: &[f64; 3], b: &[f64; 3]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

/// Points no other point dominates in (power, area, spectro_error), in input order.
pub fn pareto_front<P: Clone>(points: &[(P, DesignMetrics)]) -> Vec<(P, DesignMetrics)> {
    let keys: Vec<[f64; 3]> = points
        .iter()
        .map(|(_, m)| [m.power_proxy, m.area_proxy, m.spectro_error])
        .collect();
    points
        .iter()
        .zip(&keys)
        .filter(|(_, k)| !keys.iter().any(|o| dominates(o, k)))
        .map(|(p, _)| p.clone())
        .collect()
}
