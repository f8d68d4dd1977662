// SPDX-License-Identifier: Apache-2.0
//! Deterministic test-signal generators.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{SignalBuffer, SignalError};

/// Formant-like tone frequencies of the speech-band generator.
pub const SPEECH_TONES_HZ: [f64; 4] = [300.0, 800.0, 1800.0, 3400.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    pub freq: f64,
    pub amp: f64,
}

/// Speech-band signal: four tones at [`SPEECH_TONES_HZ`] plus low-pass noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpeechlikeParams {
    /// Amplitude of each tone in [`SPEECH_TONES_HZ`].
    pub amplitudes: [f64; 4],
    /// RMS of the low-pass noise component.
    pub noise_rms: f64,
    /// Corner of the two-pole low-pass noise shaper.
    pub noise_cutoff_hz: f64,
    /// Constant offset added to every sample.
    pub dc: f64,
}

impl Default for SpeechlikeParams {
    fn default() -> Self {
        SpeechlikeParams {
            amplitudes: [0.2, 0.15, 0.12, 0.1],
            noise_rms: 0.02,
            noise_cutoff_hz: 1000.0,
            dc: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalKind {
    Sine {
        freq: f64,
        amp: f64,
        #[serde(default)]
        phase: f64,
    },
    Multitone {
        tones: Vec<Tone>,
    },
    /// White Gaussian noise with the given RMS.
    Noise {
        rms: f64,
    },
    Speechlike(SpeechlikeParams),
    Constant {
        value: f64,
    },
}

fn invalid(msg: impl Into<String>) -> SignalError {
    SignalError::InvalidParams(msg.into())
}

fn check_finite(name: &str, v: f64) -> Result<(), SignalError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} is not finite")))
    }
}

fn check_tone(freq: f64, amp: f64, sr: f64) -> Result<(), SignalError> {
    check_finite("frequency", freq)?;
    check_finite("amplitude", amp)?;
    if freq < 0.0 || freq > sr / 2.0 {
        return Err(invalid(format!("tone {freq} Hz outside [0, {}]", sr / 2.0)));
    }
    Ok(())
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

/// Two cascaded one-pole low-pass sections, normalized to the requested RMS.
fn lowpass_noise(
    rng: &mut ChaCha8Rng,
    n: usize,
    sr: f64,
    cutoff: f64,
    target_rms: f64,
) -> Vec<f64> {
    let white = gaussian(rng, n);
    let a = (-TAU * cutoff / sr).exp();
    let (mut s1, mut s2) = (0.0, 0.0);
    let shaped: Vec<f64> = white
        .iter()
        .map(|w| {
            s1 = (1.0 - a) * w + a * s1;
            s2 = (1.0 - a) * s1 + a * s2;
            s2
        })
        .collect();
    let r = rms(&shaped);
    if r == 0.0 {
        return shaped;
    }
    shaped.into_iter().map(|v| v * target_rms / r).collect()
}

/// Renders `n` samples of `kind` at `sr`. Identical arguments give identical buffers.
pub fn gen_signal(
    kind: &SignalKind,
    seed: u64,
    sr: f64,
    n: usize,
) -> Result<SignalBuffer, SignalError> {
    if !(sr.is_finite() && sr > 0.0) {
        return Err(invalid(format!("sample rate {sr}")));
    }
    if n == 0 {
        return Err(invalid("zero length"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = |i: usize| i as f64 / sr;
    let samples: Vec<f64> = match kind {
        SignalKind::Sine { freq, amp, phase } => {
            check_tone(*freq, *amp, sr)?;
            check_finite("phase", *phase)?;
            (0..n)
                .map(|i| amp * (TAU * freq * t(i) + phase).sin())
                .collect()
        }
        SignalKind::Multitone { tones } => {
            if tones.is_empty() {
                return Err(invalid("multitone needs at least one tone"));
            }
            for tone in tones {
                check_tone(tone.freq, tone.amp, sr)?;
            }
            let phases: Vec<f64> = tones.iter().map(|_| rng.random::<f64>() * TAU).collect();
            (0..n)
                .map(|i| {
                    tones
                        .iter()
                        .zip(&phases)
                        .map(|(tone, ph)| tone.amp * (TAU * tone.freq * t(i) + ph).sin())
                        .sum()
                })
                .collect()
        }
        SignalKind::Noise { rms } => {
            check_finite("rms", *rms)?;
            if *rms < 0.0 {
                return Err(invalid("negative noise rms"));
            }
            gaussian(&mut rng, n).into_iter().map(|v| v * rms).collect()
        }
        SignalKind::Speechlike(p) => {
            for a in p.amplitudes {
                check_finite("amplitude", a)?;
            }
            check_finite("noise_rms", p.noise_rms)?;
            check_finite("dc", p.dc)?;
            if p.noise_rms < 0.0 || p.noise_cutoff_hz.is_nan() || p.noise_cutoff_hz <= 0.0 {
                return Err(invalid("noise parameters must be positive"));
            }
            // tones at or above Nyquist cannot be represented and are left out
            let tones: Vec<(f64, f64, f64)> = SPEECH_TONES_HZ
                .iter()
                .zip(p.amplitudes)
                .map(|(&f, a)| (f, a, rng.random::<f64>() * TAU))
                .filter(|&(f, _, _)| f < sr / 2.0)
                .collect();
            let noise = lowpass_noise(
                &mut rng,
                n,
                sr,
                p.noise_cutoff_hz.min(sr / 2.0),
                p.noise_rms,
            );
            (0..n)
                .map(|i| {
                    let tonal: f64 = tones
                        .iter()
                        .map(|(f, a, ph)| a * (TAU * f * t(i) + ph).sin())
                        .sum();
                    p.dc + tonal + noise[i]
                })
                .collect()
        }
        SignalKind::Constant { value } => {
            check_finite("value", *value)?;
            vec![*value; n]
        }
    };
    SignalBuffer::clipped(samples, sr)
}
