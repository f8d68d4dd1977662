// SPDX-License-Identifier: Apache-2.0
//! The six decisions. Every candidate is evaluated; the cheapest passing
//! one is selected, so a log always shows where the criterion flips.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{par_map, DesignPoint, DseError};
use crate::frontend::{
    analyze, spectrogram_distance, window_coefficients, LogMel, MelShape, Mode, PreemphasisConfig,
    WindowPolicy,
};
use crate::signal::{periodogram, spectral_leakage, SignalBuffer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub value: Value,
    pub metric: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub decision: String,
    pub criterion: String,
    pub candidates: Vec<Candidate>,
    pub selected: Option<Value>,
}

impl Decision {
    pub fn candidate(&self, value: &Value) -> Option<&Candidate> {
        self.candidates.iter().find(|c| &c.value == value)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection<T> {
    pub value: T,
    pub decision: Decision,
}

/// Picks the first passing candidate, in the given (cheapest first) order.
fn choose<T: Clone + Serialize>(
    decision: &str,
    criterion: String,
    values: &[T],
    evaluated: Vec<(f64, bool, Option<String>)>,
) -> Result<Selection<T>, DseError> {
    let candidates: Vec<Candidate> = values
        .iter()
        .zip(evaluated)
        .map(|(v, (metric, pass, detail))| Candidate {
            value: json!(v),
            metric,
            pass,
            detail,
        })
        .collect();
    let chosen = candidates.iter().position(|c| c.pass);
    let mut decision = Decision {
        decision: decision.into(),
        criterion,
        candidates,
        selected: None,
    };
    match chosen {
        Some(i) => {
            decision.selected = Some(json!(values[i]));
            Ok(Selection {
                value: values[i].clone(),
                decision,
            })
        }
        None => Err(DseError::NoFeasiblePoint(Box::new(decision))),
    }
}

/// Power below `cutoff` and total power, summed over clips.
pub fn retention(clips: &[SignalBuffer], cutoff: f64) -> Result<f64, DseError> {
    let (mut below, mut total) = (0.0, 0.0);
    for c in clips {
        let p = periodogram(c);
        let bin_hz = c.sample_rate() / c.len() as f64;
        total += p.iter().sum::<f64>();
        below += p
            .iter()
            .enumerate()
            .filter(|(k, _)| *k as f64 * bin_hz <= cutoff)
            .map(|(_, v)| v)
            .sum::<f64>();
    }
    if total == 0.0 {
        return Err(DseError::DegenerateInput("corpus has no power".into()));
    }
    Ok((below / total).clamp(0.0, 1.0))
}

/// Smallest rate whose Nyquist band keeps `retention_min` of the corpus
/// power, measured on the clips at their source rate.
pub fn select_bandwidth(
    sources: &[SignalBuffer],
    rates: &[f64],
    retention_min: f64,
) -> Result<Selection<f64>, DseError> {
    let evaluated = rates
        .iter()
        .map(|&r| {
            let kept = retention(sources, r / 2.0)?;
            Ok((kept, kept >= retention_min, None))
        })
        .collect::<Result<Vec<_>, DseError>>()?;
    choose(
        "bandwidth",
        format!("power retention >= {retention_min}"),
        rates,
        evaluated,
    )
}

/// Tonal-fidelity criterion of the bit-width decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeakCriterion {
    /// Peaks compared per frame.
    pub count: usize,
    /// Largest relative magnitude error at a peak.
    pub rel_error_max: f64,
    /// A peak must reach this fraction of the frame's strongest bin.
    pub floor_rel: f64,
    /// And this magnitude, in units of the normalized spectrum.
    pub floor_abs: f64,
}

impl Default for PeakCriterion {
    fn default() -> Self {
        PeakCriterion {
            count: 3,
            rel_error_max: 0.10,
            floor_rel: 0.5,
            floor_abs: 0.03,
        }
    }
}

fn local_maxima(power: &[f64]) -> Vec<usize> {
    let top = power.len().saturating_sub(1);
    (2..top)
        .filter(|&k| power[k] > power[k - 1] && power[k] >= power[k + 1])
        .collect()
}

fn strongest(power: &[f64], mut bins: Vec<usize>, count: usize) -> Vec<usize> {
    bins.sort_by(|&a, &b| power[b].total_cmp(&power[a]).then(a.cmp(&b)));
    bins.truncate(count);
    bins.sort_unstable();
    bins
}

/// Significant peak bins of one float power frame, at most `crit.count`.
/// Bins 0 and 1 hold the DC region and are never peaks.
pub fn significant_peaks(power: &[f64], crit: &PeakCriterion) -> Vec<usize> {
    let mag = |k: usize| power[k].max(0.0).sqrt();
    let max = (2..power.len()).map(mag).fold(0.0, f64::max);
    let bins: Vec<usize> = local_maxima(power)
        .into_iter()
        .filter(|&k| mag(k) >= crit.floor_rel * max && mag(k) >= crit.floor_abs)
        .collect();
    strongest(power, bins, crit.count)
}

/// Fraction of frames whose fixed spectrum loses a float peak or misstates
/// a peak's magnitude by more than the allowed relative error; also the
/// worst relative error seen at matching peaks.
pub fn bitwidth_metric(
    clips: &[SignalBuffer],
    p: &DesignPoint,
    crit: &PeakCriterion,
) -> Result<(f64, f64), DseError> {
    let (mut frames, mut failed, mut worst) = (0usize, 0usize, 0.0f64);
    for clip in clips {
        let fx = analyze(clip, &p.pipeline(Mode::Fixed, None))?;
        let fl = analyze(clip, &p.pipeline(Mode::Float, None))?;
        for (pf, pq) in fl.power.iter().zip(&fx.power) {
            frames += 1;
            let peaks = significant_peaks(pf, crit);
            if peaks.is_empty() {
                continue;
            }
            let fixed_peaks = strongest(pq, local_maxima(pq), peaks.len());
            let mut ok = fixed_peaks == peaks;
            for &k in &peaks {
                let (a, b) = (pq[k].max(0.0).sqrt(), pf[k].sqrt());
                let rel = (a - b).abs() / b;
                worst = worst.max(rel);
                ok &= rel <= crit.rel_error_max;
            }
            if !ok {
                failed += 1;
            }
        }
    }
    Ok((
        if frames == 0 {
            0.0
        } else {
            failed as f64 / frames as f64
        },
        worst,
    ))
}

/// Smallest bit width at which no frame fails the peak criterion.
pub fn select_bitwidth(
    clips: &[SignalBuffer],
    p: &DesignPoint,
    widths: &[u32],
    crit: &PeakCriterion,
    jobs: usize,
) -> Result<Selection<u32>, DseError> {
    let evaluated = par_map(widths, jobs, |&b| {
        let (failed, worst) = bitwidth_metric(
            clips,
            &DesignPoint {
                bit_width: b,
                ..p.clone()
            },
            crit,
        )?;
        Ok((
            failed,
            failed == 0.0,
            Some(format!("worst peak error {worst:.4}")),
        ))
    })
    .into_iter()
    .collect::<Result<Vec<_>, DseError>>()?;
    choose(
        "bit_width",
        format!(
            "top-{} peaks kept and within {} relative magnitude in every frame",
            crit.count, crit.rel_error_max
        ),
        widths,
        evaluated,
    )
}

/// Mean over frames of the pre-emphasized power fraction in bins 0 and 1,
/// computed with the floating-point pipeline at `p`. Also returns the mean
/// frame power outside those bins.
pub fn alpha_metric(clips: &[SignalBuffer], p: &DesignPoint) -> Result<(f64, f64), DseError> {
    let (mut frames, mut frac, mut audio) = (0usize, 0.0, 0.0);
    for clip in clips {
        let t = analyze(clip, &p.pipeline(Mode::Float, None))?;
        for pw in &t.power {
            frames += 1;
            let total: f64 = pw.iter().sum();
            let low = pw[0] + pw.get(1).copied().unwrap_or(0.0);
            audio += total - low;
            if total > 0.0 {
                frac += low / total;
            }
        }
    }
    if frames == 0 {
        return Ok((0.0, 0.0));
    }
    Ok((frac / frames as f64, audio / frames as f64))
}

/// Gain of 1 - alpha z^-1 at `freq`, in dB.
fn preemphasis_gain_db(k: u32, freq: f64, sample_rate: f64) -> f64 {
    let alpha = PreemphasisConfig { k }.alpha();
    let w = std::f64::consts::TAU * freq / sample_rate;
    let mag = ((1.0 - alpha * w.cos()).powi(2) + (alpha * w.sin()).powi(2)).sqrt();
    20.0 * mag.log10()
}

/// Smallest shift k whose filter leaves at most `dc_max` of the frame power
/// in bins 0-1. Fails with `DegenerateInput` when, after filtering, the
/// corpus has no power above the log floor outside those bins.
pub fn select_alpha(
    clips: &[SignalBuffer],
    p: &DesignPoint,
    ks: &[u32],
    dc_max: f64,
    jobs: usize,
) -> Result<Selection<u32>, DseError> {
    let floor = p.pipeline(Mode::Float, None).log_floor();
    let evaluated = par_map(ks, jobs, |&k| {
        PreemphasisConfig::new(k)?;
        let (frac, audio) = alpha_metric(clips, &DesignPoint { preemphasis_k: k, ..p.clone() })?;
        if audio < floor {
            return Err(DseError::DegenerateInput(format!(
                "mean frame power outside bins 0-1 is {audio:.3e}, below the floor {floor:.3e} (k = {k})"
            )));
        }
        let detail = format!("gain at 1 kHz {:.2} dB", preemphasis_gain_db(k, 1000.0, p.sample_rate));
        Ok((frac, frac <= dc_max, Some(detail)))
    })
    .into_iter()
    .collect::<Result<Vec<_>, DseError>>()?;
    choose(
        "preemphasis_k",
        format!("mean power fraction in bins 0-1 <= {dc_max}"),
        ks,
        evaluated,
    )
}

/// Cheapest window policy, in the order given, with leakage at most `leakage_max`.
pub fn select_window_policy(
    p: &DesignPoint,
    policies: &[WindowPolicy],
    leakage_max: f64,
) -> Result<Selection<WindowPolicy>, DseError> {
    let evaluated = policies
        .iter()
        .map(|&w| {
            let win = window_coefficients(p.fft_size, w, p.bit_width)?;
            let leak = spectral_leakage(&win.values)?;
            Ok((
                leak,
                leak <= leakage_max,
                Some(format!("{} shift terms", win.term_count())),
            ))
        })
        .collect::<Result<Vec<_>, DseError>>()?;
    choose(
        "window",
        format!("spectral leakage <= {leakage_max}"),
        policies,
        evaluated,
    )
}

/// Distance between the pipeline at `p` and the floating-point pipeline at
/// `reference`, both run with `hop`, over all clips stacked. Frames are
/// paired by their center sample so different FFT sizes line up; only
/// centers present in both runs count.
pub fn aligned_distance(
    clips: &[SignalBuffer],
    p: &DesignPoint,
    mode: Mode,
    reference: &DesignPoint,
    hop: usize,
) -> Result<f64, DseError> {
    let mut a = LogMel {
        n_mel: p.n_mel,
        frames: Vec::new(),
    };
    let mut b = LogMel {
        n_mel: reference.n_mel,
        frames: Vec::new(),
    };
    for clip in clips {
        let x = analyze(clip, &p.pipeline(mode, Some(hop)))?.log_mel.frames;
        let r = analyze(clip, &reference.pipeline(Mode::Float, Some(hop)))?
            .log_mel
            .frames;
        // frame i is centered at i * hop + N / 2
        let (cx, cr) = (p.fft_size / 2, reference.fft_size / 2);
        let (skip_x, skip_r) = if cx <= cr {
            ((cr - cx) / hop, 0)
        } else {
            (0, (cx - cr) / hop)
        };
        if (cr.abs_diff(cx)) % hop != 0 {
            return Err(DseError::InvalidConfig(format!(
                "hop {hop} does not align frame centers"
            )));
        }
        let xs = x.into_iter().skip(skip_x);
        let rs = r.into_iter().skip(skip_r);
        for (fx, fr) in xs.zip(rs) {
            a.frames.push(fx);
            b.frames.push(fr);
        }
    }
    Ok(spectrogram_distance(&a, &b)?)
}

/// Smallest FFT size within `loss_max` of the 256-point floating-point reference.
pub fn select_fft_size(
    clips: &[SignalBuffer],
    p: &DesignPoint,
    mode: Mode,
    sizes: &[usize],
    loss_max: f64,
    hop: usize,
    jobs: usize,
) -> Result<Selection<usize>, DseError> {
    let reference = DesignPoint {
        fft_size: 256,
        ..p.clone()
    };
    let evaluated = par_map(sizes, jobs, |&n| {
        let d = aligned_distance(
            clips,
            &DesignPoint {
                fft_size: n,
                ..p.clone()
            },
            mode,
            &reference,
            hop,
        )?;
        Ok((d, d <= loss_max, None))
    })
    .into_iter()
    .collect::<Result<Vec<_>, DseError>>()?;
    choose(
        "fft_size",
        format!("log-mel distance to 256-point float <= {loss_max}"),
        sizes,
        evaluated,
    )
}

/// Rectangular filters unless they move the log-mel output more than
/// `delta_max` away from triangular ones.
pub fn select_mel_shape(
    clips: &[SignalBuffer],
    p: &DesignPoint,
    mode: Mode,
    delta_max: f64,
) -> Result<Selection<MelShape>, DseError> {
    let delta = mel_shape_delta(clips, p, mode)?;
    let shapes = [MelShape::Rectangular, MelShape::Triangular];
    let evaluated = vec![(delta, delta <= delta_max, None), (0.0, true, None)];
    choose(
        "mel_shape",
        format!("log-mel distance rectangular vs triangular <= {delta_max}"),
        &shapes,
        evaluated,
    )
}

/// Log-mel distance of rectangular filters against triangular ones at `p`.
pub(crate) fn mel_shape_delta(
    clips: &[SignalBuffer],
    p: &DesignPoint,
    mode: Mode,
) -> Result<f64, DseError> {
    let mut a = LogMel {
        n_mel: p.n_mel,
        frames: Vec::new(),
    };
    let mut b = LogMel {
        n_mel: p.n_mel,
        frames: Vec::new(),
    };
    for clip in clips {
        let rect = DesignPoint {
            mel_shape: MelShape::Rectangular,
            ..p.clone()
        };
        let tri = DesignPoint {
            mel_shape: MelShape::Triangular,
            ..p.clone()
        };
        a.frames
            .extend(analyze(clip, &rect.pipeline(mode, None))?.log_mel.frames);
        b.frames
            .extend(analyze(clip, &tri.pipeline(mode, None))?.log_mel.frames);
    }
    Ok(spectrogram_distance(&a, &b)?)
}
