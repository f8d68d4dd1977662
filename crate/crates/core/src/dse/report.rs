// SPDX-License-Identifier: Apache-2.0
//! Full exploration runs and per-point evaluation.

use serde::{Deserialize, Serialize};

use super::select::mel_shape_delta;
use super::{
    aligned_distance, alpha_metric, cost_model, retention, select_alpha, select_bandwidth,
    select_bitwidth, select_fft_size, select_mel_shape, select_window_policy, Corpus, Cost,
    Decision, DesignMetrics, DesignPoint, DseError, PeakCriterion, SAMPLE_RATES,
};
use crate::frontend::{
    analyze, spectrogram_distance, window_coefficients, Mode, WindowPolicy, FFT_SIZES,
};
use crate::signal::spectral_leakage;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DseConfig {
    /// Starting point; each decision overwrites one field.
    pub initial: DesignPoint,
    /// Arithmetic of the evaluated pipelines (the bit-width and
    /// pre-emphasis decisions fix their own modes).
    pub mode: Mode,
    pub sample_rates: Vec<f64>,
    pub retention_min: f64,
    pub bit_widths: Vec<u32>,
    pub peaks: PeakCriterion,
    pub preemphasis_ks: Vec<u32>,
    pub dc_fraction_max: f64,
    pub windows: Vec<WindowPolicy>,
    pub leakage_max: f64,
    pub fft_sizes: Vec<usize>,
    pub loss_max: f64,
    /// Common hop, in samples, when comparing FFT sizes.
    pub analysis_hop: usize,
    pub mel_delta_max: f64,
    /// Worker threads for candidate evaluation; never affects results.
    #[serde(skip)]
    pub jobs: usize,
}

impl Default for DseConfig {
    fn default() -> Self {
        DseConfig {
            // early decisions run at 64 points: the 256-point fixed FFT loses
            // about half an LSB per stage, which masks the word-length decision
            initial: DesignPoint {
                fft_size: 64,
                ..DesignPoint::baseline()
            },
            mode: Mode::Fixed,
            sample_rates: SAMPLE_RATES.to_vec(),
            retention_min: 0.90,
            bit_widths: (4..=16).collect(),
            peaks: PeakCriterion::default(),
            preemphasis_ks: vec![3, 4, 5, 6],
            dc_fraction_max: 0.01,
            windows: WindowPolicy::ALL.to_vec(),
            leakage_max: 0.10,
            fft_sizes: FFT_SIZES.to_vec(),
            loss_max: 0.25,
            analysis_hop: 8,
            mel_delta_max: 0.05,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DseReport {
    pub corpus: String,
    pub corpus_digest: String,
    pub config: DseConfig,
    pub decisions: Vec<Decision>,
    pub chosen_point: Option<DesignPoint>,
    pub cost: Option<Cost>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<DesignMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl DseReport {
    pub fn decision(&self, name: &str) -> Option<&Decision> {
        self.decisions.iter().find(|d| d.decision == name)
    }
}

/// All metrics of one point; `mode` selects the arithmetic of the point's
/// own pipeline (the reference is always 256-point floating point).
pub fn evaluate_point(
    p: &DesignPoint,
    corpus: &Corpus,
    mode: Mode,
    cfg: &DseConfig,
) -> Result<DesignMetrics, DseError> {
    let clips = corpus.render(p.sample_rate)?;
    let cost = cost_model(p);
    let window = window_coefficients(p.fft_size, p.window, p.bit_width)?;
    let reference = ideal_reference(p, 256);
    Ok(DesignMetrics {
        power_proxy: cost.power_proxy,
        area_proxy: cost.area_proxy,
        power_retention: retention(&corpus.sources()?, p.sample_rate / 2.0)?,
        dc_bin_fraction: alpha_metric(&clips, p)?.0,
        leakage: spectral_leakage(&window.values)?,
        spectro_error: aligned_distance(&clips, p, mode, &reference, cfg.analysis_hop)?,
        mel_shape_delta: mel_shape_delta(&clips, p, mode)?,
    })
}

/// Floating-point twin of `p` at `fft_size` carrying the widest word's log
/// floor, so that references stay put while the bit width sweeps.
pub fn ideal_reference(p: &DesignPoint, fft_size: usize) -> DesignPoint {
    DesignPoint {
        fft_size,
        bit_width: 16,
        ..p.clone()
    }
}

/// Log-mel distance of the fixed pipeline at `p` to its ideal floating-point
/// twin, averaged over clips.
pub fn quantization_error(
    clips: &[crate::signal::SignalBuffer],
    p: &DesignPoint,
) -> Result<f64, DseError> {
    if clips.is_empty() {
        return Err(DseError::EmptyCorpus);
    }
    let ideal = ideal_reference(p, p.fft_size).pipeline(Mode::Float, None);
    let mut sum = 0.0;
    for clip in clips {
        let fx = analyze(clip, &p.pipeline(Mode::Fixed, None))?.log_mel;
        let fl = analyze(clip, &ideal)?.log_mel;
        sum += spectrogram_distance(&fx, &fl)?;
    }
    Ok(sum / clips.len() as f64)
}

/// Runs the six decisions in order. A failing decision aborts with
/// [`DseError::Aborted`], whose report keeps the decisions already taken;
/// corpus errors fail before any report exists.
pub fn run_dse(corpus: &Corpus, cfg: &DseConfig) -> Result<DseReport, DseError> {
    let digest = corpus.digest()?;
    let sources = corpus.sources()?;
    let mut report = DseReport {
        corpus: corpus.name.clone(),
        corpus_digest: digest,
        config: cfg.clone(),
        decisions: Vec::new(),
        chosen_point: None,
        cost: None,
        metrics: None,
        error: None,
    };
    match decide(corpus, &sources, cfg, &mut report) {
        Ok(p) => {
            report.metrics = Some(evaluate_point(&p, corpus, cfg.mode, cfg)?);
            report.cost = Some(cost_model(&p));
            report.chosen_point = Some(p);
            Ok(report)
        }
        Err(e) => {
            if let DseError::NoFeasiblePoint(d) = &e {
                report.decisions.push((**d).clone());
            }
            report.error = Some(e.to_string());
            Err(DseError::Aborted {
                source: Box::new(e),
                report: Box::new(report),
            })
        }
    }
}

fn decide(
    corpus: &Corpus,
    sources: &[crate::signal::SignalBuffer],
    cfg: &DseConfig,
    report: &mut DseReport,
) -> Result<DesignPoint, DseError> {
    let mut p = cfg.initial.clone();
    let jobs = cfg.jobs.max(1);

    let s = select_bandwidth(sources, &cfg.sample_rates, cfg.retention_min)?;
    p.sample_rate = s.value;
    report.decisions.push(s.decision);
    let clips = corpus.render(p.sample_rate)?;

    let s = select_bitwidth(&clips, &p, &cfg.bit_widths, &cfg.peaks, jobs)?;
    p.bit_width = s.value;
    report.decisions.push(s.decision);

    let s = select_alpha(&clips, &p, &cfg.preemphasis_ks, cfg.dc_fraction_max, jobs)?;
    p.preemphasis_k = s.value;
    report.decisions.push(s.decision);

    let s = select_window_policy(&p, &cfg.windows, cfg.leakage_max)?;
    p.window = s.value;
    report.decisions.push(s.decision);

    let s = select_fft_size(
        &clips,
        &p,
        cfg.mode,
        &cfg.fft_sizes,
        cfg.loss_max,
        cfg.analysis_hop,
        jobs,
    )?;
    p.fft_size = s.value;
    report.decisions.push(s.decision);

    let s = select_mel_shape(&clips, &p, cfg.mode, cfg.mel_delta_max)?;
    p.mel_shape = s.value;
    report.decisions.push(s.decision);
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dse::CorpusEntry;
    use crate::signal::{SignalKind, SpeechlikeParams};

    fn small_corpus() -> Corpus {
        let kind = SignalKind::Speechlike(SpeechlikeParams::default());
        Corpus::new("small", vec![CorpusEntry::recipe("s", kind, 4, 0.25)]).unwrap()
    }

    #[test]
    fn bundled_run_is_deterministic_with_six_decisions() {
        let corpus = Corpus::bundled();
        let cfg = DseConfig {
            jobs: 4,
            ..DseConfig::default()
        };
        let a = run_dse(&corpus, &cfg).unwrap();
        let b = run_dse(&corpus, &DseConfig { jobs: 1, ..cfg }).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        let names: Vec<&str> = a.decisions.iter().map(|d| d.decision.as_str()).collect();
        assert_eq!(
            names,
            [
                "bandwidth",
                "bit_width",
                "preemphasis_k",
                "window",
                "fft_size",
                "mel_shape"
            ]
        );
        assert!(a.decisions.iter().all(|d| !d.candidates.is_empty()));
        assert_eq!(a.corpus_digest, corpus.digest().unwrap());
        let p = a.chosen_point.as_ref().unwrap();
        assert_eq!(a.cost, Some(cost_model(p)));
    }

    #[test]
    fn report_round_trips_through_json() {
        let r = run_dse(&small_corpus(), &DseConfig::default()).unwrap_or_else(|e| match e {
            DseError::Aborted { report, .. } => *report,
            e => panic!("{e}"),
        });
        let text = serde_json::to_string_pretty(&r).unwrap();
        let back: DseReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        // the echoed config re-runs to the same report
        let again = run_dse(&small_corpus(), &back.config).unwrap_or_else(|e| match e {
            DseError::Aborted { report, .. } => *report,
            e => panic!("{e}"),
        });
        assert_eq!(again, r);
    }

    #[test]
    fn failing_stage_keeps_partial_report() {
        let cfg = DseConfig {
            windows: Vec::new(),
            ..DseConfig::default()
        };
        let Err(DseError::Aborted { source, report }) = run_dse(&small_corpus(), &cfg) else {
            panic!("expected an aborted run")
        };
        assert!(matches!(*source, DseError::NoFeasiblePoint(_)));
        assert_eq!(report.decisions.len(), 4);
        assert_eq!(report.decisions[3].decision, "window");
        assert!(report.chosen_point.is_none());
        assert!(report.error.is_some());
    }

    #[test]
    fn missing_directory_is_io_without_report() {
        let r = Corpus::load_dir("/nonexistent/corpus/dir");
        assert!(matches!(r, Err(DseError::Io(_))));
    }

    #[test]
    fn evaluate_point_anchors() {
        let corpus = small_corpus();
        let cfg = DseConfig::default();
        let m = evaluate_point(&DesignPoint::reference(), &corpus, Mode::Fixed, &cfg).unwrap();
        assert!((m.power_proxy - 1.0).abs() < 1e-12 && (m.area_proxy - 1.0).abs() < 1e-12);
        for v in [
            m.power_retention,
            m.dc_bin_fraction,
            m.leakage,
            m.mel_shape_delta,
        ] {
            assert!((0.0..=1.0).contains(&v), "{m:?}");
        }
        let p256 = ideal_reference(&DesignPoint::reference(), 256);
        let m = evaluate_point(&p256, &corpus, Mode::Float, &cfg).unwrap();
        assert_eq!(m.spectro_error, 0.0);
    }

    #[test]
    fn spectro_error_non_increasing_with_bit_width() {
        let corpus = Corpus::bundled();
        let cfg = DseConfig::default();
        let clips = corpus.render(8000.0).unwrap();
        let (mut spectro, mut quant) = (Vec::new(), Vec::new());
        for b in 5..=12 {
            // at 32 points the transform-size gap dominates the distance to
            // the 256-point reference, so the sweep runs at full size there
            let p = DesignPoint {
                bit_width: b,
                ..DesignPoint::reference()
            };
            let full = DesignPoint {
                fft_size: 256,
                ..p.clone()
            };
            spectro.push(
                evaluate_point(&full, &corpus, Mode::Fixed, &cfg)
                    .unwrap()
                    .spectro_error,
            );
            quant.push(quantization_error(&clips, &p).unwrap());
        }
        for errs in [&spectro, &quant] {
            for w in errs.windows(2) {
                assert!(w[1] <= w[0], "{errs:?}");
            }
        }
    }

    #[test]
    fn config_rejects_unknown_fields() {
        assert!(serde_json::from_str::<DseConfig>(r#"{"loss_maxx": 0.3}"#).is_err());
        let c: DseConfig = serde_json::from_str(r#"{"loss_max": 0.3}"#).unwrap();
        assert_eq!(c.loss_max, 0.3);
        assert_eq!(c.jobs, DseConfig::default().jobs);
    }
}
