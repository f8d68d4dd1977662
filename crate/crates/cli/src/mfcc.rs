// SPDX-License-Identifier: Apache-2.0
//! `mfcc` and `compare`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;

use kws_core::frontend::{analyze, Mode, PipelineConfig, PipelineTrace};
use kws_core::signal::{read_wav, SignalBuffer};

use crate::{emit, input, read_json, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Fixed,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct MfccArgs {
    /// 16-bit PCM mono WAV.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Pipeline configuration JSON; defaults to the 8 kHz, 7-bit point at the file's rate.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the configured arithmetic.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Output format; inferred from the --out extension, else CSV.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Exit with 1 when the post-DCT relative error exceeds this bound.
    #[arg(long)]
    pub max_rel_error: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn load_inputs(
    wav: &Path,
    config: Option<&PathBuf>,
) -> Result<(SignalBuffer, PipelineConfig), CliError> {
    let signal = read_wav(wav).map_err(|e| input(format!("{}: {e}", wav.display())))?;
    let cfg = match config {
        Some(p) => read_json::<PipelineConfig>(p, "pipeline config")?,
        None => PipelineConfig {
            sample_rate: signal.sample_rate(),
            ..PipelineConfig::default()
        },
    };
    cfg.validate().map_err(input)?;
    Ok((signal, cfg))
}

fn mfcc_rows(trace: &PipelineTrace<f64>) -> Vec<Vec<f64>> {
    trace.mfcc.iter().map(|f| f.coeffs.clone()).collect()
}

/// Header `c0..c{n-1}`, one row per frame, shortest round-trip decimals.
pub fn to_csv(rows: &[Vec<f64>], n_mfcc: usize) -> String {
    let mut s = (0..n_mfcc)
        .map(|i| format!("c{i}"))
        .collect::<Vec<_>>()
        .join(",");
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{}", cells.join(","));
    }
    s
}

#[derive(Serialize)]
struct MfccJson<'a> {
    config: &'a PipelineConfig,
    frames: Vec<Vec<f64>>,
}

pub fn run_mfcc(a: MfccArgs) -> Result<(), CliError> {
    let (signal, mut cfg) = load_inputs(&a.input, a.config.as_ref())?;
    if let Some(m) = a.mode {
        cfg.mode = match m {
            ModeArg::Fixed => Mode::Fixed,
            ModeArg::Float => Mode::Float,
        };
    }
    let trace = analyze(&signal, &cfg).map_err(input)?;
    let rows = mfcc_rows(&trace);
    let json_ext = a
        .out
        .as_ref()
        .and_then(|p| p.extension())
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let format = a
        .format
        .unwrap_or(if json_ext { Format::Json } else { Format::Csv });
    let text = match format {
        Format::Csv => to_csv(&rows, cfg.n_mfcc),
        Format::Json => {
            let mut t = serde_json::to_string_pretty(&MfccJson {
                config: &cfg,
                frames: rows,
            })
            .expect("serializes");
            t.push('\n');
            t
        }
    };
    emit(a.out.as_deref(), &text)
}

/// Error of one stage's output against the floating-point run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageError {
    pub max_abs: f64,
    pub rms: f64,
    /// Frobenius norm of the difference over that of the reference; null
    /// when the reference is zero.
    pub relative: Option<f64>,
}

pub fn stage_error(fixed: &[Vec<f64>], float: &[Vec<f64>]) -> StageError {
    let (mut max_abs, mut diff2, mut ref2, mut n) = (0.0f64, 0.0, 0.0, 0usize);
    for (a, b) in fixed.iter().zip(float) {
        for (x, y) in a.iter().zip(b) {
            let d = x - y;
            max_abs = max_abs.max(d.abs());
            diff2 += d * d;
            ref2 += y * y;
            n += 1;
        }
    }
    StageError {
        max_abs,
        rms: if n == 0 {
            0.0
        } else {
            (diff2 / n as f64).sqrt()
        },
        relative: (ref2 > 0.0).then(|| (diff2 / ref2).sqrt()),
    }
}

#[derive(Debug, Serialize)]
pub struct CompareReport {
    pub config: PipelineConfig,
    pub frames: usize,
    pub post_fft: StageError,
    pub post_mel: StageError,
    pub post_dct: StageError,
}

pub fn compare(signal: &SignalBuffer, cfg: &PipelineConfig) -> Result<CompareReport, CliError> {
    let fixed = analyze(
        signal,
        &PipelineConfig {
            mode: Mode::Fixed,
            ..cfg.clone()
        },
    )
    .map_err(input)?;
    let float = analyze(
        signal,
        &PipelineConfig {
            mode: Mode::Float,
            ..cfg.clone()
        },
    )
    .map_err(input)?;
    Ok(CompareReport {
        config: cfg.clone(),
        frames: fixed.mfcc.len(),
        post_fft: stage_error(&fixed.power, &float.power),
        post_mel: stage_error(&fixed.log_mel.frames, &float.log_mel.frames),
        post_dct: stage_error(&mfcc_rows(&fixed), &mfcc_rows(&float)),
    })
}

pub fn run_compare(a: CompareArgs) -> Result<(), CliError> {
    let (signal, cfg) = load_inputs(&a.input, a.config.as_ref())?;
    let report = compare(&signal, &cfg)?;
    let mut text = serde_json::to_string_pretty(&report).expect("serializes");
    text.push('\n');
    emit(a.out.as_deref(), &text)?;
    if let Some(bound) = a.max_rel_error {
        let rel = report.post_dct.relative.unwrap_or(f64::INFINITY);
        if rel.is_nan() || rel > bound {
            return Err(CliError::Unmet(format!(
                "post-DCT relative error {rel} exceeds {bound}"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_shape() {
        let csv = to_csv(&[vec![1.0, -0.5], vec![0.1, 2.0]], 2);
        assert_eq!(csv, "c0,c1\n1,-0.5\n0.1,2\n");
    }

    #[test]
    fn stage_error_examples() {
        let e = stage_error(&[vec![1.0, 2.0]], &[vec![1.0, 2.0]]);
        assert_eq!((e.max_abs, e.rms, e.relative), (0.0, 0.0, Some(0.0)));
        let e = stage_error(&[vec![3.0, 4.0]], &[vec![0.0, 0.0]]);
        assert_eq!(e.relative, None);
        assert_eq!(e.max_abs, 4.0);
        let e = stage_error(&[vec![1.0, 0.0]], &[vec![0.0, 1.0]]);
        assert!((e.relative.unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }
}
