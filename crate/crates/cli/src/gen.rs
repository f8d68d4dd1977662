// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use clap::{Args, ValueEnum};

use kws_core::signal::{gen_signal, write_wav, SignalKind, SpeechlikeParams, Tone};

use crate::{input, read_json, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Sine,
    Multitone,
    Noise,
    Speechlike,
    Constant,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Signal family; ignored when --spec is given.
    #[arg(long, value_enum, default_value = "sine")]
    pub kind: Kind,
    /// JSON signal description, e.g. {"kind":"sine","freq":1000,"amp":0.5}.
    #[arg(long, conflicts_with = "kind")]
    pub spec: Option<PathBuf>,
    /// Tone frequency in Hz (sine).
    #[arg(long, default_value_t = 1000.0)]
    pub freq: f64,
    /// Peak amplitude (sine).
    #[arg(long, default_value_t = 0.5)]
    pub amp: f64,
    /// Comma-separated FREQ:AMP pairs (multitone).
    #[arg(long, default_value = "300:0.2,800:0.15,1800:0.12,3400:0.1")]
    pub tones: String,
    /// Noise RMS (noise).
    #[arg(long, default_value_t = 0.1)]
    pub rms: f64,
    /// Sample value (constant).
    #[arg(long, default_value_t = 0.25)]
    pub value: f64,
    /// Sample rate in Hz.
    #[arg(long, default_value_t = 8000.0)]
    pub sr: f64,
    /// Duration in seconds.
    #[arg(long, default_value_t = 1.0)]
    pub dur: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_tones(text: &str) -> Result<Vec<Tone>, CliError> {
    text.split(',')
        .map(|pair| {
            let (f, a) = pair
                .split_once(':')
                .ok_or_else(|| input(format!("tone {pair:?} is not FREQ:AMP")))?;
            let freq = f
                .trim()
                .parse()
                .map_err(|_| input(format!("bad tone frequency {f:?}")))?;
            let amp = a
                .trim()
                .parse()
                .map_err(|_| input(format!("bad tone amplitude {a:?}")))?;
            Ok(Tone { freq, amp })
        })
        .collect()
}

pub fn signal_kind(a: &GenArgs) -> Result<SignalKind, CliError> {
    if let Some(path) = &a.spec {
        return read_json(path, "signal spec");
    }
    Ok(match a.kind {
        Kind::Sine => SignalKind::Sine {
            freq: a.freq,
            amp: a.amp,
            phase: 0.0,
        },
        Kind::Multitone => SignalKind::Multitone {
            tones: parse_tones(&a.tones)?,
        },
        Kind::Noise => SignalKind::Noise { rms: a.rms },
        Kind::Speechlike => SignalKind::Speechlike(SpeechlikeParams::default()),
        Kind::Constant => SignalKind::Constant { value: a.value },
    })
}

pub fn run(a: GenArgs) -> Result<(), CliError> {
    if !(a.dur.is_finite() && a.dur > 0.0 && a.sr.is_finite() && a.sr > 0.0) {
        return Err(input(format!(
            "duration {} s at {} Hz is not a positive length",
            a.dur, a.sr
        )));
    }
    let kind = signal_kind(&a)?;
    let n = (a.dur * a.sr).round() as usize;
    let buf = gen_signal(&kind, a.seed, a.sr, n).map_err(input)?;
    write_wav(&a.out, &buf).map_err(|e| input(format!("{}: {e}", a.out.display())))
}
