// SPDX-License-Identifier: Apache-2.0
//! Evaluation corpora: bundled synthetic recipes or WAV directories.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::DseError;
use crate::signal::{decimate, gen_signal, read_wav, SignalBuffer, SignalKind, SpeechlikeParams};

/// Rate at which recipes are digested and band-limited power is measured.
pub const SOURCE_RATE: f64 = 44100.0;

/// Bumped whenever a bundled recipe changes.
pub const BUNDLED_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum ClipSource {
    /// Rendered at whatever rate is requested.
    Recipe {
        signal: SignalKind,
        seed: u64,
        duration_s: f64,
    },
    /// Fixed recording; other rates are reached by integer decimation only.
    #[serde(skip)]
    Recording(SignalBuffer),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub name: String,
    #[serde(flatten)]
    pub source: ClipSource,
}

impl CorpusEntry {
    pub fn recipe(name: &str, signal: SignalKind, seed: u64, duration_s: f64) -> Self {
        CorpusEntry {
            name: name.into(),
            source: ClipSource::Recipe {
                signal,
                seed,
                duration_s,
            },
        }
    }

    /// Native rate of a recording; recipes report [`SOURCE_RATE`].
    pub fn native_rate(&self) -> f64 {
        match &self.source {
            ClipSource::Recipe { .. } => SOURCE_RATE,
            ClipSource::Recording(b) => b.sample_rate(),
        }
    }

    pub fn at_rate(&self, rate: f64) -> Result<SignalBuffer, DseError> {
        match &self.source {
            ClipSource::Recipe {
                signal,
                seed,
                duration_s,
            } => {
                let n = (duration_s * rate).round() as usize;
                Ok(gen_signal(signal, *seed, rate, n)?)
            }
            ClipSource::Recording(b) => {
                let ratio = b.sample_rate() / rate;
                let factor = ratio.round();
                if factor < 1.0 || (ratio - factor).abs() > 1e-9 {
                    return Err(DseError::UnsupportedRate {
                        clip: self.name.clone(),
                        native: b.sample_rate(),
                        rate,
                    });
                }
                Ok(decimate(b, factor as usize)?)
            }
        }
    }

    /// The clip at its source rate.
    pub fn source(&self) -> Result<SignalBuffer, DseError> {
        self.at_rate(self.native_rate())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub name: String,
    pub entries: Vec<CorpusEntry>,
}

impl Corpus {
    pub fn new(name: &str, entries: Vec<CorpusEntry>) -> Result<Self, DseError> {
        if entries.is_empty() {
            return Err(DseError::EmptyCorpus);
        }
        Ok(Corpus {
            name: name.into(),
            entries,
        })
    }

    /// The calibrated speech-band corpus: two voiced clips dominated by the
    /// upper formants and a quiet clip riding on a DC offset.
    pub fn bundled() -> Self {
        let clip = |amplitudes, noise_rms, dc| {
            SignalKind::Speechlike(SpeechlikeParams {
                amplitudes,
                noise_rms,
                dc,
                ..SpeechlikeParams::default()
            })
        };
        let entries = vec![
            CorpusEntry::recipe(
                "formant_1800",
                clip([0.05, 0.1, 0.7, 0.1], 0.005, 0.0),
                1,
                0.25,
            ),
            CorpusEntry::recipe(
                "formant_3400",
                clip([0.05, 0.1, 0.1, 0.45], 0.005, 0.0),
                2,
                0.25,
            ),
            CorpusEntry::recipe(
                "offset_hum",
                clip([0.04, 0.03, 0.024, 0.02], 0.004, 0.1),
                3,
                0.25,
            ),
        ];
        Corpus {
            name: format!("bundled-v{BUNDLED_VERSION}"),
            entries,
        }
    }

    /// Loads every `*.wav` in `dir` (sorted by file name) plus the recipes
    /// of an optional `corpus.json` holding a list of entries.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self, DseError> {
        let dir = dir.as_ref();
        let mut paths: Vec<_> = std::fs::read_dir(dir)?
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .map(|e| e.path())
            .collect();
        paths.sort();
        let mut entries = Vec::new();
        let manifest = dir.join("corpus.json");
        if manifest.exists() {
            let text = std::fs::read_to_string(&manifest)?;
            let recipes: Vec<CorpusEntry> =
                serde_json::from_str(&text).map_err(|e| DseError::InvalidCorpus(e.to_string()))?;
            entries.extend(recipes);
        }
        for p in paths
            .iter()
            .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("wav")))
        {
            let name = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            entries.push(CorpusEntry {
                name,
                source: ClipSource::Recording(read_wav(p)?),
            });
        }
        let name = dir
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "corpus".into());
        Corpus::new(&name, entries)
    }

    pub fn render(&self, rate: f64) -> Result<Vec<SignalBuffer>, DseError> {
        self.entries.iter().map(|e| e.at_rate(rate)).collect()
    }

    pub fn sources(&self) -> Result<Vec<SignalBuffer>, DseError> {
        self.entries.iter().map(CorpusEntry::source).collect()
    }

    /// sha256 over each clip's name, rate and source samples.
    pub fn digest(&self) -> Result<String, DseError> {
        let mut h = Sha256::new();
        for e in &self.entries {
            let s = e.source()?;
            h.update((e.name.len() as u64).to_le_bytes());
            h.update(e.name.as_bytes());
            h.update(s.sample_rate().to_le_bytes());
            h.update((s.len() as u64).to_le_bytes());
            for v in s.samples() {
                h.update(v.to_le_bytes());
            }
        }
        Ok(hex::encode(h.finalize()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::write_wav;

    #[test]
    fn bundled_is_stable() {
        let a = Corpus::bundled();
        assert_eq!(a.digest().unwrap(), Corpus::bundled().digest().unwrap());
        let clips = a.render(8000.0).unwrap();
        assert!(clips
            .iter()
            .all(|c| c.sample_rate() == 8000.0 && c.len() == 2000));
    }

    #[test]
    fn wav_dir_and_rates() {
        let dir = tempfile::tempdir().unwrap();
        let tone = gen_signal(
            &SignalKind::Sine {
                freq: 500.0,
                amp: 0.5,
                phase: 0.0,
            },
            0,
            16000.0,
            1600,
        )
        .unwrap();
        write_wav(dir.path().join("b.wav"), &tone).unwrap();
        write_wav(dir.path().join("a.WAV"), &tone).unwrap();
        std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let c = Corpus::load_dir(dir.path()).unwrap();
        assert_eq!(
            c.entries
                .iter()
                .map(|e| e.name.as_str())
                .collect::<Vec<_>>(),
            ["a", "b"]
        );
        assert_eq!(c.entries[0].at_rate(8000.0).unwrap().len(), 800);
        assert!(matches!(
            c.entries[0].at_rate(6000.0),
            Err(DseError::UnsupportedRate { .. })
        ));
        assert!(matches!(
            c.entries[0].at_rate(32000.0),
            Err(DseError::UnsupportedRate { .. })
        ));
    }

    #[test]
    fn manifest_recipes_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("corpus.json"),
            r#"[{"name":"t","source":"recipe","signal":{"kind":"sine","freq":500,"amp":0.5},"seed":0,"duration_s":0.1}]"#,
        )
        .unwrap();
        let c = Corpus::load_dir(dir.path()).unwrap();
        assert_eq!(c.render(8000.0).unwrap()[0].len(), 800);

        assert!(matches!(
            Corpus::load_dir(dir.path().join("missing")),
            Err(DseError::Io(_))
        ));
        let empty = tempfile::tempdir().unwrap();
        assert!(matches!(
            Corpus::load_dir(empty.path()),
            Err(DseError::EmptyCorpus)
        ));
    }
}
