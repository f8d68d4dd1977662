// SPDX-License-Identifier: Apache-2.0
//! RIFF/WAVE reader and writer restricted to 16-bit PCM mono.

use std::fs;
use std::path::Path;

use super::{SignalBuffer, SignalError};

const PCM: u16 = 1;

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

fn unsupported(msg: impl Into<String>) -> SignalError {
    SignalError::UnsupportedFormat(msg.into())
}

/// Decodes a WAV byte image. Samples are normalized as raw / 32768.
pub fn decode_wav(bytes: &[u8]) -> Result<SignalBuffer, SignalError> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(unsupported("missing RIFF/WAVE header"));
    }
    let mut pos = 12;
    let mut fmt: Option<(u16, u16, u32, u16)> = None;
    let mut data: Option<&[u8]> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let len = u32_at(bytes, pos + 4) as usize;
        let body_start = pos + 8;
        let body_end = body_start.checked_add(len).filter(|&e| e <= bytes.len());
        let Some(body_end) = body_end else {
            return Err(unsupported("truncated chunk"));
        };
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => {
                if body.len() < 16 {
                    return Err(unsupported("short fmt chunk"));
                }
                fmt = Some((
                    u16_at(body, 0),
                    u16_at(body, 2),
                    u32_at(body, 4),
                    u16_at(body, 14),
                ));
            }
            b"data" => data = Some(body),
            _ => {}
        }
        // chunks are word aligned
        pos = body_end + (len & 1);
    }
    let (tag, channels, rate, bits) = fmt.ok_or_else(|| unsupported("no fmt chunk"))?;
    if tag != PCM {
        return Err(unsupported(format!("compressed format tag {tag}")));
    }
    if channels != 1 {
        return Err(unsupported(format!("{channels} channels, mono required")));
    }
    if bits != 16 {
        return Err(unsupported(format!("{bits}-bit samples, 16-bit required")));
    }
    if rate == 0 {
        return Err(unsupported("zero sample rate"));
    }
    let data = data.ok_or_else(|| unsupported("no data chunk"))?;
    let samples = data
        .chunks_exact(2)
        .map(|c| i16::from_le_bytes([c[0], c[1]]) as f64 / 32768.0)
        .collect();
    SignalBuffer::new(samples, rate as f64)
}

/// Encodes samples as PCM16 mono, rounding `x * 32768` to nearest and clamping.
pub fn encode_wav(buf: &SignalBuffer) -> Result<Vec<u8>, SignalError> {
    let rate = buf.sample_rate();
    if rate.fract() != 0.0 || rate > u32::MAX as f64 {
        return Err(unsupported(format!("sample rate {rate} is not an integer")));
    }
    let rate = rate as u32;
    let data_len = (buf.len() * 2) as u32;
    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&rate.to_le_bytes());
    out.extend_from_slice(&(rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for s in buf.samples() {
        let raw = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        out.extend_from_slice(&raw.to_le_bytes());
    }
    Ok(out)
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<SignalBuffer, SignalError> {
    decode_wav(&fs::read(path)?)
}

pub fn write_wav(path: impl AsRef<Path>, buf: &SignalBuffer) -> Result<(), SignalError> {
    fs::write(path, encode_wav(buf)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(channels: u16, bits: u16, tag: u16) -> Vec<u8> {
        let mut b = Vec::new();
        b.extend_from_slice(b"RIFF");
        b.extend_from_slice(&40u32.to_le_bytes());
        b.extend_from_slice(b"WAVE");
        b.extend_from_slice(b"fmt ");
        b.extend_from_slice(&16u32.to_le_bytes());
        b.extend_from_slice(&tag.to_le_bytes());
        b.extend_from_slice(&channels.to_le_bytes());
        b.extend_from_slice(&8000u32.to_le_bytes());
        b.extend_from_slice(&16000u32.to_le_bytes());
        b.extend_from_slice(&(channels * bits / 8).to_le_bytes());
        b.extend_from_slice(&bits.to_le_bytes());
        b.extend_from_slice(b"data");
        b.extend_from_slice(&4u32.to_le_bytes());
        b.extend_from_slice(&[0, 0, 0, 0]);
        b
    }

    #[test]
    fn read_length_and_rate() {
        let n = 123;
        let buf = SignalBuffer::new(
            (0..n).map(|i| (i as f64 / n as f64) - 0.5).collect(),
            8000.0,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.wav");
        write_wav(&p, &buf).unwrap();
        let back = read_wav(&p).unwrap();
        assert_eq!(back.len(), n);
        assert_eq!(back.sample_rate(), 8000.0);
    }

    #[test]
    fn round_trip_is_bit_exact_on_the_pcm_grid() {
        let raws: Vec<i16> = vec![-32768, -1, 0, 1, 12345, 32767];
        let buf =
            SignalBuffer::new(raws.iter().map(|&r| r as f64 / 32768.0).collect(), 16000.0).unwrap();
        let bytes = encode_wav(&buf).unwrap();
        let back = decode_wav(&bytes).unwrap();
        assert_eq!(back, buf);
        assert_eq!(encode_wav(&back).unwrap(), bytes);
    }

    #[test]
    fn rejects_stereo_non16_and_compressed() {
        assert!(matches!(
            decode_wav(&header(2, 16, 1)),
            Err(SignalError::UnsupportedFormat(_))
        ));
        assert!(matches!(
            decode_wav(&header(1, 8, 1)),
            Err(SignalError::UnsupportedFormat(_))
        ));
        assert!(matches!(
            decode_wav(&header(1, 16, 3)),
            Err(SignalError::UnsupportedFormat(_))
        ));
        assert!(decode_wav(&header(1, 16, 1)).is_ok());
        assert!(matches!(
            decode_wav(b"RIFF"),
            Err(SignalError::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            read_wav("/nonexistent/x.wav"),
            Err(SignalError::Io(_))
        ));
    }
}
