//! Uncompressed PCM WAV reading and writing.
//!
//! Supports 16-bit integer and 32-bit float sample formats; multichannel
//! files contribute only their first channel. That covers the corpus audio
//! this crate analyzes without pulling in codec dependencies.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WavAudio {
    pub sample_rate: u32,
    /// Mono samples in [-1, 1] (first channel of multichannel input).
    pub samples: Vec<f64>,
}

impl WavAudio {
    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

fn wav_err(msg: impl Into<String>) -> Error {
    Error::Wav(msg.into())
}

fn read_u16(bytes: &[u8], at: usize) -> Result<u16> {
    bytes
        .get(at..at + 2)
        .map(|b| u16::from_le_bytes([b[0], b[1]]))
        .ok_or_else(|| wav_err("truncated file"))
}

fn read_u32(bytes: &[u8], at: usize) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| wav_err("truncated file"))
}

/// Decode a RIFF/WAVE byte stream.
pub fn decode_wav(bytes: &[u8]) -> Result<WavAudio> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(wav_err("not a RIFF/WAVE file"));
    }
    let mut format: Option<(u16, u16, u32, u16)> = None; // (code, channels, rate, bits)
    let mut data: Option<&[u8]> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = read_u32(bytes, pos + 4)? as usize;
        let body_start = pos + 8;
        let body_end = (body_start + size).min(bytes.len());
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(wav_err("fmt chunk too small"));
                }
                format = Some((
                    read_u16(bytes, body_start)?,
                    read_u16(bytes, body_start + 2)?,
                    read_u32(bytes, body_start + 4)?,
                    read_u16(bytes, body_start + 14)?,
                ));
            }
            b"data" => data = Some(&bytes[body_start..body_end]),
            _ => {}
        }
        // Chunks are word-aligned.
        pos = body_start + size + (size & 1);
    }
    let (code, channels, sample_rate, bits) = format.ok_or_else(|| wav_err("missing fmt chunk"))?;
    let data = data.ok_or_else(|| wav_err("missing data chunk"))?;
    if channels == 0 {
        return Err(wav_err("zero channels"));
    }
    if sample_rate == 0 {
        return Err(wav_err("zero sample rate"));
    }
    let channels = channels as usize;
    let samples = match (code, bits) {
        (1, 16) => {
            let frame = channels * 2;
            data.chunks_exact(frame)
                .map(|f| i16::from_le_bytes([f[0], f[1]]) as f64 / 32768.0)
                .collect()
        }
        (3, 32) => {
            let frame = channels * 4;
            data.chunks_exact(frame)
                .map(|f| f32::from_le_bytes([f[0], f[1], f[2], f[3]]) as f64)
                .collect()
        }
        (code, bits) => {
            return Err(wav_err(format!(
                "unsupported format {code} at {bits} bits (need PCM16 or float32)"
            )))
        }
    };
    Ok(WavAudio {
        sample_rate,
        samples,
    })
}

/// Encode mono samples as 16-bit PCM. Samples are clamped to [-1, 1].
pub fn encode_wav_pcm16(samples: &[f64], sample_rate: u32) -> Vec<u8> {
    let data_len = samples.len() * 2;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&sample_rate.to_le_bytes());
    out.extend_from_slice(&(sample_rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &x in samples {
        let v = (x.clamp(-1.0, 1.0) * 32768.0)
            .round()
            .clamp(-32768.0, 32767.0) as i16;
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn read_wav(path: &std::path::Path) -> Result<WavAudio> {
    decode_wav(&std::fs::read(path)?)
}

pub fn write_wav_pcm16(path: &std::path::Path, samples: &[f64], sample_rate: u32) -> Result<()> {
    std::fs::write(path, encode_wav_pcm16(samples, sample_rate))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pcm16_round_trip() {
        let samples: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.05).sin() * 0.8).collect();
        let bytes = encode_wav_pcm16(&samples, 16_000);
        let audio = decode_wav(&bytes).unwrap();
        assert_eq!(audio.sample_rate, 16_000);
        assert_eq!(audio.samples.len(), samples.len());
        for (a, b) in samples.iter().zip(&audio.samples) {
            assert!((a - b).abs() <= 0.5 / 32768.0 + 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn float32_decoding() {
        let samples = [0.25f32, -0.5, 1.0];
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"RIFF");
        bytes.extend_from_slice(&(36 + 12u32).to_le_bytes());
        bytes.extend_from_slice(b"WAVE");
        bytes.extend_from_slice(b"fmt ");
        bytes.extend_from_slice(&16u32.to_le_bytes());
        bytes.extend_from_slice(&3u16.to_le_bytes());
        bytes.extend_from_slice(&1u16.to_le_bytes());
        bytes.extend_from_slice(&8000u32.to_le_bytes());
        bytes.extend_from_slice(&32000u32.to_le_bytes());
        bytes.extend_from_slice(&4u16.to_le_bytes());
        bytes.extend_from_slice(&32u16.to_le_bytes());
        bytes.extend_from_slice(b"data");
        bytes.extend_from_slice(&12u32.to_le_bytes());
        for s in samples {
            bytes.extend_from_slice(&s.to_le_bytes());
        }
        let audio = decode_wav(&bytes).unwrap();
        assert_eq!(audio.sample_rate, 8000);
        assert_eq!(audio.samples, vec![0.25, -0.5, 1.0]);
    }

    #[test]
    fn stereo_takes_first_channel() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"RIFF");
        bytes.extend_from_slice(&(36 + 8u32).to_le_bytes());
        bytes.extend_from_slice(b"WAVE");
        bytes.extend_from_slice(b"fmt ");
        bytes.extend_from_slice(&16u32.to_le_bytes());
        bytes.extend_from_slice(&1u16.to_le_bytes());
        bytes.extend_from_slice(&2u16.to_le_bytes());
        bytes.extend_from_slice(&8000u32.to_le_bytes());
        bytes.extend_from_slice(&32000u32.to_le_bytes());
        bytes.extend_from_slice(&4u16.to_le_bytes());
        bytes.extend_from_slice(&16u16.to_le_bytes());
        bytes.extend_from_slice(b"data");
        bytes.extend_from_slice(&8u32.to_le_bytes());
        for v in [100i16, -100, 200, -200] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        let audio = decode_wav(&bytes).unwrap();
        assert_eq!(audio.samples.len(), 2);
        assert!((audio.samples[0] - 100.0 / 32768.0).abs() < 1e-12);
        assert!((audio.samples[1] - 200.0 / 32768.0).abs() < 1e-12);
    }

    #[test]
    fn garbage_rejected() {
        assert!(decode_wav(b"not a wav").is_err());
        assert!(decode_wav(b"RIFF\x00\x00\x00\x00WAVEdata").is_err());
    }
}
