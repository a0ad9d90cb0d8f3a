//! Fundamental-frequency estimation by normalized autocorrelation.
//!
//! 40 ms analysis windows at a 10 ms hop, search range 60-400 Hz, voicing
//! decision at normalized peak >= 0.45, parabolic interpolation around the
//! peak lag for sub-sample resolution. The normalization makes every
//! decision amplitude-invariant.

pub const PITCH_HOP_SECS: f64 = 0.01;
const WINDOW_SECS: f64 = 0.04;
const F0_MIN_HZ: f64 = 60.0;
const F0_MAX_HZ: f64 = 400.0;
const VOICING_THRESHOLD: f64 = 0.45;
const OCTAVE_COST: f64 = 0.01;

/// Per-frame pitch at the 10 ms hop; None marks unvoiced frames.
#[derive(Debug, Clone, PartialEq)]
pub struct PitchTrack {
    pub hop: f64,
    pub f0: Vec<Option<f64>>,
}

impl PitchTrack {
    /// Midpoint of frame i in seconds (center of the analysis window).
    pub fn frame_time(&self, i: usize) -> f64 {
        i as f64 * self.hop + WINDOW_SECS / 2.0
    }

    pub fn voiced_count(&self) -> usize {
        self.f0.iter().filter(|f| f.is_some()).count()
    }
}

/// Track f0 over a mono signal. A signal shorter than one analysis window
/// yields an empty track.
pub fn estimate_pitch_track(samples: &[f64], sample_rate: u32) -> PitchTrack {
    let sr = sample_rate as f64;
    let window = (WINDOW_SECS * sr).round() as usize;
    let hop = (PITCH_HOP_SECS * sr).round() as usize;
    let mut f0 = Vec::new();
    if window == 0 || hop == 0 || samples.len() < window {
        return PitchTrack {
            hop: PITCH_HOP_SECS,
            f0,
        };
    }
    let lag_min = ((sr / F0_MAX_HZ).floor() as usize).max(2);
    let lag_max = ((sr / F0_MIN_HZ).ceil() as usize).min(window - 1);

    let mut start = 0;
    while start + window <= samples.len() {
        let frame = &samples[start..start + window];
        f0.push(analyze_frame(frame, sr, lag_min, lag_max));
        start += hop;
    }
    PitchTrack {
        hop: PITCH_HOP_SECS,
        f0,
    }
}

fn analyze_frame(frame: &[f64], sr: f64, lag_min: usize, lag_max: usize) -> Option<f64> {
    let n = frame.len();
    let mean = frame.iter().sum::<f64>() / n as f64;
    let x: Vec<f64> = frame.iter().map(|v| v - mean).collect();

    // Normalized autocorrelation r(tau) over the overlapping parts. Peak
    // selection subtracts a small octave cost so a subharmonic lag (where a
    // periodic signal correlates just as perfectly) cannot outrank the true
    // period; the voicing decision still uses the raw correlation.
    let mut best_lag = 0;
    let mut best_score = f64::NEG_INFINITY;
    let mut r_at = vec![0.0; lag_max + 2];
    for lag in lag_min..=lag_max {
        let m = n - lag;
        let mut num = 0.0;
        let mut e0 = 0.0;
        let mut e1 = 0.0;
        for i in 0..m {
            num += x[i] * x[i + lag];
            e0 += x[i] * x[i];
            e1 += x[i + lag] * x[i + lag];
        }
        let denom = (e0 * e1).sqrt();
        let r = if denom > 0.0 { num / denom } else { 0.0 };
        r_at[lag] = r;
        let score = r - OCTAVE_COST * (lag as f64 / lag_min as f64).log2();
        if score > best_score {
            best_score = score;
            best_lag = lag;
        }
    }
    if best_lag == 0 || r_at[best_lag] < VOICING_THRESHOLD {
        return None;
    }

    // Parabolic interpolation around the peak lag.
    let refined = if best_lag > lag_min && best_lag < lag_max {
        let (ym, y0, yp) = (r_at[best_lag - 1], r_at[best_lag], r_at[best_lag + 1]);
        let denom = ym - 2.0 * y0 + yp;
        if denom.abs() > 1e-12 {
            best_lag as f64 + 0.5 * (ym - yp) / denom
        } else {
            best_lag as f64
        }
    } else {
        best_lag as f64
    };
    Some(sr / refined)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn sine(freq: f64, secs: f64, sr: u32) -> Vec<f64> {
        (0..(secs * sr as f64) as usize)
            .map(|i| (2.0 * std::f64::consts::PI * freq * i as f64 / sr as f64).sin())
            .collect()
    }

    #[test]
    fn pure_tone_recovered_within_two_hz() {
        let samples = sine(200.0, 0.5, 16_000);
        let track = estimate_pitch_track(&samples, 16_000);
        assert!(track.f0.len() > 10);
        for f in track.f0.iter().flatten() {
            assert!((f - 200.0).abs() <= 2.0, "f0 {f}");
        }
        assert!(track.voiced_count() as f64 >= 0.9 * track.f0.len() as f64);
    }

    #[test]
    fn white_noise_mostly_unvoiced() {
        let mut rng = SplitMix64::new(77);
        let samples: Vec<f64> = (0..16_000).map(|_| rng.next_normal()).collect();
        let track = estimate_pitch_track(&samples, 16_000);
        let unvoiced = track.f0.iter().filter(|f| f.is_none()).count();
        assert!(
            unvoiced as f64 >= 0.9 * track.f0.len() as f64,
            "only {unvoiced}/{} unvoiced",
            track.f0.len()
        );
    }

    #[test]
    fn silence_all_unvoiced() {
        let samples = vec![0.0; 16_000];
        let track = estimate_pitch_track(&samples, 16_000);
        assert!(track.f0.iter().all(|f| f.is_none()));
    }

    #[test]
    fn short_signal_empty_track() {
        let samples = vec![0.1; 100];
        let track = estimate_pitch_track(&samples, 16_000);
        assert!(track.f0.is_empty());
    }

    #[test]
    fn amplitude_invariant() {
        let samples = sine(173.0, 0.3, 16_000);
        let track = estimate_pitch_track(&samples, 16_000);
        for scale in [0.001, 0.5, 2.0, 1000.0] {
            let scaled: Vec<f64> = samples.iter().map(|x| x * scale).collect();
            let scaled_track = estimate_pitch_track(&scaled, 16_000);
            assert_eq!(track.f0.len(), scaled_track.f0.len());
            for (a, b) in track.f0.iter().zip(&scaled_track.f0) {
                match (a, b) {
                    (Some(fa), Some(fb)) => assert!((fa - fb).abs() < 1e-6),
                    (None, None) => {}
                    other => panic!("voicing flip under scaling: {other:?}"),
                }
            }
        }
    }
}
