//! Deterministic test-corpus generators: two-cluster embedding sets with
//! controllable cosine separation, conversation timelines hitting target
//! speech/overlap/turn-taking rates, and resonator-filtered audio with known
//! pitch, formants, and SNR.
//!
//! Fixtures live in the repository as generator code plus seeds, not as
//! committed binaries; everything here is a pure function of (spec, seed).

use crate::embeddings::EmbeddingSet;
use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::rttm::{speech_union, Timeline, Turn};

/// Generator parameters. Embedding targets are hard bounds: every generated
/// within-cluster pair reaches `within_cosine`, every across-cluster pair
/// stays below `across_cosine`.
#[derive(Debug, Clone)]
pub struct FixtureSpec {
    pub seed: u64,
    pub n_segments: usize,
    pub dim: usize,
    pub within_cosine: f64,
    pub across_cosine: f64,
    pub recording_id: String,
    pub duration_secs: f64,
    pub target_sp: Option<f64>,
    pub target_ovp: Option<f64>,
    pub target_stm: Option<f64>,
    pub audio: Option<AudioFixtureSpec>,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            n_segments: 40,
            dim: 16,
            within_cosine: 0.9,
            across_cosine: 0.1,
            recording_id: "fixture".to_string(),
            duration_secs: 60.0,
            target_sp: None,
            target_ovp: None,
            target_stm: None,
            audio: None,
        }
    }
}

/// Audio synthesis parameters.
#[derive(Debug, Clone)]
pub struct AudioFixtureSpec {
    pub sample_rate: u32,
    /// Source f0 per speaker, matched to speakers in label order.
    pub f0_per_speaker: Vec<f64>,
    /// Resonator cascade as (center_hz, bandwidth_hz).
    pub resonances: Vec<(f64, f64)>,
    /// Clean-speech-power to noise-power ratio in dB; None disables noise.
    pub snr_db: Option<f64>,
    pub amplitude: f64,
}

impl Default for AudioFixtureSpec {
    fn default() -> Self {
        Self {
            sample_rate: 16_000,
            f0_per_speaker: vec![120.0, 210.0],
            resonances: vec![(500.0, 80.0), (1500.0, 80.0), (2500.0, 80.0)],
            snr_db: None,
            amplitude: 0.3,
        }
    }
}

fn unit_gaussian_vector(dim: usize, rng: &mut SplitMix64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.next_normal()).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Two-cluster embedding set with alternating ground-truth labels.
pub fn gen_embeddings(spec: &FixtureSpec) -> Result<(EmbeddingSet, Vec<usize>)> {
    if spec.n_segments == 0 {
        return Err(Error::InfeasibleFixture("n_segments must be >= 1".into()));
    }
    if spec.dim < 2 {
        return Err(Error::InfeasibleFixture("dim must be >= 2".into()));
    }
    if !(spec.within_cosine > spec.across_cosine) {
        return Err(Error::InfeasibleFixture(format!(
            "within_cosine {} must exceed across_cosine {}",
            spec.within_cosine, spec.across_cosine
        )));
    }
    if spec.within_cosine > 1.0 || spec.across_cosine < -1.0 {
        return Err(Error::InfeasibleFixture(
            "cosine targets outside [-1, 1]".into(),
        ));
    }

    // Geometry: members sit within angle theta_m of their centroid, so
    // within-pair angle <= 2 theta_m and across-pair angle >=
    // centroid angle - 2 theta_m.
    let theta_within = spec.within_cosine.clamp(-1.0, 1.0).acos();
    let theta_across = spec.across_cosine.clamp(-1.0, 1.0).acos();
    let mut theta_m = theta_within / 4.0;
    let max_theta_m = (std::f64::consts::PI - theta_across) / 2.0;
    if max_theta_m <= 0.0 {
        return Err(Error::InfeasibleFixture(
            "across_cosine target unreachable even with antipodal centroids".into(),
        ));
    }
    theta_m = theta_m.min(0.9 * max_theta_m);
    let centroid_angle = (theta_across + 2.0 * theta_m + 0.05).min(std::f64::consts::PI);

    for attempt in 0..8u64 {
        let mut rng = SplitMix64::stream(spec.seed, attempt);
        let c1 = unit_gaussian_vector(spec.dim, &mut rng);
        // Orthonormal partner for spanning the centroid plane.
        let u = {
            let raw = unit_gaussian_vector(spec.dim, &mut rng);
            let proj = dot(&raw, &c1);
            let v: Vec<f64> = raw.iter().zip(&c1).map(|(r, c)| r - proj * c).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-6 {
                continue;
            }
            v.into_iter().map(|x| x / norm).collect::<Vec<f64>>()
        };
        let c2: Vec<f64> = c1
            .iter()
            .zip(&u)
            .map(|(a, b)| centroid_angle.cos() * a + centroid_angle.sin() * b)
            .collect();

        let sigma = theta_m.sin() * 0.3 / (spec.dim as f64).sqrt() / (1 << attempt) as f64;
        let mut vectors = Vec::with_capacity(spec.n_segments);
        let mut labels = Vec::with_capacity(spec.n_segments);
        for i in 0..spec.n_segments {
            let label = i % 2;
            let centroid = if label == 0 { &c1 } else { &c2 };
            let v: Vec<f64> = centroid
                .iter()
                .map(|c| c + sigma * rng.next_normal())
                .collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            vectors.push(v.into_iter().map(|x| x / norm).collect::<Vec<f64>>());
            labels.push(label);
        }

        let ok = (0..spec.n_segments).all(|i| {
            ((i + 1)..spec.n_segments).all(|j| {
                let s = dot(&vectors[i], &vectors[j]);
                if labels[i] == labels[j] {
                    s >= spec.within_cosine
                } else {
                    s <= spec.across_cosine
                }
            })
        });
        if !ok {
            continue;
        }

        let segments = vectors
            .into_iter()
            .enumerate()
            .map(|(i, v)| (i as f64, i as f64 + 0.9, v))
            .collect();
        let set = EmbeddingSet::new(spec.recording_id.clone(), spec.dim, segments)?;
        return Ok((set, labels));
    }
    Err(Error::InfeasibleFixture(format!(
        "could not satisfy within >= {} and across <= {} after 8 attempts",
        spec.within_cosine, spec.across_cosine
    )))
}

/// Two-speaker conversation timeline hitting the SP/OVP/STM targets: a chain
/// of alternating equal-length turns, each junction overlapping by the same
/// amount, trailing silence absorbing the rest of the file.
pub fn gen_timeline(spec: &FixtureSpec) -> Result<Timeline> {
    let duration = spec.duration_secs;
    if !(duration > 0.0) {
        return Err(Error::InfeasibleFixture("duration must be > 0".into()));
    }
    let sp = spec.target_sp.unwrap_or(80.0);
    let ovp = spec.target_ovp.unwrap_or(0.0);
    let stm = spec.target_stm.unwrap_or(12.0);
    if !(0.0..=100.0).contains(&sp) || ovp < 0.0 || ovp > sp || stm < 0.0 {
        return Err(Error::InfeasibleFixture(format!(
            "targets out of range: sp={sp} ovp={ovp} stm={stm}"
        )));
    }

    let union = sp / 100.0 * duration;
    let total_overlap = ovp / 100.0 * duration;
    let n_turns = ((stm * duration / 60.0).round() as usize) + 1;
    if n_turns == 1 && total_overlap > 0.0 {
        return Err(Error::InfeasibleFixture(
            "overlap needs at least two turns (stm too low)".into(),
        ));
    }
    let turn_len = (union + total_overlap) / n_turns as f64;
    let junction_overlap = if n_turns > 1 {
        total_overlap / (n_turns - 1) as f64
    } else {
        0.0
    };
    if turn_len < 0.002 {
        return Err(Error::InfeasibleFixture(format!(
            "turns of {turn_len:.4}s are below the 1 ms grid (stm too high for sp)"
        )));
    }
    if junction_overlap >= turn_len - 0.001 {
        return Err(Error::InfeasibleFixture(
            "per-junction overlap would swallow whole turns (ovp too high)".into(),
        ));
    }

    // Quantize turn BOUNDARIES to the millisecond grid (not durations), so
    // the chain never drifts past the requested file duration.
    let step = turn_len - junction_overlap;
    let mut turns = Vec::with_capacity(n_turns);
    for i in 0..n_turns {
        let onset_ms = (i as f64 * step * 1000.0).round() as i64;
        let end_ms = ((i as f64 * step + turn_len) * 1000.0).round() as i64;
        let speaker = format!("spk{:02}", i % 2);
        turns.push(Turn::new(
            spec.recording_id.clone(),
            onset_ms as f64 / 1000.0,
            (end_ms - onset_ms) as f64 / 1000.0,
            speaker,
        )?);
    }
    let timeline = Timeline::new(spec.recording_id.clone(), turns)?;
    if timeline.extent() > duration + 1e-9 {
        return Err(Error::InfeasibleFixture(
            "constructed speech chain exceeds the file duration".into(),
        ));
    }

    // The generator's own contract: achieved features within 10% relative.
    let (got_sp, got_ovp, got_stm) = crate::stats::timeline_features(&timeline, duration)?;
    let close = |got: f64, want: f64| want == 0.0 || ((got - want) / want).abs() <= 0.10;
    if !(close(got_sp, sp) && close(got_ovp, ovp) && close(got_stm, stm)) {
        return Err(Error::InfeasibleFixture(format!(
            "achieved sp={got_sp:.2} ovp={got_ovp:.2} stm={got_stm:.2} \
             vs targets sp={sp} ovp={ovp} stm={stm}"
        )));
    }
    Ok(timeline)
}

/// Impulse train at f0 through a cascade of 2nd-order resonators,
/// peak-normalized to 1.
pub fn resonant_voice(
    f0: f64,
    resonances: &[(f64, f64)],
    n_samples: usize,
    sample_rate: u32,
) -> Vec<f64> {
    let sr = sample_rate as f64;
    let period = sr / f0;
    let mut signal = vec![0.0; n_samples];
    let mut next_pulse = 0.0f64;
    while (next_pulse.round() as usize) < n_samples {
        signal[next_pulse.round() as usize] = 1.0;
        next_pulse += period;
    }
    for &(freq, bw) in resonances {
        let rho = (-std::f64::consts::PI * bw / sr).exp();
        let omega = 2.0 * std::f64::consts::PI * freq / sr;
        let a1 = 2.0 * rho * omega.cos();
        let a2 = -rho * rho;
        let mut y1 = 0.0;
        let mut y2 = 0.0;
        for x in &mut signal {
            let y = *x + a1 * y1 + a2 * y2;
            y2 = y1;
            y1 = y;
            *x = y;
        }
    }
    let peak = signal.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if peak > 0.0 {
        for x in &mut signal {
            *x /= peak;
        }
    }
    signal
}

/// Synthesize mono audio for a timeline: per-speaker harmonic voices inside
/// their turns plus (optionally) white noise everywhere, scaled so that
/// clean-speech power over noise power matches `snr_db`.
pub fn gen_audio(
    timeline: &Timeline,
    duration_secs: f64,
    spec: &AudioFixtureSpec,
    seed: u64,
) -> Result<Vec<f64>> {
    if spec.sample_rate < 8000 {
        return Err(Error::InfeasibleFixture(format!(
            "sample rate {} below 8000 Hz",
            spec.sample_rate
        )));
    }
    if spec.f0_per_speaker.is_empty() {
        return Err(Error::InfeasibleFixture("need at least one f0".into()));
    }
    let sr = spec.sample_rate as f64;
    let n = (duration_secs * sr).round() as usize;
    let mut samples = vec![0.0; n];

    let speakers = timeline.speakers();
    for turn in timeline.turns() {
        let speaker_idx = speakers.iter().position(|s| *s == turn.speaker).unwrap();
        let f0 = spec.f0_per_speaker[speaker_idx % spec.f0_per_speaker.len()];
        let start = (turn.onset * sr).round() as usize;
        let len = (turn.duration * sr).round() as usize;
        if start >= n {
            continue;
        }
        let len = len.min(n - start);
        let voice = resonant_voice(f0, &spec.resonances, len, spec.sample_rate);
        for (dst, v) in samples[start..start + len].iter_mut().zip(&voice) {
            *dst += spec.amplitude * v;
        }
    }

    if let Some(snr_db) = spec.snr_db {
        let speech = speech_union(timeline);
        let speech_samples: Vec<f64> = samples
            .iter()
            .enumerate()
            .filter(|(i, _)| speech.contains_ms(crate::rttm::secs_to_ms(*i as f64 / sr)))
            .map(|(_, &x)| x)
            .collect();
        let speech_power = if speech_samples.is_empty() {
            0.0
        } else {
            speech_samples.iter().map(|x| x * x).sum::<f64>() / speech_samples.len() as f64
        };
        let noise_sigma = (speech_power / 10f64.powf(snr_db / 10.0)).sqrt();
        if noise_sigma > 0.0 {
            let mut rng = SplitMix64::stream(seed, 0x6e6f697365);
            for x in &mut samples {
                *x += noise_sigma * rng.next_normal();
            }
        }
    }

    // Headroom for 16-bit export without touching any power ratio.
    let peak = samples.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if peak > 0.99 {
        let scale = 0.99 / peak;
        for x in &mut samples {
            *x *= scale;
        }
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::timeline_features;

    #[test]
    fn embeddings_meet_targets_and_determinism() {
        let spec = FixtureSpec::default();
        let (set, labels) = gen_embeddings(&spec).unwrap();
        assert_eq!(set.len(), 40);
        assert_eq!(labels.len(), 40);
        let vectors: Vec<&[f64]> = set.vectors().collect();
        for i in 0..40 {
            for j in (i + 1)..40 {
                let s: f64 = vectors[i].iter().zip(vectors[j]).map(|(a, b)| a * b).sum();
                if labels[i] == labels[j] {
                    assert!(s >= 0.9, "within pair ({i},{j}) cos {s}");
                } else {
                    assert!(s <= 0.1, "across pair ({i},{j}) cos {s}");
                }
            }
        }
        let (again, _) = gen_embeddings(&spec).unwrap();
        assert_eq!(set, again);
    }

    #[test]
    fn embeddings_two_segments() {
        let spec = FixtureSpec {
            n_segments: 2,
            ..Default::default()
        };
        let (_, labels) = gen_embeddings(&spec).unwrap();
        assert_eq!(labels, vec![0, 1]);
    }

    #[test]
    fn embeddings_infeasible_targets_rejected() {
        let spec = FixtureSpec {
            within_cosine: 0.1,
            across_cosine: 0.9,
            ..Default::default()
        };
        assert!(matches!(
            gen_embeddings(&spec),
            Err(Error::InfeasibleFixture(_))
        ));
    }

    #[test]
    fn timeline_hits_corpus_average_targets() {
        let spec = FixtureSpec {
            target_sp: Some(88.14),
            target_ovp: Some(4.08),
            target_stm: Some(16.0),
            duration_secs: 60.0,
            ..Default::default()
        };
        let tl = gen_timeline(&spec).unwrap();
        let (sp, ovp, stm) = timeline_features(&tl, 60.0).unwrap();
        assert!(((sp - 88.14) / 88.14).abs() <= 0.10, "sp {sp}");
        assert!(((ovp - 4.08) / 4.08).abs() <= 0.10, "ovp {ovp}");
        assert!(((stm - 16.0) / 16.0).abs() <= 0.10, "stm {stm}");
    }

    #[test]
    fn timeline_zero_overlap_and_full_speech() {
        let spec = FixtureSpec {
            target_sp: Some(90.0),
            target_ovp: Some(0.0),
            target_stm: Some(10.0),
            ..Default::default()
        };
        let tl = gen_timeline(&spec).unwrap();
        assert!(crate::rttm::overlap_regions(&tl).is_empty());

        let spec = FixtureSpec {
            target_sp: Some(100.0),
            target_ovp: Some(0.0),
            target_stm: Some(10.0),
            ..Default::default()
        };
        let tl = gen_timeline(&spec).unwrap();
        let union = speech_union(&tl);
        assert_eq!(union.total_secs(), 60.0);
    }

    #[test]
    fn audio_pitch_loop_closes() {
        let spec = FixtureSpec {
            target_sp: Some(90.0),
            target_ovp: Some(0.0),
            target_stm: Some(6.0),
            duration_secs: 10.0,
            ..Default::default()
        };
        let tl = gen_timeline(&spec).unwrap();
        let audio_spec = AudioFixtureSpec {
            f0_per_speaker: vec![200.0],
            snr_db: None,
            ..Default::default()
        };
        let samples = gen_audio(&tl, 10.0, &audio_spec, 1).unwrap();
        let track = crate::pitch::estimate_pitch_track(&samples, 16_000);
        let voiced: Vec<f64> = track.f0.iter().flatten().copied().collect();
        assert!(voiced.len() > 100);
        let mut sorted = voiced.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        assert!((median - 200.0).abs() <= 2.0, "median f0 {median}");
    }

    #[test]
    fn zero_amplitude_is_silence() {
        let spec = FixtureSpec {
            target_sp: Some(50.0),
            target_stm: Some(12.0),
            duration_secs: 5.0,
            ..Default::default()
        };
        let tl = gen_timeline(&spec).unwrap();
        let audio_spec = AudioFixtureSpec {
            amplitude: 0.0,
            snr_db: Some(20.0),
            ..Default::default()
        };
        let samples = gen_audio(&tl, 5.0, &audio_spec, 3).unwrap();
        assert!(samples.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn snr_fixture_close_to_construction() {
        let spec = FixtureSpec {
            target_sp: Some(60.0),
            target_ovp: Some(0.0),
            target_stm: Some(6.0),
            duration_secs: 10.0,
            ..Default::default()
        };
        let tl = gen_timeline(&spec).unwrap();
        let audio_spec = AudioFixtureSpec {
            snr_db: Some(20.0),
            ..Default::default()
        };
        let samples = gen_audio(&tl, 10.0, &audio_spec, 9).unwrap();
        let feats = crate::stats::audio_features(&samples, 16_000, &tl);
        let snr = feats.snr.expect("snr present");
        assert!((snr - 20.0).abs() <= 1.5, "snr {snr}");
    }
}
