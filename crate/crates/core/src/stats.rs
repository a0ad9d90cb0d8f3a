//! Recording-level descriptors: speech percentage, overlap percentage,
//! turn-taking rate, pitch/F3 speaker differences, and SNR, with corpus means
//! and 95% confidence intervals.

use crate::error::{Error, Result};
use crate::formant::estimate_f3_track;
use crate::pitch::estimate_pitch_track;
use crate::rttm::{overlap_regions, secs_to_ms, speech_union, IntervalSet, Timeline};

/// Features of one recording. Audio-dependent entries are None when audio is
/// unavailable or the estimate is undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordingFeatures {
    pub recording_id: String,
    pub duration: f64,
    /// Speech percentage of file duration.
    pub sp: f64,
    /// Overlap percentage of file duration.
    pub ovp: f64,
    /// Speaker turns per minute.
    pub stm: f64,
    /// Absolute difference in median pitch between the two speakers, Hz.
    pub adp: Option<f64>,
    /// Absolute difference in median third formant, Hz.
    pub adf3: Option<f64>,
    /// Signal-to-noise ratio, dB.
    pub snr: Option<f64>,
}

/// Denominator for the overlap percentage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OvpBase {
    /// Relative to file duration.
    #[default]
    Duration,
    /// Relative to total speech time.
    Speech,
}

/// What a "turn" means for the turns-per-minute rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StmMode {
    /// Speaker-change points in the onset-ordered turn sequence.
    #[default]
    ChangePoints,
    /// Raw turn count.
    Turns,
}

/// (sp, ovp, stm) from the timeline alone, with the default bases.
pub fn timeline_features(timeline: &Timeline, duration: f64) -> Result<(f64, f64, f64)> {
    timeline_features_with(timeline, duration, OvpBase::Duration, StmMode::ChangePoints)
}

pub fn timeline_features_with(
    timeline: &Timeline,
    duration: f64,
    ovp_base: OvpBase,
    stm_mode: StmMode,
) -> Result<(f64, f64, f64)> {
    if !(duration > 0.0) {
        return Err(Error::validation(format!(
            "duration must be > 0, got {duration}"
        )));
    }
    if timeline.extent() > duration + 1e-9 {
        return Err(Error::validation(format!(
            "timeline extent {} exceeds duration {duration}",
            timeline.extent()
        )));
    }
    let speech = speech_union(timeline).total_secs();
    let overlap = overlap_regions(timeline).total_secs();
    let sp = 100.0 * speech / duration;
    let ovp = match ovp_base {
        OvpBase::Duration => 100.0 * overlap / duration,
        OvpBase::Speech => {
            if speech > 0.0 {
                100.0 * overlap / speech
            } else {
                0.0
            }
        }
    };
    let events = match stm_mode {
        StmMode::ChangePoints => timeline
            .turns()
            .windows(2)
            .filter(|w| w[0].speaker != w[1].speaker)
            .count(),
        StmMode::Turns => timeline.len(),
    };
    let stm = events as f64 / (duration / 60.0);
    Ok((sp, ovp, stm))
}

/// Audio-derived features plus any estimation warnings.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AudioFeatures {
    pub adp: Option<f64>,
    pub adf3: Option<f64>,
    pub snr: Option<f64>,
    pub warnings: Vec<String>,
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    Some(values[values.len() / 2])
}

/// ADP/ADF3/SNR for one recording.
///
/// Pitch and F3 medians are pooled per speaker over that speaker's
/// non-overlapped regions only (overlap frames have ambiguous attribution)
/// and need exactly two speakers; SNR compares 10 ms frame energy inside the
/// speech union against the energy outside.
pub fn audio_features(samples: &[f64], sample_rate: u32, timeline: &Timeline) -> AudioFeatures {
    let mut out = AudioFeatures::default();
    let overlap = overlap_regions(timeline);

    let speakers = timeline.speakers();
    if speakers.len() == 2 {
        let pitch = estimate_pitch_track(samples, sample_rate);
        let f3 = estimate_f3_track(samples, sample_rate);
        let mut pitch_medians = Vec::new();
        let mut f3_medians = Vec::new();
        for (speaker, intervals) in timeline.speaker_intervals() {
            let exclusive = intervals.subtract(&overlap);
            let mut f0_pool = Vec::new();
            for (i, f0) in pitch.f0.iter().enumerate() {
                if let Some(f0) = f0 {
                    if exclusive.contains_ms(secs_to_ms(pitch.frame_time(i))) {
                        f0_pool.push(*f0);
                    }
                }
            }
            let mut f3_pool = Vec::new();
            for (i, v) in f3.f3.iter().enumerate() {
                if let Some(v) = v {
                    if exclusive.contains_ms(secs_to_ms(f3.frame_time(i))) {
                        f3_pool.push(*v);
                    }
                }
            }
            match median(&mut f0_pool) {
                Some(m) => pitch_medians.push(m),
                None => out
                    .warnings
                    .push(format!("speaker '{speaker}' has no voiced frames")),
            }
            if let Some(m) = median(&mut f3_pool) {
                f3_medians.push(m);
            }
        }
        if pitch_medians.len() == 2 {
            out.adp = Some((pitch_medians[0] - pitch_medians[1]).abs());
        }
        if f3_medians.len() == 2 {
            out.adf3 = Some((f3_medians[0] - f3_medians[1]).abs());
        }
    }

    out.snr = estimate_snr(
        samples,
        sample_rate,
        &speech_union(timeline),
        &mut out.warnings,
    );
    out
}

fn estimate_snr(
    samples: &[f64],
    sample_rate: u32,
    speech: &IntervalSet,
    warnings: &mut Vec<String>,
) -> Option<f64> {
    let frame_len = (sample_rate as f64 * 0.01).round() as usize;
    if frame_len == 0 || samples.len() < frame_len {
        warnings.push("signal too short for SNR estimation".into());
        return None;
    }
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    let mut frame_start = 0usize;
    while frame_start + frame_len <= samples.len() {
        let frame = &samples[frame_start..frame_start + frame_len];
        let energy = frame.iter().map(|x| x * x).sum::<f64>() / frame_len as f64;
        let mid_secs = (frame_start + frame_len / 2) as f64 / sample_rate as f64;
        if speech.contains_ms(secs_to_ms(mid_secs)) {
            inside.push(energy);
        } else {
            outside.push(energy);
        }
        frame_start += frame_len;
    }
    if inside.is_empty() {
        warnings.push("no speech frames; SNR undefined".into());
        return None;
    }
    if outside.is_empty() {
        warnings.push("no non-speech frames; SNR undefined".into());
        return None;
    }
    let mean_in = inside.iter().sum::<f64>() / inside.len() as f64;
    let mean_out = outside.iter().sum::<f64>() / outside.len() as f64;
    if mean_out <= 0.0 {
        // Digital silence outside speech: never report a fabricated number.
        warnings.push("non-speech region is digital silence; SNR undefined".into());
        return None;
    }
    Some(10.0 * (mean_in / mean_out).log10())
}

/// Confidence-interval flavor for summarize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CiMethod {
    /// Normal approximation, 1.96 standard errors.
    #[default]
    Normal,
    /// Student t quantile at 0.975 with n-1 degrees of freedom.
    Student,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub feature: &'static str,
    pub mean: f64,
    pub ci95_halfwidth: f64,
    pub count: usize,
}

/// Per-feature mean and 95% CI half-width across recordings; features with
/// no present values are omitted.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureSummary {
    pub rows: Vec<FeatureRow>,
}

impl FeatureSummary {
    pub fn row(&self, feature: &str) -> Option<&FeatureRow> {
        self.rows.iter().find(|r| r.feature == feature)
    }
}

/// Mean and half-width per feature with the default normal-approximation CI.
pub fn summarize(features: &[RecordingFeatures]) -> FeatureSummary {
    summarize_with(features, CiMethod::Normal)
}

type FeatureColumn = (&'static str, fn(&RecordingFeatures) -> Option<f64>);

pub fn summarize_with(features: &[RecordingFeatures], ci: CiMethod) -> FeatureSummary {
    let mut rows = Vec::new();
    let columns: [FeatureColumn; 6] = [
        ("sp", |f| Some(f.sp)),
        ("ovp", |f| Some(f.ovp)),
        ("adp", |f| f.adp),
        ("adf3", |f| f.adf3),
        ("snr", |f| f.snr),
        ("stm", |f| Some(f.stm)),
    ];
    for (name, extract) in columns {
        let values: Vec<f64> = features.iter().filter_map(extract).collect();
        if let Some((mean, halfwidth)) = mean_ci(&values, ci) {
            rows.push(FeatureRow {
                feature: name,
                mean,
                ci95_halfwidth: halfwidth,
                count: values.len(),
            });
        }
    }
    FeatureSummary { rows }
}

/// Mean and 95% half-width of a sample; single observations report width 0.
pub fn mean_ci(values: &[f64], ci: CiMethod) -> Option<(f64, f64)> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return Some((mean, 0.0));
    }
    let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    let se = (var / n as f64).sqrt();
    let quantile = match ci {
        CiMethod::Normal => 1.96,
        CiMethod::Student => student_t_975(n - 1),
    };
    Some((mean, quantile * se))
}

/// 0.975 quantile of Student's t with `df` degrees of freedom, by bisection
/// on the CDF (regularized incomplete beta).
fn student_t_975(df: usize) -> f64 {
    let nu = df as f64;
    let cdf = |t: f64| -> f64 {
        if t <= 0.0 {
            return 0.5;
        }
        1.0 - 0.5 * incomplete_beta(nu / 2.0, 0.5, nu / (nu + t * t))
    };
    let mut lo = 0.0;
    let mut hi = 1000.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < 0.975 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos approximation, g = 7.
    #[allow(clippy::excessive_precision)]
    const COEFFS: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEFFS[0];
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized incomplete beta I_x(a, b) by continued fraction.
fn incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let front =
        (ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln()).exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const EPS: f64 = 1e-14;
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..200 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Feature rows CSV; absent values render as empty cells.
pub fn render_features_csv(rows: &[RecordingFeatures]) -> String {
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.3}"));
    let mut out = String::from("recording_id,duration,sp,ovp,adp,adf3,snr,stm\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:.3},{:.3},{:.3},{},{},{},{:.3}\n",
            r.recording_id,
            r.duration,
            r.sp,
            r.ovp,
            opt(r.adp),
            opt(r.adf3),
            opt(r.snr),
            r.stm
        ));
    }
    out
}

pub fn render_summary_csv(summary: &FeatureSummary) -> String {
    let mut out = String::from("feature,mean,ci95_halfwidth,count\n");
    for row in &summary.rows {
        out.push_str(&format!(
            "{},{:.4},{:.4},{}\n",
            row.feature, row.mean, row.ci95_halfwidth, row.count
        ));
    }
    out
}
