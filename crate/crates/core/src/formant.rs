//! Third-formant tracking by linear-prediction analysis.
//!
//! 25 ms pre-emphasized Hamming-windowed frames at the pitch tracker's 10 ms
//! hop, LPC order round(2 + sample_rate/1000) via Levinson-Durbin, formants
//! from the LPC polynomial roots with bandwidth under 400 Hz. Frames the
//! pitch tracker marks unvoiced carry no estimate.

use num_complex::Complex64;

use crate::pitch::{estimate_pitch_track, PITCH_HOP_SECS};

const FRAME_SECS: f64 = 0.025;
const PRE_EMPHASIS: f64 = 0.97;
const MAX_BANDWIDTH_HZ: f64 = 400.0;
const EDGE_MARGIN_HZ: f64 = 50.0;

/// Per-frame third formant; None when the frame is unvoiced or fewer than
/// three formants were resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct F3Track {
    pub hop: f64,
    pub f3: Vec<Option<f64>>,
}

impl F3Track {
    pub fn frame_time(&self, i: usize) -> f64 {
        i as f64 * self.hop + FRAME_SECS / 2.0
    }
}

/// Track F3 over a mono signal, aligned frame-for-frame with the pitch track.
pub fn estimate_f3_track(samples: &[f64], sample_rate: u32) -> F3Track {
    let sr = sample_rate as f64;
    let pitch = estimate_pitch_track(samples, sample_rate);
    let frame_len = (FRAME_SECS * sr).round() as usize;
    let hop = (PITCH_HOP_SECS * sr).round() as usize;
    let order = (2.0 + sr / 1000.0).round() as usize;

    // Pre-emphasis over the whole signal.
    let mut emphasized = Vec::with_capacity(samples.len());
    let mut prev = 0.0;
    for &x in samples {
        emphasized.push(x - PRE_EMPHASIS * prev);
        prev = x;
    }
    let window: Vec<f64> = (0..frame_len)
        .map(|i| {
            0.54 - 0.46 * (2.0 * std::f64::consts::PI * i as f64 / (frame_len - 1) as f64).cos()
        })
        .collect();

    let mut f3 = Vec::with_capacity(pitch.f0.len());
    for (i, voiced) in pitch.f0.iter().enumerate() {
        if voiced.is_none() {
            f3.push(None);
            continue;
        }
        let start = i * hop;
        if start + frame_len > emphasized.len() {
            f3.push(None);
            continue;
        }
        let frame: Vec<f64> = emphasized[start..start + frame_len]
            .iter()
            .zip(&window)
            .map(|(x, w)| x * w)
            .collect();
        f3.push(frame_formants(&frame, sr, order).and_then(|fs| fs.get(2).copied()));
    }
    F3Track {
        hop: PITCH_HOP_SECS,
        f3,
    }
}

/// Formant frequencies (ascending) of one windowed frame, or None when the
/// LPC analysis is degenerate.
fn frame_formants(frame: &[f64], sr: f64, order: usize) -> Option<Vec<f64>> {
    let coeffs = lpc_coefficients(frame, order)?;
    // Roots of z^p + a1 z^{p-1} + ... + ap.
    let mut poly = Vec::with_capacity(order + 1);
    poly.push(Complex64::new(1.0, 0.0));
    poly.extend(coeffs.iter().map(|&a| Complex64::new(a, 0.0)));
    let roots = durand_kerner(&poly)?;

    let mut formants: Vec<f64> = roots
        .iter()
        .filter(|z| z.im > 0.0)
        .filter_map(|z| {
            let freq = z.im.atan2(z.re) / (2.0 * std::f64::consts::PI) * sr;
            let radius = z.norm();
            if radius <= 0.0 || radius >= 1.0 {
                return None;
            }
            let bandwidth = -radius.ln() * sr / std::f64::consts::PI;
            if bandwidth < MAX_BANDWIDTH_HZ
                && freq > EDGE_MARGIN_HZ
                && freq < sr / 2.0 - EDGE_MARGIN_HZ
            {
                Some(freq)
            } else {
                None
            }
        })
        .collect();
    formants.sort_by(f64::total_cmp);
    Some(formants)
}

/// Levinson-Durbin recursion on the frame autocorrelation. Returns the
/// error-filter coefficients a1..ap of A(z) = 1 + sum a_k z^{-k}.
fn lpc_coefficients(frame: &[f64], order: usize) -> Option<Vec<f64>> {
    let n = frame.len();
    if n <= order + 1 {
        return None;
    }
    let mut r = vec![0.0; order + 1];
    for (lag, item) in r.iter_mut().enumerate() {
        *item = (0..n - lag).map(|i| frame[i] * frame[i + lag]).sum();
    }
    if r[0] <= 0.0 {
        return None;
    }
    let mut a = vec![0.0; order + 1];
    a[0] = 1.0;
    let mut error = r[0];
    for i in 1..=order {
        let mut acc = r[i];
        for j in 1..i {
            acc += a[j] * r[i - j];
        }
        let k = -acc / error;
        if !k.is_finite() || k.abs() >= 1.0 {
            return None;
        }
        let prev = a.clone();
        for j in 1..i {
            a[j] = prev[j] + k * prev[i - j];
        }
        a[i] = k;
        error *= 1.0 - k * k;
        if error <= 0.0 {
            return None;
        }
    }
    Some(a[1..].to_vec())
}

/// Durand-Kerner simultaneous root iteration for a monic polynomial given by
/// descending-power coefficients (leading 1 first).
fn durand_kerner(poly: &[Complex64]) -> Option<Vec<Complex64>> {
    let degree = poly.len() - 1;
    if degree == 0 {
        return Some(Vec::new());
    }
    let eval = |z: Complex64| -> Complex64 {
        poly.iter()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    };
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..degree).map(|k| seed.powu(k as u32 + 1)).collect();
    for _ in 0..500 {
        let mut worst = 0.0f64;
        let prev = roots.clone();
        for i in 0..degree {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..degree {
                if j != i {
                    denom *= prev[i] - prev[j];
                }
            }
            if denom.norm() < 1e-300 {
                return None;
            }
            let delta = eval(prev[i]) / denom;
            roots[i] = prev[i] - delta;
            worst = worst.max(delta.norm());
        }
        if worst < 1e-11 {
            return Some(roots);
        }
    }
    // Accept slow convergence; formant extraction tolerates small residuals.
    Some(roots)
}
