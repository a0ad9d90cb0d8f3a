//! Frame-level speaker activity and temporal median filtering.
//!
//! Turns become per-speaker binary rows on a fixed hop grid (a frame is
//! active when its midpoint falls inside a turn), rows get an odd-window
//! sliding median with edge replication, and maximal runs convert back to
//! turns. Midpoint tests run in integer microseconds so grid-aligned
//! round trips are exact.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::rttm::{Timeline, Turn};

/// Per-speaker binary activity at fixed hop resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameActivity {
    pub recording_id: String,
    /// Hop in seconds.
    pub hop: f64,
    /// Speaker labels, lexicographically ordered.
    pub speakers: Vec<String>,
    /// One row per speaker, entries 0/1.
    pub activity: Vec<Vec<u8>>,
}

impl FrameActivity {
    pub fn num_frames(&self) -> usize {
        self.activity.first().map_or(0, Vec::len)
    }
}

/// Odd filtering window; 1 is the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MedianFilterSpec {
    pub window: usize,
}

impl MedianFilterSpec {
    pub fn new(window: usize) -> Result<Self> {
        if window == 0 || window.is_multiple_of(2) {
            return Err(Error::validation(format!(
                "median window must be odd and >= 1, got {window}"
            )));
        }
        Ok(Self { window })
    }
}

impl Default for MedianFilterSpec {
    fn default() -> Self {
        Self { window: 11 }
    }
}

fn secs_to_us(s: f64) -> i64 {
    (s * 1e6).round() as i64
}

/// Sample a timeline onto the hop grid. Frame t is active for a speaker iff
/// the midpoint (t + 0.5) * hop lies inside one of their turns; the grid
/// spans to the last turn offset.
pub fn rasterize(timeline: &Timeline, hop: f64) -> Result<FrameActivity> {
    if !(hop > 0.0) {
        return Err(Error::validation(format!("hop must be > 0, got {hop}")));
    }
    let speakers = timeline.speakers();
    if speakers.is_empty() {
        return Ok(FrameActivity {
            recording_id: timeline.recording_id.clone(),
            hop,
            speakers,
            activity: Vec::new(),
        });
    }
    let hop_us = secs_to_us(hop);
    if hop_us == 0 {
        return Err(Error::validation("hop below 1 microsecond"));
    }
    let extent_us = timeline
        .turns()
        .iter()
        .map(|t| secs_to_us(t.offset()))
        .max()
        .unwrap_or(0);
    let num_frames = (extent_us + hop_us - 1) / hop_us;
    let num_frames = usize::try_from(num_frames).unwrap_or(0);

    let speaker_index: BTreeMap<&str, usize> = speakers
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let mut activity = vec![vec![0u8; num_frames]; speakers.len()];
    for turn in timeline.turns() {
        let row = &mut activity[speaker_index[turn.speaker.as_str()]];
        let onset_us = secs_to_us(turn.onset);
        let end_us = secs_to_us(turn.offset());
        // Active iff onset <= (t + 0.5) * hop < end, all in microseconds,
        // kept exact by comparing doubled values.
        let mut t = ((2 * onset_us - hop_us).div_euclid(2 * hop_us)).max(0);
        loop {
            let mid2 = (2 * t + 1) * hop_us;
            if mid2 >= 2 * end_us {
                break;
            }
            if mid2 >= 2 * onset_us {
                let idx = t as usize;
                if idx >= row.len() {
                    break;
                }
                row[idx] = 1;
            }
            t += 1;
        }
    }
    Ok(FrameActivity {
        recording_id: timeline.recording_id.clone(),
        hop,
        speakers,
        activity,
    })
}

/// Sliding-window median per speaker row, boundaries padded by replicating
/// the first/last value.
pub fn median_filter(fa: &FrameActivity, spec: &MedianFilterSpec) -> FrameActivity {
    let mut out = fa.clone();
    if spec.window <= 1 {
        return out;
    }
    let half = (spec.window / 2) as isize;
    let majority = (spec.window / 2 + 1) as u32;
    for (row, out_row) in fa.activity.iter().zip(&mut out.activity) {
        let len = row.len() as isize;
        if len == 0 {
            continue;
        }
        for t in 0..len {
            let mut ones = 0u32;
            for off in -half..=half {
                let idx = (t + off).clamp(0, len - 1) as usize;
                ones += u32::from(row[idx]);
            }
            out_row[t as usize] = u8::from(ones >= majority);
        }
    }
    out
}

/// Maximal runs of active frames become turns on the hop grid.
pub fn derasterize(fa: &FrameActivity) -> Result<Timeline> {
    let hop_us = secs_to_us(fa.hop);
    let mut turns = Vec::new();
    for (speaker, row) in fa.speakers.iter().zip(&fa.activity) {
        let mut t = 0usize;
        while t < row.len() {
            if row[t] == 1 {
                let start = t;
                while t < row.len() && row[t] == 1 {
                    t += 1;
                }
                let onset = (start as i64 * hop_us) as f64 / 1e6;
                let duration = ((t - start) as i64 * hop_us) as f64 / 1e6;
                turns.push(Turn::new(
                    fa.recording_id.clone(),
                    onset,
                    duration,
                    speaker.clone(),
                )?);
            } else {
                t += 1;
            }
        }
    }
    Timeline::new(fa.recording_id.clone(), turns)
}

/// Number of 0/1 transitions in one activity row.
pub fn flip_count(row: &[u8]) -> usize {
    row.windows(2).filter(|w| w[0] != w[1]).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn timeline(turns: &[(f64, f64, &str)]) -> Timeline {
        Timeline::new(
            "r",
            turns
                .iter()
                .map(|&(onset, dur, spk)| Turn::new("r", onset, dur, spk).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn fa(rows: Vec<Vec<u8>>) -> FrameActivity {
        FrameActivity {
            recording_id: "r".into(),
            hop: 0.01,
            speakers: (0..rows.len()).map(|i| format!("s{i}")).collect(),
            activity: rows,
        }
    }

    #[test]
    fn midpoint_rule_basic() {
        let tl = timeline(&[(0.0, 0.03, "a")]);
        let grid = rasterize(&tl, 0.01).unwrap();
        assert_eq!(grid.activity, vec![vec![1, 1, 1]]);
    }

    #[test]
    fn midpoint_rule_half_open() {
        // Turn [0.005, 0.015): midpoint 0.005 of frame 0 is inside,
        // midpoint 0.015 of frame 1 is not.
        let tl = timeline(&[(0.005, 0.01, "a")]);
        let grid = rasterize(&tl, 0.01).unwrap();
        assert_eq!(grid.activity, vec![vec![1, 0]]);
    }

    #[test]
    fn empty_timeline_empty_grid() {
        let grid = rasterize(&Timeline::empty("r"), 0.01).unwrap();
        assert_eq!(grid.num_frames(), 0);
        assert!(grid.speakers.is_empty());
    }

    #[test]
    fn spike_suppressed_window_three() {
        let spec = MedianFilterSpec::new(3).unwrap();
        let out = median_filter(&fa(vec![vec![0, 1, 0]]), &spec);
        assert_eq!(out.activity, vec![vec![0, 0, 0]]);
    }

    #[test]
    fn constant_rows_unchanged() {
        for w in [1, 3, 11, 29] {
            let spec = MedianFilterSpec::new(w).unwrap();
            let ones = fa(vec![vec![1; 40]]);
            assert_eq!(median_filter(&ones, &spec).activity, ones.activity);
            let zeros = fa(vec![vec![0; 40]]);
            assert_eq!(median_filter(&zeros, &spec).activity, zeros.activity);
        }
    }

    #[test]
    fn window_29_fills_nine_frame_gap_window_11_keeps_it() {
        let mut row = vec![1u8; 40];
        for item in row.iter_mut().take(25).skip(16) {
            *item = 0;
        }
        let grid = fa(vec![row.clone()]);
        let out29 = median_filter(&grid, &MedianFilterSpec::new(29).unwrap());
        assert_eq!(out29.activity[0], vec![1; 40]);
        let out11 = median_filter(&grid, &MedianFilterSpec::new(11).unwrap());
        assert_eq!(out11.activity[0], row);
    }

    #[test]
    fn window_one_is_identity() {
        let grid = fa(vec![vec![0, 1, 1, 0, 1, 0, 0, 1]]);
        let out = median_filter(&grid, &MedianFilterSpec::new(1).unwrap());
        assert_eq!(out, grid);
    }

    #[test]
    fn even_window_rejected() {
        assert!(MedianFilterSpec::new(4).is_err());
        assert!(MedianFilterSpec::new(0).is_err());
    }

    #[test]
    fn derasterize_run_extraction() {
        let mut row = vec![0u8; 8];
        row[3] = 1;
        row[4] = 1;
        row[5] = 1;
        let tl = derasterize(&fa(vec![row])).unwrap();
        assert_eq!(tl.turns().len(), 1);
        let t = &tl.turns()[0];
        assert!((t.onset - 0.03).abs() < 1e-12);
        assert!((t.duration - 0.03).abs() < 1e-12);
    }

    #[test]
    fn derasterize_all_zero_empty() {
        let tl = derasterize(&fa(vec![vec![0; 10]])).unwrap();
        assert!(tl.is_empty());
    }

    #[test]
    fn grid_aligned_round_trip() {
        let tl = timeline(&[(0.0, 0.05, "a"), (0.08, 0.04, "a"), (0.02, 0.07, "b")]);
        let grid = rasterize(&tl, 0.01).unwrap();
        let back = derasterize(&grid).unwrap();
        assert_eq!(back, tl);
    }

    #[test]
    fn raster_round_trip_on_activity() {
        let grid = fa(vec![vec![0, 1, 1, 0, 0, 1], vec![1, 1, 0, 0, 0, 0]]);
        let back = rasterize(&derasterize(&grid).unwrap(), 0.01).unwrap();
        // Trailing all-zero frames are not reconstructed; compare up to the
        // last active frame.
        for (orig, rt) in grid.activity.iter().zip(&back.activity) {
            assert_eq!(&orig[..rt.len()], &rt[..]);
            assert!(orig[rt.len()..].iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn flip_count_monotone_examples() {
        let row = vec![0, 1, 0, 0, 1, 1, 0, 1, 0, 1, 1, 1, 0, 0];
        let grid = fa(vec![row.clone()]);
        for w in [3, 5, 11] {
            let out = median_filter(&grid, &MedianFilterSpec::new(w).unwrap());
            assert!(
                flip_count(&out.activity[0]) <= flip_count(&row),
                "window {w}"
            );
        }
    }
}
