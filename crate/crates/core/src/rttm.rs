//! RTTM parsing/serialization and interval algebra over speaker timelines.
//!
//! Time arithmetic happens on integer milliseconds internally so that union,
//! intersection, and overlap sweeps have no floating-point boundary artifacts.
//! The RTTM surface is the 10-field whitespace-separated `SPEAKER` line; the
//! unused fields are accepted on input and emitted as `1`/`<NA>` on output.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Seconds to integer milliseconds, round-half-away-from-zero.
pub(crate) fn secs_to_ms(s: f64) -> i64 {
    (s * 1000.0).round() as i64
}

pub(crate) fn ms_to_secs(ms: i64) -> f64 {
    ms as f64 / 1000.0
}

/// One speaker-attributed time interval inside a recording (the RTTM row).
#[derive(Debug, Clone, PartialEq)]
pub struct Turn {
    pub recording_id: String,
    /// Onset in seconds, >= 0.
    pub onset: f64,
    /// Duration in seconds, > 0.
    pub duration: f64,
    pub speaker: String,
}

impl Turn {
    pub fn new(
        recording_id: impl Into<String>,
        onset: f64,
        duration: f64,
        speaker: impl Into<String>,
    ) -> Result<Self> {
        let turn = Self {
            recording_id: recording_id.into(),
            onset,
            duration,
            speaker: speaker.into(),
        };
        turn.validate()?;
        Ok(turn)
    }

    fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) {
            return Err(Error::validation(format!(
                "turn duration must be > 0, got {}",
                self.duration
            )));
        }
        if !(self.onset >= 0.0) {
            return Err(Error::validation(format!(
                "turn onset must be >= 0, got {}",
                self.onset
            )));
        }
        if self.speaker.is_empty() {
            return Err(Error::validation("speaker label is empty"));
        }
        Ok(())
    }

    pub fn offset(&self) -> f64 {
        self.onset + self.duration
    }

    pub(crate) fn onset_ms(&self) -> i64 {
        secs_to_ms(self.onset)
    }

    pub(crate) fn offset_ms(&self) -> i64 {
        secs_to_ms(self.onset + self.duration)
    }
}

/// All turns of one recording, sorted by (onset, speaker).
#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    pub recording_id: String,
    turns: Vec<Turn>,
}

impl Timeline {
    pub fn new(recording_id: impl Into<String>, mut turns: Vec<Turn>) -> Result<Self> {
        let recording_id = recording_id.into();
        for t in &turns {
            t.validate()?;
            if t.recording_id != recording_id {
                return Err(Error::validation(format!(
                    "timeline '{}' contains a turn for '{}'",
                    recording_id, t.recording_id
                )));
            }
        }
        sort_turns(&mut turns);
        Ok(Self {
            recording_id,
            turns,
        })
    }

    pub fn empty(recording_id: impl Into<String>) -> Self {
        Self {
            recording_id: recording_id.into(),
            turns: Vec::new(),
        }
    }

    pub fn turns(&self) -> &[Turn] {
        &self.turns
    }

    pub fn is_empty(&self) -> bool {
        self.turns.is_empty()
    }

    pub fn len(&self) -> usize {
        self.turns.len()
    }

    /// Largest turn offset in seconds (0 for an empty timeline).
    pub fn extent(&self) -> f64 {
        self.turns.iter().map(|t| t.offset()).fold(0.0, f64::max)
    }

    /// Distinct speaker labels in lexicographic order.
    pub fn speakers(&self) -> Vec<String> {
        let mut s: Vec<String> = self.turns.iter().map(|t| t.speaker.clone()).collect();
        s.sort();
        s.dedup();
        s
    }

    /// Per-speaker merged interval sets, keyed by speaker label.
    pub fn speaker_intervals(&self) -> BTreeMap<String, IntervalSet> {
        let mut by_speaker: BTreeMap<String, Vec<(i64, i64)>> = BTreeMap::new();
        for t in &self.turns {
            by_speaker
                .entry(t.speaker.clone())
                .or_default()
                .push((t.onset_ms(), t.offset_ms()));
        }
        by_speaker
            .into_iter()
            .map(|(spk, iv)| (spk, IntervalSet::from_raw_ms(iv)))
            .collect()
    }
}

fn sort_turns(turns: &mut [Turn]) {
    turns.sort_by(|a, b| {
        a.onset
            .total_cmp(&b.onset)
            .then_with(|| a.speaker.cmp(&b.speaker))
    });
}

/// Disjoint, non-adjacent half-open intervals on the millisecond grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalSet {
    /// (start_ms, end_ms) with end_i < start_{i+1} and end > start.
    intervals: Vec<(i64, i64)>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Build from arbitrary ms intervals, merging overlaps and adjacencies.
    pub(crate) fn from_raw_ms(mut raw: Vec<(i64, i64)>) -> Self {
        raw.retain(|&(s, e)| e > s);
        raw.sort_unstable();
        let mut merged: Vec<(i64, i64)> = Vec::with_capacity(raw.len());
        for (s, e) in raw {
            match merged.last_mut() {
                // end == start merges: zero-length gaps are noise at 1 ms.
                Some(last) if s <= last.1 => last.1 = last.1.max(e),
                _ => merged.push((s, e)),
            }
        }
        Self { intervals: merged }
    }

    pub fn from_secs(intervals: &[(f64, f64)]) -> Self {
        Self::from_raw_ms(
            intervals
                .iter()
                .map(|&(s, e)| (secs_to_ms(s), secs_to_ms(e)))
                .collect(),
        )
    }

    pub(crate) fn intervals_ms(&self) -> &[(i64, i64)] {
        &self.intervals
    }

    pub fn iter_secs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.intervals
            .iter()
            .map(|&(s, e)| (ms_to_secs(s), ms_to_secs(e)))
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn total_ms(&self) -> i64 {
        self.intervals.iter().map(|&(s, e)| e - s).sum()
    }

    pub fn total_secs(&self) -> f64 {
        ms_to_secs(self.total_ms())
    }

    pub fn contains_ms(&self, t: i64) -> bool {
        self.intervals
            .binary_search_by(|&(s, e)| {
                if t < s {
                    std::cmp::Ordering::Greater
                } else if t >= e {
                    std::cmp::Ordering::Less
                } else {
                    std::cmp::Ordering::Equal
                }
            })
            .is_ok()
    }

    /// Set union.
    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut all = self.intervals.clone();
        all.extend_from_slice(&other.intervals);
        IntervalSet::from_raw_ms(all)
    }

    /// Set intersection by two-pointer sweep.
    pub fn intersection(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.intervals.len() && j < other.intervals.len() {
            let (s1, e1) = self.intervals[i];
            let (s2, e2) = other.intervals[j];
            let lo = s1.max(s2);
            let hi = e1.min(e2);
            if hi > lo {
                out.push((lo, hi));
            }
            if e1 <= e2 {
                i += 1;
            } else {
                j += 1;
            }
        }
        // Pieces are already disjoint and ordered.
        IntervalSet { intervals: out }
    }

    /// Intervals of self not covered by other.
    pub fn subtract(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        let mut j = 0;
        for &(s, e) in &self.intervals {
            let mut cur = s;
            while j < other.intervals.len() && other.intervals[j].1 <= cur {
                j += 1;
            }
            let mut k = j;
            while k < other.intervals.len() && other.intervals[k].0 < e {
                let (os, oe) = other.intervals[k];
                if os > cur {
                    out.push((cur, os));
                }
                cur = cur.max(oe);
                if oe >= e {
                    break;
                }
                k += 1;
            }
            if cur < e {
                out.push((cur, e));
            }
        }
        IntervalSet::from_raw_ms(out)
    }
}

/// Union of all turns regardless of speaker.
pub fn speech_union(timeline: &Timeline) -> IntervalSet {
    IntervalSet::from_raw_ms(
        timeline
            .turns()
            .iter()
            .map(|t| (t.onset_ms(), t.offset_ms()))
            .collect(),
    )
}

/// Regions where at least two distinct speakers are simultaneously active.
pub fn overlap_regions(timeline: &Timeline) -> IntervalSet {
    // Per-speaker union first so a speaker overlapping themself doesn't count.
    let mut events: Vec<(i64, i32)> = Vec::new();
    for set in timeline.speaker_intervals().values() {
        for &(s, e) in set.intervals_ms() {
            events.push((s, 1));
            events.push((e, -1));
        }
    }
    events.sort_unstable_by_key(|&(t, delta)| (t, -delta));
    let mut active = 0;
    let mut overlap_start = None;
    let mut raw = Vec::new();
    for (t, delta) in events {
        let was = active;
        active += delta;
        if was < 2 && active >= 2 {
            overlap_start = Some(t);
        } else if was >= 2 && active < 2 {
            if let Some(s) = overlap_start.take() {
                raw.push((s, t));
            }
        }
    }
    IntervalSet::from_raw_ms(raw)
}

/// Parse RTTM text into per-recording timelines.
///
/// Only `SPEAKER` lines are consumed; other type tokens are skipped. Each
/// line must carry exactly 10 whitespace-separated fields.
pub fn parse_rttm(text: &str) -> Result<BTreeMap<String, Timeline>> {
    let mut turns: BTreeMap<String, Vec<Turn>> = BTreeMap::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw_line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields[0] != "SPEAKER" {
            continue;
        }
        if fields.len() != 10 {
            return Err(Error::parse(
                lineno,
                format!("expected 10 fields, got {}", fields.len()),
            ));
        }
        let recording_id = fields[1].to_string();
        let onset: f64 = fields[3]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad onset '{}'", fields[3])))?;
        let duration: f64 = fields[4]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad duration '{}'", fields[4])))?;
        if !(duration > 0.0) {
            return Err(Error::parse(
                lineno,
                format!("duration must be > 0, got {duration}"),
            ));
        }
        if !(onset >= 0.0) {
            return Err(Error::parse(
                lineno,
                format!("onset must be >= 0, got {onset}"),
            ));
        }
        let speaker = fields[7].to_string();
        turns.entry(recording_id.clone()).or_default().push(Turn {
            recording_id,
            onset,
            duration,
            speaker,
        });
    }
    turns
        .into_iter()
        .map(|(id, ts)| Timeline::new(id.clone(), ts).map(|tl| (id, tl)))
        .collect()
}

/// Serialize timelines as RTTM with onset/duration at 3 decimal places.
pub fn serialize_rttm(timelines: &[&Timeline]) -> String {
    let mut out = String::new();
    for tl in timelines {
        for t in tl.turns() {
            out.push_str(&format!(
                "SPEAKER {} 1 {:.3} {:.3} <NA> <NA> {} <NA> <NA>\n",
                t.recording_id, t.onset, t.duration, t.speaker
            ));
        }
    }
    out
}
