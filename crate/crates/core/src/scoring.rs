//! Diarization error rate: optimal speaker mapping, region-based scoring with
//! collar and overlap controls, corpus aggregation, and ΔDER comparison.
//!
//! All time accounting runs on integer milliseconds. The hypothesis-to-
//! reference speaker map maximizes total overlapped time via a Hungarian
//! assignment; scoring partitions the axis at turn (and collar) boundaries
//! and charges each homogeneous region max(0, r-h) missed, max(0, h-r) false
//! alarm, and min(r, h) - correct confusion.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::rttm::{ms_to_secs, secs_to_ms, IntervalSet, Timeline};

/// Per-file missed/false-alarm/confusion breakdown in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct DerBreakdown {
    pub recording_id: String,
    /// Scored reference speaker-time (overlap counted with multiplicity).
    pub ref_speech: f64,
    pub missed: f64,
    pub false_alarm: f64,
    pub confusion: f64,
    pub der: f64,
}

impl DerBreakdown {
    fn from_ms(recording_id: String, ref_ms: i64, miss_ms: i64, fa_ms: i64, conf_ms: i64) -> Self {
        let total = (miss_ms + fa_ms + conf_ms) as f64;
        let der = if ref_ms > 0 {
            total / ref_ms as f64
        } else if total > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        Self {
            recording_id,
            ref_speech: ms_to_secs(ref_ms),
            missed: ms_to_secs(miss_ms),
            false_alarm: ms_to_secs(fa_ms),
            confusion: ms_to_secs(conf_ms),
            der,
        }
    }
}

/// Scoring knobs. The challenge convention is no collar with overlap scored.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoringConfig {
    /// Seconds excluded around every reference turn boundary.
    pub collar: f64,
    pub score_overlap: bool,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        Self {
            collar: 0.0,
            score_overlap: true,
        }
    }
}

impl ScoringConfig {
    fn validate(&self) -> Result<()> {
        if self.collar < 0.0 {
            return Err(Error::validation(format!(
                "collar must be >= 0, got {}",
                self.collar
            )));
        }
        Ok(())
    }
}

/// Overlap duration matrix in ms: rows = ref speakers, cols = hyp speakers,
/// both in lexicographic label order.
fn overlap_matrix(
    ref_tl: &Timeline,
    hyp_tl: &Timeline,
) -> (Vec<String>, Vec<String>, Vec<Vec<i64>>) {
    let ref_sets: Vec<(String, IntervalSet)> = ref_tl.speaker_intervals().into_iter().collect();
    let hyp_sets: Vec<(String, IntervalSet)> = hyp_tl.speaker_intervals().into_iter().collect();
    let matrix = ref_sets
        .iter()
        .map(|(_, r)| {
            hyp_sets
                .iter()
                .map(|(_, h)| r.intersection(h).total_ms())
                .collect()
        })
        .collect();
    (
        ref_sets.into_iter().map(|(s, _)| s).collect(),
        hyp_sets.into_iter().map(|(s, _)| s).collect(),
        matrix,
    )
}

/// Partial one-to-one map from hypothesis speakers to reference speakers
/// maximizing total overlapped time. Zero-overlap pairs stay unmapped.
pub fn optimal_speaker_map(ref_tl: &Timeline, hyp_tl: &Timeline) -> BTreeMap<String, String> {
    let (ref_speakers, hyp_speakers, overlap) = overlap_matrix(ref_tl, hyp_tl);
    let assignment = max_assignment(&overlap);
    let mut map = BTreeMap::new();
    for (r, h) in assignment {
        if overlap[r][h] > 0 {
            map.insert(hyp_speakers[h].clone(), ref_speakers[r].clone());
        }
    }
    map
}

/// Maximum-total assignment on a rectangular nonnegative matrix; returns
/// (row, col) pairs. Hungarian algorithm on the square-padded cost matrix.
fn max_assignment(weights: &[Vec<i64>]) -> Vec<(usize, usize)> {
    let rows = weights.len();
    let cols = weights.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    let n = rows.max(cols);
    // Minimize negated weight; dummy cells cost 0.
    let cost = |i: usize, j: usize| -> i64 {
        if i < rows && j < cols {
            -weights[i][j]
        } else {
            0
        }
    };

    // Shortest-augmenting-path Hungarian with potentials (1-indexed arrays).
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut matched_row = vec![0usize; n + 1]; // matched_row[col] = row
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut pairs = Vec::new();
    for j in 1..=n {
        let i = matched_row[j];
        if i >= 1 && i - 1 < rows && j - 1 < cols {
            pairs.push((i - 1, j - 1));
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Collar exclusion zone: ±collar around every reference turn boundary.
fn collar_exclusion(ref_tl: &Timeline, collar_ms: i64) -> IntervalSet {
    if collar_ms <= 0 {
        return IntervalSet::empty();
    }
    let mut raw = Vec::new();
    for t in ref_tl.turns() {
        let onset = secs_to_ms(t.onset);
        let end = secs_to_ms(t.offset());
        raw.push(((onset - collar_ms).max(0), onset + collar_ms));
        raw.push(((end - collar_ms).max(0), end + collar_ms));
    }
    IntervalSet::from_raw_ms(raw)
}

/// Score one hypothesis against one reference.
pub fn score_file(
    ref_tl: &Timeline,
    hyp_tl: &Timeline,
    cfg: &ScoringConfig,
) -> Result<DerBreakdown> {
    cfg.validate()?;
    if ref_tl.recording_id != hyp_tl.recording_id {
        return Err(Error::RecordingMismatch {
            reference: ref_tl.recording_id.clone(),
            hypothesis: hyp_tl.recording_id.clone(),
        });
    }
    let map = optimal_speaker_map(ref_tl, hyp_tl);

    let ref_sets: Vec<(String, IntervalSet)> = ref_tl.speaker_intervals().into_iter().collect();
    // Hypothesis activity keyed by the mapped reference label where one
    // exists; unmapped speakers keep a disjoint key and can never be correct.
    let hyp_sets: Vec<(Option<String>, IntervalSet)> = hyp_tl
        .speaker_intervals()
        .into_iter()
        .map(|(spk, set)| (map.get(&spk).cloned(), set))
        .collect();

    let excluded = collar_exclusion(ref_tl, secs_to_ms(cfg.collar));

    // Breakpoints at every interval edge of either side plus exclusions.
    let mut cuts: Vec<i64> = Vec::new();
    for (_, set) in ref_sets.iter() {
        for &(s, e) in set.intervals_ms() {
            cuts.push(s);
            cuts.push(e);
        }
    }
    for (_, set) in hyp_sets.iter() {
        for &(s, e) in set.intervals_ms() {
            cuts.push(s);
            cuts.push(e);
        }
    }
    for &(s, e) in excluded.intervals_ms() {
        cuts.push(s);
        cuts.push(e);
    }
    cuts.sort_unstable();
    cuts.dedup();

    let (mut ref_ms, mut miss_ms, mut fa_ms, mut conf_ms) = (0i64, 0i64, 0i64, 0i64);
    for w in cuts.windows(2) {
        let (start, end) = (w[0], w[1]);
        let len = end - start;
        if len <= 0 || excluded.contains_ms(start) {
            continue;
        }
        let active_ref: Vec<&str> = ref_sets
            .iter()
            .filter(|(_, set)| set.contains_ms(start))
            .map(|(s, _)| s.as_str())
            .collect();
        let r = active_ref.len() as i64;
        if !cfg.score_overlap && r >= 2 {
            continue;
        }
        let active_hyp: Vec<&Option<String>> = hyp_sets
            .iter()
            .filter(|(_, set)| set.contains_ms(start))
            .map(|(m, _)| m)
            .collect();
        let h = active_hyp.len() as i64;
        let correct = active_ref
            .iter()
            .filter(|&&rs| active_hyp.iter().any(|m| m.as_deref() == Some(rs)))
            .count() as i64;
        ref_ms += r * len;
        miss_ms += (r - h).max(0) * len;
        fa_ms += (h - r).max(0) * len;
        conf_ms += (r.min(h) - correct) * len;
    }
    Ok(DerBreakdown::from_ms(
        ref_tl.recording_id.clone(),
        ref_ms,
        miss_ms,
        fa_ms,
        conf_ms,
    ))
}

/// Corpus scoring result: per-file breakdowns in recording order, the
/// time-weighted aggregate, and any warnings raised along the way.
#[derive(Debug, Clone)]
pub struct CorpusScore {
    pub per_file: Vec<DerBreakdown>,
    pub total: DerBreakdown,
    pub warnings: Vec<String>,
}

/// Score a corpus. A missing hypothesis (None) scores as an empty timeline
/// (all reference speech missed) with a warning rather than an error.
pub fn score_corpus(
    pairs: &[(Timeline, Option<Timeline>)],
    cfg: &ScoringConfig,
) -> Result<CorpusScore> {
    if pairs.is_empty() {
        return Err(Error::validation("score_corpus needs at least one pair"));
    }
    let mut per_file = Vec::with_capacity(pairs.len());
    let mut warnings = Vec::new();
    for (ref_tl, hyp) in pairs {
        let breakdown = match hyp {
            Some(hyp_tl) => score_file(ref_tl, hyp_tl, cfg)?,
            None => {
                warnings.push(format!(
                    "no hypothesis for '{}'; scoring all reference speech as missed",
                    ref_tl.recording_id
                ));
                score_file(ref_tl, &Timeline::empty(&ref_tl.recording_id), cfg)?
            }
        };
        per_file.push(breakdown);
    }
    // Aggregate sums time components and recomputes DER from the sums.
    let sum_ms =
        |f: fn(&DerBreakdown) -> f64| -> i64 { per_file.iter().map(|b| secs_to_ms(f(b))).sum() };
    let total = DerBreakdown::from_ms(
        "TOTAL".to_string(),
        sum_ms(|b| b.ref_speech),
        sum_ms(|b| b.missed),
        sum_ms(|b| b.false_alarm),
        sum_ms(|b| b.confusion),
    );
    Ok(CorpusScore {
        per_file,
        total,
        warnings,
    })
}

/// One row of the ΔDER comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaRow {
    pub recording_id: String,
    pub der_a: f64,
    pub der_b: f64,
    pub delta: f64,
}

/// Pair up two per-file result sets, sorted descending by delta = der_a - der_b.
/// Both sets must cover the same recordings after exclusions are removed.
pub fn delta_report(
    a: &[DerBreakdown],
    b: &[DerBreakdown],
    exclude: &[String],
) -> Result<Vec<DeltaRow>> {
    let filter = |set: &[DerBreakdown]| -> BTreeMap<String, f64> {
        set.iter()
            .filter(|d| !exclude.contains(&d.recording_id))
            .map(|d| (d.recording_id.clone(), d.der))
            .collect()
    };
    let map_a = filter(a);
    let map_b = filter(b);
    if map_a.keys().ne(map_b.keys()) {
        let only_a: Vec<&String> = map_a.keys().filter(|k| !map_b.contains_key(*k)).collect();
        let only_b: Vec<&String> = map_b.keys().filter(|k| !map_a.contains_key(*k)).collect();
        return Err(Error::CoverageMismatch(format!(
            "only in a: {only_a:?}; only in b: {only_b:?}"
        )));
    }
    let mut rows: Vec<DeltaRow> = a
        .iter()
        .filter(|d| map_a.contains_key(&d.recording_id))
        .map(|d| {
            let der_b = map_b[&d.recording_id];
            DeltaRow {
                recording_id: d.recording_id.clone(),
                der_a: d.der,
                der_b,
                delta: d.der - der_b,
            }
        })
        .collect();
    // Stable sort keeps input order among equal deltas.
    rows.sort_by(|x, y| y.delta.total_cmp(&x.delta));
    Ok(rows)
}

/// Render per-file + TOTAL rows as the report CSV.
pub fn render_der_csv(per_file: &[DerBreakdown], total: &DerBreakdown) -> String {
    let mut out = String::from("recording_id,ref_speech,missed,false_alarm,confusion,der\n");
    for row in per_file.iter().chain(std::iter::once(total)) {
        out.push_str(&format!(
            "{},{:.3},{:.3},{:.3},{:.3},{:.6}\n",
            row.recording_id, row.ref_speech, row.missed, row.false_alarm, row.confusion, row.der
        ));
    }
    out
}

/// Render the ΔDER table CSV.
pub fn render_delta_csv(rows: &[DeltaRow]) -> String {
    let mut out = String::from("recording_id,der_a,der_b,delta\n");
    for row in rows {
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6}\n",
            row.recording_id, row.der_a, row.der_b, row.delta
        ));
    }
    out
}
