//! Ingestion of pre-computed per-segment speaker embeddings.
//!
//! Interchange format is CSV with header `recording_id,onset,offset,e0,...,e{d-1}`.
//! Values are 64-bit floats; serialization uses the shortest round-trip
//! representation so parse(serialize(x)) is bit-exact.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// N segment embeddings of dimension d with per-segment timing, one recording.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    pub recording_id: String,
    pub dim: usize,
    /// (onset_secs, offset_secs, vector), sorted by onset.
    pub segments: Vec<(f64, f64, Vec<f64>)>,
}

impl EmbeddingSet {
    pub fn new(
        recording_id: impl Into<String>,
        dim: usize,
        mut segments: Vec<(f64, f64, Vec<f64>)>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::validation("embedding dim must be >= 1"));
        }
        for (onset, offset, v) in &segments {
            if v.len() != dim {
                return Err(Error::validation(format!(
                    "vector length {} != dim {}",
                    v.len(),
                    dim
                )));
            }
            if !(offset > onset) {
                return Err(Error::validation(format!(
                    "segment offset {offset} must exceed onset {onset}"
                )));
            }
            if v.iter().all(|&x| x == 0.0) {
                return Err(Error::validation("zero embedding vector"));
            }
        }
        segments.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        Ok(Self {
            recording_id: recording_id.into(),
            dim,
            segments,
        })
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn vectors(&self) -> impl Iterator<Item = &[f64]> {
        self.segments.iter().map(|(_, _, v)| v.as_slice())
    }
}

/// Parse the embeddings CSV into per-recording sets.
pub fn parse_embeddings(text: &str) -> Result<BTreeMap<String, EmbeddingSet>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "missing header"))?;
    let header = header.trim_end_matches('\r');
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 4 || cols[0] != "recording_id" || cols[1] != "onset" || cols[2] != "offset" {
        return Err(Error::parse(
            1,
            "header must be recording_id,onset,offset,e0,...",
        ));
    }
    let dim = cols.len() - 3;
    for (k, c) in cols[3..].iter().enumerate() {
        if *c != format!("e{k}") {
            return Err(Error::parse(1, format!("expected column e{k}, got '{c}'")));
        }
    }

    let mut grouped: BTreeMap<String, Vec<(f64, f64, Vec<f64>)>> = BTreeMap::new();
    for (idx, raw) in lines {
        let lineno = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 3 {
            return Err(Error::parse(
                lineno,
                format!("expected {} columns, got {}", dim + 3, fields.len()),
            ));
        }
        let onset: f64 = fields[1]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad onset '{}'", fields[1])))?;
        let offset: f64 = fields[2]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad offset '{}'", fields[2])))?;
        if !(offset > onset) {
            return Err(Error::parse(
                lineno,
                format!("offset {offset} must exceed onset {onset}"),
            ));
        }
        let mut vector = Vec::with_capacity(dim);
        for f in &fields[3..] {
            vector.push(
                f.parse::<f64>()
                    .map_err(|_| Error::parse(lineno, format!("bad value '{f}'")))?,
            );
        }
        if vector.iter().all(|&x| x == 0.0) {
            return Err(Error::parse(lineno, "zero embedding vector"));
        }
        grouped
            .entry(fields[0].to_string())
            .or_default()
            .push((onset, offset, vector));
    }
    grouped
        .into_iter()
        .map(|(id, segs)| EmbeddingSet::new(id.clone(), dim, segs).map(|s| (id, s)))
        .collect()
}

/// Serialize sets back to CSV. All sets must share one dimension.
pub fn serialize_embeddings(sets: &[&EmbeddingSet]) -> Result<String> {
    let dim = match sets.first() {
        Some(s) => s.dim,
        None => return Ok(String::new()),
    };
    if let Some(bad) = sets.iter().find(|s| s.dim != dim) {
        return Err(Error::validation(format!(
            "dimension mismatch: {} has dim {}, expected {}",
            bad.recording_id, bad.dim, dim
        )));
    }
    let mut out = String::from("recording_id,onset,offset");
    for k in 0..dim {
        out.push_str(&format!(",e{k}"));
    }
    out.push('\n');
    for set in sets {
        for (onset, offset, v) in &set.segments {
            out.push_str(&format!("{},{},{}", set.recording_id, onset, offset));
            for x in v {
                out.push_str(&format!(",{x}"));
            }
            out.push('\n');
        }
    }
    Ok(out)
}

/// Scale every vector to unit Euclidean norm; timings unchanged.
pub fn unit_normalize(set: &EmbeddingSet) -> Result<EmbeddingSet> {
    let mut segments = Vec::with_capacity(set.segments.len());
    for (onset, offset, v) in &set.segments {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::validation("zero embedding vector"));
        }
        segments.push((*onset, *offset, v.iter().map(|x| x / norm).collect()));
    }
    Ok(EmbeddingSet {
        recording_id: set.recording_id.clone(),
        dim: set.dim,
        segments,
    })
}
