//! The stats subcommand: per-recording feature rows plus a summary block.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};

use diarkit::rttm::{Timeline, Turn};
use diarkit::stats::{
    audio_features, render_features_csv, render_summary_csv, summarize_with,
    timeline_features_with, CiMethod, OvpBase, RecordingFeatures, StmMode,
};
use diarkit::wav::read_wav;

use crate::config::ConfigMap;
use crate::jobs::parallel_map;
use crate::StatsArgs;

fn load_rttm_dir(dir: &PathBuf) -> Result<BTreeMap<String, Timeline>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading directory {}", dir.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "rttm"))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no .rttm files in {}", dir.display());
    }
    // Recordings split across files merge into one timeline.
    let mut turns: BTreeMap<String, Vec<Turn>> = BTreeMap::new();
    for file in &files {
        for (id, timeline) in crate::commands::read_rttm_file(file)? {
            turns
                .entry(id)
                .or_default()
                .extend(timeline.turns().iter().cloned());
        }
    }
    turns
        .into_iter()
        .map(|(id, ts)| Ok((id.clone(), Timeline::new(id, ts)?)))
        .collect()
}

pub fn run(args: StatsArgs) -> Result<()> {
    let cfg = ConfigMap::load_opt(args.config.as_deref())?;
    let jobs: usize = cfg.resolve(args.jobs, "jobs")?.unwrap_or(1);
    let ci = match cfg.resolve(args.ci.clone(), "ci")?.as_deref() {
        None | Some("normal") => CiMethod::Normal,
        Some("t") => CiMethod::Student,
        Some(other) => bail!("--ci expects normal or t, got '{other}'"),
    };
    let ovp_base = match cfg.resolve(args.ovp_base.clone(), "ovp-base")?.as_deref() {
        None | Some("duration") => OvpBase::Duration,
        Some("speech") => OvpBase::Speech,
        Some(other) => bail!("--ovp-base expects duration or speech, got '{other}'"),
    };
    let stm_mode = match cfg.resolve(args.stm_mode.clone(), "stm-mode")?.as_deref() {
        None | Some("changes") => StmMode::ChangePoints,
        Some("turns") => StmMode::Turns,
        Some(other) => bail!("--stm-mode expects changes or turns, got '{other}'"),
    };

    let timelines = load_rttm_dir(&args.rttm_dir)?;
    let entries: Vec<(&String, &Timeline)> = timelines.iter().collect();
    let results = parallel_map(
        &entries,
        jobs,
        |(id, timeline)| -> Result<(RecordingFeatures, Vec<String>)> {
            let mut warnings = Vec::new();
            let audio = match &args.audio_dir {
                None => None,
                Some(dir) => {
                    let path = dir.join(format!("{id}.wav"));
                    if path.exists() {
                        match read_wav(&path) {
                            Ok(audio) => Some(audio),
                            Err(e) => {
                                warnings.push(format!("unreadable audio {}: {e}", path.display()));
                                None
                            }
                        }
                    } else {
                        warnings.push(format!("no audio for '{id}'"));
                        None
                    }
                }
            };
            let duration = audio
                .as_ref()
                .map(|a| a.duration_secs())
                .unwrap_or_else(|| timeline.extent())
                .max(timeline.extent());
            let (sp, ovp, stm) = timeline_features_with(timeline, duration, ovp_base, stm_mode)?;
            let mut features = RecordingFeatures {
                recording_id: (*id).clone(),
                duration,
                sp,
                ovp,
                stm,
                adp: None,
                adf3: None,
                snr: None,
            };
            if let Some(audio) = audio {
                let af = audio_features(&audio.samples, audio.sample_rate, timeline);
                features.adp = af.adp;
                features.adf3 = af.adf3;
                features.snr = af.snr;
                warnings.extend(af.warnings.into_iter().map(|w| format!("{id}: {w}")));
            }
            Ok((features, warnings))
        },
    );

    let mut rows = Vec::with_capacity(results.len());
    for result in results {
        let (features, warnings) = result?;
        for w in warnings {
            eprintln!("warning: {w}");
        }
        rows.push(features);
    }
    let summary = summarize_with(&rows, ci);

    let features_csv = render_features_csv(&rows);
    let summary_csv = render_summary_csv(&summary);
    match (&args.features_out, &args.summary_out) {
        (None, None) => {
            // Both blocks on stdout, blank line between.
            crate::commands::emit(None, &format!("{features_csv}\n{summary_csv}"))?;
        }
        (features_out, summary_out) => {
            crate::commands::emit(features_out.as_ref(), &features_csv)?;
            crate::commands::emit(summary_out.as_ref(), &summary_csv)?;
        }
    }
    Ok(())
}
