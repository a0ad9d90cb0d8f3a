//! The score subcommand: per-file + TOTAL DER report CSV.

use anyhow::{bail, Result};

use diarkit::rttm::Timeline;
use diarkit::scoring::{render_der_csv, score_corpus, ScoringConfig};

use crate::config::ConfigMap;
use crate::ScoreArgs;

/// Pair every reference recording with its hypothesis; missing hypotheses
/// stay None (scored as fully missed), stray hypothesis recordings warn.
pub fn pair_up(
    refs: std::collections::BTreeMap<String, Timeline>,
    mut hyps: std::collections::BTreeMap<String, Timeline>,
    warnings: &mut Vec<String>,
) -> Vec<(Timeline, Option<Timeline>)> {
    let pairs: Vec<(Timeline, Option<Timeline>)> = refs
        .into_iter()
        .map(|(id, r)| {
            let hyp = hyps.remove(&id);
            (r, hyp)
        })
        .collect();
    for id in hyps.keys() {
        warnings.push(format!(
            "hypothesis recording '{id}' has no reference; ignored"
        ));
    }
    pairs
}

pub fn run(args: ScoreArgs) -> Result<()> {
    let cfg = ConfigMap::load_opt(args.config.as_deref())?;
    let collar: f64 = cfg.resolve(args.collar, "collar")?.unwrap_or(0.0);
    let no_overlap = args.no_overlap || cfg.get_raw("no-overlap") == Some("true");
    let per_file = match cfg.resolve(args.per_file.clone(), "per-file")?.as_deref() {
        None | Some("on") => true,
        Some("off") => false,
        Some(other) => bail!("--per-file expects on or off, got '{other}'"),
    };
    let scoring = ScoringConfig {
        collar,
        score_overlap: !no_overlap,
    };

    let refs = crate::commands::read_rttm_file(&args.reference)?;
    if refs.is_empty() {
        bail!("reference {} has no recordings", args.reference.display());
    }
    let hyps = crate::commands::read_rttm_file(&args.hyp)?;
    let mut warnings = Vec::new();
    let pairs = pair_up(refs, hyps, &mut warnings);
    let corpus = score_corpus(&pairs, &scoring)?;
    for w in warnings.iter().chain(&corpus.warnings) {
        eprintln!("warning: {w}");
    }
    let rows = if per_file { &corpus.per_file[..] } else { &[] };
    crate::commands::emit(args.output.as_ref(), &render_der_csv(rows, &corpus.total))
}
