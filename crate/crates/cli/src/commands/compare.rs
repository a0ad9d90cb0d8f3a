//! The compare subcommand: file-wise ΔDER between two systems.

use anyhow::{bail, Result};

use diarkit::scoring::{delta_report, render_delta_csv, score_corpus, ScoringConfig};

use crate::config::ConfigMap;
use crate::CompareArgs;

pub fn run(args: CompareArgs) -> Result<()> {
    let cfg = ConfigMap::load_opt(args.config.as_deref())?;
    let collar: f64 = cfg.resolve(args.collar, "collar")?.unwrap_or(0.0);
    let no_overlap = args.no_overlap || cfg.get_raw("no-overlap") == Some("true");
    let exclude: Vec<String> = cfg
        .resolve(args.exclude.clone(), "exclude")?
        .map(|raw: String| {
            raw.split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect()
        })
        .unwrap_or_default();
    let scoring = ScoringConfig {
        collar,
        score_overlap: !no_overlap,
    };

    let refs = crate::commands::read_rttm_file(&args.reference)?;
    if refs.is_empty() {
        bail!("reference {} has no recordings", args.reference.display());
    }
    let hyp_a = crate::commands::read_rttm_file(&args.hyp_a)?;
    let hyp_b = crate::commands::read_rttm_file(&args.hyp_b)?;

    // Both hypothesis sets must cover the (non-excluded) reference set.
    for (name, hyps) in [("a", &hyp_a), ("b", &hyp_b)] {
        let missing: Vec<&String> = refs
            .keys()
            .filter(|id| !exclude.contains(id) && !hyps.contains_key(*id))
            .collect();
        if !missing.is_empty() {
            bail!("hypothesis {name} is missing recordings: {missing:?}");
        }
    }

    let score_against_refs = |hyps: &std::collections::BTreeMap<
        String,
        diarkit::rttm::Timeline,
    >|
     -> Result<Vec<diarkit::scoring::DerBreakdown>> {
        let pairs: Vec<_> = refs
            .values()
            .map(|r| (r.clone(), hyps.get(&r.recording_id).cloned()))
            .collect();
        Ok(score_corpus(&pairs, &scoring)?.per_file)
    };
    let a = score_against_refs(&hyp_a)?;
    let b = score_against_refs(&hyp_b)?;
    let rows = delta_report(&a, &b, &exclude)?;
    crate::commands::emit(args.output.as_ref(), &render_delta_csv(&rows))
}
