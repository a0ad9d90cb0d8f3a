//! The cluster subcommand: embeddings CSV in, hypothesis RTTM out.

use anyhow::{bail, Context, Result};

use diarkit::affinity::{cosine_affinity, fuse_kernels_weighted, kernel_affinity, KernelId};
use diarkit::classic::{ahc_cluster, kmeans_cluster, AhcConfig, AhcStop, Linkage};
use diarkit::embeddings::{unit_normalize, EmbeddingSet};
use diarkit::kmeans::ClusterAssignment;
use diarkit::pruning::{prune, PruningSpec, Symmetrize};
use diarkit::rttm::{serialize_rttm, Timeline, Turn};
use diarkit::spectral::{spectral_cluster, SpectralConfig};

use crate::config::ConfigMap;
use crate::jobs::parallel_map;
use crate::ClusterArgs;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Method {
    Ahc,
    Kmeans,
    ScFixed,
    ScAdapt,
    ScPna,
    ScMk,
}

impl Method {
    fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "ahc" => Method::Ahc,
            "kmeans" => Method::Kmeans,
            "sc-fixed" => Method::ScFixed,
            "sc-adapt" => Method::ScAdapt,
            "sc-pna" => Method::ScPna,
            "sc-mk" => Method::ScMk,
            other => bail!(
                "unknown method '{other}' (expected ahc, kmeans, sc-fixed, sc-adapt, sc-pna, sc-mk)"
            ),
        })
    }

    fn name(self) -> &'static str {
        match self {
            Method::Ahc => "ahc",
            Method::Kmeans => "kmeans",
            Method::ScFixed => "sc-fixed",
            Method::ScAdapt => "sc-adapt",
            Method::ScPna => "sc-pna",
            Method::ScMk => "sc-mk",
        }
    }
}

/// Fully resolved run configuration for one cluster invocation.
#[derive(Debug, Clone)]
struct RunConfig {
    method: Method,
    k: usize,
    p: f64,
    tau: f64,
    min_keep: usize,
    linkage: Linkage,
    threshold: Option<f64>,
    target_k: Option<usize>,
    num_speakers: Option<usize>,
    max_speakers: usize,
    restarts: usize,
    symmetrize: Symmetrize,
    kernel_weights: Option<Vec<f64>>,
    seed: u64,
}

fn resolve_config(args: &ClusterArgs, cfg: &ConfigMap) -> Result<RunConfig> {
    let method_name: Option<String> = cfg.resolve(args.method.clone(), "method")?;
    let method = Method::parse(
        method_name
            .as_deref()
            .ok_or_else(|| anyhow::anyhow!("--method is required (or 'method' in --config)"))?,
    )?;

    // Method-parameter consistency.
    let check = |given: bool, flag: &str, allowed: &[Method]| -> Result<()> {
        if given && !allowed.contains(&method) {
            bail!("--{flag} does not apply to method '{}'", method.name());
        }
        Ok(())
    };
    let k: Option<usize> = cfg.resolve(args.k, "k")?;
    let p: Option<f64> = cfg.resolve(args.p, "p")?;
    let tau: Option<f64> = cfg.resolve(args.tau, "tau")?;
    let min_keep: Option<usize> = cfg.resolve(args.min_keep, "min-keep")?;
    let linkage: Option<String> = cfg.resolve(args.linkage.clone(), "linkage")?;
    let threshold: Option<f64> = cfg.resolve(args.threshold, "threshold")?;
    let target_k: Option<usize> = cfg.resolve(args.target_k, "target-k")?;
    check(k.is_some(), "k", &[Method::ScFixed, Method::ScMk])?;
    check(p.is_some(), "p", &[Method::ScAdapt])?;
    check(tau.is_some(), "tau", &[Method::ScPna])?;
    check(
        min_keep.is_some(),
        "min-keep",
        &[Method::ScAdapt, Method::ScPna],
    )?;
    check(linkage.is_some(), "linkage", &[Method::Ahc])?;
    check(threshold.is_some(), "threshold", &[Method::Ahc])?;
    check(target_k.is_some(), "target-k", &[Method::Ahc])?;

    let linkage = match linkage.as_deref() {
        None | Some("average") => Linkage::Average,
        Some("complete") => Linkage::Complete,
        Some("single") => Linkage::Single,
        Some(other) => bail!("unknown linkage '{other}'"),
    };
    let symmetrize = match cfg
        .resolve(args.symmetrize.clone(), "symmetrize")?
        .as_deref()
    {
        None | Some("max") => Symmetrize::Max,
        Some("min") => Symmetrize::Min,
        Some(other) => bail!("unknown symmetrization '{other}' (expected max or min)"),
    };
    let num_speakers = match cfg
        .resolve(args.num_speakers.clone(), "num-speakers")?
        .as_deref()
    {
        None => Some(2),
        Some("auto") => None,
        Some(raw) => Some(
            raw.parse::<usize>()
                .with_context(|| format!("bad --num-speakers '{raw}'"))?,
        ),
    };
    let kernel_weights = match cfg.resolve(args.kernel_weights.clone(), "kernel-weights")? {
        None => None,
        Some(raw) => {
            check(true, "kernel-weights", &[Method::ScMk])?;
            let weights: Vec<f64> = raw
                .split(',')
                .map(|w| w.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .with_context(|| format!("bad --kernel-weights '{raw}'"))?;
            if weights.len() != KernelId::ALL.len() {
                bail!(
                    "--kernel-weights needs {} values, got {}",
                    KernelId::ALL.len(),
                    weights.len()
                );
            }
            Some(weights)
        }
    };

    let default_k = if method == Method::ScMk { 15 } else { 10 };
    let max_speakers: usize = cfg
        .resolve(args.max_speakers, "max-speakers")?
        .unwrap_or(10);
    Ok(RunConfig {
        method,
        k: k.unwrap_or(default_k),
        p: p.unwrap_or(0.01),
        tau: tau.unwrap_or(0.20),
        min_keep: min_keep.unwrap_or(2),
        linkage,
        threshold,
        target_k,
        num_speakers,
        max_speakers: max_speakers.max(num_speakers.unwrap_or(0)),
        restarts: cfg.resolve(args.restarts, "restarts")?.unwrap_or(10),
        symmetrize,
        kernel_weights,
        seed: cfg.resolve(args.seed, "seed")?.unwrap_or(0),
    })
}

fn cluster_one(set: &EmbeddingSet, run: &RunConfig) -> Result<ClusterAssignment> {
    let normalized = unit_normalize(set)?;
    let spectral_cfg = SpectralConfig {
        num_speakers: run.num_speakers,
        max_speakers: run.max_speakers,
        kmeans_restarts: run.restarts,
        seed: run.seed,
    };
    let assignment = match run.method {
        Method::Ahc => {
            let stop = if let Some(threshold) = run.threshold {
                AhcStop::Threshold(threshold)
            } else {
                let target = run.target_k.or(run.num_speakers).ok_or_else(|| {
                    anyhow::anyhow!(
                        "ahc needs --target-k or --threshold when --num-speakers is auto"
                    )
                })?;
                AhcStop::TargetK(target)
            };
            ahc_cluster(
                &normalized,
                &AhcConfig {
                    linkage: run.linkage,
                    stop,
                },
            )?
        }
        Method::Kmeans => {
            let k = run
                .num_speakers
                .ok_or_else(|| anyhow::anyhow!("kmeans needs a concrete --num-speakers"))?;
            kmeans_cluster(&normalized, k, run.restarts, run.seed)?
        }
        Method::ScFixed => {
            let affinity = cosine_affinity(&normalized)?;
            let pruned = prune(&affinity, &PruningSpec::FixedK { k: run.k }, run.symmetrize)?;
            spectral_cluster(&pruned, &spectral_cfg)?
        }
        Method::ScAdapt => {
            let affinity = cosine_affinity(&normalized)?;
            let pruned = prune(
                &affinity,
                &PruningSpec::TopP {
                    p: run.p,
                    min_keep: run.min_keep,
                },
                run.symmetrize,
            )?;
            spectral_cluster(&pruned, &spectral_cfg)?
        }
        Method::ScPna => {
            let affinity = cosine_affinity(&normalized)?;
            let pruned = prune(
                &affinity,
                &PruningSpec::Pna {
                    tau: run.tau,
                    min_keep: run.min_keep,
                },
                run.symmetrize,
            )?;
            spectral_cluster(&pruned, &spectral_cfg)?
        }
        Method::ScMk => {
            let kernels: Vec<_> = KernelId::ALL
                .iter()
                .map(|&kernel| kernel_affinity(&normalized, kernel))
                .collect::<diarkit::Result<_>>()?;
            let uniform = vec![1.0; kernels.len()];
            let weights = run.kernel_weights.as_deref().unwrap_or(&uniform);
            let fused = fuse_kernels_weighted(&kernels, weights)?;
            let pruned = prune(&fused, &PruningSpec::FixedK { k: run.k }, run.symmetrize)?;
            spectral_cluster(&pruned, &spectral_cfg)?
        }
    };
    Ok(assignment)
}

/// Cluster labels rendered as a speaker-attributed timeline over the
/// segments' original timings.
fn assignment_to_timeline(set: &EmbeddingSet, assignment: &ClusterAssignment) -> Result<Timeline> {
    let turns = set
        .segments
        .iter()
        .zip(assignment.labels())
        .map(|((onset, offset, _), &label)| {
            Turn::new(
                set.recording_id.clone(),
                *onset,
                offset - onset,
                format!("spk{label:02}"),
            )
        })
        .collect::<diarkit::Result<Vec<_>>>()?;
    Ok(Timeline::new(set.recording_id.clone(), turns)?)
}

pub fn run(args: ClusterArgs) -> Result<()> {
    let cfg = ConfigMap::load_opt(args.config.as_deref())?;
    let run_cfg = resolve_config(&args, &cfg)?;
    let jobs: usize = cfg.resolve(args.jobs, "jobs")?.unwrap_or(1);

    let text = std::fs::read_to_string(&args.embeddings)
        .with_context(|| format!("reading {}", args.embeddings.display()))?;
    let sets = diarkit::embeddings::parse_embeddings(&text)
        .with_context(|| format!("parsing {}", args.embeddings.display()))?;
    if sets.is_empty() {
        bail!("no recordings in {}", args.embeddings.display());
    }

    let entries: Vec<&EmbeddingSet> = sets.values().collect();
    let timelines = parallel_map(&entries, jobs, |set| -> Result<Timeline> {
        let assignment = cluster_one(set, &run_cfg)
            .with_context(|| format!("clustering '{}'", set.recording_id))?;
        assignment_to_timeline(set, &assignment)
    });
    let timelines: Vec<Timeline> = timelines.into_iter().collect::<Result<_>>()?;
    let refs: Vec<&Timeline> = timelines.iter().collect();
    crate::commands::emit(args.output.as_ref(), &serialize_rttm(&refs))
}
