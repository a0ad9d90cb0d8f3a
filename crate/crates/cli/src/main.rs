//! diarkit: cluster pre-computed speaker embeddings into RTTM timelines,
//! smooth them with temporal median filtering, score them with DER, and
//! characterize corpora.
//!
//! Every subcommand accepts `--config FILE` with `key = value` lines
//! mirroring its flags; explicit flags override file values. Data goes to
//! stdout (or `--output`), diagnostics to stderr; exit code 0 means no fatal
//! error.

mod commands;
mod config;
mod jobs;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "diarkit",
    version,
    about = "Speaker-diarization clustering, smoothing, scoring, and corpus analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster segment embeddings into a hypothesis RTTM
    Cluster(ClusterArgs),
    /// Median-filter an RTTM on a frame grid
    Smooth(SmoothArgs),
    /// Score hypothesis RTTM against a reference with DER
    Score(ScoreArgs),
    /// Compare two hypothesis sets file-by-file (ΔDER table)
    Compare(CompareArgs),
    /// Compute recording-level corpus statistics
    Stats(StatsArgs),
    /// Regenerate synthetic test assets
    #[command(hide = true)]
    Fixtures(FixturesArgs),
}

#[derive(Args)]
struct ClusterArgs {
    /// Embeddings CSV (recording_id,onset,offset,e0,...)
    #[arg(long)]
    embeddings: PathBuf,
    /// ahc | kmeans | sc-fixed | sc-adapt | sc-pna | sc-mk
    #[arg(long)]
    method: Option<String>,
    /// Neighbors kept per row (sc-fixed, sc-mk)
    #[arg(long)]
    k: Option<usize>,
    /// Fraction of neighbors kept per row (sc-adapt)
    #[arg(long)]
    p: Option<f64>,
    /// Retained fraction of the same-speaker group (sc-pna)
    #[arg(long)]
    tau: Option<f64>,
    /// Per-row floor on kept neighbors (sc-adapt, sc-pna)
    #[arg(long)]
    min_keep: Option<usize>,
    /// average | complete | single (ahc)
    #[arg(long)]
    linkage: Option<String>,
    /// Cosine-distance stop threshold (ahc)
    #[arg(long)]
    threshold: Option<f64>,
    /// Target cluster count (ahc)
    #[arg(long)]
    target_k: Option<usize>,
    /// Speaker count, or "auto" for the eigengap estimate
    #[arg(long)]
    num_speakers: Option<String>,
    /// Eigengap search bound when --num-speakers auto
    #[arg(long)]
    max_speakers: Option<usize>,
    /// k-means restarts
    #[arg(long)]
    restarts: Option<usize>,
    /// max | min graph symmetrization after pruning
    #[arg(long)]
    symmetrize: Option<String>,
    /// Comma-separated kernel weights poly1..4,arccos0,arccos1 (sc-mk)
    #[arg(long)]
    kernel_weights: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output RTTM path (stdout when absent)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SmoothArgs {
    /// Input RTTM
    #[arg(long)]
    input: PathBuf,
    /// Odd median window in frames (1 = identity)
    #[arg(long)]
    window: Option<usize>,
    /// Frame hop in seconds
    #[arg(long)]
    hop: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output RTTM path (stdout when absent)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreArgs {
    /// Reference RTTM
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Hypothesis RTTM
    #[arg(long)]
    hyp: PathBuf,
    /// Collar in seconds around reference turn boundaries
    #[arg(long)]
    collar: Option<f64>,
    /// Exclude regions where two or more reference speakers overlap
    #[arg(long)]
    no_overlap: bool,
    /// on | off: include per-file rows before the TOTAL row
    #[arg(long)]
    per_file: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Reference RTTM
    #[arg(long = "ref")]
    reference: PathBuf,
    /// First hypothesis RTTM (system a)
    #[arg(long)]
    hyp_a: PathBuf,
    /// Second hypothesis RTTM (system b)
    #[arg(long)]
    hyp_b: PathBuf,
    /// Comma-separated recording ids to exclude
    #[arg(long)]
    exclude: Option<String>,
    #[arg(long)]
    collar: Option<f64>,
    #[arg(long)]
    no_overlap: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    /// Directory of .rttm files
    #[arg(long)]
    rttm_dir: PathBuf,
    /// Directory of <recording_id>.wav files
    #[arg(long)]
    audio_dir: Option<PathBuf>,
    /// normal | t confidence intervals
    #[arg(long)]
    ci: Option<String>,
    /// duration | speech overlap-percentage base
    #[arg(long)]
    ovp_base: Option<String>,
    /// changes | turns per-minute counting mode
    #[arg(long)]
    stm_mode: Option<String>,
    /// Features CSV path (stdout when absent)
    #[arg(long)]
    features_out: Option<PathBuf>,
    /// Summary CSV path (stdout when absent)
    #[arg(long)]
    summary_out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct FixturesArgs {
    #[command(subcommand)]
    what: FixturesCommand,
}

#[derive(Subcommand)]
#[allow(clippy::enum_variant_names)] // gen-* names the CLI surface
enum FixturesCommand {
    /// Two-cluster embedding set plus its ground-truth reference RTTM
    GenEmbeddings {
        #[arg(long)]
        out: PathBuf,
        /// Ground-truth RTTM for the generated labels
        #[arg(long)]
        ref_out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 40)]
        n: usize,
        #[arg(long, default_value_t = 16)]
        dim: usize,
        #[arg(long, default_value_t = 0.9)]
        within: f64,
        #[arg(long, default_value_t = 0.1)]
        across: f64,
        #[arg(long, default_value = "fixture")]
        recording_id: String,
    },
    /// Conversation timeline with target SP/OVP/STM
    GenTimeline {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 60.0)]
        duration: f64,
        #[arg(long)]
        sp: Option<f64>,
        #[arg(long)]
        ovp: Option<f64>,
        #[arg(long)]
        stm: Option<f64>,
        #[arg(long, default_value = "fixture")]
        recording_id: String,
    },
    /// Synthetic audio for an RTTM timeline
    GenAudio {
        #[arg(long)]
        rttm: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// File duration in seconds (timeline extent when absent)
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long, default_value_t = 16_000)]
        sample_rate: u32,
        /// Comma-separated f0 per speaker in label order
        #[arg(long, default_value = "120,210")]
        f0: String,
        /// Resonators as center:bandwidth pairs, comma separated
        #[arg(long, default_value = "500:80,1500:80,2500:80")]
        resonances: String,
        #[arg(long)]
        snr_db: Option<f64>,
        #[arg(long, default_value_t = 0.3)]
        amplitude: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Cluster(args) => commands::cluster::run(args),
        Command::Smooth(args) => commands::smooth::run(args),
        Command::Score(args) => commands::score::run(args),
        Command::Compare(args) => commands::compare::run(args),
        Command::Stats(args) => commands::stats::run(args),
        Command::Fixtures(args) => commands::fixtures::run(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
