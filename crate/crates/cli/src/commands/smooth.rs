//! The smooth subcommand: rasterize, median-filter, derasterize per recording.

use anyhow::{Context, Result};

use diarkit::rttm::{serialize_rttm, Timeline};
use diarkit::smoothing::{derasterize, median_filter, rasterize, MedianFilterSpec};

use crate::config::ConfigMap;
use crate::jobs::parallel_map;
use crate::SmoothArgs;

pub fn run(args: SmoothArgs) -> Result<()> {
    let cfg = ConfigMap::load_opt(args.config.as_deref())?;
    let window: usize = cfg.resolve(args.window, "window")?.unwrap_or(11);
    let hop: f64 = cfg.resolve(args.hop, "hop")?.unwrap_or(0.01);
    let jobs: usize = cfg.resolve(args.jobs, "jobs")?.unwrap_or(1);
    let spec = MedianFilterSpec::new(window).context("--window")?;

    let timelines = crate::commands::read_rttm_file(&args.input)?;
    let entries: Vec<&Timeline> = timelines.values().collect();
    let smoothed = parallel_map(&entries, jobs, |timeline| -> Result<Timeline> {
        let grid = rasterize(timeline, hop)?;
        let filtered = median_filter(&grid, &spec);
        Ok(derasterize(&filtered)?)
    });
    let smoothed: Vec<Timeline> = smoothed.into_iter().collect::<Result<_>>()?;
    let refs: Vec<&Timeline> = smoothed.iter().collect();
    crate::commands::emit(args.output.as_ref(), &serialize_rttm(&refs))
}
