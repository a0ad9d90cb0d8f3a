//! Hidden fixtures subcommand for regenerating synthetic test assets.

use anyhow::{bail, Context, Result};

use diarkit::embeddings::serialize_embeddings;
use diarkit::fixtures::{gen_audio, gen_embeddings, gen_timeline, AudioFixtureSpec, FixtureSpec};
use diarkit::rttm::{serialize_rttm, Timeline, Turn};
use diarkit::wav::write_wav_pcm16;

use crate::{FixturesArgs, FixturesCommand};

pub fn run(args: FixturesArgs) -> Result<()> {
    match args.what {
        FixturesCommand::GenEmbeddings {
            out,
            ref_out,
            seed,
            n,
            dim,
            within,
            across,
            recording_id,
        } => {
            let spec = FixtureSpec {
                seed,
                n_segments: n,
                dim,
                within_cosine: within,
                across_cosine: across,
                recording_id: recording_id.clone(),
                ..Default::default()
            };
            let (set, labels) = gen_embeddings(&spec)?;
            std::fs::write(&out, serialize_embeddings(&[&set])?)
                .with_context(|| format!("writing {}", out.display()))?;
            if let Some(ref_path) = ref_out {
                let turns = set
                    .segments
                    .iter()
                    .zip(&labels)
                    .map(|((onset, offset, _), &label)| {
                        Turn::new(
                            recording_id.clone(),
                            *onset,
                            offset - onset,
                            format!("spk{label:02}"),
                        )
                    })
                    .collect::<diarkit::Result<Vec<_>>>()?;
                let timeline = Timeline::new(recording_id, turns)?;
                std::fs::write(&ref_path, serialize_rttm(&[&timeline]))
                    .with_context(|| format!("writing {}", ref_path.display()))?;
            }
            Ok(())
        }
        FixturesCommand::GenTimeline {
            out,
            seed,
            duration,
            sp,
            ovp,
            stm,
            recording_id,
        } => {
            let spec = FixtureSpec {
                seed,
                duration_secs: duration,
                target_sp: sp,
                target_ovp: ovp,
                target_stm: stm,
                recording_id,
                ..Default::default()
            };
            let timeline = gen_timeline(&spec)?;
            std::fs::write(&out, serialize_rttm(&[&timeline]))
                .with_context(|| format!("writing {}", out.display()))
        }
        FixturesCommand::GenAudio {
            rttm,
            out,
            duration,
            sample_rate,
            f0,
            resonances,
            snr_db,
            amplitude,
            seed,
        } => {
            let timelines = crate::commands::read_rttm_file(&rttm)?;
            if timelines.len() != 1 {
                bail!(
                    "{} holds {} recordings; gen-audio needs exactly one",
                    rttm.display(),
                    timelines.len()
                );
            }
            let timeline = timelines.into_values().next().unwrap();
            let f0_per_speaker: Vec<f64> = f0
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .with_context(|| format!("bad --f0 '{f0}'"))?;
            let resonances: Vec<(f64, f64)> = resonances
                .split(',')
                .map(|pair| -> Result<(f64, f64)> {
                    let Some((center, bw)) = pair.split_once(':') else {
                        bail!("bad resonance '{pair}' (expected center:bandwidth)");
                    };
                    Ok((center.trim().parse()?, bw.trim().parse()?))
                })
                .collect::<Result<_>>()?;
            let spec = AudioFixtureSpec {
                sample_rate,
                f0_per_speaker,
                resonances,
                snr_db,
                amplitude,
            };
            let duration = duration.unwrap_or_else(|| timeline.extent());
            let samples = gen_audio(&timeline, duration, &spec, seed)?;
            write_wav_pcm16(&out, &samples, sample_rate)
                .with_context(|| format!("writing {}", out.display()))
        }
    }
}
