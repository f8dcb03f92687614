//! Command implementations behind the `tal-election` binary.
//!
//! Each command reads its inputs completely before writing anything, and
//! every output file is replaced atomically.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::election::run_election;
use crate::error::{Error, Result};
use crate::evaluation::evaluate_files;
use crate::formats::{
    read_config, read_segments_csv, read_tensor_csv, write_atomic, write_config, write_segments_csv,
    write_tensor_csv, ElectionConfig,
};
use crate::model::{LabelSet, SegmentSet};
use crate::report::render_election_svg;
use crate::synthesis::{ablation_run, read_scenario};

/// Video id used when none is given: the tensor file name without extension.
fn default_video_id(tensor: &Path) -> String {
    tensor
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "video".into())
}

/// Runs the election on one tensor file and writes the segments CSV.
pub fn cmd_elect(
    tensor: &Path,
    config: &Path,
    out: &Path,
    video_id: Option<&str>,
    stdout: &mut dyn Write,
) -> Result<()> {
    let cfg = read_config(config)?;
    let p = read_tensor_csv(tensor, cfg.num_classes(), cfg.num_views())?;
    let video_id = video_id.map_or_else(|| default_video_id(tensor), str::to_owned);
    let trace = run_election(&p, &cfg)?;
    let labels = LabelSet::for_classes(cfg.num_classes())?;
    let set = SegmentSet::new(&video_id, trace.segments());
    write_segments_csv(&[set], out)?;

    for (c, sel) in trace.selections.iter().enumerate() {
        let name = labels.name(c).unwrap_or("?");
        match sel {
            Some(sel) => {
                let how = match sel.winner {
                    Some(w) => format!("mean {:.4}", w.mean_score),
                    None => "fallback".to_string(),
                };
                writeln!(
                    stdout,
                    "class {c:>2} {name}: {}-{} s, {how}",
                    sel.segment.start_s, sel.segment.end_s
                )?;
            }
            None => writeln!(stdout, "class {c:>2} {name}: no segment")?,
        }
    }
    Ok(())
}

/// Scores predictions against ground truth, writes a JSON report and prints
/// the corpus score.
pub fn cmd_eval(gt: &Path, pred: &Path, report: &Path, stdout: &mut dyn Write) -> Result<()> {
    let eval = evaluate_files(gt, pred)?;
    let mut json = serde_json::to_string_pretty(&eval).map_err(|e| Error::Invalid(e.to_string()))?;
    json.push('\n');
    write_atomic(report, |w| Ok(w.write_all(json.as_bytes())?))?;
    writeln!(stdout, "{:.4}", eval.corpus_score)?;
    Ok(())
}

#[derive(Serialize)]
struct Manifest {
    base_seed: u64,
    num_classes: usize,
    num_views: usize,
    fps: f64,
    ground_truth: String,
    config: String,
    videos: Vec<ManifestVideo>,
}

#[derive(Serialize)]
struct ManifestVideo {
    video_id: String,
    seed: u64,
    tensor: String,
}

/// Generates the test split of a scenario into `out_dir`: one tensor CSV per
/// video, `gt.csv`, a default `config.json` and `manifest.json`.
pub fn cmd_simulate(scenario: &Path, out_dir: &Path, seed: Option<u64>, stdout: &mut dyn Write) -> Result<()> {
    let mut spec = read_scenario(scenario)?;
    if let Some(seed) = seed {
        spec = spec.with_seed(seed);
    }
    let videos = spec.test_videos()?;
    fs::create_dir_all(out_dir)?;

    let mut manifest = Manifest {
        base_seed: spec.base.seed,
        num_classes: spec.base.num_classes(),
        num_views: spec.base.num_views,
        fps: spec.base.time_base.fps(),
        ground_truth: "gt.csv".into(),
        config: "config.json".into(),
        videos: Vec::with_capacity(videos.len()),
    };
    for v in &videos {
        let file = format!("{}.csv", v.video_id);
        write_tensor_csv(&v.tensor, out_dir.join(&file))?;
        manifest.videos.push(ManifestVideo {
            video_id: v.video_id.clone(),
            seed: v.seed,
            tensor: file,
        });
    }
    let gt: Vec<SegmentSet> = videos.iter().map(|v| v.gt.clone()).collect();
    write_segments_csv(&gt, out_dir.join("gt.csv"))?;

    let mut cfg = ElectionConfig::new(spec.base.num_classes(), spec.base.num_views)?;
    cfg.time_base = spec.base.time_base;
    write_config(&cfg, out_dir.join("config.json"))?;

    let mut json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Invalid(e.to_string()))?;
    json.push('\n');
    write_atomic(&out_dir.join("manifest.json"), |w| Ok(w.write_all(json.as_bytes())?))?;
    writeln!(stdout, "wrote {} videos to {}", videos.len(), out_dir.display())?;
    Ok(())
}

/// Runs the four-variant ablation and writes the score table as CSV.
pub fn cmd_ablate(
    scenario: &Path,
    out: &Path,
    seed: Option<u64>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<()> {
    let mut spec = read_scenario(scenario)?;
    if let Some(seed) = seed {
        spec = spec.with_seed(seed);
    }
    let test = spec.test_videos()?;
    let tuning = spec.tuning_videos()?;
    let report = ablation_run(&test, &tuning, spec.base.time_base)?;
    if let Some(w) = &report.warning {
        writeln!(stderr, "warning: {w}")?;
    }
    let csv = report.render_csv();
    write_atomic(out, |w| Ok(w.write_all(csv.as_bytes())?))?;
    writeln!(stdout, "{:<6} {:>8} {:>10}", "step", "score", "published")?;
    for r in &report.rows {
        writeln!(stdout, "{:<6} {:>8.4} {:>10.4}", r.variant.name(), r.score, r.published)?;
    }
    Ok(())
}

/// Inputs of [`cmd_viz`].
#[derive(Debug, Clone)]
pub struct VizArgs {
    pub tensor: PathBuf,
    pub config: PathBuf,
    pub class_id: usize,
    pub out: PathBuf,
    pub gt: Option<PathBuf>,
    pub video_id: Option<String>,
}

/// Plots one class's election as SVG, with its ground-truth segment if a
/// ground-truth file is given.
pub fn cmd_viz(args: &VizArgs) -> Result<()> {
    let cfg = read_config(&args.config)?;
    let p = read_tensor_csv(&args.tensor, cfg.num_classes(), cfg.num_views())?;
    let gt = match &args.gt {
        None => None,
        Some(path) => {
            let video_id = args
                .video_id
                .clone()
                .unwrap_or_else(|| default_video_id(&args.tensor));
            read_segments_csv(path, None)?
                .into_iter()
                .find(|s| s.video_id == video_id)
                .and_then(|s| s.segments.into_iter().find(|g| g.class_id == args.class_id))
        }
    };
    render_election_svg(&p, &cfg, args.class_id, gt.as_ref(), &args.out)
}
