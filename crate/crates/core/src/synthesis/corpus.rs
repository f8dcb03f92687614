//! Multi-video corpora and the scenario parameter file.
//!
//! A parameter file is a JSON object with a single `scenario` key:
//!
//! ```json
//! {
//!   "scenario": {
//!     "seed": 0,
//!     "num_videos": 20,
//!     "tuning_videos": 10,
//!     "num_classes": 16,
//!     "num_views": 3,
//!     "fps": 30,
//!     "video_len_s": 480,
//!     "discriminability": "view_skewed",
//!     "noise_sigma": 0.08,
//!     "pause_prob": 0.3,
//!     "pause_len_s": [0.6, 2.0],
//!     "duration_s": [5, 30],
//!     "distractor_prob": 0.2,
//!     "confusion": 0.7
//!   }
//! }
//! ```
//!
//! Every key except `scenario` itself is optional. `discriminability` is
//! `"view_skewed"`, a single number, or a K x M array. An optional
//! `window` object (`frames_per_clip`, `sample_rate`) routes the emitted
//! frame scores through sliding-window inference before they are written.

use std::path::Path;

use rayon::prelude::*;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::formats::config::{number, required_count};
use crate::formats::read_to_string;
use crate::model::{LabelSet, ProbabilityTensor, SegmentSet, TimeBase};
use crate::synthesis::scenario::{emit_probabilities, gen_scenario, view_skewed_discriminability, Scenario};
use crate::synthesis::scorer::TensorClipScorer;
use crate::windowing::{accumulate_scores, WindowSpec};

/// Mixed into the base seed for tuning videos so they never coincide with
/// test videos.
pub const TUNING_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seed of test video `index`.
pub fn video_seed(base: u64, index: usize) -> u64 {
    base ^ index as u64
}

/// Seed of tuning video `index`.
pub fn tuning_seed(base: u64, index: usize) -> u64 {
    (base ^ TUNING_SALT) ^ index as u64
}

/// A corpus description: per-video parameters plus split sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    /// Template for every video; its `seed` is the corpus base seed.
    pub base: Scenario,
    pub num_videos: usize,
    pub tuning_videos: usize,
    pub window: Option<WindowSpec>,
}

impl CorpusSpec {
    /// 20 test videos and 10 tuning videos with standard parameters.
    pub fn standard(seed: u64) -> Self {
        Self {
            base: Scenario::standard(seed),
            num_videos: 20,
            tuning_videos: 10,
            window: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.base.seed = seed;
        self
    }

    /// Test split.
    pub fn test_videos(&self) -> Result<Vec<SyntheticVideo>> {
        let seeds: Vec<u64> = (0..self.num_videos).map(|i| video_seed(self.base.seed, i)).collect();
        generate_corpus(&self.base, &seeds, "video", self.window)
    }

    /// Held-out tuning split.
    pub fn tuning_videos(&self) -> Result<Vec<SyntheticVideo>> {
        let seeds: Vec<u64> = (0..self.tuning_videos)
            .map(|i| tuning_seed(self.base.seed, i))
            .collect();
        generate_corpus(&self.base, &seeds, "tune", self.window)
    }
}

/// One generated video.
#[derive(Debug, Clone)]
pub struct SyntheticVideo {
    pub video_id: String,
    pub seed: u64,
    pub gt: SegmentSet,
    pub tensor: ProbabilityTensor,
}

/// Generates one video per seed, in parallel. Video `i` is named
/// `{prefix}_{i:03}`.
pub fn generate_corpus(
    base: &Scenario,
    seeds: &[u64],
    prefix: &str,
    window: Option<WindowSpec>,
) -> Result<Vec<SyntheticVideo>> {
    seeds
        .par_iter()
        .enumerate()
        .map(|(i, &seed)| {
            let params = Scenario { seed, ..base.clone() };
            let video_id = format!("{prefix}_{i:03}");
            let (gt, schedule) = gen_scenario(&params, &video_id)?;
            let mut tensor = emit_probabilities(&schedule, &params)?;
            if let Some(spec) = window {
                tensor = accumulate_scores(
                    &video_id,
                    tensor.num_frames(),
                    tensor.num_views(),
                    tensor.num_classes(),
                    &spec,
                    &TensorClipScorer::new(&tensor),
                )?;
            }
            Ok(SyntheticVideo {
                video_id,
                seed,
                gt,
                tensor,
            })
        })
        .collect()
}

pub fn read_scenario(path: impl AsRef<Path>) -> Result<CorpusSpec> {
    parse_scenario_str(&read_to_string(path.as_ref())?)
}

const SCENARIO_KEYS: [&str; 17] = [
    "seed",
    "num_videos",
    "tuning_videos",
    "num_classes",
    "num_views",
    "fps",
    "video_len_s",
    "discriminability",
    "noise_sigma",
    "pause_prob",
    "pause_len_s",
    "duration_s",
    "distractor_prob",
    "window",
    "labels",
    "noiseless",
    "confusion",
];

pub fn parse_scenario_str(text: &str) -> Result<CorpusSpec> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::config("<document>", e.to_string()))?;
    let root = doc
        .as_object()
        .ok_or_else(|| Error::config("<document>", "expected a JSON object"))?;
    if let Some(key) = root.keys().find(|k| k.as_str() != "scenario") {
        return Err(Error::config(key.clone(), "unknown key in scenario file"));
    }
    let obj = root
        .get("scenario")
        .ok_or_else(|| Error::config("scenario", "missing required key"))?
        .as_object()
        .ok_or_else(|| Error::config("scenario", "expected an object"))?;
    scenario_from_object(obj)
}

fn scenario_from_object(obj: &Map<String, Value>) -> Result<CorpusSpec> {
    if let Some(key) = obj.keys().find(|k| !SCENARIO_KEYS.contains(&k.as_str())) {
        return Err(Error::config(format!("scenario.{key}"), "unknown key"));
    }
    let count = |key: &str, default: usize| -> Result<usize> {
        match obj.get(key) {
            None => Ok(default),
            Some(_) => required_count(obj, key).map_err(|_| {
                Error::config(format!("scenario.{key}"), "expected a positive integer")
            }),
        }
    };
    let real = |key: &str, default: f64| -> Result<f64> {
        obj.get(key)
            .map_or(Ok(default), |v| number(v, &format!("scenario.{key}")))
    };
    let pair = |key: &str, default: (f64, f64)| -> Result<(f64, f64)> {
        let Some(v) = obj.get(key) else { return Ok(default) };
        let name = format!("scenario.{key}");
        match v.as_array().map(Vec::as_slice) {
            Some([lo, hi]) => Ok((number(lo, &name)?, number(hi, &name)?)),
            _ => Err(Error::config(name, "expected [min, max]")),
        }
    };

    let mut spec = CorpusSpec::standard(0);
    if let Some(v) = obj.get("seed") {
        spec.base.seed = v
            .as_u64()
            .ok_or_else(|| Error::config("scenario.seed", "expected a non-negative integer"))?;
    }
    spec.num_videos = count("num_videos", spec.num_videos)?;
    spec.tuning_videos = count("tuning_videos", spec.tuning_videos)?;

    let k = count("num_classes", 16)?;
    let m = count("num_views", 3)?;
    spec.base.labels = match obj.get("labels") {
        None => LabelSet::for_classes(k)?,
        Some(v) => {
            let names = v
                .as_array()
                .and_then(|a| a.iter().map(Value::as_str).collect::<Option<Vec<_>>>())
                .ok_or_else(|| Error::config("scenario.labels", "expected an array of strings"))?;
            if names.len() != k {
                return Err(Error::config("scenario.labels", format!("expected {k} names")));
            }
            LabelSet::new(names)?
        }
    };
    spec.base.num_views = m;
    spec.base.time_base = TimeBase::new(real("fps", 30.0)?)
        .map_err(|e| Error::config("scenario.fps", e.to_string()))?;
    spec.base.video_len_s = real("video_len_s", spec.base.video_len_s)?;
    spec.base.noise_sigma = real("noise_sigma", spec.base.noise_sigma)?;
    spec.base.pause_prob = real("pause_prob", spec.base.pause_prob)?;
    spec.base.distractor_prob = real("distractor_prob", spec.base.distractor_prob)?;
    spec.base.confusion = real("confusion", spec.base.confusion)?;
    spec.base.pause_len_s = pair("pause_len_s", spec.base.pause_len_s)?;
    spec.base.duration_s = pair("duration_s", spec.base.duration_s)?;
    spec.base.discriminability = match obj.get("discriminability") {
        None => view_skewed_discriminability(k, m),
        Some(Value::String(s)) if s == "view_skewed" => view_skewed_discriminability(k, m),
        Some(Value::Array(rows)) => {
            let name = "scenario.discriminability";
            if rows.len() != k {
                return Err(Error::config(name, format!("expected {k} rows")));
            }
            let mut d = Vec::with_capacity(k * m);
            for row in rows {
                let row = row
                    .as_array()
                    .filter(|r| r.len() == m)
                    .ok_or_else(|| Error::config(name, format!("expected rows of {m} numbers")))?;
                for x in row {
                    d.push(number(x, name)?);
                }
            }
            d
        }
        Some(v) => vec![number(v, "scenario.discriminability")?; k * m],
    };
    if let Some(v) = obj.get("noiseless") {
        let on = v
            .as_bool()
            .ok_or_else(|| Error::config("scenario.noiseless", "expected true or false"))?;
        if on {
            spec.base.discriminability = vec![1.0; k * m];
            spec.base.noise_sigma = 0.0;
            spec.base.pause_prob = 0.0;
            spec.base.distractor_prob = 0.0;
            spec.base.confusion = 0.0;
        }
    }
    if let Some(v) = obj.get("window") {
        let w = v
            .as_object()
            .ok_or_else(|| Error::config("scenario.window", "expected an object"))?;
        let s = required_count(w, "frames_per_clip")
            .map_err(|e| Error::config("scenario.window.frames_per_clip", e.to_string()))?;
        let tau = required_count(w, "sample_rate")
            .map_err(|e| Error::config("scenario.window.sample_rate", e.to_string()))?;
        spec.window = Some(
            WindowSpec::new(s, tau).map_err(|e| Error::config("scenario.window", e.to_string()))?,
        );
    }
    spec.base
        .validate()
        .map_err(|e| Error::config("scenario", e.to_string()))?;
    Ok(spec)
}
