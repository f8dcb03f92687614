//! Ablation harness: tunes and scores four election variants.
//!
//! | variant  | thresholds        | merge gap | view weights |
//! |----------|-------------------|-----------|--------------|
//! | SEL      | one for all       | 0         | uniform      |
//! | +FLTR    | per class         | 0         | uniform      |
//! | +MRG     | per class         | tuned     | uniform      |
//! | +AGG     | per class         | tuned     | per class    |
//!
//! All hyperparameters are chosen on a tuning split by coordinate ascent
//! on the pooled corpus score, then frozen and scored on the test split.
//! Each variant starts from the previous variant's solution. Because a
//! prediction can only match ground truth of its own class, the pooled
//! score is a ratio of per-class sums and each class can be tuned from a
//! precomputed table of (overlap total, denominator) per setting.

use rayon::prelude::*;
use serde::Serialize;

use crate::election::{aggregate_class, elect, elect_class};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate_sets, match_optimal};
use crate::formats::{ElectionConfig, Fallback, ViewWeights};
use crate::model::{ActionSegment, TimeBase};
use crate::synthesis::corpus::SyntheticVideo;

/// Published reference scores for the four variants, in order.
pub const PUBLISHED_SCORES: [f64; 4] = [0.4683, 0.5347, 0.5565, 0.5921];

/// Threshold candidates 0.05, 0.10, ..., 0.95.
pub const THRESHOLD_GRID: [f64; 19] = [
    0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85,
    0.9, 0.95,
];

/// Merge-gap candidates in seconds. Synthetic pauses last up to 2 s, so the
/// grid reaches past that.
pub const GAP_GRID: [f64; 6] = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0];

/// Test splits smaller than this get a warning in the report.
pub const SMALL_SAMPLE_VIDEOS: usize = 5;

const MAX_SWEEPS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Variant {
    SelOnly,
    Filtering,
    Merging,
    Aggregation,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::SelOnly,
        Variant::Filtering,
        Variant::Merging,
        Variant::Aggregation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::SelOnly => "SEL",
            Variant::Filtering => "+FLTR",
            Variant::Merging => "+MRG",
            Variant::Aggregation => "+AGG",
        }
    }

    /// Which of (SEL, FLTR, MRG, AGG) are active.
    pub fn steps(self) -> [bool; 4] {
        let n = self as usize;
        [true, n >= 1, n >= 2, n >= 3]
    }

    pub fn published(self) -> f64 {
        PUBLISHED_SCORES[self as usize]
    }
}

/// A variant's frozen configuration and its score on the tuning split.
#[derive(Debug, Clone)]
pub struct TunedVariant {
    pub variant: Variant,
    pub config: ElectionConfig,
    pub tuning_score: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AblationRow {
    pub variant: Variant,
    pub merge_gap_s: f64,
    pub tuning_score: f64,
    pub score: f64,
    pub published: f64,
}

#[derive(Debug, Clone)]
pub struct AblationReport {
    pub rows: Vec<AblationRow>,
    pub tuned: Vec<TunedVariant>,
    pub test_videos: usize,
    pub tuning_videos: usize,
    pub warning: Option<String>,
}

impl AblationReport {
    pub fn scores(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.score).collect()
    }

    /// CSV table, scores to four decimals.
    pub fn render_csv(&self) -> String {
        let mut out = String::from("variant,sel,fltr,mrg,agg,merge_gap_s,tuning_score,score,published\n");
        for r in &self.rows {
            let [s, f, m, a] = r.variant.steps().map(u8::from);
            out.push_str(&format!(
                "{},{s},{f},{m},{a},{},{:.4},{:.4},{:.4}\n",
                r.variant.name(),
                r.merge_gap_s,
                r.tuning_score,
                r.score,
                r.published
            ));
        }
        out
    }
}

/// Tunes the four variants on `tuning` and scores them on `test`.
pub fn ablation_run(test: &[SyntheticVideo], tuning: &[SyntheticVideo], tb: TimeBase) -> Result<AblationReport> {
    if test.is_empty() || tuning.is_empty() {
        return Err(Error::Validation("ablation needs non-empty test and tuning splits".into()));
    }
    let (k, m) = (test[0].tensor.num_classes(), test[0].tensor.num_views());
    if let Some(v) = test
        .iter()
        .chain(tuning)
        .find(|v| v.tensor.num_classes() != k || v.tensor.num_views() != m)
    {
        return Err(Error::Shape(format!("video {} does not have K={k}, M={m}", v.video_id)));
    }

    let tuner = Tuner { videos: tuning, tb, k };
    let tuned = tuner.tune_all(m)?;

    let gt: Vec<_> = test.iter().map(|v| v.gt.clone()).collect();
    let mut rows = Vec::with_capacity(4);
    for t in &tuned {
        let preds = test
            .par_iter()
            .map(|v| elect(&v.tensor, &t.config, &v.video_id))
            .collect::<Result<Vec<_>>>()?;
        let score = evaluate_sets(&gt, &preds)?.corpus_score;
        rows.push(AblationRow {
            variant: t.variant,
            merge_gap_s: t.config.merge_gap_s,
            tuning_score: t.tuning_score,
            score,
            published: t.variant.published(),
        });
    }
    let warning = (test.len() < SMALL_SAMPLE_VIDEOS).then(|| {
        format!(
            "only {} test video(s); scores below {SMALL_SAMPLE_VIDEOS} videos are noisy",
            test.len()
        )
    });
    Ok(AblationReport {
        rows,
        tuned,
        test_videos: test.len(),
        tuning_videos: tuning.len(),
        warning,
    })
}

/// Summed overlap and denominator of one class over the tuning split.
#[derive(Debug, Clone, Copy, Default)]
struct Cell {
    os: f64,
    den: usize,
}

/// `cells[row * THRESHOLD_GRID.len() + th]` for one class.
type Table = Vec<Cell>;

struct Tuner<'a> {
    videos: &'a [SyntheticVideo],
    tb: TimeBase,
    k: usize,
}

impl Tuner<'_> {
    fn tune_all(&self, m: usize) -> Result<Vec<TunedVariant>> {
        let nth = THRESHOLD_GRID.len();
        let uniform = vec![vec![1.0 / m as f64; m]];
        let uniform_tables = self.tables(&uniform, 0.0);

        // SEL: one threshold shared by every class
        let (sel_th, sel_score) = (0..nth)
            .map(|i| (i, ratio(uniform_tables.iter().map(|t| t[i]))))
            .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        let sel_choice = vec![sel_th; self.k];

        let (fltr_choice, fltr_score) = coordinate_ascent(&uniform_tables, sel_choice.clone());

        let mut mrg = None::<(f64, Vec<usize>, f64)>;
        for gap in GAP_GRID {
            let tables = self.tables(&uniform, gap);
            let (choice, score) = coordinate_ascent(&tables, fltr_choice.clone());
            if mrg.as_ref().is_none_or(|best| score > best.2) {
                mrg = Some((gap, choice, score));
            }
        }
        let (gap, mrg_choice, mrg_score) = mrg.expect("gap grid is not empty");

        // uniform is row 0, so the +MRG solution is the starting point
        let rows = weight_grid(m);
        let agg_tables = self.tables(&rows, gap);
        let (agg_choice, agg_score) = coordinate_ascent(&agg_tables, mrg_choice.clone());

        let uniform_config = |choice: &[usize], gap: f64| -> Result<ElectionConfig> {
            self.config(&uniform, &vec![0; self.k], choice, gap)
        };
        let agg_rows: Vec<usize> = agg_choice.iter().map(|i| i / nth).collect();
        let agg_th: Vec<usize> = agg_choice.iter().map(|i| i % nth).collect();
        Ok(vec![
            TunedVariant {
                variant: Variant::SelOnly,
                config: uniform_config(&sel_choice, 0.0)?,
                tuning_score: sel_score,
            },
            TunedVariant {
                variant: Variant::Filtering,
                config: uniform_config(&fltr_choice, 0.0)?,
                tuning_score: fltr_score,
            },
            TunedVariant {
                variant: Variant::Merging,
                config: uniform_config(&mrg_choice, gap)?,
                tuning_score: mrg_score,
            },
            TunedVariant {
                variant: Variant::Aggregation,
                config: self.config(&rows, &agg_rows, &agg_th, gap)?,
                tuning_score: agg_score,
            },
        ])
    }

    fn config(&self, rows: &[Vec<f64>], row_choice: &[usize], th_choice: &[usize], gap: f64) -> Result<ElectionConfig> {
        let m = rows[0].len();
        let mut cfg = ElectionConfig::new(self.k, m)?;
        cfg.time_base = self.tb;
        cfg.merge_gap_s = gap;
        cfg.fallback = Fallback::ArgmaxPeak;
        cfg.thresholds = th_choice.iter().map(|&i| THRESHOLD_GRID[i]).collect();
        cfg.weights = ViewWeights::new(row_choice.iter().map(|&r| rows[r].clone()).collect())?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// One table per class for every (weight row, threshold) pair.
    fn tables(&self, rows: &[Vec<f64>], gap_s: f64) -> Vec<Table> {
        let gap_frames = self.tb.seconds_to_frames(gap_s);
        (0..self.k)
            .into_par_iter()
            .map(|c| {
                let gt: Vec<Vec<ActionSegment>> = self
                    .videos
                    .iter()
                    .map(|v| v.gt.segments.iter().filter(|s| s.class_id == c).copied().collect())
                    .collect();
                let mut table = vec![Cell::default(); rows.len() * THRESHOLD_GRID.len()];
                for (r, row) in rows.iter().enumerate() {
                    for (v, video) in self.videos.iter().enumerate() {
                        let series = aggregate_class(&video.tensor, c, row);
                        for (i, &th) in THRESHOLD_GRID.iter().enumerate() {
                            let pred: Vec<ActionSegment> =
                                elect_class(&series, c, th, gap_frames, self.tb, Fallback::ArgmaxPeak)
                                    .map(|s| s.segment)
                                    .into_iter()
                                    .collect();
                            let res = match_optimal(&gt[v], &pred);
                            let cell = &mut table[r * THRESHOLD_GRID.len() + i];
                            cell.os += res.total_os;
                            cell.den += res.denominator();
                        }
                    }
                }
                table
            })
            .collect()
    }
}

/// Pooled score of a set of per-class cells.
fn ratio(cells: impl Iterator<Item = Cell>) -> f64 {
    let (os, den) = cells.fold((0.0, 0usize), |(o, d), c| (o + c.os, d + c.den));
    if den == 0 {
        0.0
    } else {
        os / den as f64
    }
}

/// Repeatedly gives each class, in order, the setting that maximizes the
/// pooled ratio with all other classes held fixed. A class only moves on a
/// strict improvement, so the score never decreases from `init`.
fn coordinate_ascent(tables: &[Table], init: Vec<usize>) -> (Vec<usize>, f64) {
    let mut choice = init;
    let mut os: f64 = tables.iter().zip(&choice).map(|(t, &i)| t[i].os).sum();
    let mut den: usize = tables.iter().zip(&choice).map(|(t, &i)| t[i].den).sum();
    let score = |os: f64, den: usize| if den == 0 { 0.0 } else { os / den as f64 };
    for _ in 0..MAX_SWEEPS {
        let mut changed = false;
        for (c, table) in tables.iter().enumerate() {
            let cur = table[choice[c]];
            let (rest_os, rest_den) = (os - cur.os, den - cur.den);
            let mut best = (choice[c], score(os, den));
            for (i, cell) in table.iter().enumerate() {
                let s = score(rest_os + cell.os, rest_den + cell.den);
                if s > best.1 + 1e-12 {
                    best = (i, s);
                }
            }
            if best.0 != choice[c] {
                choice[c] = best.0;
                os = rest_os + table[best.0].os;
                den = rest_den + table[best.0].den;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    // resum from scratch so drift in the running total does not leak out
    let os: f64 = tables.iter().zip(&choice).map(|(t, &i)| t[i].os).sum();
    (choice, score(os, den))
}

/// Uniform weights, then each single view, then each pairwise midpoint.
pub(crate) fn weight_grid(m: usize) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![1.0 / m as f64; m]];
    if m > 1 {
        for i in 0..m {
            let mut r = vec![0.0; m];
            r[i] = 1.0;
            rows.push(r);
        }
        for i in 0..m {
            for j in i + 1..m {
                let mut r = vec![0.0; m];
                r[i] = 0.5;
                r[j] = 0.5;
                if m > 2 {
                    rows.push(r);
                }
            }
        }
    }
    rows
}
