//! Overlap-score evaluation.
//!
//! A prediction can be matched to a ground-truth activity only when both have
//! the same class and each endpoint of the prediction lies within 10 s of the
//! corresponding ground-truth endpoint. A matched pair scores the temporal
//! IoU of the two intervals. Ground truth and predictions are matched
//! one-to-one so that the summed score is maximal, and the final score
//! averages over matched pairs, unmatched ground truth and unmatched
//! predictions alike (each counting once, unmatched items scoring zero).
//!
//! The original protocol pairs two equally sized sets through a permutation;
//! here both sets may have any size and the matching may be partial.

mod assignment;

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formats::read_segments_csv;
use crate::model::{overlap_unchecked, ActionSegment, SegmentSet};

/// Largest endpoint displacement, in seconds, that still allows a match.
pub const ELIGIBILITY_WINDOW_S: f64 = 10.0;

/// Absorbs decimal-to-binary error so that an offset written as exactly
/// 10 s is treated as 10 s.
const WINDOW_SLACK_S: f64 = 1e-9;

/// Totals within this distance of the optimum count as tied; pairs whose
/// overlap score does not exceed it are never matched.
pub const SCORE_TOLERANCE: f64 = 1e-9;

/// Set sizes above this are refused by [`match_bruteforce`].
pub const BRUTEFORCE_LIMIT: usize = 9;

/// Temporal intersection over union of two segments. Classes are ignored.
pub fn pairwise_os(gt: &ActionSegment, pred: &ActionSegment) -> f64 {
    let (inter, union) = overlap_unchecked((gt.start_s, gt.end_s), (pred.start_s, pred.end_s));
    if union > 0.0 {
        inter / union
    } else {
        0.0
    }
}

/// Same class, and both endpoints within [`ELIGIBILITY_WINDOW_S`] (inclusive).
pub fn eligible(gt: &ActionSegment, pred: &ActionSegment) -> bool {
    let limit = ELIGIBILITY_WINDOW_S + WINDOW_SLACK_S;
    gt.class_id == pred.class_id
        && (pred.start_s - gt.start_s).abs() <= limit
        && (pred.end_s - gt.end_s).abs() <= limit
}

/// Score of the edge `gt -> pred`, or `None` if the pair can never be matched.
fn edge(gt: &ActionSegment, pred: &ActionSegment) -> Option<f64> {
    if !eligible(gt, pred) {
        return None;
    }
    let os = pairwise_os(gt, pred);
    (os > SCORE_TOLERANCE).then_some(os)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchedPair {
    pub gt_index: usize,
    pub pred_index: usize,
    pub os: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchResult {
    /// Sorted by `gt_index`.
    pub pairs: Vec<MatchedPair>,
    pub unmatched_gt: Vec<usize>,
    pub unmatched_pred: Vec<usize>,
    /// Sum of pair scores, accumulated in `gt_index` order.
    pub total_os: f64,
    pub average_score: f64,
}

impl MatchResult {
    fn from_pairs(gt: &[ActionSegment], pred: &[ActionSegment], mut pairs: Vec<(usize, usize)>) -> Self {
        pairs.sort_unstable();
        let mut gt_used = vec![false; gt.len()];
        let mut pred_used = vec![false; pred.len()];
        let pairs: Vec<MatchedPair> = pairs
            .into_iter()
            .map(|(g, p)| {
                gt_used[g] = true;
                pred_used[p] = true;
                MatchedPair {
                    gt_index: g,
                    pred_index: p,
                    os: pairwise_os(&gt[g], &pred[p]),
                }
            })
            .collect();
        let unmatched = |used: &[bool]| -> Vec<usize> {
            used.iter().enumerate().filter(|(_, u)| !**u).map(|(i, _)| i).collect()
        };
        let unmatched_gt = unmatched(&gt_used);
        let unmatched_pred = unmatched(&pred_used);
        let total_os: f64 = pairs.iter().fold(0.0, |acc, p| acc + p.os);
        let denominator = pairs.len() + unmatched_gt.len() + unmatched_pred.len();
        let average_score = if denominator == 0 {
            0.0
        } else {
            total_os / denominator as f64
        };
        Self {
            pairs,
            unmatched_gt,
            unmatched_pred,
            total_os,
            average_score,
        }
    }

    /// Matched pairs plus unmatched items on both sides.
    pub fn denominator(&self) -> usize {
        self.pairs.len() + self.unmatched_gt.len() + self.unmatched_pred.len()
    }

    pub fn pair_list(&self) -> Vec<(usize, usize)> {
        self.pairs.iter().map(|p| (p.gt_index, p.pred_index)).collect()
    }
}

/// Exhaustive search over every one-to-one assignment of eligible pairs.
///
/// Among assignments whose total is within [`SCORE_TOLERANCE`] of the best,
/// the one with the lexicographically smallest sorted pair list wins.
pub fn match_bruteforce(gt: &[ActionSegment], pred: &[ActionSegment]) -> Result<MatchResult> {
    if gt.len() > BRUTEFORCE_LIMIT || pred.len() > BRUTEFORCE_LIMIT {
        return Err(Error::Capacity(format!(
            "brute-force matching is limited to {BRUTEFORCE_LIMIT} items per side, got {} and {}",
            gt.len(),
            pred.len()
        )));
    }
    let weights: Vec<Vec<Option<f64>>> =
        gt.iter().map(|g| pred.iter().map(|p| edge(g, p)).collect()).collect();

    type Leaf<'f> = dyn FnMut(f64, &[(usize, usize)]) + 'f;

    struct Search<'a> {
        weights: &'a [Vec<Option<f64>>],
        used: Vec<bool>,
        current: Vec<(usize, usize)>,
    }

    impl Search<'_> {
        fn visit(&mut self, row: usize, total: f64, on_leaf: &mut Leaf<'_>) {
            if row == self.weights.len() {
                on_leaf(total, &self.current);
                return;
            }
            self.visit(row + 1, total, on_leaf);
            for j in 0..self.used.len() {
                if let (false, Some(w)) = (self.used[j], self.weights[row][j]) {
                    self.used[j] = true;
                    self.current.push((row, j));
                    self.visit(row + 1, total + w, on_leaf);
                    self.current.pop();
                    self.used[j] = false;
                }
            }
        }
    }

    let mut search = Search {
        weights: &weights,
        used: vec![false; pred.len()],
        current: Vec::new(),
    };
    let mut best_total = 0.0f64;
    search.visit(0, 0.0, &mut |total, _| best_total = best_total.max(total));

    let mut chosen: Option<Vec<(usize, usize)>> = None;
    search.visit(0, 0.0, &mut |total, pairs| {
        if total >= best_total - SCORE_TOLERANCE && chosen.as_deref().is_none_or(|c| pairs < c) {
            chosen = Some(pairs.to_vec());
        }
    });
    Ok(MatchResult::from_pairs(gt, pred, chosen.unwrap_or_default()))
}

/// Optimal matching via the Hungarian algorithm, with the same tie rule as
/// [`match_bruteforce`].
///
/// Pairs can only match within a class, so each class is solved on its own.
/// Within a class the lexicographically smallest optimal assignment is built
/// greedily: ground-truth rows are fixed one at a time to the lowest
/// prediction that still admits an optimal completion.
pub fn match_optimal(gt: &[ActionSegment], pred: &[ActionSegment]) -> MatchResult {
    let mut by_class: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (i, g) in gt.iter().enumerate() {
        by_class.entry(g.class_id).or_default().0.push(i);
    }
    for (j, p) in pred.iter().enumerate() {
        if let Some(entry) = by_class.get_mut(&p.class_id) {
            entry.1.push(j);
        }
    }

    let mut pairs = Vec::new();
    for (rows, cols) in by_class.values() {
        if cols.is_empty() {
            continue;
        }
        let weights: Vec<Vec<f64>> = rows
            .iter()
            .map(|&i| cols.iter().map(|&j| edge(&gt[i], &pred[j]).unwrap_or(0.0)).collect())
            .collect();
        for (r, c) in lexmin_optimal(&weights) {
            pairs.push((rows[r], cols[c]));
        }
    }
    MatchResult::from_pairs(gt, pred, pairs)
}

fn lexmin_optimal(weights: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let optimum = assignment::max_weight(weights);
    let cols = weights.first().map_or(0, Vec::len);
    let mut free_cols: Vec<usize> = (0..cols).collect();
    let mut fixed = 0.0f64;
    let mut out = Vec::new();

    let residual = |from_row: usize, free: &[usize]| -> f64 {
        let sub: Vec<Vec<f64>> = weights[from_row..]
            .iter()
            .map(|row| free.iter().map(|&j| row[j]).collect())
            .collect();
        assignment::max_weight(&sub)
    };

    for (r, row) in weights.iter().enumerate() {
        let mut pick = None;
        for (k, &j) in free_cols.iter().enumerate() {
            if row[j] <= 0.0 {
                continue;
            }
            let rest: Vec<usize> = free_cols.iter().copied().filter(|&x| x != j).collect();
            if fixed + row[j] + residual(r + 1, &rest) >= optimum - SCORE_TOLERANCE {
                pick = Some(k);
                break;
            }
        }
        if let Some(k) = pick {
            let j = free_cols.remove(k);
            fixed += row[j];
            out.push((r, j));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VideoEvaluation {
    pub video_id: String,
    #[serde(flatten)]
    pub result: MatchResult,
}

/// Per-video results and the pooled corpus score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusEvaluation {
    pub corpus_score: f64,
    pub total_os: f64,
    pub denominator: usize,
    pub videos: Vec<VideoEvaluation>,
}

/// Matches every video and pools numerator and denominator over the corpus.
///
/// Videos are reported in ascending id order; ground-truth videos without
/// predictions count all their activities as misses.
pub fn evaluate_sets(gt: &[SegmentSet], pred: &[SegmentSet]) -> Result<CorpusEvaluation> {
    let mut gt_by_id: BTreeMap<&str, &[ActionSegment]> = BTreeMap::new();
    for set in gt {
        if gt_by_id.insert(&set.video_id, &set.segments).is_some() {
            return Err(Error::Validation(format!("duplicate ground-truth video `{}`", set.video_id)));
        }
    }
    let mut pred_by_id: BTreeMap<&str, &[ActionSegment]> = BTreeMap::new();
    for set in pred {
        if !gt_by_id.contains_key(set.video_id.as_str()) {
            return Err(Error::Validation(format!(
                "prediction for unknown video `{}`",
                set.video_id
            )));
        }
        if pred_by_id.insert(&set.video_id, &set.segments).is_some() {
            return Err(Error::Validation(format!("duplicate prediction video `{}`", set.video_id)));
        }
    }

    let jobs: Vec<(&str, &[ActionSegment])> = gt_by_id.into_iter().collect();
    let videos: Vec<VideoEvaluation> = jobs
        .par_iter()
        .map(|(id, gt_segs)| VideoEvaluation {
            video_id: id.to_string(),
            result: match_optimal(gt_segs, pred_by_id.get(id).copied().unwrap_or(&[])),
        })
        .collect();

    let total_os: f64 = videos.iter().fold(0.0, |acc, v| acc + v.result.total_os);
    let denominator: usize = videos.iter().map(|v| v.result.denominator()).sum();
    let corpus_score = if denominator == 0 {
        0.0
    } else {
        total_os / denominator as f64
    };
    Ok(CorpusEvaluation {
        corpus_score,
        total_os,
        denominator,
        videos,
    })
}

pub fn evaluate_files(gt_path: impl AsRef<Path>, pred_path: impl AsRef<Path>) -> Result<CorpusEvaluation> {
    let gt = read_segments_csv(gt_path, None)?;
    let pred = read_segments_csv(pred_path, None)?;
    evaluate_sets(&gt, &pred)
}
