//! Election: turns a multi-view probability tensor into one segment per class
//! in four steps.
//!
//! 1. **Aggregation** fuses views with per-class weights:
//!    `p'[t,c] = Σ_m ω[c,m] · p[t,c,m]`.
//! 2. **Filtering** keeps maximal runs of frames where `p'[t,c]` strictly
//!    exceeds the class threshold.
//! 3. **Merging** joins neighbouring runs separated by fewer than
//!    `gap_frames` frames, repeating until nothing changes.
//! 4. **Selection** keeps the run with the highest mean score and converts
//!    its frame bounds to whole seconds.

use crate::error::{Error, Result};
use crate::formats::{ElectionConfig, Fallback, ViewWeights};
use crate::model::{ActionSegment, AggregatedSignal, Candidate, ProbabilityTensor, SegmentSet, TimeBase};

/// Fuses the views of `p` with the per-class kernel `weights`.
///
/// A row whose weights are all equal is computed as the plain view mean
/// `Σ_m p / M`, so the unweighted baseline is reproduced bit-for-bit.
pub fn aggregate(p: &ProbabilityTensor, weights: &ViewWeights) -> Result<AggregatedSignal> {
    if weights.num_classes() != p.num_classes() || weights.num_views() != p.num_views() {
        return Err(Error::Shape(format!(
            "weights are {}x{}, tensor has K={} M={}",
            weights.num_classes(),
            weights.num_views(),
            p.num_classes(),
            p.num_views()
        )));
    }
    let series = (0..p.num_classes())
        .map(|c| aggregate_class(p, c, weights.row(c)))
        .collect();
    AggregatedSignal::from_class_series(series)
}

/// Aggregated series of class `c` under one weight row (already normalized,
/// length M).
pub fn aggregate_class(p: &ProbabilityTensor, c: usize, row: &[f64]) -> Vec<f64> {
    let frames = 0..p.num_frames();
    if row.iter().all(|w| *w == row[0]) {
        let views = p.num_views() as f64;
        frames.map(|t| p.views_at(t, c).iter().sum::<f64>() / views).collect()
    } else {
        frames
            .map(|t| p.views_at(t, c).iter().zip(row).map(|(x, w)| x * w).sum())
            .collect()
    }
}

/// Arithmetic mean of `series[start..=end]`, summed left to right.
pub fn span_mean(series: &[f64], start: usize, end: usize) -> f64 {
    let run = &series[start..=end];
    run.iter().sum::<f64>() / run.len() as f64
}

/// Maximal runs of `series[t] > threshold` for one class, in start order.
pub fn filter_class(series: &[f64], class_id: usize, threshold: f64) -> Vec<Candidate> {
    let mut out = Vec::new();
    let mut run_start = None;
    for (t, &v) in series.iter().enumerate() {
        match (v > threshold, run_start) {
            (true, None) => run_start = Some(t),
            (false, Some(s)) => {
                out.push(candidate(series, class_id, s, t - 1));
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = run_start {
        out.push(candidate(series, class_id, s, series.len() - 1));
    }
    out
}

fn candidate(series: &[f64], class_id: usize, start: usize, end: usize) -> Candidate {
    Candidate {
        class_id,
        start_frame: start,
        end_frame: end,
        mean_score: span_mean(series, start, end),
    }
}

/// Filtering for every class; `result[c]` holds class `c`'s candidates.
pub fn filter(signal: &AggregatedSignal, thresholds: &[f64]) -> Result<Vec<Vec<Candidate>>> {
    if thresholds.len() != signal.num_classes() {
        return Err(Error::Shape(format!(
            "{} thresholds for {} classes",
            thresholds.len(),
            signal.num_classes()
        )));
    }
    Ok(thresholds
        .iter()
        .enumerate()
        .map(|(c, &th)| filter_class(signal.class_series(c), c, th))
        .collect())
}

/// Joins candidates of one class whose separation (frames strictly between
/// them) is below `gap_frames`, until a fix point is reached. Merged
/// candidates span the gap and their mean is recomputed over the full span.
pub fn merge(cands: &[Candidate], gap_frames: usize, signal: &AggregatedSignal) -> Result<Vec<Candidate>> {
    let Some(first) = cands.first() else {
        return Ok(Vec::new());
    };
    if first.class_id >= signal.num_classes() {
        return Err(Error::Contract(format!("class {} not in signal", first.class_id)));
    }
    merge_series(cands, gap_frames, signal.class_series(first.class_id))
}

pub(crate) fn merge_series(cands: &[Candidate], gap_frames: usize, series: &[f64]) -> Result<Vec<Candidate>> {
    check_ordered(cands, series.len())?;
    let mut current = cands.to_vec();
    loop {
        let next = merge_sweep(&current, gap_frames, series);
        if next.len() == current.len() {
            return Ok(next);
        }
        current = next;
    }
}

/// One left-to-right pass joining each candidate into its predecessor when
/// the gap between them is too small.
fn merge_sweep(cands: &[Candidate], gap_frames: usize, series: &[f64]) -> Vec<Candidate> {
    let mut out: Vec<Candidate> = Vec::with_capacity(cands.len());
    for c in cands {
        match out.last_mut() {
            Some(prev) if c.start_frame - prev.end_frame - 1 < gap_frames => {
                prev.end_frame = c.end_frame;
            }
            _ => out.push(*c),
        }
    }
    for c in &mut out {
        c.mean_score = span_mean(series, c.start_frame, c.end_frame);
    }
    out
}

fn check_ordered(cands: &[Candidate], num_frames: usize) -> Result<()> {
    let Some(first) = cands.first() else {
        return Ok(());
    };
    let class_id = first.class_id;
    for c in cands {
        if c.class_id != class_id {
            return Err(Error::Contract("merge input mixes classes".into()));
        }
        if c.start_frame > c.end_frame || c.end_frame >= num_frames {
            return Err(Error::Contract(format!(
                "candidate [{}, {}] is not a valid frame range",
                c.start_frame, c.end_frame
            )));
        }
    }
    if let Some(w) = cands.windows(2).find(|w| w[1].start_frame <= w[0].end_frame) {
        return Err(Error::Contract(format!(
            "merge input must be sorted and non-overlapping: [{}, {}] then [{}, {}]",
            w[0].start_frame, w[0].end_frame, w[1].start_frame, w[1].end_frame
        )));
    }
    Ok(())
}

/// Outcome of selection for one class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub segment: ActionSegment,
    /// The winning candidate, or `None` when the fallback produced the segment.
    pub winner: Option<Candidate>,
}

impl Selection {
    pub fn used_fallback(&self) -> bool {
        self.winner.is_none()
    }
}

/// Picks the candidate with the highest mean score (ties: earlier start,
/// then longer) and converts it to whole seconds.
pub fn select_class(
    class_id: usize,
    cands: &[Candidate],
    series: &[f64],
    tb: TimeBase,
    fallback: Fallback,
) -> Option<Selection> {
    let winner = cands.iter().copied().reduce(|best, c| {
        let better = c.mean_score > best.mean_score
            || (c.mean_score == best.mean_score
                && (c.start_frame < best.start_frame
                    || (c.start_frame == best.start_frame && c.frame_count() > best.frame_count())));
        if better {
            c
        } else {
            best
        }
    });
    match (winner, fallback) {
        (Some(w), _) => {
            let start = tb.frames_to_seconds(w.start_frame);
            let end = tb.frames_to_seconds(w.end_frame);
            Some(Selection {
                segment: rounded_segment(class_id, start, end),
                winner: Some(w),
            })
        }
        (None, Fallback::None) => None,
        (None, Fallback::ArgmaxPeak) => {
            let peak = argmax(series);
            let centre = tb.frames_to_seconds(peak);
            let video_end = tb.frames_to_seconds(series.len());
            let start = (centre - 0.5).max(0.0);
            let end = (centre + 0.5).min(video_end);
            Some(Selection {
                segment: rounded_segment(class_id, start, end),
                winner: None,
            })
        }
    }
}

/// Rounds both bounds half away from zero; a collapsed segment gets one
/// extra second at its end.
fn rounded_segment(class_id: usize, start: f64, end: f64) -> ActionSegment {
    let start = start.round();
    let mut end = end.round();
    if end <= start {
        end = start + 1.0;
    }
    ActionSegment {
        class_id,
        start_s: start,
        end_s: end,
    }
}

/// First index of the maximum.
fn argmax(series: &[f64]) -> usize {
    series
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
        .0
}

/// Selection for every class. `result[c]` is `None` only under
/// [`Fallback::None`] when class `c` has no candidates.
pub fn select(
    cands: &[Vec<Candidate>],
    signal: &AggregatedSignal,
    tb: TimeBase,
    fallback: Fallback,
) -> Vec<Option<Selection>> {
    cands
        .iter()
        .enumerate()
        .map(|(c, list)| select_class(c, list, signal.class_series(c), tb, fallback))
        .collect()
}

/// Every intermediate product of one election run.
#[derive(Debug, Clone)]
pub struct ElectionTrace {
    pub signal: AggregatedSignal,
    pub filtered: Vec<Vec<Candidate>>,
    pub merged: Vec<Vec<Candidate>>,
    pub selections: Vec<Option<Selection>>,
}

impl ElectionTrace {
    pub fn segments(&self) -> Vec<ActionSegment> {
        self.selections.iter().flatten().map(|s| s.segment).collect()
    }
}

/// Runs all four steps and keeps the intermediate results.
pub fn run_election(p: &ProbabilityTensor, cfg: &ElectionConfig) -> Result<ElectionTrace> {
    cfg.validate()?;
    let signal = aggregate(p, &cfg.weights)?;
    let filtered = filter(&signal, &cfg.thresholds)?;
    let gap = cfg.gap_frames();
    let merged = filtered
        .iter()
        .enumerate()
        .map(|(c, list)| merge_series(list, gap, signal.class_series(c)))
        .collect::<Result<Vec<_>>>()?;
    let selections = select(&merged, &signal, cfg.time_base, cfg.fallback);
    Ok(ElectionTrace {
        signal,
        filtered,
        merged,
        selections,
    })
}

/// One segment per class (at most), ordered by class id.
pub fn elect(p: &ProbabilityTensor, cfg: &ElectionConfig, video_id: &str) -> Result<SegmentSet> {
    Ok(SegmentSet::new(video_id, run_election(p, cfg)?.segments()))
}

/// Filtering, merging and selection for a single class series.
pub fn elect_class(
    series: &[f64],
    class_id: usize,
    threshold: f64,
    gap_frames: usize,
    tb: TimeBase,
    fallback: Fallback,
) -> Option<Selection> {
    let runs = filter_class(series, class_id, threshold);
    let merged = merge_series(&runs, gap_frames, series).expect("filter output is ordered");
    select_class(class_id, &merged, series, tb, fallback)
}
