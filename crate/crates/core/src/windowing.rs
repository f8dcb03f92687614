//! Sliding-window inference over an untrimmed video.
//!
//! A clip classifier sees `S` frames sampled every `τ` frames, so one window
//! spans `S·τ` frames. Windows advance by a quarter span. Each window's class
//! vector is broadcast to every frame it covers and a frame's final score is
//! the mean over all windows covering it.

use crate::error::{Error, Result};
use crate::model::{is_probability, ProbabilityTensor};

/// Window geometry: `frames_per_clip` (S) frames sampled every `sample_rate`
/// (τ) frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    frames_per_clip: usize,
    sample_rate: usize,
}

impl WindowSpec {
    pub fn new(frames_per_clip: usize, sample_rate: usize) -> Result<Self> {
        if frames_per_clip == 0 || sample_rate == 0 {
            return Err(Error::Invalid("S and tau must be at least 1".into()));
        }
        if !(frames_per_clip * sample_rate).is_multiple_of(4) {
            return Err(Error::Invalid(format!(
                "window span S*tau = {} must be divisible by 4",
                frames_per_clip * sample_rate
            )));
        }
        Ok(Self {
            frames_per_clip,
            sample_rate,
        })
    }

    pub fn frames_per_clip(&self) -> usize {
        self.frames_per_clip
    }

    pub fn sample_rate(&self) -> usize {
        self.sample_rate
    }

    pub fn span(&self) -> usize {
        self.frames_per_clip * self.sample_rate
    }

    pub fn stride(&self) -> usize {
        self.span() / 4
    }

    /// Frames fed to the classifier for a window starting at `start`,
    /// clamped to the last frame of a `num_frames`-long video.
    pub fn sampled_frames(&self, start: usize, num_frames: usize) -> impl Iterator<Item = usize> {
        let last = num_frames.saturating_sub(1);
        let step = self.sample_rate;
        (0..self.frames_per_clip).map(move |i| (start + i * step).min(last))
    }
}

impl Default for WindowSpec {
    /// S = 16 frames, τ = 4.
    fn default() -> Self {
        Self {
            frames_per_clip: 16,
            sample_rate: 4,
        }
    }
}

/// Stand-in for the clip recognition network.
pub trait ClipScorer {
    /// Class probabilities (length K, summing to one) for the clip of `view`
    /// whose window starts at `start_frame`.
    fn score(
        &self,
        video_id: &str,
        view: usize,
        start_frame: usize,
        spec: &WindowSpec,
    ) -> Result<Vec<f64>>;
}

impl<F> ClipScorer for F
where
    F: Fn(&str, usize, usize, &WindowSpec) -> Result<Vec<f64>>,
{
    fn score(&self, video_id: &str, view: usize, start: usize, spec: &WindowSpec) -> Result<Vec<f64>> {
        self(video_id, view, start, spec)
    }
}

/// Window start frames for a `num_frames`-long video.
///
/// Starts advance by the stride while the window fits. If the last regular
/// window stops short of the final frame, one more window is aligned to the
/// end of the video. Videos shorter than a span get a single window at 0.
pub fn schedule_windows(num_frames: usize, spec: &WindowSpec) -> Vec<usize> {
    let (span, stride) = (spec.span(), spec.stride());
    if num_frames <= span {
        return vec![0];
    }
    let mut starts: Vec<usize> = (0..)
        .map(|i| i * stride)
        .take_while(|s| s + span <= num_frames)
        .collect();
    let tail = num_frames - span;
    if !tail.is_multiple_of(stride) {
        starts.push(tail);
    }
    starts
}

/// Number of scheduled windows covering each frame.
pub fn coverage(num_frames: usize, spec: &WindowSpec) -> Vec<usize> {
    let mut counts = vec![0usize; num_frames];
    for start in schedule_windows(num_frames, spec) {
        let end = (start + spec.span()).min(num_frames);
        for c in &mut counts[start..end] {
            *c += 1;
        }
    }
    counts
}

/// Runs `scorer` over every (view, window) pair and averages the window
/// vectors per frame.
///
/// Window contributions are summed in ascending start order before the
/// division, so the result is bitwise reproducible.
pub fn accumulate_scores<S: ClipScorer + ?Sized>(
    video_id: &str,
    num_frames: usize,
    num_views: usize,
    num_classes: usize,
    spec: &WindowSpec,
    scorer: &S,
) -> Result<ProbabilityTensor> {
    if num_frames == 0 || num_views == 0 || num_classes == 0 {
        return Err(Error::Shape("T, M and K must all be positive".into()));
    }
    let starts = schedule_windows(num_frames, spec);
    let counts = coverage(num_frames, spec);
    let mut sums = vec![0.0f64; num_frames * num_classes * num_views];

    for view in 0..num_views {
        for &start in &starts {
            let scores = scorer
                .score(video_id, view, start, spec)
                .and_then(|v| check_scores(v, num_classes))
                .map_err(|e| Error::Scorer {
                    view,
                    start,
                    source: Box::new(e),
                })?;
            let end = (start + spec.span()).min(num_frames);
            for t in start..end {
                for (c, s) in scores.iter().enumerate() {
                    sums[(t * num_classes + c) * num_views + view] += s;
                }
            }
        }
    }

    for t in 0..num_frames {
        let n = counts[t] as f64;
        for v in &mut sums[t * num_classes * num_views..(t + 1) * num_classes * num_views] {
            *v /= n;
        }
    }
    ProbabilityTensor::new(num_frames, num_classes, num_views, sums)
}

fn check_scores(scores: Vec<f64>, num_classes: usize) -> Result<Vec<f64>> {
    if scores.len() != num_classes {
        return Err(Error::Shape(format!(
            "scorer returned {} classes, expected {num_classes}",
            scores.len()
        )));
    }
    if let Some(v) = scores.iter().find(|v| !is_probability(**v)) {
        return Err(Error::Range(format!("scorer returned {v}, not a probability")));
    }
    Ok(scores)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_examples() {
        let spec = WindowSpec::default();
        assert_eq!((spec.span(), spec.stride()), (64, 16));
        assert_eq!(schedule_windows(96, &spec), vec![0, 16, 32]);
        assert_eq!(schedule_windows(64, &spec), vec![0]);
        assert_eq!(schedule_windows(100, &spec), vec![0, 16, 32, 36]);
        assert_eq!(schedule_windows(10, &spec), vec![0]);
    }

    #[test]
    fn spec_validation() {
        assert!(WindowSpec::new(0, 4).is_err());
        assert!(WindowSpec::new(3, 3).is_err());
        assert!(WindowSpec::new(2, 2).is_ok());
    }

    #[test]
    fn single_window_identity() {
        let spec = WindowSpec::new(4, 4).unwrap();
        let scorer = |_: &str, _: usize, _: usize, _: &WindowSpec| Ok(vec![0.25, 0.75]);
        let p = accumulate_scores("v", 16, 2, 2, &spec, &scorer).unwrap();
        for t in 0..16 {
            for m in 0..2 {
                assert_eq!(p.get(t, 0, m), 0.25);
                assert_eq!(p.get(t, 1, m), 0.75);
            }
        }
    }

    #[test]
    fn overlap_frames_hold_the_mean() {
        // span 64, stride 16, T = 80 -> windows at 0 and 16, overlap [16, 63]
        let spec = WindowSpec::default();
        assert_eq!(schedule_windows(80, &spec), vec![0, 16]);
        let scorer = |_: &str, _: usize, start: usize, _: &WindowSpec| {
            Ok(if start == 0 { vec![0.2, 0.8] } else { vec![0.6, 0.4] })
        };
        let p = accumulate_scores("v", 80, 1, 2, &spec, &scorer).unwrap();
        assert_eq!(p.get(0, 0, 0), 0.2);
        assert_eq!(p.get(15, 0, 0), 0.2);
        assert_eq!(p.get(16, 0, 0), (0.2 + 0.6) / 2.0);
        assert_eq!(p.get(63, 1, 0), (0.8 + 0.4) / 2.0);
        assert_eq!(p.get(64, 0, 0), 0.6);
        assert_eq!(p.get(79, 1, 0), 0.4);
    }

    #[test]
    fn scorer_errors_carry_context() {
        let spec = WindowSpec::default();
        let scorer = |_: &str, view: usize, start: usize, _: &WindowSpec| {
            if view == 1 && start == 16 {
                Err(Error::Invalid("boom".into()))
            } else {
                Ok(vec![1.0])
            }
        };
        match accumulate_scores("v", 96, 2, 1, &spec, &scorer) {
            Err(Error::Scorer { view: 1, start: 16, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        let wrong_len = |_: &str, _: usize, _: usize, _: &WindowSpec| Ok(vec![0.5, 0.5]);
        assert!(accumulate_scores("v", 96, 1, 1, &spec, &wrong_len).is_err());
    }

    #[test]
    fn sampled_frames_clamp_to_video_end() {
        let spec = WindowSpec::default();
        let frames: Vec<usize> = spec.sampled_frames(0, 10).collect();
        assert_eq!(frames.len(), 16);
        assert_eq!(frames[..4], [0, 4, 8, 9]);
        assert!(frames.iter().all(|&f| f <= 9));
    }
}
