//! Core value types shared by the whole pipeline.
//!
//! Times are `f64` seconds everywhere except frame indices, which are
//! `usize`. Conversion from frames to seconds happens once, when the election
//! turns a winning candidate into an [`ActionSegment`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Names of the sixteen driver actions used as the default label set.
pub const DRIVER_ACTIONS: [&str; 16] = [
    "Forward Driving",
    "Drinking",
    "Phone Call (R)",
    "Phone Call (L)",
    "Eating",
    "Text (R)",
    "Text (L)",
    "Reaching behind",
    "Adjust control panel",
    "Pick up from floor (D)",
    "Pick up from floor (P)",
    "Talk to pax at the right",
    "Talk to pax at backseat",
    "Yawning",
    "Hand on head",
    "Singing or dancing",
];

pub const DEFAULT_FPS: f64 = 30.0;

/// An ordered set of action classes with contiguous ids `0..K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSet {
    names: Vec<String>,
}

impl LabelSet {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::Invalid("label set must contain at least one class".into()));
        }
        Ok(Self { names })
    }

    /// The sixteen-class driver action set.
    pub fn driver_actions() -> Self {
        Self {
            names: DRIVER_ACTIONS.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Driver action names when `num_classes == 16`, `class{i}` otherwise.
    pub fn for_classes(num_classes: usize) -> Result<Self> {
        if num_classes == DRIVER_ACTIONS.len() {
            Ok(Self::driver_actions())
        } else {
            Self::new((0..num_classes).map(|i| format!("class{i}")))
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn contains(&self, class_id: usize) -> bool {
        class_id < self.names.len()
    }

    pub fn name(&self, class_id: usize) -> Option<&str> {
        self.names.get(class_id).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &str)> {
        self.names.iter().enumerate().map(|(i, n)| (i, n.as_str()))
    }
}

/// Frame rate of the frame-indexed signals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeBase {
    fps: f64,
}

impl TimeBase {
    pub fn new(fps: f64) -> Result<Self> {
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::Invalid(format!("fps must be positive and finite, got {fps}")));
        }
        Ok(Self { fps })
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    /// `frame / fps` in double precision.
    pub fn frames_to_seconds(&self, frame: usize) -> f64 {
        frame as f64 / self.fps
    }

    /// Frame count spanning `seconds`, rounded half away from zero.
    pub fn seconds_to_frames(&self, seconds: f64) -> usize {
        (seconds * self.fps).round().max(0.0) as usize
    }
}

impl Default for TimeBase {
    fn default() -> Self {
        Self { fps: DEFAULT_FPS }
    }
}

/// See [`TimeBase::frames_to_seconds`].
pub fn frames_to_seconds(frame: usize, tb: TimeBase) -> f64 {
    tb.frames_to_seconds(frame)
}

/// One labelled temporal interval, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionSegment {
    pub class_id: usize,
    pub start_s: f64,
    pub end_s: f64,
}

impl ActionSegment {
    pub fn new(class_id: usize, start_s: f64, end_s: f64) -> Result<Self> {
        if !(start_s.is_finite() && end_s.is_finite()) || start_s < 0.0 || start_s >= end_s {
            return Err(Error::InvalidInterval {
                start: start_s,
                end: end_s,
            });
        }
        Ok(Self {
            class_id,
            start_s,
            end_s,
        })
    }

    pub fn duration(&self) -> f64 {
        self.end_s - self.start_s
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.start_s + self.end_s)
    }
}

/// All segments (ground truth or predictions) of one video.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SegmentSet {
    pub video_id: String,
    pub segments: Vec<ActionSegment>,
}

impl SegmentSet {
    pub fn new(video_id: impl Into<String>, segments: Vec<ActionSegment>) -> Self {
        Self {
            video_id: video_id.into(),
            segments,
        }
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }
}

/// Frame-level class scores for every camera view, indexed `(t, c, m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTensor {
    frames: usize,
    classes: usize,
    views: usize,
    values: Vec<f64>,
}

impl ProbabilityTensor {
    /// `values` is laid out frame-major, then class, then view.
    pub fn new(frames: usize, classes: usize, views: usize, values: Vec<f64>) -> Result<Self> {
        if frames == 0 || classes == 0 || views == 0 {
            return Err(Error::Shape(format!(
                "tensor dimensions must be positive, got T={frames} K={classes} M={views}"
            )));
        }
        if values.len() != frames * classes * views {
            return Err(Error::Shape(format!(
                "expected {} values for T={frames} K={classes} M={views}, got {}",
                frames * classes * views,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !is_probability(*v)) {
            let (t, c, m) = (
                pos / (classes * views),
                (pos / views) % classes,
                pos % views,
            );
            return Err(Error::Range(format!(
                "value {} at (t={t}, c={c}, m={m}) is not a probability in [0, 1]",
                values[pos]
            )));
        }
        Ok(Self {
            frames,
            classes,
            views,
            values,
        })
    }

    pub fn zeros(frames: usize, classes: usize, views: usize) -> Result<Self> {
        Self::new(frames, classes, views, vec![0.0; frames * classes * views])
    }

    /// Builds a tensor from a function of `(t, c, m)`.
    pub fn from_fn(
        frames: usize,
        classes: usize,
        views: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(frames * classes * views);
        for t in 0..frames {
            for c in 0..classes {
                for m in 0..views {
                    values.push(f(t, c, m));
                }
            }
        }
        Self::new(frames, classes, views, values)
    }

    pub fn num_frames(&self) -> usize {
        self.frames
    }

    pub fn num_classes(&self) -> usize {
        self.classes
    }

    pub fn num_views(&self) -> usize {
        self.views
    }

    #[inline]
    pub fn get(&self, t: usize, c: usize, m: usize) -> f64 {
        self.values[(t * self.classes + c) * self.views + m]
    }

    /// The `M` per-view scores of class `c` at frame `t`.
    #[inline]
    pub fn views_at(&self, t: usize, c: usize) -> &[f64] {
        let base = (t * self.classes + c) * self.views;
        &self.values[base..base + self.views]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Series of class `c` as seen by view `m`.
    pub fn view_series(&self, c: usize, m: usize) -> Vec<f64> {
        (0..self.frames).map(|t| self.get(t, c, m)).collect()
    }

    /// Returns a tensor with the view axis reordered so that new view `i`
    /// is old view `order[i]`.
    pub fn permute_views(&self, order: &[usize]) -> Result<Self> {
        check_permutation(order, self.views)?;
        Self::from_fn(self.frames, self.classes, self.views, |t, c, m| {
            self.get(t, c, order[m])
        })
    }
}

pub(crate) fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::Shape(format!("permutation of length {} for {n} views", order.len())));
    }
    for &i in order {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(Error::Invalid(format!("{order:?} is not a permutation of 0..{n}")));
        }
    }
    Ok(())
}

#[inline]
pub(crate) fn is_probability(v: f64) -> bool {
    (0.0..=1.0).contains(&v)
}

/// Per-class convex combination of the view scores, indexed `(t, c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedSignal {
    frames: usize,
    classes: usize,
    /// Class-major so each class series is contiguous.
    values: Vec<f64>,
}

impl AggregatedSignal {
    /// Builds a signal from per-class series of equal length.
    pub fn from_class_series(series: Vec<Vec<f64>>) -> Result<Self> {
        let classes = series.len();
        let frames = series.first().map_or(0, Vec::len);
        if classes == 0 || frames == 0 {
            return Err(Error::Shape("aggregated signal must be non-empty".into()));
        }
        if series.iter().any(|s| s.len() != frames) {
            return Err(Error::Shape("class series have different lengths".into()));
        }
        let values: Vec<f64> = series.into_iter().flatten().collect();
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Range("aggregated scores must be finite and non-negative".into()));
        }
        Ok(Self {
            frames,
            classes,
            values,
        })
    }

    pub fn num_frames(&self) -> usize {
        self.frames
    }

    pub fn num_classes(&self) -> usize {
        self.classes
    }

    #[inline]
    pub fn get(&self, t: usize, c: usize) -> f64 {
        self.values[c * self.frames + t]
    }

    pub fn class_series(&self, c: usize) -> &[f64] {
        &self.values[c * self.frames..(c + 1) * self.frames]
    }
}

/// A run of frames `[start_frame, end_frame]` (inclusive) for one class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub class_id: usize,
    pub start_frame: usize,
    pub end_frame: usize,
    pub mean_score: f64,
}

impl Candidate {
    pub fn frame_count(&self) -> usize {
        self.end_frame - self.start_frame + 1
    }
}

/// Intersection and union lengths of two intervals, in seconds.
pub fn interval_overlap_seconds(a: (f64, f64), b: (f64, f64)) -> Result<(f64, f64)> {
    for &(s, e) in &[a, b] {
        if !(s.is_finite() && e.is_finite()) || s >= e {
            return Err(Error::InvalidInterval { start: s, end: e });
        }
    }
    Ok(overlap_unchecked(a, b))
}

#[inline]
pub(crate) fn overlap_unchecked(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let intersection = (a.1.min(b.1) - a.0.max(b.0)).max(0.0);
    let union = a.1.max(b.1) - a.0.min(b.0);
    (intersection, union)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn frames_to_seconds_examples() {
        let tb = TimeBase::default();
        assert_eq!(frames_to_seconds(0, tb), 0.0);
        assert_eq!(frames_to_seconds(30, tb), 1.0);
        assert_eq!(frames_to_seconds(45, tb), 1.5);
    }

    #[test]
    fn overlap_examples() {
        assert_eq!(interval_overlap_seconds((10.0, 20.0), (10.0, 20.0)).unwrap(), (10.0, 10.0));
        assert_eq!(interval_overlap_seconds((10.0, 20.0), (30.0, 40.0)).unwrap(), (0.0, 30.0));
        assert_eq!(interval_overlap_seconds((10.0, 20.0), (15.0, 25.0)).unwrap(), (5.0, 15.0));
    }

    #[test]
    fn degenerate_interval_is_rejected() {
        assert!(matches!(
            interval_overlap_seconds((5.0, 5.0), (0.0, 1.0)),
            Err(Error::InvalidInterval { .. })
        ));
        assert!(interval_overlap_seconds((0.0, 1.0), (3.0, 2.0)).is_err());
    }

    #[test]
    fn segment_rejects_inverted_and_negative() {
        assert!(ActionSegment::new(0, 15.0, 10.0).is_err());
        assert!(ActionSegment::new(0, -1.0, 10.0).is_err());
        assert!(ActionSegment::new(0, f64::NAN, 10.0).is_err());
        assert!(ActionSegment::new(0, 0.0, 10.0).is_ok());
    }

    #[test]
    fn tensor_rejects_out_of_range() {
        assert!(ProbabilityTensor::new(1, 1, 1, vec![1.2]).is_err());
        assert!(ProbabilityTensor::new(1, 1, 1, vec![f64::NAN]).is_err());
        assert!(ProbabilityTensor::new(0, 1, 1, vec![]).is_err());
        assert!(ProbabilityTensor::new(1, 2, 1, vec![0.5]).is_err());
    }

    #[test]
    fn tensor_indexing_is_frame_class_view() {
        let p = ProbabilityTensor::from_fn(2, 3, 2, |t, c, m| (t * 100 + c * 10 + m) as f64 / 1000.0)
            .unwrap();
        assert_eq!(p.get(1, 2, 1), 0.121);
        assert_eq!(p.views_at(1, 2), &[0.120, 0.121]);
        let swapped = p.permute_views(&[1, 0]).unwrap();
        assert_eq!(swapped.get(1, 2, 0), 0.121);
        assert!(p.permute_views(&[0, 0]).is_err());
    }

    #[test]
    fn default_labels_have_sixteen_classes() {
        let labels = LabelSet::driver_actions();
        assert_eq!(labels.len(), 16);
        assert_eq!(labels.name(0), Some("Forward Driving"));
        assert_eq!(labels.name(8), Some("Adjust control panel"));
        assert_eq!(LabelSet::for_classes(3).unwrap().name(2), Some("class2"));
        assert!(LabelSet::new(Vec::<String>::new()).is_err());
    }

    fn interval() -> impl Strategy<Value = (f64, f64)> {
        (-1e3..1e3f64, 1e-3..1e3f64).prop_map(|(s, len)| (s, s + len))
    }

    proptest! {
        #[test]
        fn overlap_is_symmetric_and_bounded(a in interval(), b in interval()) {
            let (i1, u1) = interval_overlap_seconds(a, b).unwrap();
            let (i2, u2) = interval_overlap_seconds(b, a).unwrap();
            prop_assert_eq!((i1, u1), (i2, u2));
            let (la, lb) = (a.1 - a.0, b.1 - b.0);
            prop_assert!(i1 >= 0.0);
            prop_assert!(i1 <= la.min(lb) + 1e-9);
            prop_assert!(u1 >= la.max(lb) - 1e-9);
            prop_assert!(i1 <= u1);
        }

        #[test]
        fn frames_to_seconds_is_strictly_monotone(f in 0usize..10_000_000, fps in 1.0..240.0f64) {
            let tb = TimeBase::new(fps).unwrap();
            prop_assert!(tb.frames_to_seconds(f) < tb.frames_to_seconds(f + 1));
        }
    }
}
