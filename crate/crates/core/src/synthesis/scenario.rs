//! Synthetic ground truth and recognizer output.
//!
//! Each video contains every class exactly once, in random order, separated
//! by at least one second. Optionally an action is interrupted by a pause:
//! the annotation keeps the full span but the emitted signal drops back to
//! background noise for the pause. Distractor bursts briefly raise a wrong
//! class in a single view.
//!
//! The emission model is an invented stand-in for a real recognizer: per
//! frame and view, the true class scores `clamp(N(d[c,m], σ), 0, 1)`, the
//! remaining mass is spread over the other classes with exponential weights,
//! and the vector is normalized onto the probability simplex. In views that
//! are not the class's best view, a `confusion` share of the remaining mass
//! goes to a fixed partner class instead, so a poorly placed camera does not
//! just see less, it sees the wrong action.

use crate::error::{Error, Result};
use crate::model::{ActionSegment, LabelSet, ProbabilityTensor, SegmentSet, TimeBase};
use crate::synthesis::rng::SimRng;

/// Score level of a distractor burst before noise and normalization.
pub const DISTRACTOR_LEVEL: f64 = 0.75;
/// Minimum spacing between consecutive actions, in seconds.
pub const MIN_GAP_S: f64 = 1.0;
/// Action kept on each side of a pause, in seconds.
const PAUSE_MARGIN_S: f64 = 1.0;
const MAX_ATTEMPTS: usize = 100;

/// Parameters of one synthetic video.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub seed: u64,
    pub video_len_s: f64,
    pub labels: LabelSet,
    pub time_base: TimeBase,
    pub num_views: usize,
    /// `K x M`, row-major: mean true-class score per (class, view).
    pub discriminability: Vec<f64>,
    pub noise_sigma: f64,
    pub pause_prob: f64,
    pub pause_len_s: (f64, f64),
    pub duration_s: (f64, f64),
    pub distractor_prob: f64,
    /// Share of the non-true mass given to the partner class in weak views.
    pub confusion: f64,
}

impl Scenario {
    /// Eight-minute, 30 fps, 16-class, 3-view video with a view-skewed
    /// discriminability matrix.
    pub fn standard(seed: u64) -> Self {
        let labels = LabelSet::driver_actions();
        let discriminability = view_skewed_discriminability(labels.len(), 3);
        Self {
            seed,
            video_len_s: 480.0,
            labels,
            time_base: TimeBase::default(),
            num_views: 3,
            discriminability,
            noise_sigma: 0.08,
            pause_prob: 0.3,
            pause_len_s: (0.6, 2.0),
            duration_s: (5.0, 30.0),
            distractor_prob: 0.2,
            confusion: 0.7,
        }
    }

    /// Clean signal: every view reports the true class with score 1, no
    /// noise, pauses or distractors.
    pub fn noiseless(seed: u64) -> Self {
        let base = Self::standard(seed);
        Self {
            discriminability: vec![1.0; base.labels.len() * base.num_views],
            noise_sigma: 0.0,
            pause_prob: 0.0,
            distractor_prob: 0.0,
            confusion: 0.0,
            ..base
        }
    }

    pub fn num_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn num_frames(&self) -> usize {
        self.time_base.seconds_to_frames(self.video_len_s).max(1)
    }

    pub fn discriminability(&self, c: usize, m: usize) -> f64 {
        self.discriminability[c * self.num_views + m]
    }

    /// The class that `c` is mistaken for in its weak views:
    /// `(c + ceil(K/2)) mod K`.
    pub fn partner(&self, c: usize) -> Option<usize> {
        let k = self.num_classes();
        (k > 1).then(|| (c + k.div_ceil(2)) % k)
    }

    /// True when view `m` sees class `c` worse than its best view does.
    pub fn is_weak_view(&self, c: usize, m: usize) -> bool {
        let row = &self.discriminability[c * self.num_views..(c + 1) * self.num_views];
        row[m] < row.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Invalid(format!("scenario: {what}")));
        if self.num_views == 0 {
            return bad("num_views must be positive");
        }
        if self.discriminability.len() != self.num_classes() * self.num_views {
            return bad("discriminability must be K x M");
        }
        if self.discriminability.iter().any(|d| !(0.0..=1.0).contains(d)) {
            return bad("discriminability entries must lie in [0, 1]");
        }
        for (name, p) in [
            ("pause_prob", self.pause_prob),
            ("distractor_prob", self.distractor_prob),
            ("confusion", self.confusion),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(&format!("{name} must lie in [0, 1]"));
            }
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return bad("noise_sigma must be non-negative");
        }
        if !(self.video_len_s.is_finite() && self.video_len_s > 0.0) {
            return bad("video_len_s must be positive");
        }
        for (name, (lo, hi)) in [("pause_len_s", self.pause_len_s), ("duration_s", self.duration_s)] {
            if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo <= hi) {
                return bad(&format!("{name} must be an ordered positive range"));
            }
        }
        Ok(())
    }
}

/// For class `c` the view `c mod M` is informative. Every fourth class is
/// hard to see even from its best view.
pub fn view_skewed_discriminability(classes: usize, views: usize) -> Vec<f64> {
    let mut d = Vec::with_capacity(classes * views);
    for c in 0..classes {
        let (best, rest) = if c % 4 == 0 { (0.55, 0.12) } else { (0.85, 0.3) };
        for m in 0..views {
            d.push(if m == c % views { best } else { rest });
        }
    }
    d
}

/// One scheduled action with any pauses inside it.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduledAction {
    pub class_id: usize,
    pub start_s: f64,
    pub end_s: f64,
    pub pauses: Vec<(f64, f64)>,
}

/// A spurious wrong-class burst in one view.
#[derive(Debug, Clone, PartialEq)]
pub struct Distractor {
    pub view: usize,
    pub class_id: usize,
    pub start_s: f64,
    pub end_s: f64,
}

/// What generated the video, including what the annotation does not show.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub actions: Vec<ScheduledAction>,
    pub distractors: Vec<Distractor>,
}

/// Draws the once-per-class schedule for `params`.
pub fn gen_scenario(params: &Scenario, video_id: &str) -> Result<(SegmentSet, Schedule)> {
    params.validate()?;
    let k = params.num_classes();
    let mut rng = SimRng::new(params.seed);

    let mut order: Vec<usize> = (0..k).collect();
    rng.shuffle(&mut order);

    let (dmin, dmax) = params.duration_s;
    let required_gaps = MIN_GAP_S * k.saturating_sub(1) as f64;
    let mut durations = None;
    for _ in 0..MAX_ATTEMPTS {
        let d: Vec<f64> = (0..k).map(|_| rng.range(dmin, dmax)).collect();
        if d.iter().sum::<f64>() + required_gaps <= params.video_len_s {
            durations = Some(d);
            break;
        }
    }
    let durations = durations.ok_or_else(|| {
        Error::Generation(format!(
            "{k} actions of {dmin}-{dmax} s with {MIN_GAP_S} s gaps do not fit in {} s \
             after {MAX_ATTEMPTS} attempts",
            params.video_len_s
        ))
    })?;

    // spread the slack over the k + 1 gaps with Dirichlet(1) proportions
    let slack = params.video_len_s - durations.iter().sum::<f64>() - required_gaps;
    let weights: Vec<f64> = (0..=k).map(|_| rng.exponential()).collect();
    let total_w: f64 = weights.iter().sum();

    let mut actions = Vec::with_capacity(k);
    let mut cursor = 0.0;
    for (i, (&class_id, &dur)) in order.iter().zip(&durations).enumerate() {
        cursor += slack * weights[i] / total_w;
        if i > 0 {
            cursor += MIN_GAP_S;
        }
        let start = cursor;
        let end = (start + dur).min(params.video_len_s);
        cursor = end;

        let mut pauses = Vec::new();
        let pause = rng.bernoulli(params.pause_prob);
        let len = rng.range(params.pause_len_s.0, params.pause_len_s.1);
        let pos = rng.uniform();
        if pause && end - start >= len + 2.0 * PAUSE_MARGIN_S {
            let p0 = start + PAUSE_MARGIN_S + pos * (end - start - len - 2.0 * PAUSE_MARGIN_S);
            pauses.push((p0, p0 + len));
        }
        actions.push(ScheduledAction {
            class_id,
            start_s: start,
            end_s: end,
            pauses,
        });
    }

    let mut distractors = Vec::new();
    if k > 1 {
        for a in &actions {
            for view in 0..params.num_views {
                let hit = rng.bernoulli(params.distractor_prob);
                let class_id = (a.class_id + 1 + rng.below(k - 1)) % k;
                let len = rng.range(1.0, 3.0);
                let pos = rng.uniform();
                if hit {
                    let start = a.start_s + pos * (a.end_s - a.start_s - len).max(0.0);
                    distractors.push(Distractor {
                        view,
                        class_id,
                        start_s: start,
                        end_s: (start + len).min(params.video_len_s),
                    });
                }
            }
        }
    }

    let segments = actions
        .iter()
        .map(|a| ActionSegment::new(a.class_id, a.start_s, a.end_s))
        .collect::<Result<Vec<_>>>()?;
    Ok((SegmentSet::new(video_id, segments), Schedule { actions, distractors }))
}

/// Frame-level, per-view class probabilities for a generated schedule.
pub fn emit_probabilities(schedule: &Schedule, params: &Scenario) -> Result<ProbabilityTensor> {
    params.validate()?;
    let (k, views, frames) = (params.num_classes(), params.num_views, params.num_frames());
    let tb = params.time_base;
    let in_span = |t: usize, s: f64, e: f64| {
        let x = tb.frames_to_seconds(t);
        s <= x && x < e
    };

    let mut active: Vec<Option<usize>> = vec![None; frames];
    for a in &schedule.actions {
        for (t, slot) in active.iter_mut().enumerate() {
            if in_span(t, a.start_s, a.end_s) && !a.pauses.iter().any(|&(s, e)| in_span(t, s, e)) {
                *slot = Some(a.class_id);
            }
        }
    }
    let mut burst: Vec<Option<usize>> = vec![None; frames * views];
    for d in &schedule.distractors {
        for t in 0..frames {
            if in_span(t, d.start_s, d.end_s) {
                burst[t * views + d.view] = Some(d.class_id);
            }
        }
    }

    let mut rng = SimRng::emission(params.seed);
    let sigma = params.noise_sigma;
    let mut values = vec![0.0f64; frames * k * views];
    let mut v = vec![0.0f64; k];
    for t in 0..frames {
        for m in 0..views {
            match active[t] {
                Some(c) => {
                    let own = rng.normal(params.discriminability(c, m), sigma).clamp(0.0, 1.0);
                    let rest = 1.0 - own;
                    let partner = params.partner(c).filter(|_| params.is_weak_view(c, m));
                    let confused = if partner.is_some() { params.confusion * rest } else { 0.0 };
                    let mut spread = 0.0;
                    for (j, slot) in v.iter_mut().enumerate() {
                        *slot = if j == c { 0.0 } else { rng.exponential() };
                        spread += *slot;
                    }
                    for slot in v.iter_mut() {
                        *slot = if spread > 0.0 { (rest - confused) * *slot / spread } else { 0.0 };
                    }
                    if let Some(p) = partner {
                        v[p] += confused;
                    }
                    v[c] = own;
                    if k == 1 {
                        v[c] = 1.0;
                    }
                }
                None => {
                    for slot in v.iter_mut() {
                        *slot = (1.0 + rng.normal(0.0, sigma)).max(0.0);
                    }
                }
            }
            if let Some(wrong) = burst[t * views + m].filter(|&w| Some(w) != active[t]) {
                let level = rng.normal(DISTRACTOR_LEVEL, sigma).clamp(0.0, 1.0);
                v[wrong] = v[wrong].max(level);
            }
            let sum: f64 = v.iter().sum();
            for (c, x) in v.iter().enumerate() {
                values[(t * k + c) * views + m] = if sum > 0.0 { (x / sum).min(1.0) } else { 1.0 / k as f64 };
            }
        }
    }
    ProbabilityTensor::new(frames, k, views, values)
}
