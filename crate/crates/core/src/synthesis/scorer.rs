use crate::error::{Error, Result};
use crate::model::ProbabilityTensor;
use crate::windowing::{ClipScorer, WindowSpec};

/// Clip scorer backed by a frame-level tensor: a clip's class vector is the
/// mean of the vectors at its sampled frames.
#[derive(Debug, Clone, Copy)]
pub struct TensorClipScorer<'a> {
    frames: &'a ProbabilityTensor,
}

impl<'a> TensorClipScorer<'a> {
    pub fn new(frames: &'a ProbabilityTensor) -> Self {
        Self { frames }
    }
}

impl ClipScorer for TensorClipScorer<'_> {
    fn score(&self, _video_id: &str, view: usize, start: usize, spec: &WindowSpec) -> Result<Vec<f64>> {
        let p = self.frames;
        if view >= p.num_views() {
            return Err(Error::Range(format!("view {view} out of range")));
        }
        let mut out = vec![0.0; p.num_classes()];
        let mut n = 0usize;
        for t in spec.sampled_frames(start, p.num_frames()) {
            for (c, slot) in out.iter_mut().enumerate() {
                *slot += p.get(t, c, view);
            }
            n += 1;
        }
        for slot in &mut out {
            *slot = (*slot / n as f64).min(1.0);
        }
        Ok(out)
    }
}
