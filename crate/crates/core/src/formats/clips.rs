use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{SegmentSet, TimeBase};

/// One annotated training clip, frames `[start_frame, end_frame]` inclusive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClipSample {
    pub video_id: String,
    pub class_id: usize,
    pub start_frame: usize,
    pub end_frame: usize,
}

/// Turns each annotated segment into a frame-range clip. Unannotated stretches
/// of the video produce nothing.
///
/// A segment `[s, e)` maps to frames `round(s·fps) ..= round(e·fps) − 1`,
/// rounding half away from zero. A segment shorter than one frame still
/// yields its start frame.
pub fn extract_clips(
    annotations: &SegmentSet,
    tb: TimeBase,
    num_frames: usize,
) -> Result<Vec<ClipSample>> {
    let video_len_s = tb.frames_to_seconds(num_frames);
    annotations
        .segments
        .iter()
        .map(|seg| {
            if seg.start_s < 0.0 || seg.end_s > video_len_s {
                return Err(Error::Range(format!(
                    "segment [{}, {}] of class {} lies outside the {video_len_s} s video",
                    seg.start_s, seg.end_s, seg.class_id
                )));
            }
            let start_frame = (seg.start_s * tb.fps()).round() as usize;
            let end_exclusive = (seg.end_s * tb.fps()).round() as usize;
            if start_frame >= num_frames {
                return Err(Error::Range(format!(
                    "segment starting at {} s maps past the last frame",
                    seg.start_s
                )));
            }
            let end_frame = end_exclusive.saturating_sub(1).clamp(start_frame, num_frames - 1);
            Ok(ClipSample {
                video_id: annotations.video_id.clone(),
                class_id: seg.class_id,
                start_frame,
                end_frame,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ActionSegment;

    fn set(segs: &[(usize, f64, f64)]) -> SegmentSet {
        SegmentSet::new(
            "v",
            segs.iter()
                .map(|&(c, s, e)| ActionSegment::new(c, s, e).unwrap())
                .collect(),
        )
    }

    #[test]
    fn one_second_clip() {
        let clips = extract_clips(&set(&[(3, 1.0, 2.0)]), TimeBase::default(), 300).unwrap();
        assert_eq!(
            clips,
            vec![ClipSample {
                video_id: "v".into(),
                class_id: 3,
                start_frame: 30,
                end_frame: 59
            }]
        );
    }

    #[test]
    fn empty_annotations_give_no_clips() {
        assert!(extract_clips(&set(&[]), TimeBase::default(), 300).unwrap().is_empty());
    }

    #[test]
    fn gaps_produce_no_samples() {
        let clips =
            extract_clips(&set(&[(0, 0.0, 1.0), (1, 5.0, 6.0)]), TimeBase::default(), 300).unwrap();
        assert_eq!(clips.len(), 2);
        let frames: usize = clips.iter().map(|c| c.end_frame - c.start_frame + 1).sum();
        assert_eq!(frames, 60);
    }

    #[test]
    fn segment_past_the_end_is_range_error() {
        let err = extract_clips(&set(&[(0, 5.0, 11.0)]), TimeBase::default(), 300).unwrap_err();
        assert!(matches!(err, Error::Range(_)));
    }

    #[test]
    fn half_frame_rounds_away_from_zero() {
        // 0.25 s * 2 fps = 0.5 -> 1 ; 1.25 s * 2 fps = 2.5 -> 3
        let tb = TimeBase::new(2.0).unwrap();
        let clips = extract_clips(&set(&[(0, 0.25, 1.25)]), tb, 10).unwrap();
        assert_eq!((clips[0].start_frame, clips[0].end_frame), (1, 2));
    }
}
