//! Post-processing and evaluation for multi-view temporal action
//! localization.
//!
//! The pipeline starts from frame-level class probabilities produced per
//! camera view (a [`ProbabilityTensor`]) and elects one temporal segment per
//! action class:
//!
//! ```
//! use tal_election::{elect, ElectionConfig, ProbabilityTensor};
//!
//! // 20 s of video at 30 fps, 2 classes, 3 views; class 1 is active 5 s..15 s.
//! let p = ProbabilityTensor::from_fn(600, 2, 3, |t, c, _| {
//!     if c == 1 && (150..450).contains(&t) { 0.9 } else { 0.05 }
//! })?;
//! let cfg = ElectionConfig::new(2, 3)?;
//! let out = elect(&p, &cfg, "demo")?;
//! assert_eq!((out.segments[1].start_s, out.segments[1].end_s), (5.0, 15.0));
//! # Ok::<(), tal_election::Error>(())
//! ```
//!
//! See the guide under `book/` for a walk through every stage.

pub mod commands;
pub mod election;
mod error;
pub mod evaluation;
pub mod formats;
pub mod model;
pub mod report;
pub mod synthesis;
pub mod windowing;

pub use election::{elect, run_election, ElectionTrace, Selection};
pub use error::{Error, Result};
pub use evaluation::{evaluate_files, evaluate_sets, match_bruteforce, match_optimal, MatchResult};
pub use formats::{ElectionConfig, Fallback, ViewWeights};
pub use model::{
    ActionSegment, AggregatedSignal, Candidate, LabelSet, ProbabilityTensor, SegmentSet, TimeBase,
};
pub use windowing::{ClipScorer, WindowSpec};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/election.md")]
    mod election {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/windowing.md")]
    mod windowing {}
    #[doc = include_str!("../../../book/src/synthesis.md")]
    mod synthesis {}
    #[doc = include_str!("../../../book/src/formats.md")]
    mod formats {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
