//! Synthetic scenarios and the ablation harness.
//!
//! Real recognizer output and annotated driving videos are replaced by a
//! seeded generator. Nothing here tries to match a real data distribution;
//! it only has to exercise the mechanisms each post-processing step exists
//! for (view-dependent signal, in-action pauses, spurious bursts, noise).

mod ablation;
mod corpus;
mod rng;
mod scenario;
mod scorer;

pub use ablation::{
    ablation_run, AblationReport, AblationRow, TunedVariant, Variant, GAP_GRID, PUBLISHED_SCORES,
    SMALL_SAMPLE_VIDEOS, THRESHOLD_GRID,
};
pub use corpus::{
    generate_corpus, parse_scenario_str, read_scenario, tuning_seed, video_seed, CorpusSpec,
    SyntheticVideo, TUNING_SALT,
};
pub use rng::SimRng;
pub use scenario::{
    emit_probabilities, gen_scenario, view_skewed_discriminability, Distractor, Scenario, Schedule,
    ScheduledAction, DISTRACTOR_LEVEL, MIN_GAP_S,
};
pub use scorer::TensorClipScorer;
