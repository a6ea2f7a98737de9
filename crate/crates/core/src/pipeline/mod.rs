//! Whole-sequence runs: the per-frame loop over a bank of pixel models or a
//! baseline background, metrics against ground truth, side-by-side
//! comparison and checkpoint inspection.

pub mod compare;
pub mod config;
pub mod inspect;
pub mod metrics;
pub mod run;

pub use compare::{compare, compare_frames, Comparison, FrameDelta};
pub use config::{Method, Outputs, Prior, RunConfig, StepOrder};
pub use inspect::{inspect_pixel, PixelInspection};
pub use metrics::{Confusion, FrameMetrics, MetricsReport};
pub use run::{
    run, run_baseline, run_frames, run_mog, BaselinePipeline, BatchMogPipeline, Engine, FrameResult, MogPipeline,
    FINAL_CHECKPOINT,
    RunOutput,
};
