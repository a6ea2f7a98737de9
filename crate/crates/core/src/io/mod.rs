//! Image files, frame sequences, model-bank checkpoints and synthetic scenes.

pub mod bank;
pub mod pnm;
pub mod sequence;
pub mod synthetic;

pub use bank::{load_model_bank, save_model_bank, ModelBank};
pub use pnm::{read_frame, read_mask, write_frame, write_mask};
pub use sequence::{SequenceReader, SequenceWriter};
pub use synthetic::{generate_synthetic, SyntheticSceneSpec, SyntheticSequence};
