//! Speech-command recognition toolkit.
//!
//! Log-mel feature extraction, Speech Commands dataset conditioning, a
//! fully connected classifier head trained with Adam on frozen-backbone
//! embeddings (or flattened feature patches), and multiclass evaluation.
//!
//! Runnable examples live in `examples/`, one per capability:
//!
//! ```bash
//! cargo run -p speechcmd --release --example resample_tone
//! cargo run -p speechcmd --release --example mel_filterbank
//! cargo run -p speechcmd --release --example featurize_clip
//! cargo run -p speechcmd --release --example prepare_dataset
//! cargo run -p speechcmd --release --example embeddings_io
//! cargo run -p speechcmd --release --example train_head
//! cargo run -p speechcmd --release --example evaluate_metrics
//! cargo run -p speechcmd --release --example end_to_end
//! ```
//!
//! The `speechcmd` binary exposes the same pipeline as subcommands
//! (`prepare`, `featurize`, `train`, `eval`, `predict`, `report`).

pub mod audio;
pub mod cli;
pub mod dataset;
pub mod dsp;
pub mod error;
pub mod head;
pub mod labels;
pub mod metrics;
pub mod rng;
pub mod storage;
pub mod synth;

pub use error::{Error, Result};
pub use labels::LabelSet;
