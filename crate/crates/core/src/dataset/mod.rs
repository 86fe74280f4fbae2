//! Speech Commands ingestion, conditioning and manifest bookkeeping.

mod augment;
mod ingest;
mod loader;
mod manifest;
mod prepare;
mod split;

pub use augment::{augment_mix, segment_background, Mix, MixOutcome, SILENT_CLIP_NOISE_RMS};
pub use ingest::ingest;
pub use loader::ClipLoader;
pub use manifest::{
    parse_source, Augmentation, ClipSource, DatasetManifest, ManifestRecord, Split,
    MANIFEST_VERSION,
};
pub use prepare::{
    augment_training_commands, cap_unknown, prepare, top_up_background, PrepareConfig,
};
pub use split::split;
