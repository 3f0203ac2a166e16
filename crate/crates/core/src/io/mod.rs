//! Manifests, WAV decoding, the frame-feature CSV cache, results documents
//! and plot data.

pub mod frames;
pub mod manifest;
pub mod plots;
pub mod results;
pub mod wav;

pub use frames::{read_frame_csv, write_frame_csv, FrameTable, FRAME_CSV_HEADER};
pub use manifest::{load_manifest, write_manifest, Manifest, ManifestCohort, ManifestSubject, RecordingEntry};
pub use plots::emit_plot_data;
pub use results::{canonical_json, read_results, write_results, ResultsDocument, SCHEMA_VERSION};
pub use wav::{read_wav, write_wav};
