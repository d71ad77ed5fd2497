//! Configuration, CSV emission and ingestion, run manifests.

pub mod config;
pub mod csv;
pub mod manifest;

pub use config::{parse_config, parse_config_str, RunConfig, REFERENCE_PRESET};
pub use csv::{ingest_shift_csv, ingest_spectrum_csv, Cell, CsvTable};
pub use manifest::{sha256_hex, RunManifest};
