//! Configuration, CSV/JSON serialization, SVG plots and run manifests.

pub mod config;
pub mod csv;
pub mod manifest;
pub mod plot;

pub use config::{parse_config, RawConfig, RunConfig};
pub use manifest::{verify_manifest, RunManifest};
pub use plot::{emit_plots, PlotInputs};
