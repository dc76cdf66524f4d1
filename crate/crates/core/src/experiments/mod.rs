//! Experiment configs, named presets and the artifact-writing runner.
//!
//! A run writes JSONL / CSV / plot-data files into its output directory and
//! finishes with `manifest.json`, which lists every other file it wrote.
//! All randomness derives from the config's `seed`; trial `i` always draws
//! from stream `i`, so thread scheduling cannot change the outputs.

pub mod config;
pub mod presets;
pub mod runner;

pub use config::{AxiomMode, ExperimentConfig, ExperimentKind, TruthSeat};
pub use presets::{preset, PRESET_NAMES};
pub use runner::{run, Check, RunManifest, RunOutcome, MANIFEST_FILE};
