//! File formats, configuration, and report rendering for the ChaosVeil CLI.
//!
//! The algorithmic core lives in `chaosveil-core` and is `no_std`; this
//! crate owns everything that touches the filesystem: lossless image IO
//! (binary PGM and 8-bit PNG), the flat `key=value` configuration format,
//! and the CSV / Markdown analysis reports.

pub mod codec;
pub mod config;
pub mod report;
