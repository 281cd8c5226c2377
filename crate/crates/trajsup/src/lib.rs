//! File formats, replay reports and the command line front end for
//! `trajsup-core`.
//!
//! * [`track_io`] reads and writes sampled track CSV files.
//! * [`scenario_io`] reads and writes scenario files and applies
//!   `key=value` overrides.
//! * [`report`] replays scenarios with latency measurement and renders score
//!   CSVs, text reports and SVG timelines.
//! * [`fixtures`] synthesizes the shipped scenario corpus.

pub mod error;
pub mod fixtures;
pub mod report;
pub mod scenario_io;
pub mod track_io;

pub use error::{IoError, IoResult};
pub use report::{run_scenario, LatencyStats, RunOutcome, RunReport};

pub use scenario_io::{load_scenario, parse_scenario, write_scenario, ScenarioFile};
pub use track_io::{load_track, parse_track, write_track};
