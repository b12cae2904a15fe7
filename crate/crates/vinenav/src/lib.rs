//! File formats, artifacts and the command line around `vinenav-core`:
//! TOML run configurations, JSON-lines scan logs, scan-log replay, CSV and
//! JSON run outputs, SVG plots and a background perception worker.

#![forbid(unsafe_code)]

pub mod app;
pub mod config;
pub mod output;
pub mod replay;
pub mod scan_log;
pub mod svg;
pub mod worker;
