//! Batch front end for `isoasym`: reproducible runs driven by a JSON
//! configuration, plus standalone verification and export of field dumps.

pub mod app;
pub mod config;
pub mod pipeline;
pub mod report;
pub mod verify;
