//! Library side of the `nct` binary: report types, pipeline commands and
//! the numbered verification suites.

pub mod commands;
pub mod report;
pub mod suites;
