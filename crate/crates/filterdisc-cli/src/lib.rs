//! Problem-file ingestion and report generation for the `filterdisc` binary.

pub mod problem;
pub mod report;
