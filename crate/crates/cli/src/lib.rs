//! Command-line front end for sparse multinomial goodness-of-fit testing:
//! data ingestion, test execution, Monte Carlo studies, and report
//! serialization.

pub mod commands;
pub mod ingest;
pub mod report;
