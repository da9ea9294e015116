//! Automated data-science toolkit for tabular data.
//!
//! The crate is organised by pipeline stage: ingestion and missing-value
//! normalization, per-column type inference, multi-column structure
//! discovery, missingness analysis, relation graphs and feature generation,
//! model building, and drift detection. [`pipeline`] ties the stages
//! together and writes the JSON/DOT artifacts consumed by the CLI.

pub mod error;
pub mod features;
pub mod ingest;
pub mod na;
pub mod stats;
pub mod table;

pub mod cart;
pub mod drift;
pub mod infer;
pub mod missingness;
pub mod model;
pub mod pipeline;
pub mod relation;
pub mod report;
pub mod synth;
pub mod structure;

pub use error::{Error, Result};
pub use ingest::{load_table, read_table, save_table, write_table, IngestOptions};
pub use na::{normalize_missing, NaOptions, Sentinel, SentinelReport};
pub use table::{Column, Dataset, Table, Value};
