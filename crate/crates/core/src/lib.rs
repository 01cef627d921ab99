//! Linear and polynomial-kernel Granger causality for multivariate time series.
//!
//! The crate covers the whole analysis chain: time series ingestion
//! ([`tsio`]), feature maps ([`featmap`]), causality matrices ([`gc`]),
//! synthetic benchmarks ([`simgen`]), functional connectivity and group
//! statistics ([`connectome`], [`stats`]), subject classification
//! ([`mlpipe`]), graph metrics ([`netmetrics`]) and the end-to-end driver
//! ([`pipeline`]).

pub mod connectome;
pub mod error;
pub mod featmap;
pub mod gc;
pub mod io;
pub mod mlpipe;
pub mod netmetrics;
pub mod pipeline;
pub mod regression;
pub mod simgen;
pub mod stats;
pub mod tsio;

pub use error::{Error, Result};
pub use nalgebra;
pub use featmap::{FeatureKind, FeatureMapSpec};
pub use gc::{gc_matrix, gci_pair, GcMatrix};
pub use tsio::TimeSeriesMatrix;
