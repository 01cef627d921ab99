//! Slow, direct reference computations for checking `polygc`.
//!
//! Nothing here shares code with the library: every routine works on plain
//! slices and is written for clarity over speed.

pub mod dd;
pub mod graph;
pub mod regression;
pub mod stats;
pub mod svm;
