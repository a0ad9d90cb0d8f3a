//! Clustering, smoothing, scoring, and corpus-analysis back end for a modular
//! speaker-diarization pipeline.
//!
//! The crate turns pre-computed segment embeddings into speaker-labeled
//! timelines and measures the result:
//!
//! - [`rttm`]: RTTM parsing/serialization and interval algebra over timelines
//! - [`embeddings`]: segment-embedding CSV ingestion and unit normalization
//! - [`affinity`]: cosine and multi-kernel pairwise similarity matrices
//! - [`pruning`]: k-NN-style graph sparsification (fixed-k, top-p%, pNA)
//! - [`spectral`]: normalized Laplacian, eigengap count estimation, clustering
//! - [`classic`]: agglomerative hierarchical clustering and k-means baselines
//! - [`smoothing`]: frame rasterization and temporal median filtering
//! - [`scoring`]: DER with optimal speaker mapping, corpus and ΔDER reports
//! - [`stats`]: SP/OVP/ADP/ADF3/SNR/STM recording descriptors with 95% CIs
//! - [`fixtures`]: deterministic synthetic corpora for testing
//!
//! Everything is a pure function over immutable inputs; per-recording
//! parallelism belongs to the caller.

// Index loops mirror the matrix algorithms they implement, and `!(a > b)`
// validations deliberately reject NaN.
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod affinity;
pub mod classic;
pub mod eig;
pub mod embeddings;
pub mod error;
pub mod fixtures;
pub mod kmeans;
pub mod matrix;
pub mod pitch;
pub mod pruning;
pub mod rng;
pub mod rttm;
pub mod scoring;
pub mod smoothing;
pub mod spectral;
pub mod stats;
pub mod wav;

mod formant;

pub use formant::{estimate_f3_track, F3Track};

pub use error::{Error, Result};
