//! Compiles a bilingual noun/proper-noun lexicon from unaligned, noisy
//! parallel texts by matching word-position patterns.
//!
//! The pipeline runs in two passes. High-frequency words are matched by
//! dynamic time warping over positional difference vectors, producing a
//! primary lexicon; the warp paths of those pairs are pooled, filtered to
//! reliable anchor points, and used to cut both texts into parallel
//! segments. Low-frequency words are then represented as binary
//! segment-occupancy vectors and paired by mutual information under a
//! t-score confidence gate, producing a secondary lexicon.

pub mod anchors;
pub mod binvec;
pub mod corpus;
pub mod dtw;
pub mod error;
pub mod io;
pub mod lexicon;
pub mod pipeline;
pub mod posvec;
pub mod synth;

pub use error::{Error, Result};
pub use lexicon::{Candidate, LexiconEntry, Stage};
pub use pipeline::{evaluate, run_pipeline, PipelineConfig, RunOutput, RunReport};
