//! Data model, file formats, numerical engine and synthetic cohort
//! generator for exploring audiovisual digital-biomarker (DBM) output.
//!
//! * [`model`]: cohort types and complete-case selection.
//! * [`io`]: manifest + CSV format, validation reports.
//! * [`engine`]: PCA, correlation, density, timeline binning, head-sketch
//!   summaries. Everything there is a pure function of its inputs.
//! * [`synth`]: seeded "simulated actor" cohorts with planted structure.

pub mod engine;
pub mod io;
pub mod model;
pub mod synth;
