//! Desk-scale IMU gait authentication and dictionary attack evaluation.
//!
//! The pipeline runs bottom-up:
//!
//! * [`signal`] holds raw IMU recordings, moving-average smoothing, magnitude
//!   channels and sliding-window segmentation.
//! * [`features`] turns each window into 34 values per channel, ranks
//!   features by mutual information and provides histogram utilities.
//! * [`learners`] implements SMOTE and the five classifier families.
//! * [`authbench`] trains per-user models on session 1 and measures
//!   zero-effort FAR/FRR/HTER on session 2.
//! * [`dictattack`] sweeps every dictionary entry against every model.
//! * [`synth`] generates deterministic synthetic corpora.
//! * [`eda`] and [`render`] produce correlation/overlap analyses and report
//!   grids.

pub mod authbench;
pub mod dictattack;
pub mod eda;
pub mod error;
pub mod features;
pub mod ingest;
pub mod learners;
pub mod render;
pub mod seed;
pub mod signal;
pub mod synth;

pub use error::{Error, Result};
