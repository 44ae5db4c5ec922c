//! Robust clustering with K-medians.
//!
//! Centers are geometric medians, estimated either by Weiszfeld's fixed-point
//! iteration or by an averaged stochastic gradient. Three K-medians variants
//! (Lloyd with Weiszfeld, Lloyd with ASG, and a single-pass online scheme)
//! share one interface, and the number of clusters is picked by minimizing a
//! penalized L¹ distortion whose constant is calibrated by the slope heuristic.
//! Gap-statistic and silhouette selectors, a K-means baseline, a synthetic
//! data generator with contamination, and evaluation metrics are included.

pub mod cli;
pub mod error;
pub mod evaluation;
pub mod geomedian;
pub mod kmedians;
pub mod points;
pub mod rng;
pub mod selection;
pub mod simulation;

pub use error::{Error, Result};
pub use geomedian::{asg_median, weiszfeld_median, AsgConfig, MedianEstimate};
pub use kmedians::{cluster, Algorithm, ClusterParams, ClusteringResult, Codebook};
pub use points::PointSet;
pub use selection::{select, SelectConfig, SelectionMethod, SelectionReport};
