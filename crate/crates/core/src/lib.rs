//! Lesion-wise evaluation of 3D binary segmentation masks.
//!
//! The crate covers the whole measurement chain for volumetric lesion
//! detection and segmentation:
//!
//! * [`volume`]: NIfTI-1 I/O, voxel grids and binary masks.
//! * [`lesion`]: connected-component extraction, lesion volume, maximal
//!   diameter and surface voxels.
//! * [`matching`]: any-overlap matching of predictions to ground truth,
//!   lesion-wise DICE and normalized surface distance, size-stratified
//!   cohort aggregation and cumulative diameter curves.
//! * [`stats`]: chi-square, Mann-Whitney U, Kruskal-Wallis, Spearman and
//!   percentile bootstrap confidence intervals.
//! * [`phantom`]: analytic sphere/ellipsoid phantoms and synthetic cohorts
//!   with known ground truth.

pub mod error;
pub mod lesion;
pub mod matching;
pub mod phantom;
pub mod stats;
pub mod volume;

pub use error::{Error, Result};
pub use lesion::{connected_components, Connectivity, Lesion, LesionSet};
pub use volume::{binarize, load_volume, save_volume, BinaryMask, Geometry, VoxelData, VoxelGrid};
