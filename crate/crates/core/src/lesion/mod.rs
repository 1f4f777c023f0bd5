//! Lesion extraction and per-lesion size descriptors.
//!
//! A lesion is one connected component of a binary mask. Voxels are kept as
//! ascending linear indices into the source grid.

mod components;
mod shape;

pub use components::{connected_components, label_components, Labeling};
pub use shape::{extract_surface, lesion_volume, max_diameter, LocalBitmap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::Geometry;

/// Voxel adjacency used when forming components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Connectivity {
    /// Face neighbors.
    Six,
    /// Face and edge neighbors.
    Eighteen,
    /// Face, edge and corner neighbors.
    #[default]
    TwentySix,
}

impl Connectivity {
    pub fn neighbor_count(self) -> u8 {
        match self {
            Connectivity::Six => 6,
            Connectivity::Eighteen => 18,
            Connectivity::TwentySix => 26,
        }
    }

    /// Whether the offset `(dx, dy, dz)` (each in -1..=1, not all zero)
    /// connects two voxels.
    #[inline]
    pub fn connects(self, d: [i64; 3]) -> bool {
        let manhattan = d[0].abs() + d[1].abs() + d[2].abs();
        match self {
            Connectivity::Six => manhattan == 1,
            Connectivity::Eighteen => (1..=2).contains(&manhattan),
            Connectivity::TwentySix => manhattan >= 1,
        }
    }

    /// All neighbor offsets under this connectivity.
    pub fn offsets(self) -> Vec<[i64; 3]> {
        let mut out = Vec::with_capacity(self.neighbor_count() as usize);
        for dz in -1..=1 {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    if self.connects([dx, dy, dz]) {
                        out.push([dx, dy, dz]);
                    }
                }
            }
        }
        out
    }
}

impl TryFrom<u8> for Connectivity {
    type Error = Error;

    fn try_from(value: u8) -> Result<Self> {
        match value {
            6 => Ok(Connectivity::Six),
            18 => Ok(Connectivity::Eighteen),
            26 => Ok(Connectivity::TwentySix),
            other => Err(Error::InvalidArgument(format!(
                "connectivity must be 6, 18 or 26, got {other}"
            ))),
        }
    }
}

impl From<Connectivity> for u8 {
    fn from(c: Connectivity) -> u8 {
        c.neighbor_count()
    }
}

impl std::str::FromStr for Connectivity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let n: u8 = s
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("connectivity must be 6, 18 or 26, got {s:?}")))?;
        Connectivity::try_from(n)
    }
}

/// One connected component with its size descriptors.
#[derive(Debug, Clone, PartialEq)]
pub struct Lesion {
    /// 1-based label in scan order.
    pub id: u32,
    /// Ascending linear voxel indices.
    pub voxels: Vec<usize>,
    /// Voxels with at least one face neighbor outside the lesion.
    pub surface: Vec<usize>,
    pub volume_mm3: f64,
    pub max_diameter_mm: f64,
}

impl Lesion {
    /// Computes the descriptors of a voxel set. `voxels` must be sorted.
    pub fn from_voxels(id: u32, voxels: Vec<usize>, geometry: &Geometry) -> Self {
        debug_assert!(voxels.windows(2).all(|w| w[0] < w[1]));
        let surface = extract_surface(&voxels, geometry);
        let max_diameter_mm = max_diameter(&surface, geometry);
        let volume_mm3 = lesion_volume(voxels.len(), geometry.spacing);
        Lesion { id, voxels, surface, volume_mm3, max_diameter_mm }
    }

    pub fn len(&self) -> usize {
        self.voxels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voxels.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.voxels.binary_search(&index).is_ok()
    }
}

/// All lesions of one mask together with the mask geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct LesionSet {
    pub geometry: Geometry,
    pub lesions: Vec<Lesion>,
}

impl LesionSet {
    pub fn empty(geometry: Geometry) -> Self {
        LesionSet { geometry, lesions: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.lesions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lesions.is_empty()
    }

    pub fn get(&self, id: u32) -> Option<&Lesion> {
        // ids are dense and 1-based
        self.lesions.get((id as usize).checked_sub(1)?).filter(|l| l.id == id)
    }

    pub fn total_volume_mm3(&self) -> f64 {
        self.lesions.iter().map(|l| l.volume_mm3).sum()
    }

    /// Dense label volume: 0 for background, lesion id otherwise.
    pub fn label_volume(&self) -> Vec<u32> {
        let mut labels = vec![0u32; self.geometry.len()];
        for lesion in &self.lesions {
            for &v in &lesion.voxels {
                labels[v] = lesion.id;
            }
        }
        labels
    }
}
