//! Voxel grids, binary masks and NIfTI-1 file I/O.
//!
//! Every grid carries its physical geometry (voxels per axis and mm per
//! voxel). Data is stored x-fastest: the linear index of `(x, y, z)` is
//! `x + nx * (y + ny * z)`.

mod nifti;

pub use nifti::{
    decode_nifti, encode_nifti, load_volume, save_volume, save_volume_with, Endianness,
    NiftiHeader, WriteOptions,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when comparing spacings of two grids. Spacing is
/// persisted as float-32, so grids read back from disk differ from their
/// float-64 originals by up to one float-32 ulp.
const SPACING_REL_TOL: f64 = 1e-6;

/// Voxel lattice dimensions and physical spacing in mm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
}

impl Geometry {
    pub fn new(dims: [usize; 3], spacing: [f64; 3]) -> Result<Self> {
        let geometry = Geometry { dims, spacing };
        geometry.validate()?;
        Ok(geometry)
    }

    pub fn isotropic(n: usize, spacing: f64) -> Result<Self> {
        Self::new([n; 3], [spacing; 3])
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.contains(&0) {
            return Err(Error::InvalidGrid(format!("zero dimension in {:?}", self.dims)));
        }
        if self.spacing.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
            return Err(Error::InvalidGrid(format!(
                "spacing must be positive and finite, got {:?}",
                self.spacing
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    #[inline]
    pub fn coords(&self, index: usize) -> [usize; 3] {
        let x = index % self.dims[0];
        let rest = index / self.dims[0];
        [x, rest % self.dims[1], rest / self.dims[1]]
    }

    /// Volume of one voxel in mm³.
    #[inline]
    pub fn voxel_volume(&self) -> f64 {
        self.spacing[0] * self.spacing[1] * self.spacing[2]
    }

    /// Length in mm of the diagonal of the grid's physical bounding box.
    pub fn diagonal_mm(&self) -> f64 {
        (0..3)
            .map(|a| {
                let extent = self.dims[a] as f64 * self.spacing[a];
                extent * extent
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Same dims and the same spacing up to float-32 storage precision.
    pub fn is_compatible(&self, other: &Geometry) -> bool {
        self.dims == other.dims
            && self
                .spacing
                .iter()
                .zip(other.spacing.iter())
                .all(|(a, b)| (a - b).abs() <= SPACING_REL_TOL * a.abs().max(b.abs()))
    }

    pub fn ensure_compatible(&self, other: &Geometry) -> Result<()> {
        if self.is_compatible(other) {
            Ok(())
        } else {
            Err(Error::IncompatibleGrids(format!(
                "dims {:?} spacing {:?} vs dims {:?} spacing {:?}",
                self.dims, self.spacing, other.dims, other.spacing
            )))
        }
    }
}

/// Scalar type of the stored voxel values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarKind {
    U8,
    I16,
    F32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum VoxelData {
    U8(Vec<u8>),
    I16(Vec<i16>),
    F32(Vec<f32>),
}

impl VoxelData {
    pub fn len(&self) -> usize {
        match self {
            VoxelData::U8(v) => v.len(),
            VoxelData::I16(v) => v.len(),
            VoxelData::F32(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> ScalarKind {
        match self {
            VoxelData::U8(_) => ScalarKind::U8,
            VoxelData::I16(_) => ScalarKind::I16,
            VoxelData::F32(_) => ScalarKind::F32,
        }
    }

    #[inline]
    pub fn get_f64(&self, index: usize) -> f64 {
        match self {
            VoxelData::U8(v) => v[index] as f64,
            VoxelData::I16(v) => v[index] as f64,
            VoxelData::F32(v) => v[index] as f64,
        }
    }
}

/// A dense 3D scalar volume with physical geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    geometry: Geometry,
    origin: [f64; 3],
    data: VoxelData,
}

impl VoxelGrid {
    pub fn new(geometry: Geometry, origin: [f64; 3], data: VoxelData) -> Result<Self> {
        geometry.validate()?;
        if data.len() != geometry.len() {
            return Err(Error::InvalidGrid(format!(
                "data length {} does not match dims {:?}",
                data.len(),
                geometry.dims
            )));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite origin {origin:?}")));
        }
        Ok(VoxelGrid { geometry, origin, data })
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn dims(&self) -> [usize; 3] {
        self.geometry.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.geometry.spacing
    }

    pub fn origin(&self) -> [f64; 3] {
        self.origin
    }

    pub fn data(&self) -> &VoxelData {
        &self.data
    }

    pub fn kind(&self) -> ScalarKind {
        self.data.kind()
    }

    pub fn value(&self, x: usize, y: usize, z: usize) -> f64 {
        self.data.get_f64(self.geometry.index(x, y, z))
    }
}

/// A voxel grid restricted to the values 0 and 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMask {
    geometry: Geometry,
    origin: [f64; 3],
    data: Vec<u8>,
}

impl BinaryMask {
    /// Builds a mask from 0/1 values; any other value is rejected.
    pub fn new(geometry: Geometry, data: Vec<u8>) -> Result<Self> {
        geometry.validate()?;
        if data.len() != geometry.len() {
            return Err(Error::InvalidGrid(format!(
                "mask length {} does not match dims {:?}",
                data.len(),
                geometry.dims
            )));
        }
        if let Some(bad) = data.iter().find(|&&v| v > 1) {
            return Err(Error::InvalidGrid(format!("mask value {bad} is not 0 or 1")));
        }
        Ok(BinaryMask { geometry, origin: [0.0; 3], data })
    }

    pub fn empty(geometry: Geometry) -> Self {
        BinaryMask { geometry, origin: [0.0; 3], data: vec![0; geometry.len()] }
    }

    pub fn from_fn(geometry: Geometry, mut f: impl FnMut(usize, usize, usize) -> bool) -> Self {
        let [nx, ny, nz] = geometry.dims;
        let mut data = Vec::with_capacity(geometry.len());
        for z in 0..nz {
            for y in 0..ny {
                for x in 0..nx {
                    data.push(f(x, y, z) as u8);
                }
            }
        }
        BinaryMask { geometry, origin: [0.0; 3], data }
    }

    /// Sets the world origin (mm) carried along when the mask is saved.
    pub fn with_origin(mut self, origin: [f64; 3]) -> Self {
        self.origin = origin;
        self
    }

    pub fn origin(&self) -> [f64; 3] {
        self.origin
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> bool {
        self.data[self.geometry.index(x, y, z)] != 0
    }

    #[inline]
    pub fn get_index(&self, index: usize) -> bool {
        self.data[index] != 0
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, z: usize, value: bool) {
        let i = self.geometry.index(x, y, z);
        self.data[i] = value as u8;
    }

    #[inline]
    pub fn set_index(&mut self, index: usize, value: bool) {
        self.data[index] = value as u8;
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    /// Linear indices of all foreground voxels, ascending.
    pub fn foreground(&self) -> impl Iterator<Item = usize> + '_ {
        self.data.iter().enumerate().filter(|(_, &v)| v != 0).map(|(i, _)| i)
    }

    /// View as an unsigned-8 grid, e.g. for saving.
    pub fn to_grid(&self) -> VoxelGrid {
        VoxelGrid {
            geometry: self.geometry,
            origin: self.origin,
            data: VoxelData::U8(self.data.clone()),
        }
    }
}

/// Maps each voxel to 1 iff its value is strictly greater than `threshold`.
pub fn binarize(grid: &VoxelGrid, threshold: f64) -> Result<BinaryMask> {
    if !threshold.is_finite() {
        return Err(Error::InvalidArgument(format!("threshold must be finite, got {threshold}")));
    }
    let data = match grid.data() {
        VoxelData::U8(v) => v.iter().map(|&x| (x as f64 > threshold) as u8).collect(),
        VoxelData::I16(v) => v.iter().map(|&x| (x as f64 > threshold) as u8).collect(),
        VoxelData::F32(v) => v.iter().map(|&x| (x as f64 > threshold) as u8).collect(),
    };
    Ok(BinaryMask { geometry: grid.geometry, origin: grid.origin, data })
}
