//! Single-file NIfTI-1 (`.nii` / `.nii.gz`) reader and writer.
//!
//! Only the fields that affect geometry and voxel values are interpreted:
//! `sizeof_hdr`, `dim`, `datatype`, `bitpix`, `pixdim`, `vox_offset`,
//! `scl_slope`, `scl_inter`, the q/s-form offsets (for the origin) and
//! `magic`. Endianness is detected from `sizeof_hdr`.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use byteorder::{BigEndian, ByteOrder, LittleEndian};
use flate2::read::MultiGzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use super::{Geometry, VoxelData, VoxelGrid};
use crate::error::{Error, Result};

pub const HEADER_SIZE: usize = 348;
/// Header plus the 4-byte extension flag.
pub const DEFAULT_VOX_OFFSET: usize = 352;

const DT_UINT8: i16 = 2;
const DT_INT16: i16 = 4;
const DT_FLOAT32: i16 = 16;

const NIFTI_UNITS_MM: u8 = 2;

mod offsets {
    pub const SIZEOF_HDR: usize = 0;
    pub const REGULAR: usize = 38;
    pub const DIM: usize = 40;
    pub const DATATYPE: usize = 70;
    pub const BITPIX: usize = 72;
    pub const PIXDIM: usize = 76;
    pub const VOX_OFFSET: usize = 108;
    pub const SCL_SLOPE: usize = 112;
    pub const SCL_INTER: usize = 116;
    pub const XYZT_UNITS: usize = 123;
    pub const QFORM_CODE: usize = 252;
    pub const SFORM_CODE: usize = 254;
    pub const QOFFSET_X: usize = 268;
    pub const SROW_X: usize = 280;
    pub const SROW_Y: usize = 296;
    pub const SROW_Z: usize = 312;
    pub const MAGIC: usize = 344;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Endianness {
    #[default]
    Little,
    Big,
}

/// Options for [`save_volume_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct WriteOptions {
    pub endianness: Endianness,
    pub gzip: bool,
}

/// The subset of the NIfTI-1 header this crate honors.
#[derive(Debug, Clone, PartialEq)]
pub struct NiftiHeader {
    pub endianness: Endianness,
    pub dim: [i16; 8],
    pub datatype: i16,
    pub bitpix: i16,
    pub pixdim: [f32; 8],
    pub vox_offset: f32,
    pub scl_slope: f32,
    pub scl_inter: f32,
    pub qform_code: i16,
    pub sform_code: i16,
    pub qoffset: [f32; 3],
    pub srow_offset: [f32; 3],
    pub magic: [u8; 4],
}

impl NiftiHeader {
    /// Parses the first 348 bytes of `bytes`.
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_SIZE {
            return Err(Error::Io(io::Error::new(
                io::ErrorKind::UnexpectedEof,
                format!("file has {} bytes, header needs {HEADER_SIZE}", bytes.len()),
            )));
        }
        let header = if LittleEndian::read_i32(&bytes[..4]) == HEADER_SIZE as i32 {
            Self::parse_with::<LittleEndian>(bytes, Endianness::Little)
        } else if BigEndian::read_i32(&bytes[..4]) == HEADER_SIZE as i32 {
            Self::parse_with::<BigEndian>(bytes, Endianness::Big)
        } else {
            return Err(Error::Format(format!(
                "sizeof_hdr is {} (expected 348)",
                LittleEndian::read_i32(&bytes[..4])
            )));
        };
        match &header.magic {
            b"n+1\0" => Ok(header),
            b"ni1\0" => Err(Error::Format("two-file (.hdr/.img) NIfTI is not supported".into())),
            other => Err(Error::Format(format!("bad magic {:?}", String::from_utf8_lossy(other)))),
        }
    }

    fn parse_with<B: ByteOrder>(b: &[u8], endianness: Endianness) -> Self {
        let mut dim = [0i16; 8];
        B::read_i16_into(&b[offsets::DIM..offsets::DIM + 16], &mut dim);
        let mut pixdim = [0f32; 8];
        B::read_f32_into(&b[offsets::PIXDIM..offsets::PIXDIM + 32], &mut pixdim);
        let mut qoffset = [0f32; 3];
        B::read_f32_into(&b[offsets::QOFFSET_X..offsets::QOFFSET_X + 12], &mut qoffset);
        let srow_offset = [
            B::read_f32(&b[offsets::SROW_X + 12..]),
            B::read_f32(&b[offsets::SROW_Y + 12..]),
            B::read_f32(&b[offsets::SROW_Z + 12..]),
        ];
        let mut magic = [0u8; 4];
        magic.copy_from_slice(&b[offsets::MAGIC..offsets::MAGIC + 4]);
        NiftiHeader {
            endianness,
            dim,
            datatype: B::read_i16(&b[offsets::DATATYPE..]),
            bitpix: B::read_i16(&b[offsets::BITPIX..]),
            pixdim,
            vox_offset: B::read_f32(&b[offsets::VOX_OFFSET..]),
            scl_slope: B::read_f32(&b[offsets::SCL_SLOPE..]),
            scl_inter: B::read_f32(&b[offsets::SCL_INTER..]),
            qform_code: B::read_i16(&b[offsets::QFORM_CODE..]),
            sform_code: B::read_i16(&b[offsets::SFORM_CODE..]),
            qoffset,
            srow_offset,
            magic,
        }
    }

    /// Builds the header for writing `grid` with a 352-byte data offset.
    pub fn for_grid(grid: &VoxelGrid, endianness: Endianness) -> Self {
        let [nx, ny, nz] = grid.dims();
        let spacing = grid.spacing();
        let (datatype, bitpix) = match grid.data() {
            VoxelData::U8(_) => (DT_UINT8, 8),
            VoxelData::I16(_) => (DT_INT16, 16),
            VoxelData::F32(_) => (DT_FLOAT32, 32),
        };
        let origin = grid.origin().map(|o| o as f32);
        NiftiHeader {
            endianness,
            dim: [3, nx as i16, ny as i16, nz as i16, 1, 1, 1, 1],
            datatype,
            bitpix,
            pixdim: [
                1.0,
                spacing[0] as f32,
                spacing[1] as f32,
                spacing[2] as f32,
                0.0,
                0.0,
                0.0,
                0.0,
            ],
            vox_offset: DEFAULT_VOX_OFFSET as f32,
            scl_slope: 1.0,
            scl_inter: 0.0,
            qform_code: 0,
            sform_code: 1,
            qoffset: origin,
            srow_offset: origin,
            magic: *b"n+1\0",
        }
    }

    /// Serializes into a 348-byte buffer.
    pub fn to_bytes(&self) -> Vec<u8> {
        match self.endianness {
            Endianness::Little => self.write_with::<LittleEndian>(),
            Endianness::Big => self.write_with::<BigEndian>(),
        }
    }

    fn write_with<B: ByteOrder>(&self) -> Vec<u8> {
        let mut b = vec![0u8; HEADER_SIZE];
        B::write_i32(&mut b[offsets::SIZEOF_HDR..], HEADER_SIZE as i32);
        b[offsets::REGULAR] = b'r';
        B::write_i16_into(&self.dim, &mut b[offsets::DIM..offsets::DIM + 16]);
        B::write_i16(&mut b[offsets::DATATYPE..], self.datatype);
        B::write_i16(&mut b[offsets::BITPIX..], self.bitpix);
        B::write_f32_into(&self.pixdim, &mut b[offsets::PIXDIM..offsets::PIXDIM + 32]);
        B::write_f32(&mut b[offsets::VOX_OFFSET..], self.vox_offset);
        B::write_f32(&mut b[offsets::SCL_SLOPE..], self.scl_slope);
        B::write_f32(&mut b[offsets::SCL_INTER..], self.scl_inter);
        b[offsets::XYZT_UNITS] = NIFTI_UNITS_MM;
        B::write_i16(&mut b[offsets::QFORM_CODE..], self.qform_code);
        B::write_i16(&mut b[offsets::SFORM_CODE..], self.sform_code);
        B::write_f32_into(&self.qoffset, &mut b[offsets::QOFFSET_X..offsets::QOFFSET_X + 12]);
        let spacing = [self.pixdim[1], self.pixdim[2], self.pixdim[3]];
        for (axis, row) in [offsets::SROW_X, offsets::SROW_Y, offsets::SROW_Z].into_iter().enumerate()
        {
            B::write_f32(&mut b[row + 4 * axis..], spacing[axis]);
            B::write_f32(&mut b[row + 12..], self.srow_offset[axis]);
        }
        b[offsets::MAGIC..offsets::MAGIC + 4].copy_from_slice(&self.magic);
        b
    }

    /// Voxel dims of a 3D volume; higher dimensions must be singleton.
    pub fn spatial_dims(&self) -> Result<[usize; 3]> {
        let ndim = self.dim[0];
        if !(1..=7).contains(&ndim) {
            return Err(Error::Format(format!("dim[0] = {ndim} out of range 1..=7")));
        }
        let ndim = ndim as usize;
        if let Some(extra) = (4..=ndim).find(|&i| self.dim[i] > 1) {
            return Err(Error::UnsupportedShape(format!(
                "{ndim}D volume with dim[{extra}] = {}; only 3D volumes are supported",
                self.dim[extra]
            )));
        }
        let mut dims = [1usize; 3];
        for (axis, d) in dims.iter_mut().enumerate().take(ndim.min(3)) {
            let n = self.dim[axis + 1];
            if n < 1 {
                return Err(Error::Format(format!("dim[{}] = {n} is not positive", axis + 1)));
            }
            *d = n as usize;
        }
        Ok(dims)
    }

    pub fn spacing(&self) -> Result<[f64; 3]> {
        let ndim = (self.dim[0].max(0) as usize).min(3);
        let mut spacing = [1.0f64; 3];
        for (axis, s) in spacing.iter_mut().enumerate() {
            let p = self.pixdim[axis + 1].abs();
            if axis < ndim || p != 0.0 {
                if !(p.is_finite() && p > 0.0) {
                    return Err(Error::Format(format!(
                        "pixdim[{}] = {} is not a valid spacing",
                        axis + 1,
                        self.pixdim[axis + 1]
                    )));
                }
                *s = p as f64;
            }
        }
        Ok(spacing)
    }

    fn origin(&self) -> [f64; 3] {
        if self.sform_code > 0 {
            self.srow_offset.map(|v| v as f64)
        } else if self.qform_code > 0 {
            self.qoffset.map(|v| v as f64)
        } else {
            [0.0; 3]
        }
    }

    /// Whether `scl_slope`/`scl_inter` change voxel values.
    fn has_scaling(&self) -> bool {
        self.scl_slope != 0.0
            && self.scl_slope.is_finite()
            && self.scl_inter.is_finite()
            && !(self.scl_slope == 1.0 && self.scl_inter == 0.0)
    }
}

/// Decodes an in-memory NIfTI-1 file, gzip-compressed or not.
pub fn decode_nifti(bytes: &[u8]) -> Result<VoxelGrid> {
    if bytes.starts_with(&[0x1f, 0x8b]) {
        let mut raw = Vec::new();
        MultiGzDecoder::new(bytes).read_to_end(&mut raw)?;
        return decode_raw(&raw);
    }
    decode_raw(bytes)
}

fn decode_raw(bytes: &[u8]) -> Result<VoxelGrid> {
    let header = NiftiHeader::parse(bytes)?;
    let dims = header.spatial_dims()?;
    let (expected_bitpix, width) = match header.datatype {
        DT_UINT8 => (8, 1),
        DT_INT16 => (16, 2),
        DT_FLOAT32 => (32, 4),
        other => return Err(Error::UnsupportedType(other)),
    };
    if header.bitpix != expected_bitpix {
        return Err(Error::Format(format!(
            "bitpix {} does not match datatype {}",
            header.bitpix, header.datatype
        )));
    }
    let offset = header.vox_offset;
    if !(offset.is_finite() && offset >= HEADER_SIZE as f32 && offset.fract() == 0.0) {
        return Err(Error::Format(format!("invalid vox_offset {offset}")));
    }
    let offset = offset as usize;
    let geometry = Geometry::new(dims, header.spacing()?)?;
    let n = geometry.len();
    let end = offset + n * width;
    if bytes.len() < end {
        return Err(Error::Io(io::Error::new(
            io::ErrorKind::UnexpectedEof,
            format!("data section truncated: need {end} bytes, file has {}", bytes.len()),
        )));
    }
    let raw = &bytes[offset..end];
    let data = match header.endianness {
        Endianness::Little => read_data::<LittleEndian>(raw, header.datatype, n),
        Endianness::Big => read_data::<BigEndian>(raw, header.datatype, n),
    };
    let data = if header.has_scaling() {
        let (slope, inter) = (header.scl_slope, header.scl_inter);
        VoxelData::F32((0..n).map(|i| data.get_f64(i) as f32 * slope + inter).collect())
    } else {
        data
    };
    VoxelGrid::new(geometry, header.origin(), data)
}

fn read_data<B: ByteOrder>(raw: &[u8], datatype: i16, n: usize) -> VoxelData {
    match datatype {
        DT_UINT8 => VoxelData::U8(raw.to_vec()),
        DT_INT16 => {
            let mut v = vec![0i16; n];
            B::read_i16_into(raw, &mut v);
            VoxelData::I16(v)
        }
        DT_FLOAT32 => {
            let mut v = vec![0f32; n];
            B::read_f32_into(raw, &mut v);
            VoxelData::F32(v)
        }
        _ => unreachable!("datatype validated by caller"),
    }
}

/// Encodes `grid` as an uncompressed single-file NIfTI-1 image.
pub fn encode_nifti(grid: &VoxelGrid, endianness: Endianness) -> Result<Vec<u8>> {
    if grid.dims().iter().any(|&d| d > i16::MAX as usize) {
        return Err(Error::UnsupportedShape(format!(
            "dims {:?} exceed the NIfTI-1 limit of {}",
            grid.dims(),
            i16::MAX
        )));
    }
    let header = NiftiHeader::for_grid(grid, endianness);
    let mut out = header.to_bytes();
    out.resize(DEFAULT_VOX_OFFSET, 0);
    match endianness {
        Endianness::Little => write_data::<LittleEndian>(grid.data(), &mut out),
        Endianness::Big => write_data::<BigEndian>(grid.data(), &mut out),
    }
    Ok(out)
}

fn write_data<B: ByteOrder>(data: &VoxelData, out: &mut Vec<u8>) {
    let start = out.len();
    match data {
        VoxelData::U8(v) => out.extend_from_slice(v),
        VoxelData::I16(v) => {
            out.resize(start + 2 * v.len(), 0);
            B::write_i16_into(v, &mut out[start..]);
        }
        VoxelData::F32(v) => {
            out.resize(start + 4 * v.len(), 0);
            B::write_f32_into(v, &mut out[start..]);
        }
    }
}

/// Reads a `.nii` or `.nii.gz` file. Compression is detected from content.
pub fn load_volume(path: impl AsRef<Path>) -> Result<VoxelGrid> {
    let bytes = fs::read(path)?;
    decode_nifti(&bytes)
}

/// Writes little-endian NIfTI-1; gzip-compressed when the path ends in `.gz`.
pub fn save_volume(grid: &VoxelGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let gzip = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("gz"));
    save_volume_with(grid, path, WriteOptions { endianness: Endianness::Little, gzip })
}

pub fn save_volume_with(grid: &VoxelGrid, path: impl AsRef<Path>, options: WriteOptions) -> Result<()> {
    let bytes = encode_nifti(grid, options.endianness)?;
    let mut file = io::BufWriter::new(fs::File::create(path)?);
    if options.gzip {
        // Fixed header fields (no mtime/filename) keep output byte-identical.
        let mut encoder = GzEncoder::new(file, Compression::fast());
        encoder.write_all(&bytes)?;
        encoder.finish()?.flush()?;
    } else {
        file.write_all(&bytes)?;
        file.flush()?;
    }
    Ok(())
}
