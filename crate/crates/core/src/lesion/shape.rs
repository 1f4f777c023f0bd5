use crate::volume::Geometry;

/// Occupancy bitmap over the bounding box of a voxel set, padded by one
/// voxel on every side so face-neighbor lookups never leave the box.
#[derive(Debug, Clone)]
pub struct LocalBitmap {
    min: [i64; 3],
    size: [i64; 3],
    bits: Vec<bool>,
}

impl LocalBitmap {
    pub fn new(voxels: &[usize], geometry: &Geometry) -> Self {
        let mut lo = [i64::MAX; 3];
        let mut hi = [i64::MIN; 3];
        for &v in voxels {
            let c = geometry.coords(v);
            for a in 0..3 {
                lo[a] = lo[a].min(c[a] as i64);
                hi[a] = hi[a].max(c[a] as i64);
            }
        }
        if voxels.is_empty() {
            return LocalBitmap { min: [0; 3], size: [0; 3], bits: Vec::new() };
        }
        let min = lo.map(|l| l - 1);
        let size = [hi[0] - lo[0] + 3, hi[1] - lo[1] + 3, hi[2] - lo[2] + 3];
        let mut bitmap = LocalBitmap { min, size, bits: vec![false; (size[0] * size[1] * size[2]) as usize] };
        for &v in voxels {
            let c = geometry.coords(v);
            let i = bitmap.local_index([c[0] as i64, c[1] as i64, c[2] as i64]).unwrap();
            bitmap.bits[i] = true;
        }
        bitmap
    }

    #[inline]
    fn local_index(&self, p: [i64; 3]) -> Option<usize> {
        let l = [p[0] - self.min[0], p[1] - self.min[1], p[2] - self.min[2]];
        if (0..3).any(|a| l[a] < 0 || l[a] >= self.size[a]) {
            return None;
        }
        Some((l[0] + self.size[0] * (l[1] + self.size[1] * l[2])) as usize)
    }

    /// Membership of a global voxel coordinate (may lie outside the grid).
    #[inline]
    pub fn contains(&self, p: [i64; 3]) -> bool {
        self.local_index(p).is_some_and(|i| self.bits[i])
    }
}

const FACE_OFFSETS: [[i64; 3]; 6] =
    [[-1, 0, 0], [1, 0, 0], [0, -1, 0], [0, 1, 0], [0, 0, -1], [0, 0, 1]];

/// Boundary voxels of a set: members with at least one face neighbor outside
/// the set. Neighbors beyond the grid edge count as outside.
pub fn extract_surface(voxels: &[usize], geometry: &Geometry) -> Vec<usize> {
    let bitmap = LocalBitmap::new(voxels, geometry);
    voxels
        .iter()
        .copied()
        .filter(|&v| {
            let c = geometry.coords(v);
            let p = [c[0] as i64, c[1] as i64, c[2] as i64];
            FACE_OFFSETS
                .iter()
                .any(|d| !bitmap.contains([p[0] + d[0], p[1] + d[1], p[2] + d[2]]))
        })
        .collect()
}

/// Volume in mm³ of `n_voxels` voxels.
pub fn lesion_volume(n_voxels: usize, spacing: [f64; 3]) -> f64 {
    n_voxels as f64 * spacing[0] * spacing[1] * spacing[2]
}

/// Largest center-to-center distance in mm among `voxels`.
///
/// Pass surface voxels: the farthest pair of a finite set lies on its hull,
/// and hull points of a voxel set are always boundary voxels.
pub fn max_diameter(voxels: &[usize], geometry: &Geometry) -> f64 {
    let s = geometry.spacing;
    let points: Vec<[i64; 3]> = voxels.iter().map(|&v| geometry.coords(v).map(|c| c as i64)).collect();
    let mut best = 0.0f64;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            // Integer offsets first so the result does not depend on where
            // the pair sits in the grid.
            let x = (p[0] - q[0]) as f64 * s[0];
            let y = (p[1] - q[1]) as f64 * s[1];
            let z = (p[2] - q[2]) as f64 * s[2];
            let d = x * x + y * y + z * z;
            if d > best {
                best = d;
            }
        }
    }
    best.sqrt()
}
