//! Analytic phantoms: rasterized spheres and ellipsoids with known volume
//! and diameter, plus controlled perturbations that turn a ground truth
//! into a prediction.
//!
//! Phantom coordinates are in mm with voxel `(i, j, k)` centered at
//! `(i·sx, j·sy, k·sz)`.

mod cohort;

pub use cohort::{build_cohort, generate_cohort, CohortParams, Manifest, ManifestLesion, ManifestStudy, PhantomStudy, StudyCounts};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lesion::{connected_components, max_diameter, Connectivity};
use crate::volume::{BinaryMask, Geometry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Sphere,
    Ellipsoid,
}

/// An axis-aligned sphere or ellipsoid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomLesion {
    pub shape: Shape,
    pub center_mm: [f64; 3],
    pub radii_mm: [f64; 3],
}

impl PhantomLesion {
    pub fn sphere(center_mm: [f64; 3], radius_mm: f64) -> Self {
        PhantomLesion { shape: Shape::Sphere, center_mm, radii_mm: [radius_mm; 3] }
    }

    pub fn ellipsoid(center_mm: [f64; 3], radii_mm: [f64; 3]) -> Self {
        PhantomLesion { shape: Shape::Ellipsoid, center_mm, radii_mm }
    }

    /// 4/3·π·abc
    pub fn analytic_volume_mm3(&self) -> f64 {
        let [a, b, c] = self.radii_mm;
        4.0 / 3.0 * std::f64::consts::PI * a * b * c
    }

    /// 2·max(a, b, c)
    pub fn analytic_diameter_mm(&self) -> f64 {
        2.0 * self.radii_mm.iter().copied().fold(0.0, f64::max)
    }

    pub fn contains_point(&self, p: [f64; 3]) -> bool {
        let mut q = 0.0;
        for i in 0..3 {
            let d = (p[i] - self.center_mm[i]) / self.radii_mm[i];
            q += d * d;
        }
        q <= 1.0
    }

    fn validate(&self) -> Result<()> {
        if self.radii_mm.iter().any(|r| !(r.is_finite() && *r > 0.0)) || self.center_mm.iter().any(|c| !c.is_finite()) {
            return Err(Error::Phantom(format!("invalid lesion geometry {self:?}")));
        }
        if self.shape == Shape::Sphere && !(self.radii_mm[0] == self.radii_mm[1] && self.radii_mm[1] == self.radii_mm[2]) {
            return Err(Error::Phantom(format!("sphere with unequal radii {:?}", self.radii_mm)));
        }
        Ok(())
    }

    /// Voxel index range per axis that may contain the shape.
    fn voxel_bounds(&self, geometry: &Geometry) -> [(i64, i64); 3] {
        std::array::from_fn(|i| {
            let s = geometry.spacing[i];
            let lo = ((self.center_mm[i] - self.radii_mm[i]) / s).floor() as i64;
            let hi = ((self.center_mm[i] + self.radii_mm[i]) / s).ceil() as i64;
            (lo, hi)
        })
    }

    /// Ascending indices of voxels whose centers lie inside the shape.
    pub fn voxels(&self, geometry: &Geometry) -> Vec<usize> {
        let b = self.voxel_bounds(geometry);
        let mut out = Vec::new();
        for z in b[2].0.max(0)..=b[2].1.min(geometry.dims[2] as i64 - 1) {
            for y in b[1].0.max(0)..=b[1].1.min(geometry.dims[1] as i64 - 1) {
                for x in b[0].0.max(0)..=b[0].1.min(geometry.dims[0] as i64 - 1) {
                    let p = [x as f64 * geometry.spacing[0], y as f64 * geometry.spacing[1], z as f64 * geometry.spacing[2]];
                    if self.contains_point(p) {
                        out.push(geometry.index(x as usize, y as usize, z as usize));
                    }
                }
            }
        }
        out
    }
}

/// Which lesions a perturbation removes from the prediction.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropPolicy {
    #[default]
    None,
    /// Positions in the spec's lesion list.
    Indices(Vec<usize>),
    /// `count` lesions chosen by the spec seed.
    Random { count: usize },
    /// Every lesion whose measured maximal diameter is below `mm`.
    BelowDiameter { mm: f64 },
}

/// Derivation of a prediction from the ground truth: lesion dropping, then
/// `morph_steps` 6-neighborhood dilations (positive) or erosions
/// (negative), then a shift by `offset_mm` rounded to whole voxels.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Perturbation {
    pub morph_steps: i32,
    pub offset_mm: [f64; 3],
    pub drop: DropPolicy,
}

impl Perturbation {
    pub fn is_identity(&self) -> bool {
        self.morph_steps == 0 && self.voxel_offset_is_zero() && self.drop == DropPolicy::None
    }

    fn voxel_offset_is_zero(&self) -> bool {
        self.offset_mm.iter().all(|&o| o == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    pub geometry: Geometry,
    pub lesions: Vec<PhantomLesion>,
    pub perturbation: Perturbation,
    pub seed: u64,
}

impl PhantomSpec {
    pub fn new(geometry: Geometry, lesions: Vec<PhantomLesion>) -> Self {
        PhantomSpec { geometry, lesions, perturbation: Perturbation::default(), seed: 0 }
    }

    pub fn with_perturbation(mut self, perturbation: Perturbation) -> Self {
        self.perturbation = perturbation;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Analytic truth of one phantom lesion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticTruth {
    pub volume_mm3: f64,
    pub diameter_mm: f64,
}

/// Rasterizes the spec's lesions: a voxel is set iff its center lies inside
/// a shape.
///
/// Every shape must keep one empty voxel layer to the grid border, contain
/// at least one voxel center, and neither overlap nor 26-touch any other
/// shape after rasterization.
pub fn rasterize(spec: &PhantomSpec) -> Result<(BinaryMask, Vec<AnalyticTruth>)> {
    let g = spec.geometry;
    g.validate()?;
    let mut labels = vec![0u32; g.len()];
    let mut truths = Vec::with_capacity(spec.lesions.len());
    for (i, lesion) in spec.lesions.iter().enumerate() {
        lesion.validate()?;
        let b = lesion.voxel_bounds(&g);
        for axis in 0..3 {
            let lo = (lesion.center_mm[axis] - lesion.radii_mm[axis]) / g.spacing[axis];
            let hi = (lesion.center_mm[axis] + lesion.radii_mm[axis]) / g.spacing[axis];
            if lo <= 0.0 || hi >= (g.dims[axis] - 1) as f64 || b[axis].0 < 0 {
                return Err(Error::Phantom(format!("lesion {i} does not fit inside the grid with a one-voxel margin")));
            }
        }
        let voxels = lesion.voxels(&g);
        if voxels.is_empty() {
            return Err(Error::Phantom(format!("lesion {i} contains no voxel center")));
        }
        let label = i as u32 + 1;
        for &v in &voxels {
            if labels[v] != 0 {
                return Err(Error::Phantom(format!("lesions {} and {i} overlap", labels[v] - 1)));
            }
            labels[v] = label;
        }
        for &v in &voxels {
            let [x, y, z] = g.coords(v);
            for d in Connectivity::TwentySix.offsets() {
                let n = [x as i64 + d[0], y as i64 + d[1], z as i64 + d[2]];
                // The margin check keeps every neighbor inside the grid.
                let other = labels[g.index(n[0] as usize, n[1] as usize, n[2] as usize)];
                if other != 0 && other != label {
                    return Err(Error::Phantom(format!("lesions {} and {i} touch", other - 1)));
                }
            }
        }
        truths.push(AnalyticTruth { volume_mm3: lesion.analytic_volume_mm3(), diameter_mm: lesion.analytic_diameter_mm() });
    }
    let data = labels.iter().map(|&l| (l != 0) as u8).collect();
    Ok((BinaryMask::new(g, data)?, truths))
}

/// Derives a prediction mask from `gt` using the spec's perturbation.
///
/// Dropping works on connected components of `gt`; a component is
/// attributed to the spec lesion containing its first voxel. Voxels pushed
/// out of the grid by dilation or shifting are discarded.
pub fn perturb(gt: &BinaryMask, spec: &PhantomSpec) -> Result<BinaryMask> {
    let p = &spec.perturbation;
    let g = *gt.geometry();
    let mut data: Vec<u8> = gt.as_slice().to_vec();

    let dropped = dropped_lesions(gt, spec)?;
    if !dropped.is_empty() {
        for lesion in connected_components(gt, Connectivity::TwentySix).lesions {
            let first = g.coords(lesion.voxels[0]);
            let center = std::array::from_fn(|i| first[i] as f64 * g.spacing[i]);
            let owner = spec.lesions.iter().position(|l| l.contains_point(center));
            if owner.is_some_and(|o| dropped.contains(&o)) {
                for &v in &lesion.voxels {
                    data[v] = 0;
                }
            }
        }
    }

    for _ in 0..p.morph_steps.unsigned_abs() {
        data = morph_step(&data, &g, p.morph_steps > 0);
    }

    if !p.voxel_offset_is_zero() {
        let shift: [i64; 3] = std::array::from_fn(|i| (p.offset_mm[i] / g.spacing[i]).round() as i64);
        let mut shifted = vec![0u8; g.len()];
        for (v, _) in data.iter().enumerate().filter(|(_, &b)| b == 1) {
            let c = g.coords(v);
            let n: [i64; 3] = std::array::from_fn(|i| c[i] as i64 + shift[i]);
            if (0..3).all(|i| n[i] >= 0 && n[i] < g.dims[i] as i64) {
                shifted[g.index(n[0] as usize, n[1] as usize, n[2] as usize)] = 1;
            }
        }
        data = shifted;
    }

    Ok(BinaryMask::new(g, data)?.with_origin(gt.origin()))
}

fn dropped_lesions(gt: &BinaryMask, spec: &PhantomSpec) -> Result<Vec<usize>> {
    let n = spec.lesions.len();
    match &spec.perturbation.drop {
        DropPolicy::None => Ok(Vec::new()),
        DropPolicy::Indices(ix) => {
            if let Some(bad) = ix.iter().find(|&&i| i >= n) {
                return Err(Error::Phantom(format!("drop index {bad} out of range for {n} lesions")));
            }
            Ok(ix.clone())
        }
        DropPolicy::Random { count } => {
            if *count > n {
                return Err(Error::Phantom(format!("cannot drop {count} of {n} lesions")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            Ok(sample(&mut rng, n, *count).into_vec())
        }
        DropPolicy::BelowDiameter { mm } => {
            let g = gt.geometry();
            Ok(spec
                .lesions
                .iter()
                .enumerate()
                .filter(|(_, l)| max_diameter(&l.voxels(g), g) < *mm)
                .map(|(i, _)| i)
                .collect())
        }
    }
}

const FACE_NEIGHBORS: [[i64; 3]; 6] = [[-1, 0, 0], [1, 0, 0], [0, -1, 0], [0, 1, 0], [0, 0, -1], [0, 0, 1]];

/// One 6-neighborhood dilation or erosion. Outside the grid counts as
/// background.
fn morph_step(data: &[u8], g: &Geometry, dilate: bool) -> Vec<u8> {
    let mut out = data.to_vec();
    for (v, &b) in data.iter().enumerate() {
        if (b == 1) == dilate {
            continue;
        }
        let c = g.coords(v);
        let mut hit = false;
        let mut all_in = true;
        for d in FACE_NEIGHBORS {
            let n: [i64; 3] = std::array::from_fn(|i| c[i] as i64 + d[i]);
            let inside = (0..3).all(|i| n[i] >= 0 && n[i] < g.dims[i] as i64)
                && data[g.index(n[0] as usize, n[1] as usize, n[2] as usize)] == 1;
            hit |= inside;
            all_in &= inside;
        }
        if dilate && hit {
            out[v] = 1;
        } else if !dilate && !all_in {
            out[v] = 0;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, s: f64) -> Geometry {
        Geometry::isotropic(n, s).unwrap()
    }

    #[test]
    fn tiny_sphere_is_one_voxel() {
        let spec = PhantomSpec::new(grid(10, 0.5), vec![PhantomLesion::sphere([2.5, 2.5, 2.5], 0.2)]);
        let (mask, truth) = rasterize(&spec).unwrap();
        assert_eq!(mask.count_ones(), 1);
        assert!(mask.get(5, 5, 5));
        assert_eq!(truth[0].diameter_mm, 0.4);
    }

    #[test]
    fn sphere_voxel_count_near_analytic() {
        let spec = PhantomSpec::new(grid(20, 0.5), vec![PhantomLesion::sphere([5.0, 5.0, 5.0], 2.5)]);
        let (mask, truth) = rasterize(&spec).unwrap();
        let expected = truth[0].volume_mm3 / 0.125;
        assert!((mask.count_ones() as f64 - expected).abs() / expected < 0.05);
    }

    #[test]
    fn rejects_out_of_bounds_overlap_touch_and_empty() {
        let g = grid(20, 0.5);
        let out = PhantomSpec::new(g, vec![PhantomLesion::sphere([1.0, 5.0, 5.0], 1.0)]);
        assert!(matches!(rasterize(&out), Err(Error::Phantom(_))));
        let overlap = PhantomSpec::new(g, vec![PhantomLesion::sphere([4.0, 5.0, 5.0], 1.5), PhantomLesion::sphere([5.0, 5.0, 5.0], 1.5)]);
        assert!(rasterize(&overlap).is_err());
        // Voxel layers at x = 6 and x = 7 would be adjacent.
        let touch = PhantomSpec::new(g, vec![PhantomLesion::sphere([2.5, 5.0, 5.0], 0.6), PhantomLesion::sphere([4.0, 5.0, 5.0], 0.6)]);
        assert!(rasterize(&touch).is_err());
        let empty = PhantomSpec::new(g, vec![PhantomLesion::sphere([5.25, 5.25, 5.25], 0.1)]);
        assert!(rasterize(&empty).is_err());
        let bad = PhantomSpec::new(g, vec![PhantomLesion::ellipsoid([5.0, 5.0, 5.0], [1.0, 0.0, 1.0])]);
        assert!(rasterize(&bad).is_err());
    }

    #[test]
    fn zero_perturbation_is_identity() {
        let spec = PhantomSpec::new(grid(20, 0.5), vec![PhantomLesion::ellipsoid([5.0, 4.0, 5.0], [2.0, 1.0, 1.5])]);
        let (gt, _) = rasterize(&spec).unwrap();
        assert!(spec.perturbation.is_identity());
        assert_eq!(perturb(&gt, &spec).unwrap(), gt);
    }

    #[test]
    fn drop_removes_selected_lesion() {
        let lesions = vec![PhantomLesion::sphere([2.5, 2.5, 2.5], 1.0), PhantomLesion::sphere([7.0, 7.0, 7.0], 1.5)];
        let spec = PhantomSpec::new(grid(20, 0.5), lesions)
            .with_perturbation(Perturbation { drop: DropPolicy::Indices(vec![1]), ..Default::default() });
        let (gt, _) = rasterize(&spec).unwrap();
        let pred = perturb(&gt, &spec).unwrap();
        assert_eq!(pred.count_ones(), spec.lesions[0].voxels(&spec.geometry).len());

        let by_size = PhantomSpec { perturbation: Perturbation { drop: DropPolicy::BelowDiameter { mm: 2.5 }, ..Default::default() }, ..spec.clone() };
        assert_eq!(perturb(&gt, &by_size).unwrap().count_ones(), spec.lesions[1].voxels(&spec.geometry).len());

        let random = PhantomSpec { perturbation: Perturbation { drop: DropPolicy::Random { count: 1 }, ..Default::default() }, ..spec };
        let a = perturb(&gt, &random).unwrap();
        assert_eq!(a, perturb(&gt, &random).unwrap());
        assert!(a.count_ones() < gt.count_ones());
    }

    #[test]
    fn morphology_and_shift() {
        let g = grid(12, 0.5);
        let mut gt = BinaryMask::empty(g);
        gt.set(5, 5, 5, true);
        let dilate = PhantomSpec::new(g, vec![]).with_perturbation(Perturbation { morph_steps: 1, ..Default::default() });
        assert_eq!(perturb(&gt, &dilate).unwrap().count_ones(), 7);
        let twice = PhantomSpec::new(g, vec![]).with_perturbation(Perturbation { morph_steps: 2, ..Default::default() });
        assert_eq!(perturb(&gt, &twice).unwrap().count_ones(), 25);
        let erode = PhantomSpec::new(g, vec![]).with_perturbation(Perturbation { morph_steps: -1, ..Default::default() });
        assert_eq!(perturb(&perturb(&gt, &dilate).unwrap(), &erode).unwrap(), gt);
        let shift = PhantomSpec::new(g, vec![]).with_perturbation(Perturbation { offset_mm: [0.5, 0.0, -1.0], ..Default::default() });
        let moved = perturb(&gt, &shift).unwrap();
        assert!(moved.get(6, 5, 3) && moved.count_ones() == 1);
        let away = PhantomSpec::new(g, vec![]).with_perturbation(Perturbation { offset_mm: [10.0, 0.0, 0.0], ..Default::default() });
        assert_eq!(perturb(&gt, &away).unwrap().count_ones(), 0);
    }
}
