use std::fs;
use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{perturb, rasterize, DropPolicy, Perturbation, PhantomLesion, PhantomSpec};
use crate::error::{Error, Result};
use crate::lesion::max_diameter;
use crate::volume::{save_volume, BinaryMask, Geometry};

const MANIFEST_SCHEMA_VERSION: u32 = 1;
const MAX_PLACEMENT_TRIES: usize = 10_000;

/// Shape of a synthetic cohort.
///
/// Positive studies receive one lesion each, and the remaining
/// `n_lesions − n_positive` lesions go to randomly chosen positive studies.
/// Predictions copy the ground truth minus the missed lesions, apply
/// `morph_steps` and `offset_mm`, and gain `n_false_positives` extra
/// spheres spread over all studies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CohortParams {
    pub n_positive: usize,
    pub n_negative: usize,
    pub n_lesions: usize,
    /// Uniform range of analytic lesion diameters.
    pub diameter_range_mm: [f64; 2],
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    /// Lesions dropped from the prediction, chosen at random.
    pub n_missed: usize,
    /// Additionally drops every lesion with measured diameter below this.
    pub miss_below_mm: Option<f64>,
    pub n_false_positives: usize,
    pub fp_diameter_range_mm: [f64; 2],
    pub morph_steps: i32,
    pub offset_mm: [f64; 3],
    pub seed: u64,
}

impl Default for CohortParams {
    fn default() -> Self {
        CohortParams {
            n_positive: 101,
            n_negative: 41,
            n_lesions: 124,
            diameter_range_mm: [1.0, 8.0],
            dims: [64, 64, 64],
            spacing: [0.5, 0.5, 0.5],
            n_missed: 0,
            miss_below_mm: None,
            n_false_positives: 0,
            fp_diameter_range_mm: [1.0, 6.0],
            morph_steps: 0,
            offset_mm: [0.0; 3],
            seed: 0,
        }
    }
}

impl CohortParams {
    pub fn n_cases(&self) -> usize {
        self.n_positive + self.n_negative
    }

    fn validate(&self) -> Result<Geometry> {
        let geometry = Geometry::new(self.dims, self.spacing)?;
        if self.n_positive > 0 && self.n_lesions < self.n_positive {
            return Err(Error::Phantom(format!("{} lesions cannot cover {} positive studies", self.n_lesions, self.n_positive)));
        }
        if self.n_positive == 0 && self.n_lesions > 0 {
            return Err(Error::Phantom("lesions require at least one positive study".into()));
        }
        for (name, [lo, hi]) in [("diameter", self.diameter_range_mm), ("false-positive diameter", self.fp_diameter_range_mm)] {
            if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
                return Err(Error::Phantom(format!("invalid {name} range [{lo}, {hi}]")));
            }
        }
        if self.n_missed > self.n_lesions {
            return Err(Error::Phantom(format!("cannot miss {} of {} lesions", self.n_missed, self.n_lesions)));
        }
        if self.offset_mm.iter().any(|o| !o.is_finite()) {
            return Err(Error::Phantom("offset must be finite".into()));
        }
        Ok(geometry)
    }

    /// Physical gap kept between any two shapes so that perturbed lesions
    /// neither merge nor touch false positives.
    fn gap_mm(&self) -> f64 {
        let s = self.spacing.iter().copied().fold(0.0, f64::max);
        let m = self.morph_steps.max(0) as f64;
        let shift = self.offset_mm.iter().map(|o| o * o).sum::<f64>().sqrt();
        (2.0 * m + 2.0) * s + shift
    }

    /// Margin between a shape and the grid border.
    fn border_mm(&self) -> f64 {
        let s = self.spacing.iter().copied().fold(0.0, f64::max);
        let shift = self.offset_mm.iter().map(|o| o.abs()).fold(0.0, f64::max);
        (self.morph_steps.max(0) as f64 + 1.0) * s + shift
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudyCounts {
    pub tp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub fp: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestLesion {
    #[serde(flatten)]
    pub lesion: PhantomLesion,
    pub analytic_volume_mm3: f64,
    pub analytic_diameter_mm: f64,
    pub voxel_count: usize,
    pub measured_diameter_mm: f64,
    /// Removed from the prediction.
    pub dropped: bool,
    /// The prediction overlaps this lesion.
    pub detected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestStudy {
    pub study_id: String,
    /// Relative to the cohort directory.
    pub gt_path: String,
    pub pred_path: String,
    pub positive: bool,
    pub lesions: Vec<ManifestLesion>,
    pub false_positives: Vec<ManifestLesion>,
    pub expected: StudyCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub params: CohortParams,
    pub n_cases: usize,
    pub n_gt_lesions: usize,
    pub expected: StudyCounts,
    pub studies: Vec<ManifestStudy>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }
}

/// One generated study held in memory.
#[derive(Debug, Clone)]
pub struct PhantomStudy {
    pub study_id: String,
    pub gt: BinaryMask,
    pub pred: BinaryMask,
}

struct Placement {
    lesions: Vec<PhantomLesion>,
    false_positives: Vec<PhantomLesion>,
}

/// Builds a cohort in memory. Deterministic in `params`.
pub fn build_cohort(params: &CohortParams) -> Result<(Manifest, Vec<PhantomStudy>)> {
    let geometry = params.validate()?;
    let n_cases = params.n_cases();
    let mut master = ChaCha8Rng::seed_from_u64(params.seed);

    let mut positive = vec![false; n_cases];
    for i in sample(&mut master, n_cases, params.n_positive) {
        positive[i] = true;
    }
    let positives: Vec<usize> = (0..n_cases).filter(|&i| positive[i]).collect();
    let mut n_lesions = vec![0usize; n_cases];
    for &i in &positives {
        n_lesions[i] = 1;
    }
    for _ in params.n_positive..params.n_lesions {
        n_lesions[positives[master.random_range(0..positives.len())]] += 1;
    }
    let mut n_fp = vec![0usize; n_cases];
    if n_cases > 0 {
        for _ in 0..params.n_false_positives {
            n_fp[master.random_range(0..n_cases)] += 1;
        }
    }

    let placements = (0..n_cases)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(i as u64 + 1);
            place_study(params, &geometry, n_lesions[i], n_fp[i], &mut rng)
                .map_err(|e| Error::Phantom(format!("{}: {e}", study_id(i, n_cases))))
        })
        .collect::<Result<Vec<_>>>()?;

    let voxels: Vec<Vec<Vec<usize>>> = placements.iter().map(|p| p.lesions.iter().map(|l| l.voxels(&geometry)).collect()).collect();
    let measured: Vec<Vec<f64>> = voxels.iter().map(|study| study.iter().map(|v| max_diameter(v, &geometry)).collect()).collect();

    // Global lesion order: by study, then by placement.
    let flat: Vec<(usize, usize)> = (0..n_cases).flat_map(|s| (0..n_lesions[s]).map(move |l| (s, l))).collect();
    let mut dropped: Vec<Vec<bool>> = n_lesions.iter().map(|&n| vec![false; n]).collect();
    if let Some(below) = params.miss_below_mm {
        for &(s, l) in &flat {
            dropped[s][l] = measured[s][l] < below;
        }
    }
    let remaining: Vec<(usize, usize)> = flat.iter().copied().filter(|&(s, l)| !dropped[s][l]).collect();
    if params.n_missed > remaining.len() {
        return Err(Error::Phantom(format!("cannot miss {} more of {} remaining lesions", params.n_missed, remaining.len())));
    }
    for k in sample(&mut master, remaining.len(), params.n_missed) {
        let (s, l) = remaining[k];
        dropped[s][l] = true;
    }

    let mut studies = Vec::with_capacity(n_cases);
    let mut entries = Vec::with_capacity(n_cases);
    for (i, placement) in placements.into_iter().enumerate() {
        let id = study_id(i, n_cases);
        let drop: Vec<usize> = (0..n_lesions[i]).filter(|&l| dropped[i][l]).collect();
        let spec = PhantomSpec::new(geometry, placement.lesions.clone())
            .with_perturbation(Perturbation { morph_steps: params.morph_steps, offset_mm: params.offset_mm, drop: DropPolicy::Indices(drop) })
            .with_seed(params.seed);
        let (gt, _) = rasterize(&spec)?;
        let mut pred = perturb(&gt, &spec)?;
        let (fp_mask, _) = rasterize(&PhantomSpec::new(geometry, placement.false_positives.clone()))?;
        for v in fp_mask.foreground().collect::<Vec<_>>() {
            pred.set_index(v, true);
        }

        let lesions: Vec<ManifestLesion> = placement
            .lesions
            .iter()
            .enumerate()
            .map(|(l, lesion)| {
                let detected = voxels[i][l].iter().any(|&v| pred.get_index(v));
                manifest_lesion(lesion, voxels[i][l].len(), measured[i][l], dropped[i][l], detected)
            })
            .collect();
        let false_positives: Vec<ManifestLesion> = placement
            .false_positives
            .iter()
            .map(|fp| {
                let v = fp.voxels(&geometry);
                manifest_lesion(fp, v.len(), max_diameter(&v, &geometry), false, false)
            })
            .collect();
        let tp = lesions.iter().filter(|l| l.detected).count();
        let expected = StudyCounts { tp, fn_: lesions.len() - tp, fp: false_positives.len() };
        entries.push(ManifestStudy {
            study_id: id.clone(),
            gt_path: format!("gt/{id}.nii.gz"),
            pred_path: format!("pred/{id}.nii.gz"),
            positive: positive[i],
            lesions,
            false_positives,
            expected,
        });
        studies.push(PhantomStudy { study_id: id, gt, pred });
    }

    let expected = entries.iter().fold(StudyCounts::default(), |acc, s| StudyCounts {
        tp: acc.tp + s.expected.tp,
        fn_: acc.fn_ + s.expected.fn_,
        fp: acc.fp + s.expected.fp,
    });
    let manifest = Manifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        params: params.clone(),
        n_cases,
        n_gt_lesions: params.n_lesions,
        expected,
        studies: entries,
    };
    Ok((manifest, studies))
}

/// Writes `gt/<id>.nii.gz`, `pred/<id>.nii.gz` and `manifest.json` under
/// `out_dir`.
pub fn generate_cohort(params: &CohortParams, out_dir: &Path) -> Result<Manifest> {
    let (manifest, studies) = build_cohort(params)?;
    fs::create_dir_all(out_dir.join("gt"))?;
    fs::create_dir_all(out_dir.join("pred"))?;
    for (study, entry) in studies.iter().zip(&manifest.studies) {
        save_volume(&study.gt.to_grid(), out_dir.join(&entry.gt_path))?;
        save_volume(&study.pred.to_grid(), out_dir.join(&entry.pred_path))?;
    }
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    fs::write(out_dir.join("manifest.json"), json)?;
    Ok(manifest)
}

fn study_id(i: usize, n: usize) -> String {
    let width = n.saturating_sub(1).to_string().len().max(3);
    format!("study_{i:0width$}")
}

fn manifest_lesion(lesion: &PhantomLesion, voxel_count: usize, measured: f64, dropped: bool, detected: bool) -> ManifestLesion {
    ManifestLesion {
        lesion: lesion.clone(),
        analytic_volume_mm3: lesion.analytic_volume_mm3(),
        analytic_diameter_mm: lesion.analytic_diameter_mm(),
        voxel_count,
        measured_diameter_mm: measured,
        dropped,
        detected,
    }
}

fn place_study(params: &CohortParams, g: &Geometry, n_lesions: usize, n_fp: usize, rng: &mut ChaCha8Rng) -> Result<Placement> {
    let gap = params.gap_mm();
    let border = params.border_mm();
    let mut placed: Vec<PhantomLesion> = Vec::with_capacity(n_lesions + n_fp);
    for k in 0..n_lesions + n_fp {
        let [lo, hi] = if k < n_lesions { params.diameter_range_mm } else { params.fp_diameter_range_mm };
        let radius = 0.5 * (lo + (hi - lo) * rng.random::<f64>());
        let mut tries = 0;
        let lesion = loop {
            if tries == MAX_PLACEMENT_TRIES {
                return Err(Error::Phantom(format!("could not place {} shapes of up to {hi} mm without contact", n_lesions + n_fp)));
            }
            tries += 1;
            let mut center = [0.0; 3];
            for (axis, c) in center.iter_mut().enumerate() {
                let s = g.spacing[axis];
                let first = ((radius + border) / s).floor() as usize + 1;
                let last = (g.dims[axis] - 1).saturating_sub(first);
                if first > last {
                    return Err(Error::Phantom(format!("grid too small for a {:.2} mm shape", 2.0 * radius)));
                }
                // Voxel-centered shapes are never empty.
                *c = rng.random_range(first..=last) as f64 * s;
            }
            let clear = placed.iter().all(|other| {
                let d2: f64 = (0..3).map(|i| (center[i] - other.center_mm[i]).powi(2)).sum();
                d2.sqrt() >= radius + other.radii_mm[0] + gap
            });
            if clear {
                break PhantomLesion::sphere(center, radius);
            }
        };
        placed.push(lesion);
    }
    let false_positives = placed.split_off(n_lesions);
    Ok(Placement { lesions: placed, false_positives })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> CohortParams {
        CohortParams {
            n_positive: 4,
            n_negative: 2,
            n_lesions: 6,
            dims: [32, 32, 32],
            diameter_range_mm: [1.0, 5.0],
            n_missed: 2,
            n_false_positives: 3,
            fp_diameter_range_mm: [1.0, 2.0],
            seed: 11,
            ..Default::default()
        }
    }

    #[test]
    fn bookkeeping_matches_params() {
        let (m, studies) = build_cohort(&small()).unwrap();
        assert_eq!(m.n_cases, 6);
        assert_eq!(studies.len(), 6);
        assert_eq!(m.studies.iter().filter(|s| s.positive).count(), 4);
        assert_eq!(m.expected, StudyCounts { tp: 4, fn_: 2, fp: 3 });
        assert!(m.studies.iter().filter(|s| !s.positive).all(|s| s.lesions.is_empty()));
        assert_eq!(m.studies[0].study_id, "study_000");
    }

    #[test]
    fn deterministic_under_seed() {
        let (a, sa) = build_cohort(&small()).unwrap();
        let (b, sb) = build_cohort(&small()).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(sa.iter().zip(&sb).all(|(x, y)| x.gt == y.gt && x.pred == y.pred));
        let (c, _) = build_cohort(&CohortParams { seed: 12, ..small() }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn miss_below_drops_small_lesions() {
        let params = CohortParams { n_missed: 0, n_false_positives: 0, miss_below_mm: Some(3.0), ..small() };
        let (m, _) = build_cohort(&params).unwrap();
        for l in m.studies.iter().flat_map(|s| &s.lesions) {
            assert_eq!(l.detected, l.measured_diameter_mm >= 3.0);
        }
    }

    #[test]
    fn rejects_inconsistent_params() {
        assert!(build_cohort(&CohortParams { n_lesions: 3, ..small() }).is_err());
        assert!(build_cohort(&CohortParams { diameter_range_mm: [3.0, 1.0], ..small() }).is_err());
        assert!(build_cohort(&CohortParams { dims: [8, 8, 8], diameter_range_mm: [6.0, 6.0], ..small() }).is_err());
    }
}
