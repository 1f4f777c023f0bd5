//! Comparison of the library against the exhaustive oracles on one pair of
//! masks. Shared with the acceptance suite.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use lesionmetrics::matching::study_metrics;
use lesionmetrics::{connected_components, BinaryMask, Connectivity, Geometry, LesionSet};
use lesionmetrics_oracle as oracle;

/// Pseudo-random mask with clustered foreground, from a 64-bit seed.
pub fn random_mask(geometry: Geometry, density: f64, seed: u64) -> BinaryMask {
    let mut rng = oracle::SplitMix64(seed);
    let mut mask = BinaryMask::empty(geometry);
    let n = geometry.len();
    let seeds = ((n as f64 * density) / 4.0).ceil() as usize;
    for _ in 0..seeds {
        let v = rng.below(n);
        mask.set_index(v, true);
        // Grow a short random walk to produce multi-voxel blobs.
        let mut c = geometry.coords(v);
        for _ in 0..rng.below(6) {
            let axis = rng.below(3);
            if rng.below(2) == 0 {
                c[axis] = c[axis].saturating_sub(1);
            } else if c[axis] + 1 < geometry.dims[axis] {
                c[axis] += 1;
            }
            mask.set(c[0], c[1], c[2], true);
        }
    }
    mask
}

fn as_set(lesion_voxels: &[usize], dims: [usize; 3]) -> oracle::VoxelSet {
    lesion_voxels.iter().map(|&i| oracle::voxel_of(dims, i)).collect()
}

fn components(set: &LesionSet) -> BTreeSet<oracle::VoxelSet> {
    set.lesions.iter().map(|l| as_set(&l.voxels, set.geometry.dims)).collect()
}

/// Checks components, surfaces, volumes, diameters, matching, DICE and NSD.
pub fn compare_with_oracle(gt: &BinaryMask, pred: &BinaryMask, connectivity: Connectivity, tau_mm: f64) -> Result<(), String> {
    let g = *gt.geometry();
    let dims = g.dims;
    let conn: u8 = connectivity.into();
    let gt_set = connected_components(gt, connectivity);
    let pred_set = connected_components(pred, connectivity);

    for (name, mask, set) in [("gt", gt, &gt_set), ("pred", pred, &pred_set)] {
        let expected = oracle::flood_fill(&oracle::foreground(dims, mask.as_slice()), conn);
        if components(set) != expected {
            return Err(format!("{name}: component membership differs"));
        }
        let firsts: Vec<usize> = set.lesions.iter().map(|l| l.voxels[0]).collect();
        if firsts.windows(2).any(|w| w[0] >= w[1]) || set.lesions.iter().enumerate().any(|(i, l)| l.id as usize != i + 1) {
            return Err(format!("{name}: labels not in scan order"));
        }
        for l in &set.lesions {
            let voxels = as_set(&l.voxels, dims);
            if as_set(&l.surface, dims) != oracle::surface(&voxels, dims) {
                return Err(format!("{name} lesion {}: surface differs", l.id));
            }
            if l.volume_mm3 != oracle::volume_mm3(&voxels, g.spacing) {
                return Err(format!("{name} lesion {}: volume {} vs {}", l.id, l.volume_mm3, oracle::volume_mm3(&voxels, g.spacing)));
            }
            let d = oracle::diameter_all_pairs(&voxels, g.spacing);
            if l.max_diameter_mm != d {
                return Err(format!("{name} lesion {}: diameter {} vs {d}", l.id, l.max_diameter_mm));
            }
        }
    }

    let (matches, metrics) = study_metrics(&gt_set, &pred_set, tau_mm).map_err(|e| e.to_string())?;
    let expected = oracle::match_components(&components(&gt_set), &components(&pred_set));
    let lookup = |set: &LesionSet, id: u32| as_set(&set.get(id).unwrap().voxels, dims);
    let tps: BTreeMap<oracle::VoxelSet, BTreeSet<oracle::VoxelSet>> = matches
        .true_positives
        .iter()
        .map(|tp| (lookup(&gt_set, tp.gt_id), tp.pred_ids.iter().map(|&p| lookup(&pred_set, p)).collect()))
        .collect();
    let fns: BTreeSet<_> = matches.false_negatives.iter().map(|&id| lookup(&gt_set, id)).collect();
    let fps: BTreeSet<_> = matches.false_positives.iter().map(|&id| lookup(&pred_set, id)).collect();
    if tps != expected.true_positives || fns != expected.false_negatives || fps != expected.false_positives {
        return Err("matching differs".into());
    }

    for m in &metrics {
        let gt_voxels = lookup(&gt_set, m.gt_id);
        let union: oracle::VoxelSet = m.pred_ids.iter().flat_map(|&p| lookup(&pred_set, p)).collect();
        let dice = oracle::dice(&gt_voxels, &union);
        let nsd = oracle::nsd(&gt_voxels, &union, dims, g.spacing, tau_mm);
        if (m.dice - dice).abs() > 1e-12 || (m.nsd - nsd).abs() > 1e-12 {
            return Err(format!("gt {}: dice {} vs {dice}, nsd {} vs {nsd}", m.gt_id, m.dice, m.nsd));
        }
        if m.pred_volume_mm3 != oracle::volume_mm3(&union, g.spacing) || m.pred_diameter_mm != oracle::diameter_all_pairs(&union, g.spacing) {
            return Err(format!("gt {}: predicted size differs", m.gt_id));
        }
    }
    Ok(())
}
