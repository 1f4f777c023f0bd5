use crate::error::{Error, Result};
use crate::lesion::{extract_surface, Lesion, LocalBitmap};
use crate::volume::Geometry;

/// Default NSD tolerance in mm.
pub const DEFAULT_TAU_MM: f64 = 0.5;

/// DICE coefficient of two ascending voxel-index sets.
pub fn dice(a: &[usize], b: &[usize]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    2.0 * intersection_len(a, b) as f64 / (a.len() + b.len()) as f64
}

/// DICE of a ground-truth lesion against the union of its matched predictions.
pub fn dice_lesionwise(gt_lesion: &Lesion, matched_preds: &[usize]) -> f64 {
    dice(&gt_lesion.voxels, matched_preds)
}

fn intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Distance in mm between voxel centers separated by integer offset `d`.
#[inline]
pub(crate) fn offset_distance_mm(d: [i64; 3], spacing: [f64; 3]) -> f64 {
    let x = d[0] as f64 * spacing[0];
    let y = d[1] as f64 * spacing[1];
    let z = d[2] as f64 * spacing[2];
    (x * x + y * y + z * z).sqrt()
}

/// Symmetric normalized surface distance between two ascending voxel sets:
/// the fraction of surface voxels of both sets lying within `tau_mm` of the
/// other set's surface.
pub fn nsd(gt_voxels: &[usize], pred_voxels: &[usize], geometry: &Geometry, tau_mm: f64) -> Result<f64> {
    if gt_voxels.is_empty() || pred_voxels.is_empty() {
        return Err(Error::InvalidArgument("NSD is undefined for an empty voxel set".into()));
    }
    let gt_surface = extract_surface(gt_voxels, geometry);
    let pred_surface = extract_surface(pred_voxels, geometry);
    nsd_surfaces(&gt_surface, &pred_surface, geometry, tau_mm)
}

/// NSD of a ground-truth lesion against the union of its matched
/// predictions. Only meaningful for detected lesions.
pub fn nsd_lesionwise(gt_lesion: &Lesion, matched_preds: &[usize], tau_mm: f64, geometry: &Geometry) -> Result<f64> {
    if matched_preds.is_empty() {
        return Err(Error::InvalidArgument("NSD needs a nonempty prediction".into()));
    }
    let pred_surface = extract_surface(matched_preds, geometry);
    nsd_surfaces(&gt_lesion.surface, &pred_surface, geometry, tau_mm)
}

pub(crate) fn nsd_surfaces(gt_surface: &[usize], pred_surface: &[usize], geometry: &Geometry, tau_mm: f64) -> Result<f64> {
    if !(tau_mm.is_finite() && tau_mm > 0.0) {
        return Err(Error::InvalidArgument(format!("NSD tolerance must be positive, got {tau_mm}")));
    }
    if gt_surface.is_empty() || pred_surface.is_empty() {
        return Err(Error::InvalidArgument("NSD is undefined for an empty surface".into()));
    }
    let ball = offsets_within(tau_mm, geometry.spacing);
    let pred_close = count_within(pred_surface, gt_surface, geometry, tau_mm, &ball);
    let gt_close = count_within(gt_surface, pred_surface, geometry, tau_mm, &ball);
    Ok((pred_close + gt_close) as f64 / (pred_surface.len() + gt_surface.len()) as f64)
}

/// Integer offsets whose physical length is at most `tau_mm`, nearest first.
fn offsets_within(tau_mm: f64, spacing: [f64; 3]) -> Vec<[i64; 3]> {
    let reach = spacing.map(|s| (tau_mm / s).floor() as i64 + 1);
    let mut out = Vec::new();
    for dz in -reach[2]..=reach[2] {
        for dy in -reach[1]..=reach[1] {
            for dx in -reach[0]..=reach[0] {
                if offset_distance_mm([dx, dy, dz], spacing) <= tau_mm {
                    out.push([dx, dy, dz]);
                }
            }
        }
    }
    out.sort_by(|a, b| offset_distance_mm(*a, spacing).total_cmp(&offset_distance_mm(*b, spacing)));
    out
}

/// Number of voxels in `from` within `tau_mm` of some voxel in `to`.
fn count_within(from: &[usize], to: &[usize], geometry: &Geometry, tau_mm: f64, ball: &[[i64; 3]]) -> usize {
    let signed = |v: usize| geometry.coords(v).map(|c| c as i64);
    if ball.len() <= to.len() {
        let target = LocalBitmap::new(to, geometry);
        from.iter()
            .filter(|&&v| {
                let p = signed(v);
                ball.iter().any(|d| target.contains([p[0] + d[0], p[1] + d[1], p[2] + d[2]]))
            })
            .count()
    } else {
        let targets: Vec<[i64; 3]> = to.iter().map(|&v| signed(v)).collect();
        from.iter()
            .filter(|&&v| {
                let p = signed(v);
                targets.iter().any(|q| offset_distance_mm([q[0] - p[0], q[1] - p[1], q[2] - p[2]], geometry.spacing) <= tau_mm)
            })
            .count()
    }
}
