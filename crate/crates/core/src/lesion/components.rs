//! Two-pass connected-component labeling with union-find.

use super::{Connectivity, Lesion, LesionSet};
use crate::volume::BinaryMask;

/// Dense component labels of a mask (0 = background, 1..=count).
#[derive(Debug, Clone)]
pub struct Labeling {
    pub labels: Vec<u32>,
    pub count: u32,
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn new() -> Self {
        // slot 0 is the background label
        DisjointSet { parent: vec![0] }
    }

    fn make(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> u32 {
        let (ra, rb) = (self.find(a), self.find(b));
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi as usize] = lo;
        lo
    }
}

/// Labels the foreground components of `mask`.
///
/// Final labels are numbered by the position of each component's first
/// voxel in x-fastest scan order.
pub fn label_components(mask: &BinaryMask, connectivity: Connectivity) -> Labeling {
    let geometry = *mask.geometry();
    let [nx, ny, nz] = geometry.dims;
    // Neighbors already visited by a raster scan.
    let backward: Vec<[i64; 3]> = connectivity
        .offsets()
        .into_iter()
        .filter(|&[dx, dy, dz]| dz < 0 || (dz == 0 && (dy < 0 || (dy == 0 && dx < 0))))
        .collect();

    let mut provisional = vec![0u32; geometry.len()];
    let mut sets = DisjointSet::new();
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                let idx = geometry.index(x, y, z);
                if !mask.get_index(idx) {
                    continue;
                }
                let mut label = 0u32;
                for &[dx, dy, dz] in &backward {
                    let (qx, qy, qz) = (x as i64 + dx, y as i64 + dy, z as i64 + dz);
                    if qx < 0 || qy < 0 || qz < 0 || qx >= nx as i64 || qy >= ny as i64 {
                        continue;
                    }
                    let neighbor = provisional[geometry.index(qx as usize, qy as usize, qz as usize)];
                    if neighbor != 0 {
                        label = if label == 0 { neighbor } else { sets.union(label, neighbor) };
                    }
                }
                provisional[idx] = if label == 0 { sets.make() } else { label };
            }
        }
    }

    let mut remap = vec![0u32; sets.parent.len()];
    let mut count = 0u32;
    for label in provisional.iter_mut() {
        if *label == 0 {
            continue;
        }
        let root = sets.find(*label) as usize;
        if remap[root] == 0 {
            count += 1;
            remap[root] = count;
        }
        *label = remap[root];
    }
    Labeling { labels: provisional, count }
}

/// Decomposes `mask` into lesions with volume, diameter and surface.
pub fn connected_components(mask: &BinaryMask, connectivity: Connectivity) -> LesionSet {
    let geometry = *mask.geometry();
    let Labeling { labels, count } = label_components(mask, connectivity);
    let mut voxels: Vec<Vec<usize>> = vec![Vec::new(); count as usize];
    for (idx, &label) in labels.iter().enumerate() {
        if label != 0 {
            voxels[label as usize - 1].push(idx);
        }
    }
    let lesions = voxels
        .into_iter()
        .enumerate()
        .map(|(i, v)| Lesion::from_voxels(i as u32 + 1, v, &geometry))
        .collect();
    LesionSet { geometry, lesions }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::Geometry;

    fn mask_with(dims: [usize; 3], on: &[[usize; 3]]) -> BinaryMask {
        let geometry = Geometry::new(dims, [0.5; 3]).unwrap();
        let mut mask = BinaryMask::empty(geometry);
        for &[x, y, z] in on {
            mask.set(x, y, z, true);
        }
        mask
    }

    fn cube(origin: [usize; 3], side: usize) -> Vec<[usize; 3]> {
        let mut v = Vec::new();
        for z in 0..side {
            for y in 0..side {
                for x in 0..side {
                    v.push([origin[0] + x, origin[1] + y, origin[2] + z]);
                }
            }
        }
        v
    }

    #[test]
    fn empty_mask_has_no_lesions() {
        let mask = mask_with([5, 5, 5], &[]);
        assert!(connected_components(&mask, Connectivity::TwentySix).is_empty());
    }

    #[test]
    fn two_separated_cubes() {
        let mut on = cube([0, 0, 0], 2);
        on.extend(cube([4, 0, 0], 2));
        let set = connected_components(&mask_with([8, 4, 4], &on), Connectivity::TwentySix);
        assert_eq!(set.len(), 2);
        assert!(set.lesions.iter().all(|l| l.len() == 8));
    }

    #[test]
    fn corner_contact_depends_on_connectivity() {
        let mask = mask_with([3, 3, 3], &[[0, 0, 0], [1, 1, 1]]);
        assert_eq!(connected_components(&mask, Connectivity::TwentySix).len(), 1);
        assert_eq!(connected_components(&mask, Connectivity::Eighteen).len(), 2);
        assert_eq!(connected_components(&mask, Connectivity::Six).len(), 2);
    }

    #[test]
    fn edge_contact_joins_under_eighteen() {
        let mask = mask_with([3, 3, 3], &[[0, 0, 0], [1, 1, 0]]);
        assert_eq!(connected_components(&mask, Connectivity::Eighteen).len(), 1);
        assert_eq!(connected_components(&mask, Connectivity::Six).len(), 2);
    }

    #[test]
    fn u_shape_merges_late() {
        // Two arms joined only on the last row: needs label equivalence.
        let on = [[0, 0, 0], [0, 1, 0], [0, 2, 0], [2, 0, 0], [2, 1, 0], [2, 2, 0], [1, 2, 0]];
        let set = connected_components(&mask_with([3, 3, 1], &on), Connectivity::Six);
        assert_eq!(set.len(), 1);
        assert_eq!(set.lesions[0].len(), 7);
    }

    #[test]
    fn labels_follow_scan_order_of_first_voxel() {
        // Lesion starting at z = 0 gets id 1 even though it extends further.
        let mask = mask_with([4, 4, 4], &[[3, 0, 0], [3, 0, 1], [0, 0, 2]]);
        let set = connected_components(&mask, Connectivity::TwentySix);
        assert_eq!(set.lesions[0].voxels[0], mask.geometry().index(3, 0, 0));
        assert_eq!(set.lesions[1].voxels, vec![mask.geometry().index(0, 0, 2)]);
        assert_eq!(set.get(2).unwrap().id, 2);
        assert!(set.get(3).is_none());
        assert!(set.get(0).is_none());
    }
}
