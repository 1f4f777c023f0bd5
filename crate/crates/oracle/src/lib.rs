//! Slow reference implementations used by tests.
//!
//! Everything here works on plain coordinate sets and vectors and shares no
//! code with `lesionmetrics`, so agreement between the two is evidence
//! rather than tautology.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

pub type Voxel = [i64; 3];
pub type VoxelSet = BTreeSet<Voxel>;

/// x-fastest linear index.
pub fn linear(dims: [usize; 3], v: Voxel) -> usize {
    v[0] as usize + dims[0] * (v[1] as usize + dims[1] * v[2] as usize)
}

pub fn voxel_of(dims: [usize; 3], i: usize) -> Voxel {
    [(i % dims[0]) as i64, ((i / dims[0]) % dims[1]) as i64, (i / (dims[0] * dims[1])) as i64]
}

/// Foreground voxels of an x-fastest 0/1 array.
pub fn foreground(dims: [usize; 3], data: &[u8]) -> VoxelSet {
    data.iter().enumerate().filter(|(_, &b)| b != 0).map(|(i, _)| voxel_of(dims, i)).collect()
}

fn adjacent(a: Voxel, b: Voxel, connectivity: u8) -> bool {
    let d: Vec<i64> = (0..3).map(|i| (a[i] - b[i]).abs()).collect();
    if d.iter().any(|&x| x > 1) || d.iter().all(|&x| x == 0) {
        return false;
    }
    let nonzero = d.iter().filter(|&&x| x == 1).count();
    match connectivity {
        6 => nonzero == 1,
        18 => nonzero <= 2,
        26 => true,
        _ => panic!("connectivity {connectivity}"),
    }
}

/// Breadth-first flood fill. Components come out as a set of sets, so the
/// result carries membership but no labeling order.
pub fn flood_fill(voxels: &VoxelSet, connectivity: u8) -> BTreeSet<VoxelSet> {
    let mut unvisited = voxels.clone();
    let mut out = BTreeSet::new();
    while let Some(&seed) = unvisited.iter().next() {
        unvisited.remove(&seed);
        let mut comp = VoxelSet::new();
        let mut queue = VecDeque::from([seed]);
        while let Some(v) = queue.pop_front() {
            comp.insert(v);
            let next: Vec<Voxel> = unvisited.iter().copied().filter(|&u| adjacent(u, v, connectivity)).collect();
            for u in next {
                unvisited.remove(&u);
                queue.push_back(u);
            }
        }
        out.insert(comp);
    }
    out
}

/// Voxels with at least one face neighbor outside the set or the grid.
pub fn surface(voxels: &VoxelSet, dims: [usize; 3]) -> VoxelSet {
    let faces = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]];
    voxels
        .iter()
        .copied()
        .filter(|v| {
            faces.iter().any(|f| {
                let n = [v[0] + f[0], v[1] + f[1], v[2] + f[2]];
                let in_grid = (0..3).all(|i| n[i] >= 0 && n[i] < dims[i] as i64);
                !in_grid || !voxels.contains(&n)
            })
        })
        .collect()
}

pub fn distance_mm(a: Voxel, b: Voxel, spacing: [f64; 3]) -> f64 {
    let x = (a[0] - b[0]) as f64 * spacing[0];
    let y = (a[1] - b[1]) as f64 * spacing[1];
    let z = (a[2] - b[2]) as f64 * spacing[2];
    (x * x + y * y + z * z).sqrt()
}

pub fn volume_mm3(voxels: &VoxelSet, spacing: [f64; 3]) -> f64 {
    voxels.len() as f64 * spacing[0] * spacing[1] * spacing[2]
}

/// Largest center-to-center distance over all voxel pairs.
pub fn diameter_all_pairs(voxels: &VoxelSet, spacing: [f64; 3]) -> f64 {
    let v: Vec<Voxel> = voxels.iter().copied().collect();
    let mut best = 0.0f64;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            best = best.max(distance_mm(v[i], v[j], spacing));
        }
    }
    best
}

pub fn dice(a: &VoxelSet, b: &VoxelSet) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    2.0 * a.intersection(b).count() as f64 / (a.len() + b.len()) as f64
}

/// Symmetric surface agreement by exhaustive surface-to-surface distances.
pub fn nsd(a: &VoxelSet, b: &VoxelSet, dims: [usize; 3], spacing: [f64; 3], tau_mm: f64) -> f64 {
    let sa = surface(a, dims);
    let sb = surface(b, dims);
    let close = |from: &VoxelSet, to: &VoxelSet| from.iter().filter(|&&p| to.iter().any(|&q| distance_mm(p, q, spacing) <= tau_mm)).count();
    (close(&sa, &sb) + close(&sb, &sa)) as f64 / (sa.len() + sb.len()) as f64
}

/// Any-overlap matching on component sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    /// Ground-truth component and the predictions overlapping it.
    pub true_positives: BTreeMap<VoxelSet, BTreeSet<VoxelSet>>,
    pub false_negatives: BTreeSet<VoxelSet>,
    pub false_positives: BTreeSet<VoxelSet>,
}

pub fn match_components(gt: &BTreeSet<VoxelSet>, pred: &BTreeSet<VoxelSet>) -> Matching {
    let overlaps = |a: &VoxelSet, b: &VoxelSet| a.intersection(b).next().is_some();
    let mut m = Matching { true_positives: BTreeMap::new(), false_negatives: BTreeSet::new(), false_positives: BTreeSet::new() };
    for g in gt {
        let hits: BTreeSet<VoxelSet> = pred.iter().filter(|p| overlaps(g, p)).cloned().collect();
        if hits.is_empty() {
            m.false_negatives.insert(g.clone());
        } else {
            m.true_positives.insert(g.clone(), hits);
        }
    }
    for p in pred {
        if !gt.iter().any(|g| overlaps(g, p)) {
            m.false_positives.insert(p.clone());
        }
    }
    m
}

/// Number of voxel centers inside an axis-aligned ellipsoid, by testing
/// every voxel of the grid. Voxel `(i,j,k)` sits at `(i·sx, j·sy, k·sz)`.
pub fn ellipsoid_voxel_count(dims: [usize; 3], spacing: [f64; 3], center: [f64; 3], radii: [f64; 3]) -> usize {
    let mut n = 0;
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                let p = [x as f64 * spacing[0], y as f64 * spacing[1], z as f64 * spacing[2]];
                let q: f64 = (0..3).map(|i| ((p[i] - center[i]) / radii[i]).powi(2)).sum();
                if q <= 1.0 {
                    n += 1;
                }
            }
        }
    }
    n
}

/// Average ranks for ties, 1-based.
pub fn midranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&v| {
            let below = x.iter().filter(|&&u| u < v).count() as f64;
            let equal = x.iter().filter(|&&u| u == v).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Mann-Whitney U of `a` counted pairwise: wins plus half of ties.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> f64 {
    let mut u = 0.0;
    for &x in a {
        for &y in b {
            if x > y {
                u += 1.0;
            } else if x == y {
                u += 0.5;
            }
        }
    }
    u
}

/// Two-sided exact p of the Mann-Whitney test by listing every way to pick
/// which pooled observations belong to `a`.
pub fn mann_whitney_exact_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let (n, k) = (pooled.len(), a.len());
    let expected = k as f64 * (n + 1) as f64 / 2.0;
    let observed: f64 = ranks[..k].iter().sum();
    let dev = (observed - expected).abs();
    let (mut extreme, mut total) = (0u64, 0u64);
    let mut pick: Vec<usize> = (0..k).collect();
    loop {
        let s: f64 = pick.iter().map(|&i| ranks[i]).sum();
        total += 1;
        if (s - expected).abs() >= dev - 1e-9 {
            extreme += 1;
        }
        // Next k-combination in lexicographic order.
        let mut i = k;
        loop {
            if i == 0 {
                return extreme as f64 / total as f64;
            }
            i -= 1;
            if pick[i] != i + n - k {
                break;
            }
            if i == 0 {
                return extreme as f64 / total as f64;
            }
        }
        pick[i] += 1;
        for j in i + 1..k {
            pick[j] = pick[j - 1] + 1;
        }
    }
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson(&midranks(x), &midranks(y))
}

/// SplitMix64, for resampling experiments independent of the library RNG.
pub struct SplitMix64(pub u64);

impl SplitMix64 {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// Percentile interval of the resampled mean, nearest-rank percentiles.
pub fn bootstrap_mean_interval(data: &[f64], n_resamples: usize, confidence: f64, seed: u64) -> (f64, f64) {
    let mut rng = SplitMix64(seed);
    let mut means: Vec<f64> = (0..n_resamples)
        .map(|_| (0..data.len()).map(|_| data[rng.below(data.len())]).sum::<f64>() / data.len() as f64)
        .collect();
    means.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let alpha = (1.0 - confidence) / 2.0;
    let lo = ((alpha * n_resamples as f64).floor() as usize).min(n_resamples - 1);
    let hi = (((1.0 - alpha) * n_resamples as f64).ceil() as usize).min(n_resamples) - 1;
    (means[lo], means[hi])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_p_small_case() {
        assert!((mann_whitney_exact_p(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]) - 0.1).abs() < 1e-15);
        assert_eq!(mann_whitney_u(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), 0.0);
    }

    #[test]
    fn flood_fill_corner_contact() {
        let v: VoxelSet = [[0, 0, 0], [1, 1, 1]].into_iter().collect();
        assert_eq!(flood_fill(&v, 26).len(), 1);
        assert_eq!(flood_fill(&v, 18).len(), 2);
        assert_eq!(flood_fill(&v, 6).len(), 2);
    }

    #[test]
    fn cube_surface() {
        let v: VoxelSet = (0..27).map(|i| [1 + i % 3, 1 + (i / 3) % 3, 1 + i / 9]).collect();
        assert_eq!(surface(&v, [5, 5, 5]).len(), 26);
    }
}
