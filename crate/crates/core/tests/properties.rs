mod common;

use common::random_mask;
use lesionmetrics::matching::{aggregate_cohort, dice, match_lesions, nsd, study_metrics, AggregateOptions, BandMode, StratumSpec, StudyEvaluation};
use lesionmetrics::stats::{bootstrap_ci, bootstrap_ci_unordered, chi_square_2x2, kruskal_wallis, mann_whitney_u, spearman_rho, BootstrapOptions};
use lesionmetrics::volume::{decode_nifti, encode_nifti, Endianness};
use lesionmetrics::{binarize, connected_components, BinaryMask, Connectivity, Geometry, VoxelData, VoxelGrid};
use proptest::prelude::*;

fn geometry() -> impl Strategy<Value = Geometry> {
    (1usize..=9, 1usize..=9, 1usize..=9, 0.2f32..1.5, 0.2f32..1.5, 0.2f32..1.5)
        .prop_map(|(x, y, z, a, b, c)| Geometry::new([x, y, z], [a as f64, b as f64, c as f64]).unwrap())
}

fn grid() -> impl Strategy<Value = VoxelGrid> {
    (geometry(), 0u8..3, any::<u64>()).prop_map(|(g, kind, seed)| {
        let mut rng = lesionmetrics_oracle::SplitMix64(seed);
        let n = g.len();
        let data = match kind {
            0 => VoxelData::U8((0..n).map(|_| rng.next_u64() as u8).collect()),
            1 => VoxelData::I16((0..n).map(|_| rng.next_u64() as i16).collect()),
            _ => VoxelData::F32((0..n).map(|_| f32::from_bits(rng.next_u64() as u32 & 0x7F7F_FFFF)).collect()),
        };
        VoxelGrid::new(g, [1.5, -2.0, 0.25], data).unwrap()
    })
}

fn bits(d: &VoxelData) -> Vec<u32> {
    match d {
        VoxelData::U8(v) => v.iter().map(|&x| x as u32).collect(),
        VoxelData::I16(v) => v.iter().map(|&x| x as u16 as u32).collect(),
        VoxelData::F32(v) => v.iter().map(|x| x.to_bits()).collect(),
    }
}

fn sample(len: impl Into<prop::collection::SizeRange>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0i32..40).prop_map(|v| v as f64 / 4.0), len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nifti_round_trip(g in grid(), big in any::<bool>()) {
        let endian = if big { Endianness::Big } else { Endianness::Little };
        let back = decode_nifti(&encode_nifti(&g, endian).unwrap()).unwrap();
        prop_assert_eq!(back.dims(), g.dims());
        prop_assert_eq!(back.spacing(), g.spacing());
        prop_assert_eq!(back.kind(), g.kind());
        prop_assert_eq!(bits(back.data()), bits(g.data()));
    }

    #[test]
    fn binarize_is_idempotent_and_binary(g in grid(), t in -10.0f64..10.0) {
        let once = binarize(&g, t).unwrap();
        prop_assert!(once.as_slice().iter().all(|&v| v <= 1));
        prop_assert_eq!(binarize(&once.to_grid(), 0.5).unwrap(), once);
    }

    #[test]
    fn lesion_inventory_partitions_mask(nx in 2usize..12, ny in 2usize..12, nz in 2usize..12, density in 0.0f64..0.4, seed in any::<u64>()) {
        let g = Geometry::new([nx, ny, nz], [0.4, 0.5, 0.6]).unwrap();
        let mask = random_mask(g, density, seed);
        for conn in [Connectivity::Six, Connectivity::Eighteen, Connectivity::TwentySix] {
            let set = connected_components(&mask, conn);
            let total: usize = set.lesions.iter().map(|l| l.len()).sum();
            prop_assert_eq!(total, mask.count_ones());
            prop_assert!((set.total_volume_mm3() - mask.count_ones() as f64 * g.voxel_volume()).abs() < 1e-9);
            for l in &set.lesions {
                prop_assert!(l.max_diameter_mm >= 0.0 && l.max_diameter_mm <= g.diagonal_mm() + 1e-12);
                prop_assert_eq!(l.max_diameter_mm == 0.0, l.len() == 1);
                prop_assert!(l.surface.iter().all(|v| l.contains(*v)));
            }
        }
    }

    #[test]
    fn component_membership_ignores_scan_direction(n in 3usize..10, density in 0.05f64..0.4, seed in any::<u64>()) {
        // Mirroring the grid reverses the scan order.
        let g = Geometry::isotropic(n, 0.5).unwrap();
        let mask = random_mask(g, density, seed);
        let mirrored = BinaryMask::from_fn(g, |x, y, z| mask.get(n - 1 - x, n - 1 - y, n - 1 - z));
        let canon = |m: &BinaryMask, flip: bool| {
            let mut sets: Vec<Vec<[usize; 3]>> = connected_components(m, Connectivity::TwentySix).lesions.iter().map(|l| {
                let mut v: Vec<[usize; 3]> = l.voxels.iter().map(|&i| {
                    let c = g.coords(i);
                    if flip { [n - 1 - c[0], n - 1 - c[1], n - 1 - c[2]] } else { c }
                }).collect();
                v.sort();
                v
            }).collect();
            sets.sort();
            sets
        };
        prop_assert_eq!(canon(&mask, false), canon(&mirrored, true));
    }

    #[test]
    fn detection_is_monotone_in_prediction_growth(density in 0.02f64..0.2, seed in any::<u64>(), extra in any::<u64>()) {
        let g = Geometry::isotropic(10, 0.5).unwrap();
        let gt = connected_components(&random_mask(g, density, seed), Connectivity::TwentySix);
        let small = random_mask(g, density, seed ^ 1);
        let grow = random_mask(g, 0.1, extra);
        let big = BinaryMask::from_fn(g, |x, y, z| small.get(x, y, z) || grow.get(x, y, z));
        let a = match_lesions(&gt, &connected_components(&small, Connectivity::TwentySix)).unwrap();
        let b = match_lesions(&gt, &connected_components(&big, Connectivity::TwentySix)).unwrap();
        prop_assert!(b.fn_count() <= a.fn_count());
        let tp_b: Vec<u32> = b.true_positives.iter().map(|t| t.gt_id).collect();
        prop_assert!(a.true_positives.iter().all(|t| tp_b.contains(&t.gt_id)));
    }

    #[test]
    fn overlap_metrics_translation_invariant(density in 0.05f64..0.3, seed in any::<u64>(), dx in 0usize..4, dy in 0usize..4, dz in 0usize..4) {
        let g = Geometry::new([8, 8, 8], [0.3, 0.5, 0.6]).unwrap();
        let big = Geometry::new([12, 12, 12], [0.3, 0.5, 0.6]).unwrap();
        let a = random_mask(g, density, seed);
        let b = random_mask(g, density, seed ^ 7);
        prop_assume!(a.count_ones() > 0 && b.count_ones() > 0);
        let place = |m: &BinaryMask, off: [usize; 3]| -> Vec<usize> {
            m.foreground().map(|i| { let c = g.coords(i); big.index(c[0] + off[0], c[1] + off[1], c[2] + off[2]) }).collect::<std::collections::BTreeSet<_>>().into_iter().collect()
        };
        let (a0, b0) = (place(&a, [2, 2, 2]), place(&b, [2, 2, 2]));
        let (a1, b1) = (place(&a, [dx, dy, dz]), place(&b, [dx, dy, dz]));
        prop_assert_eq!(dice(&a0, &b0), dice(&a1, &b1));
        // Surfaces touching the grid border are clipped differently, so
        // compare only placements that keep a free layer around the masks.
        if dx > 0 && dy > 0 && dz > 0 {
            prop_assert_eq!(nsd(&a0, &b0, &big, 0.5).unwrap(), nsd(&a1, &b1, &big, 0.5).unwrap());
        }
    }

    #[test]
    fn tp_metrics_are_bounded(density in 0.05f64..0.3, seed in any::<u64>()) {
        let g = Geometry::isotropic(10, 0.5).unwrap();
        let gt = connected_components(&random_mask(g, density, seed), Connectivity::TwentySix);
        let pred = connected_components(&random_mask(g, density, !seed), Connectivity::TwentySix);
        let (_, metrics) = study_metrics(&gt, &pred, 0.5).unwrap();
        for m in metrics {
            prop_assert!((0.0..=1.0).contains(&m.dice) && (0.0..=1.0).contains(&m.nsd));
            prop_assert_eq!(m.volume_diff_mm3, m.gt_volume_mm3 - m.pred_volume_mm3);
            if m.dice == 1.0 {
                prop_assert_eq!(m.nsd, 1.0);
                prop_assert_eq!(m.volume_diff_mm3, 0.0);
            }
        }
    }

    #[test]
    fn disjoint_strata_recombine(seeds in prop::collection::vec(any::<u64>(), 2..6)) {
        let g = Geometry::isotropic(14, 0.5).unwrap();
        let studies: Vec<StudyEvaluation> = seeds.iter().enumerate().map(|(i, &s)| {
            let gt = connected_components(&random_mask(g, 0.05, s), Connectivity::TwentySix);
            let pred = connected_components(&random_mask(g, 0.05, s ^ 3), Connectivity::TwentySix);
            StudyEvaluation::evaluate(format!("s{i}"), &gt, &pred, 0.5).unwrap()
        }).collect();
        prop_assume!(studies.iter().any(|s| s.matches.tp_count() + s.matches.fn_count() > 0));
        let options = AggregateOptions {
            strata: StratumSpec::new(vec![1.0, 2.0], BandMode::Disjoint).unwrap(),
            bootstrap: BootstrapOptions { n_resamples: 100, ..Default::default() },
            ..Default::default()
        };
        match aggregate_cohort(&studies, studies.len(), &options) {
            Ok(report) => {
                let rows = &report.sensitivity;
                prop_assert_eq!(rows[1..].iter().map(|r| r.numerator).sum::<usize>(), rows[0].numerator);
                prop_assert_eq!(rows[1..].iter().map(|r| r.denominator).sum::<usize>(), rows[0].denominator);
                let fp = &report.fp_per_case;
                prop_assert_eq!(fp[1..].iter().map(|r| r.numerator).sum::<usize>(), fp[0].numerator);
            }
            Err(e) => prop_assert!(e.is_degenerate_statistics(), "{e}"),
        }
    }

    #[test]
    fn mann_whitney_symmetries(a in sample(1..25), b in sample(1..25)) {
        let ab = mann_whitney_u(&a, &b).unwrap();
        let ba = mann_whitney_u(&b, &a).unwrap();
        prop_assert_eq!(ab.statistic + ba.statistic, (a.len() * b.len()) as f64);
        prop_assert!((ab.p_value - ba.p_value).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab.p_value));
        let same = mann_whitney_u(&a, &a).unwrap();
        prop_assert_eq!(same.statistic, (a.len() * a.len()) as f64 / 2.0);
    }

    #[test]
    fn chi_square_symmetries(t in [[1u64..60, 1u64..60], [1u64..60, 1u64..60]]) {
        let r = chi_square_2x2(t, Default::default()).unwrap();
        let tr = chi_square_2x2([[t[0][0], t[1][0]], [t[0][1], t[1][1]]], Default::default()).unwrap();
        let sw = chi_square_2x2([t[1], t[0]], Default::default()).unwrap();
        prop_assert!((r.statistic - tr.statistic).abs() <= 1e-9 * r.statistic.max(1.0));
        prop_assert!((r.p_value - sw.p_value).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&r.p_value));
    }

    #[test]
    fn kruskal_p_in_range_and_zero_for_identical_groups(a in sample(2..15), b in sample(2..15)) {
        if let Ok(r) = kruskal_wallis(&[&a, &b]) {
            prop_assert!((0.0..=1.0).contains(&r.p_value) && r.statistic >= 0.0);
        }
        let r = kruskal_wallis(&[&a, &a, &a]).unwrap();
        prop_assert!(r.statistic.abs() < 1e-12);
    }

    #[test]
    fn spearman_bounded_and_monotone_invariant(pairs in prop::collection::vec((0i32..30, 0i32..30), 3..40)) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
        if let Ok(r) = spearman_rho(&x, &y) {
            prop_assert!((-1.0..=1.0).contains(&r.statistic));
            let tx: Vec<f64> = x.iter().map(|v| (v / 7.0).exp()).collect();
            let ty: Vec<f64> = y.iter().map(|v| v * v * v - 5.0).collect();
            let t = spearman_rho(&tx, &ty).unwrap();
            prop_assert!((t.statistic - r.statistic).abs() < 1e-12);
        }
    }

    #[test]
    fn bootstrap_permutation_invariant(data in prop::collection::vec(-5.0f64..5.0, 1..30), seed in any::<u64>()) {
        let mean = |v: &[f64]| Some(v.iter().sum::<f64>() / v.len() as f64);
        let options = BootstrapOptions { n_resamples: 200, seed, ..Default::default() };
        let a = bootstrap_ci(&data, mean, &options).unwrap();
        prop_assert!(a.lower <= a.upper);
        let mut reversed = data.clone();
        reversed.reverse();
        let b = bootstrap_ci_unordered(&data, f64::total_cmp, mean, &options).unwrap();
        let c = bootstrap_ci_unordered(&reversed, f64::total_cmp, mean, &options).unwrap();
        prop_assert_eq!(b, c);
        let constant = vec![data[0]; data.len()];
        let k = bootstrap_ci(&constant, mean, &options).unwrap();
        prop_assert!((k.lower - k.upper).abs() < 1e-12 && (k.point - k.lower).abs() < 1e-12);
    }
}
