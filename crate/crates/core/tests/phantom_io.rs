use lesionmetrics::phantom::{generate_cohort, rasterize, CohortParams, Manifest, PhantomLesion, PhantomSpec};
use lesionmetrics::{connected_components, load_volume, save_volume, binarize, Connectivity, Geometry};

fn params() -> CohortParams {
    CohortParams {
        n_positive: 5,
        n_negative: 3,
        n_lesions: 7,
        dims: [40, 40, 40],
        n_missed: 2,
        n_false_positives: 2,
        seed: 5,
        ..Default::default()
    }
}

#[test]
fn sphere_survives_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let spec = PhantomSpec::new(Geometry::new([24, 20, 16], [0.3, 0.3, 0.6]).unwrap(), vec![PhantomLesion::sphere([3.6, 3.0, 4.8], 2.5)]);
    let (mask, _) = rasterize(&spec).unwrap();
    for name in ["s.nii", "s.nii.gz"] {
        let path = dir.path().join(name);
        save_volume(&mask.to_grid(), &path).unwrap();
        let back = binarize(&load_volume(&path).unwrap(), 0.5).unwrap();
        assert_eq!(back.as_slice(), mask.as_slice());
        assert!(back.geometry().is_compatible(mask.geometry()));
    }
}

#[test]
fn generated_cohort_is_consistent_and_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let manifest = generate_cohort(&params(), a.path()).unwrap();
    generate_cohort(&params(), b.path()).unwrap();
    let bytes = |d: &std::path::Path, f: &str| std::fs::read(d.join(f)).unwrap();
    assert_eq!(bytes(a.path(), "manifest.json"), bytes(b.path(), "manifest.json"));
    assert_eq!(Manifest::load(&a.path().join("manifest.json")).unwrap(), manifest);

    assert_eq!(manifest.studies.len(), 8);
    for study in &manifest.studies {
        assert_eq!(bytes(a.path(), &study.pred_path), bytes(b.path(), &study.pred_path));
        let gt = binarize(&load_volume(a.path().join(&study.gt_path)).unwrap(), 0.5).unwrap();
        let pred = binarize(&load_volume(a.path().join(&study.pred_path)).unwrap(), 0.5).unwrap();
        assert_eq!(connected_components(&gt, Connectivity::TwentySix).len(), study.lesions.len());
        let kept = study.lesions.iter().filter(|l| !l.dropped).count();
        assert_eq!(connected_components(&pred, Connectivity::TwentySix).len(), kept + study.false_positives.len());
    }
    assert_eq!((manifest.expected.tp, manifest.expected.fn_, manifest.expected.fp), (5, 2, 2));
}
