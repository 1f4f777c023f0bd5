mod common;

use common::{compare_with_oracle, random_mask};
use lesionmetrics::{Connectivity, Geometry};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn metrics_match_exhaustive_oracle(
        nx in 3usize..=12, ny in 3usize..=12, nz in 3usize..=12,
        sx in 0.3f64..0.7, sy in 0.3f64..0.7, sz in 0.3f64..0.7,
        density in 0.02f64..0.25,
        conn in prop::sample::select(vec![Connectivity::Six, Connectivity::Eighteen, Connectivity::TwentySix]),
        tau in prop::sample::select(vec![0.3, 0.5, 1.0]),
        seed in any::<u64>(),
    ) {
        let g = Geometry::new([nx, ny, nz], [sx, sy, sz]).unwrap();
        let gt = random_mask(g, density, seed);
        let pred = random_mask(g, density, seed ^ 0x5555);
        prop_assert_eq!(compare_with_oracle(&gt, &pred, conn, tau), Ok(()));
    }
}
