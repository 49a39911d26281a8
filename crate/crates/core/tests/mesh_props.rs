mod common;

use buckle_core::analysis::metrics;
use buckle_core::mesh::Triangle;
use buckle_core::Vec3;
use common::{jittered_grid, random_edit_sequence, rigid, rng, transformed};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = Vec3> {
    (-10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn edit_sequences_keep_counts_and_validity(seed in any::<u64>()) {
        match random_edit_sequence(seed, 40) {
            Ok(done) => prop_assert!(done[0] > 0, "no split in sequence {seed}"),
            Err(msg) => prop_assert!(false, "seed {seed}: {msg}"),
        }
    }

    #[test]
    fn quality_is_scale_invariant_and_bounded(a in point(), b in point(), c in point(), s in 1e-3..1e3f64) {
        let t = Triangle::new(a, b, c);
        prop_assume!(t.area() > 1e-6);
        let q = t.quality();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&q));
        let scaled = Triangle::new(a * s, b * s, c * s).quality();
        prop_assert!((scaled - q).abs() <= 1e-12);
    }

    #[test]
    fn metrics_are_rigidly_invariant(seed in 0u64..1000) {
        let mesh = jittered_grid(&mut rng(seed), 6, 6, 0.3, 0.6);
        let a = metrics(&mesh, 1.0);
        let b = metrics(&transformed(&mesh, rigid), 1.0);
        prop_assert_eq!(a.self_intersections, b.self_intersections);
        prop_assert_eq!((a.vertices, a.edges, a.faces), (b.vertices, b.edges, b.faces));
        prop_assert_eq!(&a.failure, &b.failure);
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1e-300);
        prop_assert!(close(a.mean_quality, b.mean_quality));
        prop_assert!(close(a.mean_valence, b.mean_valence));
        prop_assert!(close(a.mean_sq_dihedral, b.mean_sq_dihedral));
    }
}
