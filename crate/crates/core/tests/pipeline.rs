use dclus_core::dim_reduce::{cost_preserving_sketch, verify_sketch, SketchConfig, WitnessParams};
use dclus_core::geometry::{ClusteringParams, Points, SolverConfig, WeightedPointSet};
use dclus_core::partition_coreset::PartitionCoresetParams;
use dclus_core::ptas::{approx_solve, exact_solve, PtasConfig};
use dclus_core::ring_coreset::{euclidean_pipeline, PipelineConfig};
use dclus_core::verify::VerifyMode;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cube(rng: &mut ChaCha8Rng, n: usize, d: usize) -> WeightedPointSet {
    WeightedPointSet::from_rows(&(0..n).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect::<Vec<_>>()).unwrap()
}

#[test]
fn reducing_sketch_keeps_partition_costs() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = cube(&mut rng, 4, 300);
    let params = ClusteringParams::new(2, 2, 0.3).unwrap();
    let witness = WitnessParams {
        d_ratio: 0.25,
        r: 2,
        ..WitnessParams::defaults(2, 0.3)
    };
    let s = cost_preserving_sketch(&p, &params, &PartitionCoresetParams::practical(0.1, 3), &witness, &SketchConfig::default()).unwrap();
    assert!(s.map.rows < 300);
    assert_eq!(s.target_dim, s.map.rows + 1);
    let r = verify_sketch(&p, &s, &params, &SolverConfig::default(), VerifyMode::Exhaustive).unwrap();
    assert!(r.distortion <= 1.15);
    assert!(r.max_relative_error <= 0.9);
}

#[test]
fn eight_points_within_three_eps() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let p = cube(&mut rng, 8, 5);
    let params = ClusteringParams::new(2, 2, 0.3).unwrap();
    let s = cost_preserving_sketch(&p, &params, &PartitionCoresetParams::practical(0.1, 3), &WitnessParams::defaults(2, 0.3), &SketchConfig::default()).unwrap();
    let r = verify_sketch(&p, &s, &params, &SolverConfig::default(), VerifyMode::Exhaustive).unwrap();
    assert_eq!(r.partitions_checked, 128);
    assert!(r.max_relative_error <= 0.9);
}

#[test]
fn identical_points_pipeline() {
    let p = WeightedPointSet::from_rows(&vec![vec![2.0, -1.0, 0.5]; 9]).unwrap();
    let params = ClusteringParams::new(2, 2, 0.3).unwrap();
    let r = euclidean_pipeline(&p, &params, &PipelineConfig::default()).unwrap();
    assert_eq!(r.output.coreset.len(), 1);
    assert_eq!(r.output.coreset.offset, 0.0);
    assert_eq!(r.output.coreset.points.weight(0), 9.0);
}

#[test]
fn identity_sketch_pipeline_is_plain_ring_coreset() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let p = cube(&mut rng, 30, 2);
    let params = ClusteringParams::new(2, 1, 0.3).unwrap();
    let r = euclidean_pipeline(&p, &params, &PipelineConfig::default()).unwrap();
    assert!(r.sketch.map.is_identity());
    assert_eq!(r.output.coreset.points.total_weight(), 30.0);
}

#[test]
fn lifted_solution_on_high_dimensional_subsample() {
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    let p = cube(&mut rng, 60, 30);
    let rows: Vec<Vec<f64>> = (0..10).map(|i| p.coords(i * 6).to_vec()).collect();
    let sub = WeightedPointSet::from_rows(&rows).unwrap();
    let params = ClusteringParams::new(2, 2, 0.3).unwrap();
    let cfg = PtasConfig::default();
    let a = approx_solve(&sub, &params, &cfg).unwrap();
    let e = exact_solve(&sub, &params, &cfg.solver).unwrap();
    assert!(!a.downgraded);
    assert!(a.cost >= e.cost - 1e-9);
    assert!(a.cost <= 2.5 * e.cost);
}

#[test]
fn oversized_coreset_downgrades() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let p = cube(&mut rng, 120, 2);
    let params = ClusteringParams::new(2, 1, 0.3).unwrap();
    let r = approx_solve(&p, &params, &PtasConfig::default()).unwrap();
    assert!(r.downgraded);
    assert_eq!(r.method, dclus_core::ptas::Method::Bicriteria);
}
