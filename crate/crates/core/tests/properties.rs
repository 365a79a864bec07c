use dclus_core::epsilon_approx::{halving_approx, verify_set_approx, BallRange, RangeTestFamily};
use dclus_core::geometry::{
    partition_cost, power_cost, CenterSet, ClusteringParams, ExtendedPointSet, Partition, SolverConfig, WeightedPointSet,
};
use dclus_core::io::{format_hex, parse_hex, parse_points_csv, points_csv, PointFile};
use dclus_core::ptas::{approx_solve, enumerate_partitions, exact_solve, PtasConfig};
use proptest::prelude::*;

fn rows(n: std::ops::Range<usize>, d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-100.0f64..100.0, d), n)
}

fn stirling2(n: u64, k: u64) -> u64 {
    if n == 0 && k == 0 {
        return 1;
    }
    if n == 0 || k == 0 {
        return 0;
    }
    k * stirling2(n - 1, k) + stirling2(n - 1, k - 1)
}

#[test]
fn partition_counts_match_stirling_sums() {
    for n in 1..=10usize {
        for k in 1..=4usize {
            let want: u64 = (1..=k as u64).map(|j| stirling2(n as u64, j)).sum();
            assert_eq!(enumerate_partitions(n, k).unwrap().count() as u64, want, "n={n} k={k}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cost_ignores_point_and_center_order(p in rows(1..40, 3), c in rows(1..6, 3), rot in 0usize..40) {
        let z = 1 + (rot % 3) as u32;
        let ps = WeightedPointSet::from_rows(&p).unwrap();
        let cs = CenterSet::from_rows(&c).unwrap();
        let mut p2 = p.clone();
        p2.rotate_left(rot % p.len());
        p2.reverse();
        let mut c2 = c.clone();
        c2.reverse();
        let a = power_cost(&ps, &cs, z).unwrap();
        let b = power_cost(&WeightedPointSet::from_rows(&p2).unwrap(), &CenterSet::from_rows(&c2).unwrap(), z).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn more_centers_never_cost_more(p in rows(1..30, 2), c in rows(1..4, 2), extra in rows(1..4, 2)) {
        let ps = WeightedPointSet::from_rows(&p).unwrap();
        let mut all = c.clone();
        all.extend(extra);
        let a = power_cost(&ps, &CenterSet::from_rows(&c).unwrap(), 2).unwrap();
        let b = power_cost(&ps, &CenterSet::from_rows(&all).unwrap(), 2).unwrap();
        prop_assert!(b <= a * (1.0 + 1e-12));
    }

    #[test]
    fn induced_centers_never_beat_the_partition(p in rows(2..25, 2), labels in prop::collection::vec(0usize..3, 25)) {
        let n = p.len();
        let ps = WeightedPointSet::from_rows(&p).unwrap();
        let part = Partition::new(labels[..n].to_vec(), 3).unwrap();
        let cfg = SolverConfig::default();
        let pc = partition_cost(&ps, &part, 2, &cfg).unwrap();
        let induced = power_cost(&ps, &pc.center_set().unwrap(), 2).unwrap();
        prop_assert!(induced <= pc.value * (1.0 + 1e-9) + 1e-9);
    }

    #[test]
    fn squared_extensions_add_up(p in rows(2..20, 2), ext in prop::collection::vec(0.0f64..10.0, 20), labels in prop::collection::vec(0usize..2, 20)) {
        let n = p.len();
        let base = WeightedPointSet::from_rows(&p).unwrap();
        let extended = ExtendedPointSet::new(base.clone(), ext[..n].to_vec()).unwrap();
        let part = Partition::new(labels[..n].to_vec(), 2).unwrap();
        let cfg = SolverConfig::default();
        let with = partition_cost(&extended, &part, 2, &cfg).unwrap().value;
        let without = partition_cost(&base, &part, 2, &cfg).unwrap().value;
        let sq: f64 = ext[..n].iter().map(|e| e * e).sum();
        prop_assert!((with - without - sq).abs() <= 1e-9 * with.max(1.0));
    }

    #[test]
    fn hex_round_trip(bits in any::<u64>()) {
        let x = f64::from_bits(bits);
        prop_assume!(x.is_finite());
        prop_assert_eq!(parse_hex(&format_hex(x)).map(f64::to_bits), Some(bits));
    }

    #[test]
    fn csv_round_trip(p in rows(1..20, 3), w in prop::collection::vec(0.0f64..5.0, 20)) {
        let n = p.len();
        let f = PointFile::from_extended(ExtendedPointSet::zero_extension(WeightedPointSet::from_weighted_rows(&p, w[..n].to_vec()).unwrap()));
        prop_assert_eq!(parse_points_csv(&points_csv(&f)).unwrap(), f);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn halving_meets_its_target(p in rows(20..120, 2), radii in prop::collection::vec(1.0f64..80.0, 10), eps in 0.05f64..0.4) {
        let ps = WeightedPointSet::from_rows(&p).unwrap();
        let ranges: Vec<BallRange> = radii
            .iter()
            .enumerate()
            .map(|(i, &r)| BallRange { centers: CenterSet::from_rows(&[p[i % p.len()].clone()]).unwrap(), radius: r })
            .collect();
        let tests = RangeTestFamily::explicit(ranges);
        let ground: Vec<usize> = (0..p.len()).collect();
        let a = halving_approx(&ps, &ground, eps, &tests).unwrap();
        prop_assert!(verify_set_approx(&ps, &ground, &a, &tests).unwrap() <= eps);
        prop_assert_eq!(halving_approx(&ps, &ground, eps, &tests).unwrap(), a);
    }

    #[test]
    fn approximation_is_feasible(p in rows(3..10, 2), z in 1u32..3) {
        let ps = WeightedPointSet::from_rows(&p).unwrap();
        let params = ClusteringParams::new(2, z, 0.3).unwrap();
        let cfg = PtasConfig::default();
        let a = approx_solve(&ps, &params, &cfg).unwrap();
        let e = exact_solve(&ps, &params, &cfg.solver).unwrap();
        prop_assert!(a.cost >= e.cost - 1e-9 * e.cost.max(1.0));
        prop_assert!((a.cost - power_cost(&ps, &a.centers, z).unwrap()).abs() <= 1e-9 * a.cost.max(1.0));
    }
}
