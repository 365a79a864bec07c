//! Exit criteria, one PASS/FAIL line each. Runs without the libtest harness
//! so the report is always printed.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use dclus_core::bicriteria::{bicriteria, BicriteriaConfig};
use dclus_core::dim_reduce::{cost_preserving_sketch, verify_sketch, SketchConfig, WitnessParams};
use dclus_core::epsilon_approx::{halving_approx, BallRange, RangeTestFamily};
use dclus_core::geometry::{
    cost_to_center, power_triangle_bound, solve_1center, CenterSet, ClusteringParams, Points, SolverConfig, WeightedPointSet,
};
use dclus_core::partition_coreset::{build, verify_partition_coreset, PartitionCoresetParams};
use dclus_core::ptas::{approx_solve, exact_solve, PtasConfig};
use dclus_core::ring_coreset::{ring_coreset, verify_offset_coreset, RingCoresetConfig, SetApproxMode};
use dclus_core::synth::{generate, GenConfig, Generator};
use dclus_core::verify::{center_grid, VerifyMode};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn random_rows(rng: &mut ChaCha8Rng, n: usize, d: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| rng.gen_range(lo..hi)).collect()).collect()
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn c1_power_triangle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0u64;
    let mut bad = 0u64;
    for _ in 0..10_000 {
        let pts = random_rows(&mut rng, 3, 3, -1.0, 1.0);
        let (dab, dac, dbc) = (euclid(&pts[0], &pts[1]), euclid(&pts[0], &pts[2]), euclid(&pts[1], &pts[2]));
        for z in 1..=4u32 {
            for eps in [0.05, 0.1, 0.3] {
                let (b1, b2) = power_triangle_bound(dab, dac, dbc, z, eps).expect("valid triangle");
                let (ab, ac) = (dab.powi(z as i32), dac.powi(z as i32));
                if !(ab <= b1 && (ab - ac).abs() <= b2) {
                    bad += 1;
                }
                checked += 1;
            }
        }
    }
    Outcome {
        pass: bad == 0,
        detail: format!("{checked} checks, {bad} violations"),
    }
}

/// Minimum of the summed distances over a lattice of spacing `step` centered at `c`.
fn grid_min(rows: &[Vec<f64>], c: [f64; 2], half: f64, step: f64) -> ([f64; 2], f64) {
    let steps = (half / step).round() as i64;
    let mut best = (c, f64::INFINITY);
    for i in -steps..=steps {
        for j in -steps..=steps {
            let q = [c[0] + i as f64 * step, c[1] + j as f64 * step];
            let v: f64 = rows.iter().map(|r| euclid(r, &q)).sum();
            if v < best.1 {
                best = (q, v);
            }
        }
    }
    best
}

fn c2_one_center() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cfg = SolverConfig::default();
    let mut worst_mean: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.gen_range(1..30);
        let d = rng.gen_range(1..6);
        let rows = random_rows(&mut rng, n, d, -10.0, 10.0);
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..5.0)).collect();
        let p = WeightedPointSet::from_weighted_rows(&rows, w.clone()).unwrap();
        let c = solve_1center(&p, 2, &cfg).unwrap();
        let total: f64 = w.iter().sum();
        for j in 0..d {
            let mean = rows.iter().zip(&w).map(|(r, wi)| r[j] * wi).sum::<f64>() / total;
            worst_mean = worst_mean.max((c.center[j] - mean).abs());
        }
    }
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(3..12);
        let rows = random_rows(&mut rng, n, 2, 0.0, 1.0);
        let p = WeightedPointSet::from_rows(&rows).unwrap();
        let c = solve_1center(&p, 1, &cfg).unwrap();
        let ours = cost_to_center(&p, &c.center, 1);
        let (coarse, _) = grid_min(&rows, [0.5, 0.5], 0.5, 5e-3);
        let (_, fine) = grid_min(&rows, coarse, 1e-2, 1e-4);
        worst_ratio = worst_ratio.max(ours / fine);
    }
    Outcome {
        pass: worst_mean <= 1e-12 && worst_ratio <= 1.0 + 1e-6,
        detail: format!("z=2 max |center - mean| {worst_mean:.3e}; z=1 max solver/grid {worst_ratio:.9}"),
    }
}

fn c3_partition_coreset() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pc = PartitionCoresetParams::practical(0.1, 3);
    let mut eligible = 0;
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for i in 0..50 {
        let n = rng.gen_range(4..=10);
        let d = rng.gen_range(1..=3);
        let z = 1 + (i % 2) as u32;
        let params = ClusteringParams::new(2, z, 0.3).unwrap();
        let p = WeightedPointSet::from_rows(&random_rows(&mut rng, n, d, -5.0, 5.0)).unwrap();
        let res = build(&p, &params, &pc).unwrap();
        if !res.only_exact_stops() {
            continue;
        }
        eligible += 1;
        let per_axis = [0, 16, 8, 5][d];
        let grid = center_grid(&p, per_axis, 0.1).unwrap();
        let rep = verify_partition_coreset(&p, &res, &params, &grid, VerifyMode::Exhaustive).unwrap();
        worst = worst.max(rep.max_relative_error);
        if rep.max_relative_error > 0.3 {
            failures += 1;
        }
    }
    Outcome {
        pass: failures == 0,
        detail: format!("{eligible}/50 instances with only stable or zero-cost stops, max error {worst:.4e}, {failures} above 0.3"),
    }
}

fn c4_sketch() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let pc = PartitionCoresetParams::practical(0.1, 3);
    let params = ClusteringParams::new(2, 2, 0.3).unwrap();
    let witness = WitnessParams::defaults(2, 0.3);
    let limit = 1.0 + 0.3 / 2.0;
    let mut worst_err: f64 = 0.0;
    let mut worst_dist: f64 = 1.0;
    let mut reduced = 0;
    let mut failures = 0;
    for _ in 0..30 {
        let n = rng.gen_range(3..=8);
        let p = WeightedPointSet::from_rows(&random_rows(&mut rng, n, 30, -1.0, 1.0)).unwrap();
        let s = cost_preserving_sketch(&p, &params, &pc, &witness, &SketchConfig::default()).unwrap();
        if !s.map.is_identity() {
            reduced += 1;
        }
        let rep = verify_sketch(&p, &s, &params, &SolverConfig::default(), VerifyMode::Exhaustive).unwrap();
        // Distortion recounted from the raw matrix.
        let rows: Vec<Vec<f64>> = match &s.net {
            Some(net) => net.rows(),
            None => s.coreset.representative_rows(),
        };
        let project = |v: &[f64]| -> Vec<f64> { (0..s.map.rows).map(|r| (0..s.map.cols).map(|c| s.map.matrix[r * s.map.cols + c] * v[c]).sum()).collect() };
        let imgs: Vec<Vec<f64>> = rows.iter().map(|r| project(r)).collect();
        let mut dist: f64 = 1.0;
        for a in 0..rows.len() {
            for b in a + 1..rows.len() {
                let o = euclid(&rows[a], &rows[b]);
                if o > 0.0 {
                    dist = dist.max(1.0 + (euclid(&imgs[a], &imgs[b]) / o - 1.0).abs());
                }
            }
        }
        let cert_ok = s.map.certificate.as_ref().is_some_and(|c| c.valid && c.max_distortion <= limit);
        worst_err = worst_err.max(rep.max_relative_error);
        worst_dist = worst_dist.max(dist);
        if rep.max_relative_error > 0.9 || dist > limit + 1e-12 || !cert_ok {
            failures += 1;
        }
    }
    Outcome {
        pass: failures == 0,
        detail: format!("max P-cost error {worst_err:.4e} (limit 0.9), max recounted distortion {worst_dist:.6} (limit {limit}), {reduced}/30 maps reduce dimension"),
    }
}

fn instance(i: u64, n: usize, d: usize) -> WeightedPointSet {
    let kind = [Generator::GaussianBlobs, Generator::Rings, Generator::FarPoint][(i % 3) as usize];
    generate(kind, &GenConfig { n, d, clusters: 2 + (i % 3) as usize, seed: 500 + i }).unwrap()
}

fn c5_offset_coreset() -> Outcome {
    let mut det_worst: f64 = 0.0;
    let mut det_fail = 0;
    let mut rand_fail = 0;
    let mut ring_branch = 0;
    let mut sizes = Vec::new();
    for i in 0..30u64 {
        let p = instance(i, 200, 2);
        let z = 1 + (i % 2) as u32;
        let params = ClusteringParams::new(2, z, 0.3).unwrap();
        let grid = center_grid(&p, 10, 0.1).unwrap();
        let det = ring_coreset(&p, &params, &RingCoresetConfig::default()).unwrap();
        if det.rings.is_some() {
            ring_branch += 1;
        }
        sizes.push(det.coreset.len());
        let e = verify_offset_coreset(&p, &det.coreset, &params, &grid, VerifyMode::Exhaustive).unwrap().max_relative_error;
        det_worst = det_worst.max(e);
        if e > 0.3 {
            det_fail += 1;
        }
        let cfg = RingCoresetConfig {
            mode: SetApproxMode::Randomized { seed: i, delta: 0.1, c: 2.0 },
            ..Default::default()
        };
        let rnd = ring_coreset(&p, &params, &cfg).unwrap();
        if verify_offset_coreset(&p, &rnd.coreset, &params, &grid, VerifyMode::Exhaustive).unwrap().max_relative_error > 0.3 {
            rand_fail += 1;
        }
    }
    sizes.sort_unstable();
    Outcome {
        pass: det_fail == 0 && rand_fail * 5 <= 30,
        detail: format!(
            "deterministic max error {det_worst:.4e} ({det_fail} above 0.3), randomized failures {rand_fail}/30, median size {}, ring branch on {ring_branch}/30",
            sizes[15]
        ),
    }
}

fn c6_ring_structure() -> Outcome {
    let mut checked = 0;
    let mut with_rings = 0;
    let mut problems = Vec::new();
    for i in 0..30u64 {
        let p = instance(i, 200, 2);
        let z = 1 + (i % 2) as u32;
        let params = ClusteringParams::new(2, z, 0.3).unwrap();
        for factor in [None, Some(2.0)] {
            let cfg = RingCoresetConfig {
                baseline_factor: factor,
                ..Default::default()
            };
            let out = ring_coreset(&p, &params, &cfg).unwrap();
            checked += 1;
            let total = out.coreset.total_weight_exact();
            if total != BigRational::from_integer(BigInt::from(p.len())) {
                problems.push(format!("instance {i}: total weight {total}"));
            }
            let Some(rings) = &out.rings else {
                if out.coreset.offset != 0.0 {
                    problems.push(format!("instance {i}: low-cost offset {}", out.coreset.offset));
                }
                continue;
            };
            with_rings += 1;
            let markov = (0.3 / z as f64).powi(2 * z as i32);
            let mut outer_cost = 0.0;
            for (ci, c) in rings.clusters.iter().enumerate() {
                if c.outer.len() as f64 > markov * c.members.len() as f64 {
                    problems.push(format!("instance {i} cluster {ci}: {} outer of {}", c.outer.len(), c.members.len()));
                }
                let center = out.seeding.g.center(ci);
                for &o in &c.outer {
                    outer_cost += euclid(p.coords(o), center).powi(z as i32);
                }
            }
            let f = out.coreset.offset;
            if (f - outer_cost).abs() > 1e-12 * outer_cost.max(1.0) {
                problems.push(format!("instance {i}: offset {f} vs recount {outer_cost}"));
            }
        }
    }
    Outcome {
        pass: problems.is_empty(),
        detail: if problems.is_empty() {
            format!("{checked} coresets ({with_rings} through the ring branch): outer counts, offsets and weights hold")
        } else {
            problems.join("; ")
        },
    }
}

fn c7_sandwich() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut approx_bad, mut bic_low, mut bic_high) = (0, 0, 0);
    let mut worst_ratio: f64 = 0.0;
    let mut min_bic: f64 = f64::INFINITY;
    let sandwich = 1.3 / 0.7;
    for i in 0..25 {
        let n = rng.gen_range(6..=12);
        let z = 1 + (i % 2) as u32;
        let params = ClusteringParams::new(2, z, 0.3).unwrap();
        let p = instance(i as u64 + 100, n, 2);
        let exact = exact_solve(&p, &params, &SolverConfig::default()).unwrap().cost;
        let a = approx_solve(&p, &params, &PtasConfig::default()).unwrap();
        if a.downgraded || a.cost < exact - 1e-9 || a.cost > sandwich * exact + 1e-9 {
            approx_bad += 1;
        }
        worst_ratio = worst_ratio.max(a.cost / exact);
        let b = bicriteria(&p, &params, &BicriteriaConfig::default()).unwrap().cost;
        min_bic = min_bic.min(b / exact);
        if b < exact {
            bic_low += 1;
        }
        if b > 1.3 * exact + 1e-9 {
            bic_high += 1;
        }
    }
    Outcome {
        pass: approx_bad == 0 && bic_low == 0 && bic_high == 0,
        detail: format!(
            "approx outside [exact, {sandwich:.4} exact] on {approx_bad}/25 (worst ratio {worst_ratio:.6}); bicriteria below exact on {bic_low}/25 (min ratio {min_bic:.4}), above 1.3 exact on {bic_high}/25"
        ),
    }
}

fn run_chain(dir: &Path, tag: &str, threads: Option<&str>, seed: u64) -> Vec<Vec<u8>> {
    let exe = env!("CARGO_BIN_EXE_dclus");
    let f = |name: &str| dir.join(format!("{tag}-{name}")).to_string_lossy().into_owned();
    let steps: Vec<Vec<String>> = vec![
        vec!["gen".into(), "--blobs".into(), "3".into(), "--n".into(), "80".into(), "--d".into(), "2".into(), "--seed".into(), seed.to_string(), "--out".into(), f("points.csv")],
        vec!["coreset".into(), "build".into(), "--input".into(), f("points.csv"), "--k".into(), "2".into(), "--z".into(), "2".into(), "--eps".into(), "0.3".into(), "--mode".into(), "det".into(), "--out".into(), f("coreset.csv")],
        vec!["solve".into(), "ptas".into(), "--input".into(), f("points.csv"), "--k".into(), "2".into(), "--z".into(), "2".into(), "--eps".into(), "0.3".into(), "--out".into(), f("ptas.json")],
        vec!["solve".into(), "bicriteria".into(), "--input".into(), f("points.csv"), "--k".into(), "2".into(), "--out".into(), f("bic.json")],
        vec!["sketch".into(), "build".into(), "--input".into(), f("points.csv"), "--k".into(), "2".into(), "--out".into(), f("sketch.json")],
        vec!["coreset".into(), "verify".into(), "--input".into(), f("points.csv"), "--coreset".into(), f("coreset.csv"), "--out".into(), f("report.json")],
    ];
    for s in &steps {
        let mut cmd = Command::new(exe);
        cmd.args(s).env_remove("DCLUS_THREADS");
        if let Some(t) = threads {
            cmd.env("DCLUS_THREADS", t);
        }
        let out = cmd.output().expect("run dclus");
        assert!(out.status.success(), "{s:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    }
    ["points.csv", "coreset.csv", "ptas.json", "bic.json", "sketch.json", "report.json"].iter().map(|n| std::fs::read(f(n)).unwrap()).collect()
}

fn c8_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut mismatches = Vec::new();
    for seed in 0..5u64 {
        let base = run_chain(dir.path(), &format!("{seed}-a"), None, seed);
        for (tag, t) in [("b", None), ("t1", Some("1")), ("t4", Some("4"))] {
            if run_chain(dir.path(), &format!("{seed}-{tag}"), t, seed) != base {
                mismatches.push(format!("seed {seed} run {tag}"));
            }
        }
    }
    Outcome {
        pass: mismatches.is_empty(),
        detail: if mismatches.is_empty() {
            "5 instances x 4 runs (default, repeat, 1 thread, 4 threads): all outputs byte-identical".into()
        } else {
            format!("differences: {}", mismatches.join(", "))
        },
    }
}

fn c9_halving() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_margin = f64::NEG_INFINITY;
    let mut not_smaller = 0;
    let mut bad = 0;
    for i in 0..20 {
        let eps_prime = [0.05, 0.1, 0.2, 0.3][i % 4];
        let rows = random_rows(&mut rng, 256, 2, 0.0, 1.0);
        let p = WeightedPointSet::from_rows(&rows).unwrap();
        let ranges: Vec<BallRange> = (0..50)
            .map(|_| BallRange {
                centers: CenterSet::from_rows(&random_rows(&mut rng, 2, 2, 0.0, 1.0)).unwrap(),
                radius: rng.gen_range(0.05..0.6),
            })
            .collect();
        let tests = RangeTestFamily::explicit(ranges.clone());
        let ground: Vec<usize> = (0..256).collect();
        let a = halving_approx(&p, &ground, eps_prime, &tests).unwrap();
        // Independent recount of the densities.
        let inside = |i: usize, r: &BallRange| r.centers.iter().all(|c| euclid(&rows[i], c) >= r.radius);
        let mut dev: f64 = 0.0;
        for r in &ranges {
            let full = ground.iter().filter(|&&g| inside(g, r)).count() as f64 / 256.0;
            let part = a.indices.iter().filter(|&&g| inside(g, r)).count() as f64 / a.indices.len() as f64;
            dev = dev.max((full - part).abs());
        }
        worst_margin = worst_margin.max(dev - eps_prime);
        if dev > eps_prime {
            bad += 1;
        }
        if eps_prime >= 0.2 && a.indices.len() >= 256 {
            not_smaller += 1;
        }
    }
    Outcome {
        pass: bad == 0 && not_smaller == 0,
        detail: format!("{bad}/20 above eps', max (deviation - eps') {worst_margin:.4}, {not_smaller} not reduced at eps' >= 0.2"),
    }
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome, u64); 9] = [
        (1, "power triangle inequalities", c1_power_triangle, 5),
        (2, "1-center oracle equivalence", c2_one_center, 60),
        (3, "partition coreset verification", c3_partition_coreset, 600),
        (4, "cost-preserving sketch", c4_sketch, 600),
        (5, "offset coreset guarantee", c5_offset_coreset, 900),
        (6, "ring structure", c6_ring_structure, 300),
        (7, "approximation sandwich", c7_sandwich, 900),
        (8, "determinism", c8_determinism, 300),
        (9, "set approximation by halving", c9_halving, 120),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, f, limit) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let t = Instant::now();
        let o = f();
        let elapsed = t.elapsed();
        let in_time = elapsed <= Duration::from_secs(limit);
        let pass = o.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {id} ({name}): {} [{:.2}s of {limit}s]",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
