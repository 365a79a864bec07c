//! Recursive extension partition coreset with a structural stopping rule.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::bicriteria::{bicriteria, coord_scale, BicriteriaConfig, Quantizer};
use crate::error::{input, Error, Result};
use crate::geometry::{
    assign, cost_to_center, dist, one_center, ClusteringParams, ExtendedPointSet, IndexView, Points, WeightedPointSet,
};
use crate::par;
use crate::ptas::{check_budget, RgsIter};
use crate::verify::{tuples_with_repetition, VerifyMode};
use crate::geometry::CenterSet;

/// Stability threshold `eps^(z+6) / (401408 * 2^(3z) * z^(z+6))`.
pub fn alpha_threshold(z: u32, eps: f64) -> f64 {
    let z = z as i32;
    eps.powi(z + 6) / (401408.0 * 2f64.powi(3 * z) * (z as f64).powi(z + 6))
}

/// `(m, |p - m|)`.
pub fn extension_map(p: &[f64], m: &[f64]) -> Result<(Vec<f64>, f64)> {
    if p.len() != m.len() {
        return input("dimension mismatch");
    }
    Ok((m.to_vec(), dist(p, m)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PcMode {
    PaperConstants,
    Practical,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionCoresetParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: u64,
    pub mode: PcMode,
    /// Children per node are capped at `fanout_per_k * k`.
    pub fanout_per_k: usize,
    pub bicriteria: BicriteriaConfig,
}

impl PartitionCoresetParams {
    pub fn practical(beta: f64, gamma: u64) -> Self {
        Self {
            alpha: beta,
            beta,
            gamma,
            mode: PcMode::Practical,
            fanout_per_k: 64,
            bicriteria: BicriteriaConfig::default(),
        }
    }

    pub fn paper_constants(z: u32, eps: f64) -> Self {
        let alpha = alpha_threshold(z, eps);
        let beta = alpha / 2.0;
        let zf = z as f64;
        let gamma = (zf * (8.0 * zf * zf / eps).ln() / beta.ln_1p()).ceil();
        Self {
            alpha,
            beta,
            gamma: if gamma >= u64::MAX as f64 { u64::MAX } else { gamma as u64 },
            mode: PcMode::PaperConstants,
            fanout_per_k: 64,
            bicriteria: BicriteriaConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta <= self.alpha) {
            return input("need 0 < beta <= alpha");
        }
        if self.gamma < 1 {
            return input("gamma must be at least 1");
        }
        if self.fanout_per_k == 0 {
            return input("fan-out cap must be positive");
        }
        Ok(())
    }
}

impl Default for PartitionCoresetParams {
    fn default() -> Self {
        Self::practical(0.1, 3)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Stable,
    MaxDepth,
    /// The cluster already has cost 0 around its center.
    Leaf,
    /// Dropped by the fan-out cap; mapped like a max-depth stop.
    Truncated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceNode {
    pub parent: Option<usize>,
    pub depth: u64,
    pub size: usize,
    /// `None` while the node recursed into children.
    pub stop: Option<StopReason>,
    pub representative: usize,
    /// `cost(C, {m})`.
    pub cost_center: f64,
    /// `cost(C, S)` for the bicriteria solution, when one was computed.
    pub cost_solution: Option<f64>,
    pub children: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionCoresetResult {
    pub dim: usize,
    /// Distinct representatives, row-major.
    pub representatives: Vec<f64>,
    /// Per input point: (representative index, extension).
    pub mapping: Vec<(usize, f64)>,
    pub trace: Vec<TraceNode>,
    pub params_used: (f64, f64, u64),
    pub truncated: bool,
}

impl PartitionCoresetResult {
    pub fn representative(&self, r: usize) -> &[f64] {
        &self.representatives[r * self.dim..(r + 1) * self.dim]
    }

    pub fn representative_count(&self) -> usize {
        self.representatives.len() / self.dim
    }

    pub fn representative_rows(&self) -> Vec<Vec<f64>> {
        self.representatives.chunks_exact(self.dim).map(|r| r.to_vec()).collect()
    }

    /// The image `f(p) = (g(p), g(p)')` of every input point, with the input weights.
    pub fn extended<P: Points + ?Sized>(&self, p: &P) -> ExtendedPointSet {
        let mut data = Vec::with_capacity(self.mapping.len() * self.dim);
        let mut ext = Vec::with_capacity(self.mapping.len());
        for &(r, e) in &self.mapping {
            data.extend_from_slice(self.representative(r));
            ext.push(e);
        }
        let w = (0..p.len()).map(|i| p.weight(i)).collect();
        ExtendedPointSet::new(WeightedPointSet::new(self.dim, data, w).expect("finite"), ext).expect("finite")
    }

    /// True when every stop is stable or a cost-0 leaf.
    pub fn only_exact_stops(&self) -> bool {
        self.trace
            .iter()
            .all(|n| matches!(n.stop, None | Some(StopReason::Stable) | Some(StopReason::Leaf)))
    }

    /// Number of input points mapped to each representative.
    pub fn multiplicities(&self) -> Vec<usize> {
        let mut out = vec![0; self.representative_count()];
        for &(r, _) in &self.mapping {
            out[r] += 1;
        }
        out
    }
}

struct Pending {
    members: Vec<usize>,
    center: Vec<f64>,
    depth: u64,
    parent: Option<usize>,
}

enum Outcome {
    Stop(StopReason, f64, Option<f64>),
    Split {
        cost_center: f64,
        cost_solution: f64,
        children: Vec<(Vec<usize>, Vec<f64>)>,
        truncated: Vec<(Vec<usize>, Vec<f64>)>,
    },
}

fn process<P: Points + ?Sized>(
    p: &P,
    node: &Pending,
    params: &ClusteringParams,
    pc: &PartitionCoresetParams,
    sub: &ClusteringParams,
) -> Result<Outcome> {
    let view = IndexView::new(p, &node.members);
    let cost_center = cost_to_center(&view, &node.center, params.z);
    if cost_center == 0.0 || !(view.total_weight() > 0.0) {
        return Ok(Outcome::Stop(StopReason::Leaf, cost_center, None));
    }
    let sol = bicriteria(&view, sub, &pc.bicriteria)?;
    let cost_solution = sol.cost;
    if cost_center - cost_solution <= pc.beta * cost_center {
        return Ok(Outcome::Stop(StopReason::Stable, cost_center, Some(cost_solution)));
    }
    if node.depth >= pc.gamma {
        return Ok(Outcome::Stop(StopReason::MaxDepth, cost_center, Some(cost_solution)));
    }
    let a = assign(&view, &sol.centers, params.z);
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); sol.centers.len()];
    let mut costs = vec![0.0; sol.centers.len()];
    for (local, &(j, c)) in a.iter().enumerate() {
        groups[j].push(node.members[local]);
        costs[j] += view.weight(local) * c;
    }
    let mut clusters: Vec<(usize, Vec<usize>)> = groups.into_iter().enumerate().filter(|(_, g)| !g.is_empty()).collect();
    let cap = pc.fanout_per_k * params.k;
    let mut truncated = Vec::new();
    if clusters.len() > cap {
        let mut order: Vec<usize> = (0..clusters.len()).collect();
        order.sort_by(|&x, &y| costs[clusters[x].0].total_cmp(&costs[clusters[y].0]).then(x.cmp(&y)));
        let mut keep = vec![false; clusters.len()];
        for &o in &order[..cap] {
            keep[o] = true;
        }
        let all = std::mem::take(&mut clusters);
        for (o, c) in all.into_iter().enumerate() {
            if keep[o] {
                clusters.push(c);
            } else {
                truncated.push((c.1, sol.centers.center(c.0).to_vec()));
            }
        }
    }
    let children = clusters.into_iter().map(|(j, g)| (g, sol.centers.center(j).to_vec())).collect();
    Ok(Outcome::Split {
        cost_center,
        cost_solution,
        children,
        truncated,
    })
}

/// Builds the coreset level by level; sibling nodes run in parallel and the
/// trace lists nodes by (depth, parent, child index).
pub fn build<P: Points + ?Sized>(p: &P, params: &ClusteringParams, pc: &PartitionCoresetParams) -> Result<PartitionCoresetResult> {
    params.validate()?;
    pc.validate()?;
    if p.is_empty() {
        return input("partition coreset needs at least one point");
    }
    if !(p.total_weight() > 0.0) {
        return input("partition coreset needs positive total weight");
    }
    if !(pc.beta <= 1.0 / 3.0) {
        return input("beta must not exceed 1/3");
    }
    let sub = params.with_epsilon(pc.beta);
    let root = one_center(p, params.z, &pc.bicriteria.solver)?.center;
    let q = Quantizer::for_scale(coord_scale(p));
    let mut reps: Vec<f64> = Vec::new();
    let mut rep_index: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut rep_of = |c: &[f64], reps: &mut Vec<f64>| -> usize {
        let key = q.key(c);
        let next = rep_index.len();
        *rep_index.entry(key).or_insert_with(|| {
            reps.extend_from_slice(c);
            next
        })
    };
    let mut mapping = vec![(usize::MAX, 0.0); p.len()];
    let mut trace: Vec<TraceNode> = Vec::new();
    let mut truncated_any = false;
    let mut level = vec![Pending {
        members: (0..p.len()).collect(),
        center: root,
        depth: 0,
        parent: None,
    }];
    while !level.is_empty() {
        let outcomes = par::map_slice(&level, |node| process(p, node, params, pc, &sub));
        let mut next = Vec::new();
        for (node, out) in level.into_iter().zip(outcomes) {
            let id = trace.len();
            if let Some(par_id) = node.parent {
                trace[par_id].children.push(id);
            }
            let r = rep_of(&node.center, &mut reps);
            let emit = |mapping: &mut Vec<(usize, f64)>, members: &[usize], center: &[f64], r: usize, with_ext: bool| {
                for &i in members {
                    let e = if with_ext { dist(p.coords(i), center) } else { 0.0 };
                    mapping[i] = (r, e);
                }
            };
            match out? {
                Outcome::Stop(reason, cc, cs) => {
                    let with_ext = matches!(reason, StopReason::Stable | StopReason::Leaf);
                    emit(&mut mapping, &node.members, &node.center, r, with_ext);
                    trace.push(TraceNode {
                        parent: node.parent,
                        depth: node.depth,
                        size: node.members.len(),
                        stop: Some(reason),
                        representative: r,
                        cost_center: cc,
                        cost_solution: cs,
                        children: Vec::new(),
                    });
                }
                Outcome::Split {
                    cost_center,
                    cost_solution,
                    children,
                    truncated,
                } => {
                    trace.push(TraceNode {
                        parent: node.parent,
                        depth: node.depth,
                        size: node.members.len(),
                        stop: None,
                        representative: r,
                        cost_center,
                        cost_solution: Some(cost_solution),
                        children: Vec::new(),
                    });
                    for (members, center) in children {
                        next.push(Pending {
                            members,
                            center,
                            depth: node.depth + 1,
                            parent: Some(id),
                        });
                    }
                    for (members, center) in truncated {
                        truncated_any = true;
                        let tid = trace.len();
                        trace[id].children.push(tid);
                        let tr = rep_of(&center, &mut reps);
                        emit(&mut mapping, &members, &center, tr, false);
                        trace.push(TraceNode {
                            parent: Some(id),
                            depth: node.depth + 1,
                            size: members.len(),
                            stop: Some(StopReason::Truncated),
                            representative: tr,
                            cost_center: cost_to_center(&IndexView::new(p, &members), &center, params.z),
                            cost_solution: None,
                            children: Vec::new(),
                        });
                    }
                }
            }
        }
        level = next;
    }
    debug_assert!(mapping.iter().all(|m| m.0 != usize::MAX));
    Ok(PartitionCoresetResult {
        dim: p.dim(),
        representatives: reps,
        mapping,
        trace,
        params_used: (pc.alpha, pc.beta, pc.gamma),
        truncated: truncated_any,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub max_relative_error: f64,
    /// Worst (assignment, center tuple) when the error exceeds epsilon.
    pub witness: Option<(Vec<usize>, Vec<usize>)>,
    pub partitions_checked: u64,
    pub tuples_per_partition: u64,
}

/// Compares partition costs of the coreset image against the input over
/// every partition (or a sample) and every ordered `k`-tuple of grid centers.
pub fn verify_partition_coreset<P: Points + ?Sized>(
    p: &P,
    result: &PartitionCoresetResult,
    params: &ClusteringParams,
    grid: &CenterSet,
    mode: VerifyMode,
) -> Result<VerifyReport> {
    let n = p.len();
    let k = params.k;
    if result.mapping.len() != n {
        return input("coreset mapping does not match the point set");
    }
    if grid.len() < k {
        return input("center grid has fewer than k centers");
    }
    if grid.dim() != p.dim() {
        return input("grid dimension differs from point dimension");
    }
    if mode == VerifyMode::Exhaustive {
        if n > 12 || k > 3 {
            return Err(Error::Budget {
                what: "exhaustive partition verification",
                required: n.max(k) as u128,
                allowed: 12,
            });
        }
        check_budget(n, k)?;
    }
    let image = result.extended(p);
    let g = grid.len();
    let z = params.z;
    // Weighted per-point, per-grid-center costs for input and image.
    let orig: Vec<Vec<f64>> = par::map_range(n, |i| grid.iter().map(|c| p.weight(i) * crate::geometry::point_cost(p, i, c, z)).collect());
    let core: Vec<Vec<f64>> = par::map_range(n, |i| grid.iter().map(|c| image.base.weights()[i] * crate::geometry::point_cost(&image, i, c, z)).collect());
    let partitions: Vec<Vec<usize>> = match mode {
        VerifyMode::Exhaustive => {
            let mut it = RgsIter::new(n, k);
            let mut all = Vec::new();
            while let Some(a) = it.next_rgs() {
                all.push(a.to_vec());
            }
            all
        }
        VerifyMode::Sampled { samples, seed } => {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            (0..samples).map(|_| (0..n).map(|_| rng.gen_range(0..k)).collect()).collect()
        }
    };
    let tuples: Vec<Vec<usize>> = tuples_with_repetition(g, k).collect();
    let per = par::map_slice(&partitions, |a| {
        let mut so = vec![vec![0.0; g]; k];
        let mut sc = vec![vec![0.0; g]; k];
        for (i, &part) in a.iter().enumerate() {
            for t in 0..g {
                so[part][t] += orig[i][t];
                sc[part][t] += core[i][t];
            }
        }
        let mut worst = (0.0f64, 0usize);
        for (ti, t) in tuples.iter().enumerate() {
            let mut o = 0.0;
            let mut c = 0.0;
            for (part, &s) in t.iter().enumerate() {
                o += so[part][s];
                c += sc[part][s];
            }
            let err = if o == 0.0 {
                if c == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                (c - o).abs() / o
            };
            if err > worst.0 {
                worst = (err, ti);
            }
        }
        worst
    });
    let mut best = (0.0f64, None);
    for (pi, &(err, ti)) in per.iter().enumerate() {
        if err > best.0 {
            best = (err, Some((pi, ti)));
        }
    }
    let witness = match best.1 {
        Some((pi, ti)) if best.0 > params.epsilon => Some((partitions[pi].clone(), tuples[ti].clone())),
        _ => None,
    };
    Ok(VerifyReport {
        max_relative_error: best.0,
        witness,
        partitions_checked: partitions.len() as u64,
        tuples_per_partition: tuples.len() as u64,
    })
}
