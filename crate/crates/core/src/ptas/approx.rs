use super::exact::{best_partition, centers_for};
use super::{check_budget, Method, SolveResult};
use crate::bicriteria::bicriteria;
use crate::error::{input, Error, Result};
use crate::geometry::{assign, one_center, power_cost, CenterSet, ClusteringParams, IndexView, Points, SolverConfig};
use crate::ring_coreset::{euclidean_pipeline, PipelineConfig, PipelineResult};

#[derive(Clone, Debug, PartialEq, Default)]
pub struct PtasConfig {
    pub pipeline: PipelineConfig,
    pub solver: SolverConfig,
}

/// Best clustering of the offset coreset, lifted back to the input: each
/// input point follows its sketched image to the nearest coreset-space
/// center, then every part gets its own optimal center in the input space.
/// Falls back to the bicriteria solver, flagged, when a budget is exceeded.
pub fn approx_solve<P: Points + ?Sized>(p: &P, params: &ClusteringParams, cfg: &PtasConfig) -> Result<SolveResult> {
    params.validate()?;
    if p.is_empty() {
        return input("empty point set");
    }
    match enumerate_and_lift(p, params, cfg) {
        Err(Error::Budget { .. }) => {
            let b = bicriteria(p, params, &cfg.pipeline.ring.bicriteria)?;
            Ok(SolveResult {
                cost: b.cost,
                centers: b.centers,
                method: Method::Bicriteria,
                enumeration_stats: b.candidate_count as u64,
                downgraded: true,
            })
        }
        other => other,
    }
}

fn enumerate_and_lift<P: Points + ?Sized>(p: &P, params: &ClusteringParams, cfg: &PtasConfig) -> Result<SolveResult> {
    let PipelineResult { sketch, output } = euclidean_pipeline(p, params, &cfg.pipeline)?;
    let core = &output.coreset.points;
    let k = params.k.min(core.len());
    check_budget(core.len(), k)?;
    let (a, _, examined) = best_partition(core, k, params.z, &cfg.solver)?;
    let sketch_centers = centers_for(core, &a, k, params.z, &cfg.solver)?;
    let images = sketch.sketched(p);
    let induced = assign(&images, &sketch_centers, params.z);
    let mut members = vec![Vec::new(); sketch_centers.len()];
    for (i, &(c, _)) in induced.iter().enumerate() {
        members[c].push(i);
    }
    let mut rows = Vec::with_capacity(members.len());
    for m in members.iter().filter(|m| !m.is_empty()) {
        let view = IndexView::new(p, m);
        if view.total_weight() > 0.0 {
            rows.push(one_center(&view, params.z, &cfg.solver)?.center);
        }
    }
    let centers = CenterSet::from_rows(&rows)?;
    let cost = power_cost(p, &centers, params.z)?;
    Ok(SolveResult {
        centers,
        cost,
        method: Method::Ptas,
        enumeration_stats: examined,
        downgraded: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WeightedPointSet;
    use crate::ptas::exact_solve;

    #[test]
    fn identical_blobs_cost_zero() {
        let mut rows = vec![vec![1.0, 1.0]; 6];
        rows.extend(vec![vec![-4.0, 2.5]; 6]);
        let p = WeightedPointSet::from_rows(&rows).unwrap();
        let params = ClusteringParams::new(2, 2, 0.3).unwrap();
        let r = approx_solve(&p, &params, &PtasConfig::default()).unwrap();
        assert_eq!(r.cost, 0.0);
        assert_eq!(r.method, Method::Ptas);
    }

    #[test]
    fn small_input_matches_exact() {
        let rows: Vec<Vec<f64>> = [0.0, 0.4, 1.1, 5.0, 5.3, 6.2, 9.0, 9.1, 2.2, 7.7].iter().map(|&x| vec![x, (x * 1.7f64).sin()]).collect();
        let p = WeightedPointSet::from_rows(&rows).unwrap();
        let params = ClusteringParams::new(2, 2, 0.3).unwrap();
        let cfg = PtasConfig::default();
        let a = approx_solve(&p, &params, &cfg).unwrap();
        let e = exact_solve(&p, &params, &cfg.solver).unwrap();
        assert!(!a.downgraded);
        assert!(a.cost >= e.cost * (1.0 - 1e-9));
        assert!(a.cost <= 1.3 / 0.7 * e.cost + 1e-9);
    }
}
