use super::{ring_coreset, RingCoresetConfig, RingCoresetOutput};
use crate::dim_reduce::{cost_preserving_sketch, CostPreservingSketch, SketchConfig, WitnessParams};
use crate::error::Result;
use crate::geometry::{ClusteringParams, Points};
use crate::partition_coreset::PartitionCoresetParams;

#[derive(Clone, Debug, PartialEq, Default)]
pub struct PipelineConfig {
    pub partition: PartitionCoresetParams,
    /// Defaults to `WitnessParams::defaults(z, eps)`.
    pub witness: Option<WitnessParams>,
    pub sketch: SketchConfig,
    pub ring: RingCoresetConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineResult {
    /// Needed to lift solutions back to the input space.
    pub sketch: CostPreservingSketch,
    pub output: RingCoresetOutput,
}

/// Partition coreset, cost-preserving sketch, then a ring coreset of the
/// sketched points; centers live in the projected space with extension 0.
pub fn euclidean_pipeline<P: Points + ?Sized>(p: &P, params: &ClusteringParams, cfg: &PipelineConfig) -> Result<PipelineResult> {
    params.validate()?;
    let witness = cfg.witness.clone().unwrap_or_else(|| WitnessParams::defaults(params.z, params.epsilon));
    let sketch = cost_preserving_sketch(p, params, &cfg.partition, &witness, &cfg.sketch)?;
    let sketched = sketch.sketched(p);
    let output = ring_coreset(&sketched, params, &cfg.ring)?;
    Ok(PipelineResult { sketch, output })
}
