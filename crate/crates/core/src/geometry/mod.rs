//! Power-cost geometry: distances, (k,z) costs, partition costs and
//! 1-center solvers.

mod center;
mod cost;
mod triangle;
mod types;

pub use center::{one_center, solve_1center, solve_1center_constrained, weighted_mean, OneCenter, SolverConfig};
pub use cost::{
    assign, check_dims, cost_to_center, dist, nearest, partition_cost, point_cost, pow_half, power_cost, sq_dist,
    PartitionCost,
};
pub(crate) use cost::power_cost_unchecked;
pub use triangle::power_triangle_bound;
pub use types::{ClusteringParams, CenterSet, ExtendedPointSet, IndexView, Partition, Points, WeightedPointSet};
