//! Cost-preserving sketches: witness nets over partition-coreset
//! representatives, a certified distance-preserving map, and assembly.

mod jl;
mod net;
mod sketch;

pub use jl::{certify, derandomized_jl, start_dim, JlConfig, JlStrategy};
pub use net::{build_net, hull_cover, hull_cover_count, net_size_bound, orthonormal_basis, subset_count, NetKind, NetSource, WitnessNet, WitnessParams};
pub use sketch::{cost_preserving_sketch, verify_sketch, CostPreservingSketch, SketchConfig, SketchVerifyReport};
