//! Geometry of Gr(d,n): projection metric, principal angles, greedy nets,
//! near-orthogonal subsets, cones and the greedy cluster decomposition.

mod angles;
mod cluster;
mod net;
mod subspace;

pub use angles::{principal_angles, PrincipalDecomposition, ZERO_ANGLE_TOL};
pub use cluster::{
    cluster_decompose, cone_membership, cone_membership_with, near_orthogonal_subset, overlap_threshold,
    pair_minimizer, CandidatePolicy, ClusterDecomposition, NearOrthogonal, CONE_NARROW, CONE_WIDE,
};
pub use net::{default_stop_after, greedy_net, greedy_net_with_budget, sphere_net, DirectionSet, Provenance};
pub use subspace::{metric_distance, random_rotation, Subspace};
pub(crate) use subspace::orthonormalize;
