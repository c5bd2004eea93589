//! Navigation stack for ground robots on uneven 3D terrain.
//!
//! The pipeline has three stages:
//!
//! 1. **Global planning** ([`pf_rrt_star`]): an informed, rewired random tree
//!    over terrain surface points. Every tree node carries a local plane
//!    fitted to the point cloud around it ([`plane_fit`]) and a
//!    traversability score blending slope, flatness, and sparsity; edge costs
//!    are traversability-weighted.
//! 2. **Densification** ([`gpr`]): the sparse path is linearly interpolated
//!    and a Gaussian process trained on the whole sampling tree predicts
//!    traversability and its uncertainty at every interpolated waypoint.
//! 3. **Local tracking** ([`nmpc`]): a receding-horizon nonlinear MPC on a
//!    plane-scaled differential-drive model follows the dense path, scaling
//!    its control cost by the predicted traversability and uncertainty and
//!    keeping clear of sensed obstacles.
//!
//! [`terrain_map`] supplies the voxel grid map and point-cloud queries that
//! everything above runs on, [`sim`] closes the loop in a simulated world and
//! hosts the lazy-vs-precomputed analysis benchmark, and [`config`] carries
//! the validated configuration for the whole stack.

pub mod config;
pub mod gpr;
pub mod nmpc;
pub mod pf_rrt_star;
pub mod plane_fit;
pub mod sim;
pub mod terrain_map;
