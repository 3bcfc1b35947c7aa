//! Continuous multifacility location: place `k` centers so that the total
//! Euclidean distance from every demand point to its assigned center is
//! minimal.
//!
//! The solver in [`mflp`] relaxes the binary assignment to the product of
//! simplices, smooths each distance term, penalizes fractional memberships
//! and runs a projected DC algorithm while annealing the smoothing
//! parameter. [`baselines`] holds k-means, Weiszfeld and an exhaustive
//! small-instance solver used for comparison, [`dca`] the generic DC
//! engines, and [`data`] CSV ingestion, generators and bundled instances.

pub mod baselines;
pub mod data;
pub mod dca;
pub mod geometry;
pub mod mflp;

pub use baselines::{brute_force_mflp, kmeans, weiszfeld, BruteForceResult, KMeansInit, KMeansResult};
pub use data::{DataError, DatasetSpec};
pub use geometry::{GeometryError, Mat};
pub use mflp::{
    solve, solve_multistart, Assignment, Centers, DemandSet, Init, MflpError, RhoPolicy,
    SolveResult, SolverConfig,
};
