//! Exact Bayesian network structure learning from precomputed local scores.
//!
//! The solver searches variable orders depth first. At each node it
//! enforces generalised arc consistency on acyclicity ([`acyclicity`]) and
//! bounds the remaining cost with a greedy dual of the cluster LP
//! relaxation ([`dual`]), strengthened by clusters discovered from the
//! zero-reduced-cost domains ([`cluster`]).
//!
//! The crate is `no_std` and only needs `alloc`; file formats, score
//! computation and the command line live in the `bnsl` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod acyclicity;
pub mod cluster;
pub mod dual;
pub mod fixtures;
pub mod instance;
pub mod oracle;
pub mod search;
pub mod varset;

#[cfg(test)]
mod testing;

pub use acyclicity::{
    acyc_checker, gac_probe, gac_propagate, is_satisfiable, OrderWitness, Violation,
};
pub use cluster::{
    lower_bound_rc, minimise_cluster, rc_restricted_domains, BoundOptions, LowerBound,
};
pub use dual::{
    dual_improve, dual_init, dual_solve, min_reduced_cost, ClusterOrder, ClusterPool, DualState,
    DualStats, EmptyCluster, PooledCluster,
};
pub use instance::{
    DomainState, Instance, InstanceError, ScoreConvention, ScoredValue, VariableId, Wipeout,
};
pub use search::{
    solve, solve_with, BoundEvent, Incumbent, Monitor, SearchStats, Solution, SolverConfig, Status,
};
pub use varset::VarSet;
