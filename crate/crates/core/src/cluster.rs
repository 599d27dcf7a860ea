//! Lower bounds from reduced-cost clusters.
//!
//! Under a feasible dual, keep only the values with zero reduced cost. If
//! those domains admit no acyclic assignment, the variables the checker
//! cannot place form a cluster whose inequality has strictly positive
//! reduced cost everywhere, and adding it raises the dual by that minimum.
//! The bound loop repeats this until the zero-cost values are acyclic.
//!
//! The result depends on the order in which clusters are discovered, so all
//! choices here are deterministic.

use alloc::vec::Vec;

use crate::acyclicity::{acyc_checker, placeable, OrderWitness};
use crate::dual::{dual_improve, dual_solve, ClusterPool, DualState, DualStats, EmptyCluster};
use crate::instance::{DomainState, Instance};
use crate::varset::VarSet;

/// Live values of scope variables with reduced cost at most `eps`. Other
/// variables keep their live values.
pub fn rc_restricted_domains(
    instance: &Instance,
    scope: &VarSet,
    domains: &DomainState,
    dual: &DualState,
) -> DomainState {
    let eps = instance.eps();
    let mut restricted = domains.clone();
    for v in scope.iter() {
        restricted
            .live_mut(v)
            .retain(|&i| dual.reduced_cost(instance, v, i) <= eps);
    }
    restricted
}

/// Deletion-based shrinking of a set that admits no acyclic assignment to a
/// subset-minimal one. Variables left out of the checked set count as
/// placed, so they may serve as parents. Candidates are tried largest index
/// first; after a failed omission the candidates shrink to the checker's
/// failure set.
///
/// # Panics
///
/// If `scope_hint` admits an acyclic assignment under `restricted`.
pub fn minimise_cluster(
    instance: &Instance,
    scope_hint: &VarSet,
    restricted: &DomainState,
) -> VarSet {
    let failing = |set: &VarSet| set.difference(&placeable(instance, set, restricted, None));
    assert!(
        !failing(scope_hint).is_empty(),
        "minimise_cluster called on a satisfiable set"
    );
    let mut necessary = VarSet::new();
    let mut candidates = scope_hint.clone();
    while let Some(c) = candidates.max_member() {
        candidates.remove(c);
        let rest = failing(&necessary.union(&candidates));
        if rest.is_empty() {
            necessary.insert(c);
        } else {
            candidates = rest.difference(&necessary);
        }
    }
    necessary
}

/// Knobs of [`lower_bound_rc`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundOptions {
    /// Shrink each discovered cluster before using it.
    pub minimise: bool,
    /// New clusters are still used for the bound but no longer pooled once
    /// the pool holds this many.
    pub pool_max: usize,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self {
            minimise: true,
            pool_max: usize::MAX,
        }
    }
}

/// Outcome of [`lower_bound_rc`].
#[derive(Clone, Debug)]
pub struct LowerBound {
    /// Valid lower bound on the cheapest acyclic assignment of the scope.
    pub bound: f64,
    pub dual: DualState,
    /// Zero-reduced-cost domains at termination; these admit an acyclic
    /// assignment.
    pub restricted: DomainState,
    /// Checker result on `restricted`; complete over the scope.
    pub order: OrderWitness,
    /// Clusters discovered by this call, with their increments.
    pub discovered: Vec<(VarSet, f64)>,
}

/// Dual bound over the pool, improved with newly discovered RC-clusters
/// until the zero-reduced-cost domains are acyclic. New clusters are added
/// to `pool`.
///
/// Fails when the domains themselves violate some cluster inequality.
pub fn lower_bound_rc(
    instance: &Instance,
    scope: &VarSet,
    domains: &DomainState,
    pool: &mut ClusterPool,
    options: BoundOptions,
    stats: &mut DualStats,
) -> Result<LowerBound, EmptyCluster> {
    let mut dual = dual_solve(instance, scope, domains, pool, stats)?;
    let mut discovered = Vec::new();
    loop {
        let restricted = rc_restricted_domains(instance, scope, domains, &dual);
        let order = acyc_checker(instance, scope, &restricted);
        let violated = order.unplaced(scope);
        if violated.is_empty() {
            return Ok(LowerBound {
                bound: dual.bound(),
                dual,
                restricted,
                order,
                discovered,
            });
        }
        let cluster = if options.minimise {
            minimise_cluster(instance, &violated, &restricted)
        } else {
            violated
        };
        let (amount, _) = dual_improve(&mut dual, instance, domains, &cluster, stats)?;
        if pool.len() < options.pool_max {
            pool.insert(instance, cluster.clone());
        }
        discovered.push((cluster, amount));
    }
}
