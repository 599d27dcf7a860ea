//! Greedy dual solutions of the cluster LP relaxation.
//!
//! The dual vector itself is never stored. Instead every live value `(v, i)`
//! carries `delta[v][i]`, the part of its cost already moved into the bound,
//! so that its reduced cost is `score - delta`.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use thiserror::Error;

use crate::instance::{DomainState, Instance, VariableId};
use crate::varset::VarSet;

/// Clusters of at most this many variables are never evicted.
pub const ALWAYS_KEEP_SIZE: usize = 10;
/// Large clusters whose productive ratio falls below `1 / EVICT_RATIO` are
/// evicted.
pub const EVICT_RATIO: u64 = 1000;
/// Scans a cluster must have seen before it can be evicted.
pub const DEFAULT_MIN_TRIALS: u64 = 100;

/// No live value satisfies a cluster inequality: the current domains admit
/// no acyclic assignment.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("cluster {cluster:?} has no live value outside itself")]
pub struct EmptyCluster {
    pub cluster: VarSet,
}

/// Traversal order of the pool during [`dual_solve`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ClusterOrder {
    /// Smaller clusters first, then larger minimum original cost.
    #[default]
    Heuristic,
    /// Creation order.
    Chronological,
}

/// Applied cluster increment, kept for auditing the bound.
#[derive(Clone, Debug, PartialEq)]
pub struct Increment {
    pub members: VarSet,
    pub amount: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualState {
    delta: Vec<Vec<f64>>,
    delta_max: Vec<f64>,
    base: f64,
    bound: f64,
    log: Vec<Increment>,
}

impl DualState {
    /// Current dual objective.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// Sum of the minimum live costs of the scope variables.
    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn delta(&self, v: VariableId, index: u32) -> f64 {
        self.delta[v][index as usize]
    }

    pub fn delta_max(&self, v: VariableId) -> f64 {
        self.delta_max[v]
    }

    pub fn reduced_cost(&self, instance: &Instance, v: VariableId, index: u32) -> f64 {
        instance.value(v, index).score - self.delta(v, index)
    }

    /// Every cluster increment applied so far, in order.
    pub fn log(&self) -> &[Increment] {
        &self.log
    }

    fn apply(&mut self, instance: &Instance, domains: &DomainState, members: &VarSet, amount: f64) {
        for v in members.iter() {
            let mut max = f64::NEG_INFINITY;
            for &i in domains.live(v) {
                let d = &mut self.delta[v][i as usize];
                if !instance.value(v, i).parents.intersects(members) {
                    *d += amount;
                }
                max = max.max(*d);
            }
            self.delta_max[v] = max;
        }
        self.bound += amount;
        self.log.push(Increment {
            members: members.clone(),
            amount,
        });
    }
}

/// Counters describing pool scans.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DualStats {
    pub productive: u64,
    pub unproductive: u64,
    /// Unproductive scans settled by the support pair alone.
    pub support_hits: u64,
    /// Live values inspected by full scans.
    pub values_visited: u64,
    /// Live values of the member variables of fully scanned clusters.
    pub values_eligible: u64,
}

impl DualStats {
    pub fn support_hit_rate(&self) -> f64 {
        ratio(self.support_hits, self.unproductive)
    }

    pub fn visit_fraction(&self) -> f64 {
        ratio(self.values_visited, self.values_eligible)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PooledCluster {
    members: VarSet,
    size: usize,
    min_original_cost: f64,
    seq: u64,
    /// Value that gave the last minimum reduced cost.
    pub support: Option<(VariableId, u32)>,
    pub productive: u64,
    pub unproductive: u64,
}

impl PooledCluster {
    pub fn members(&self) -> &VarSet {
        &self.members
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Minimum cost over the full-domain values of the inequality.
    pub fn min_original_cost(&self) -> f64 {
        self.min_original_cost
    }

    fn heuristic_cmp(&self, other: &Self) -> Ordering {
        self.size
            .cmp(&other.size)
            .then_with(|| {
                other
                    .min_original_cost
                    .partial_cmp(&self.min_original_cost)
                    .unwrap_or(Ordering::Equal)
            })
            .then_with(|| self.seq.cmp(&other.seq))
    }

    fn evictable(&self, min_trials: u64) -> bool {
        let trials = self.productive + self.unproductive;
        self.size > ALWAYS_KEEP_SIZE
            && trials >= min_trials
            && self.productive * EVICT_RATIO < trials
    }
}

/// Deduplicated collection of cluster inequalities.
#[derive(Clone, Debug, Default)]
pub struct ClusterPool {
    entries: Vec<PooledCluster>,
    index: BTreeSet<VarSet>,
    order: ClusterOrder,
    next_seq: u64,
    evicted: u64,
}

impl ClusterPool {
    pub fn new(order: ClusterOrder) -> Self {
        Self {
            order,
            ..Self::default()
        }
    }

    pub fn order(&self) -> ClusterOrder {
        self.order
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in traversal order.
    pub fn entries(&self) -> &[PooledCluster] {
        &self.entries
    }

    pub fn contains(&self, members: &VarSet) -> bool {
        self.index.contains(members)
    }

    /// Number of clusters removed by eviction so far.
    pub fn evicted(&self) -> u64 {
        self.evicted
    }

    /// Adds a cluster unless an identical one is present. Returns whether
    /// it was added.
    pub fn insert(&mut self, instance: &Instance, members: VarSet) -> bool {
        if self.index.contains(&members) {
            return false;
        }
        let min_original_cost = members
            .iter()
            .flat_map(|v| instance.domain(v).iter())
            .filter(|s| !s.parents.intersects(&members))
            .map(|s| s.score)
            .fold(f64::INFINITY, f64::min);
        let entry = PooledCluster {
            size: members.len(),
            members: members.clone(),
            min_original_cost,
            seq: self.next_seq,
            support: None,
            productive: 0,
            unproductive: 0,
        };
        self.next_seq += 1;
        self.index.insert(members);
        match self.order {
            ClusterOrder::Chronological => self.entries.push(entry),
            ClusterOrder::Heuristic => {
                let at = self
                    .entries
                    .partition_point(|e| e.heuristic_cmp(&entry) == Ordering::Less);
                self.entries.insert(at, entry);
            }
        }
        true
    }

    /// Same clusters and counters, traversed in `order`.
    pub fn reordered(&self, order: ClusterOrder) -> ClusterPool {
        let mut pool = self.clone();
        pool.order = order;
        match order {
            ClusterOrder::Chronological => pool.entries.sort_by_key(|e| e.seq),
            ClusterOrder::Heuristic => pool.entries.sort_by(PooledCluster::heuristic_cmp),
        }
        pool
    }

    /// Drops large clusters that are rarely productive. Returns how many
    /// were removed.
    pub fn evict(&mut self, min_trials: u64) -> usize {
        let before = self.entries.len();
        let index = &mut self.index;
        self.entries.retain(|e| {
            let drop = e.evictable(min_trials);
            if drop {
                index.remove(&e.members);
            }
            !drop
        });
        let removed = before - self.entries.len();
        self.evicted += removed as u64;
        removed
    }
}

/// Dual solution of the LP without cluster rows: each variable's row takes
/// its minimum live cost.
pub fn dual_init(instance: &Instance, scope: &VarSet, domains: &DomainState) -> DualState {
    let n = instance.n();
    let mut delta: Vec<Vec<f64>> = (0..n)
        .map(|v| vec![0.0; instance.domain(v).len()])
        .collect();
    let mut delta_max = vec![0.0; n];
    let mut base = 0.0;
    for v in scope.iter() {
        let min = domains
            .min_live_score(instance, v)
            .expect("scope variable with an empty domain");
        delta[v].iter_mut().for_each(|d| *d = min);
        delta_max[v] = min;
        base += min;
    }
    DualState {
        delta,
        delta_max,
        base,
        bound: base,
        log: Vec::new(),
    }
}

/// Full scan for the minimum reduced cost over the live values of the
/// cluster inequality. `Ok(None)` cannot happen for a non-empty inequality;
/// an empty one is an error.
fn scan_min_rc(
    instance: &Instance,
    domains: &DomainState,
    dual: &DualState,
    members: &VarSet,
    stats: &mut DualStats,
) -> Result<(f64, (VariableId, u32)), EmptyCluster> {
    let eps = instance.eps();
    let mut best = f64::INFINITY;
    let mut arg = None;
    'vars: for v in members.iter() {
        let dmax = dual.delta_max(v);
        let live = domains.live(v);
        stats.values_eligible += live.len() as u64;
        for &i in live {
            let value = instance.value(v, i);
            if value.score - dmax >= best {
                break;
            }
            stats.values_visited += 1;
            if value.parents.intersects(members) {
                continue;
            }
            let rc = value.score - dual.delta(v, i);
            if rc < best {
                best = rc;
                arg = Some((v, i));
                if best <= eps {
                    break 'vars;
                }
            }
        }
    }
    match arg {
        Some(a) => Ok((best, a)),
        None => Err(EmptyCluster {
            cluster: members.clone(),
        }),
    }
}

/// Minimum reduced cost over the live values of a pooled cluster's
/// inequality, and the value attaining it (which becomes the new support).
/// A support pair that still has zero reduced cost settles the answer
/// without scanning.
pub fn min_reduced_cost(
    entry: &mut PooledCluster,
    instance: &Instance,
    domains: &DomainState,
    dual: &DualState,
    stats: &mut DualStats,
) -> Result<(f64, (VariableId, u32)), EmptyCluster> {
    if let Some((v, i)) = entry.support {
        if domains.live(v).binary_search(&i).is_ok() {
            let rc = dual.reduced_cost(instance, v, i);
            if rc <= instance.eps() {
                stats.support_hits += 1;
                return Ok((rc, (v, i)));
            }
        }
    }
    let found = scan_min_rc(instance, domains, dual, &entry.members, stats)?;
    entry.support = Some(found.1);
    Ok(found)
}

/// Greedy dual: start from [`dual_init`] and raise every pooled cluster
/// contained in `scope`, in pool order, by its minimum reduced cost.
pub fn dual_solve(
    instance: &Instance,
    scope: &VarSet,
    domains: &DomainState,
    pool: &mut ClusterPool,
    stats: &mut DualStats,
) -> Result<DualState, EmptyCluster> {
    let eps = instance.eps();
    let mut dual = dual_init(instance, scope, domains);
    for entry in pool.entries.iter_mut() {
        if !entry.members.is_subset(scope) {
            continue;
        }
        let (rc, _) = min_reduced_cost(entry, instance, domains, &dual, stats)?;
        if rc > eps {
            entry.productive += 1;
            stats.productive += 1;
            let members = entry.members.clone();
            dual.apply(instance, domains, &members, rc);
        } else {
            entry.unproductive += 1;
            stats.unproductive += 1;
        }
    }
    Ok(dual)
}

/// Raises the dual by a new cluster without revisiting earlier ones.
/// Returns the increment and its support.
///
/// # Panics
///
/// If `cluster` is not an RC-cluster, i.e. its minimum reduced cost is zero.
pub fn dual_improve(
    dual: &mut DualState,
    instance: &Instance,
    domains: &DomainState,
    cluster: &VarSet,
    stats: &mut DualStats,
) -> Result<(f64, (VariableId, u32)), EmptyCluster> {
    let (rc, support) = scan_min_rc(instance, domains, dual, cluster, stats)?;
    assert!(
        rc > instance.eps(),
        "cluster {cluster:?} has zero minimum reduced cost"
    );
    dual.apply(instance, domains, cluster, rc);
    Ok((rc, support))
}
