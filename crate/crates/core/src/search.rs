//! Depth-first branch and bound over variable orders.
//!
//! A node fixes a prefix of the order. Each placed variable takes its
//! cheapest live parent set inside the prefix, so only the order is
//! branched on. The remaining variables form the node's scope. The cheapest
//! completion of a scope does not depend on how the prefix was ordered,
//! which makes bounds cacheable by scope.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::acyclicity::{gac_propagate, is_satisfiable};
use crate::cluster::{lower_bound_rc, BoundOptions, LowerBound};
use crate::dual::{ClusterOrder, ClusterPool, DualStats, DEFAULT_MIN_TRIALS};
use crate::instance::{DomainState, Instance, VariableId};
use crate::varset::VarSet;

/// Best network found: one domain index per variable.
#[derive(Clone, Debug, PartialEq)]
pub struct Incumbent {
    pub parents: Vec<u32>,
    pub cost: f64,
}

impl Incumbent {
    pub fn parent_set<'a>(&self, instance: &'a Instance, v: VariableId) -> &'a VarSet {
        &instance.value(v, self.parents[v]).parents
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Enforce GAC on acyclicity at every node; otherwise only check it.
    pub gac: bool,
    pub cluster_order: ClusterOrder,
    pub minimise: bool,
    /// Compute the cluster bound only at depths divisible by this.
    pub lb_every_k: usize,
    pub pool_max: usize,
    /// Maximum number of cached scopes.
    pub cache_budget: usize,
    /// Evict after this many node-level dual solves.
    pub eviction_period: u64,
    pub min_trials: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            gac: true,
            cluster_order: ClusterOrder::Heuristic,
            minimise: true,
            lb_every_k: 1,
            pool_max: usize::MAX,
            cache_budget: 1 << 20,
            eviction_period: 1000,
            min_trials: DEFAULT_MIN_TRIALS,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    /// The incumbent is optimal.
    Optimal,
    /// No acyclic network exists.
    Infeasible,
    /// Stopped early; the incumbent, if any, is the best found.
    Interrupted,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SearchStats {
    pub nodes: u64,
    pub root_bound: Option<f64>,
    pub bound_calls: u64,
    pub clusters_generated: u64,
    pub clusters_evicted: u64,
    pub clusters_kept: u64,
    pub gac_prunings: u64,
    pub cache_hits: u64,
    pub incumbent_updates: u64,
    pub dual: DualStats,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub status: Status,
    pub incumbent: Option<Incumbent>,
    pub stats: SearchStats,
    /// Cluster pool at the end of the search.
    pub pool: ClusterPool,
}

/// Data handed to [`Monitor::on_bound`] after each cluster bound.
pub struct BoundEvent<'a> {
    pub placed: &'a VarSet,
    pub scope: &'a VarSet,
    /// Cost of the values fixed for the placed variables.
    pub committed: f64,
    /// Domains the bound was computed on.
    pub domains: &'a DomainState,
    pub lower: &'a LowerBound,
}

/// Hooks into a running search.
pub trait Monitor {
    /// Polled once per node.
    fn should_stop(&mut self) -> bool {
        false
    }

    fn on_bound(&mut self, _event: &BoundEvent<'_>) {}
}

impl Monitor for () {}

pub fn solve(instance: &Instance, config: &SolverConfig) -> Solution {
    solve_with(instance, config, &mut ())
}

pub fn solve_with<M: Monitor>(
    instance: &Instance,
    config: &SolverConfig,
    monitor: &mut M,
) -> Solution {
    let mut search = Search {
        instance,
        config,
        monitor,
        eps: instance.eps(),
        pool: ClusterPool::new(config.cluster_order),
        cache: BTreeMap::new(),
        incumbent: None,
        stats: SearchStats::default(),
        path: Vec::with_capacity(instance.n()),
        stopped: false,
        node_bounds: 0,
    };
    let all = instance.all_variables();
    let root = instance.full_domains();
    let status = if !is_satisfiable(instance, &all, &root) {
        Status::Infeasible
    } else {
        search.greedy_dive(&root);
        search.dfs(&all, &VarSet::new(), 0.0, root);
        match (search.stopped, &search.incumbent) {
            (true, _) => Status::Interrupted,
            (false, Some(_)) => Status::Optimal,
            (false, None) => Status::Infeasible,
        }
    };
    search.stats.clusters_evicted = search.pool.evicted();
    search.stats.clusters_kept = search.pool.len() as u64;
    Solution {
        status,
        incumbent: search.incumbent,
        stats: search.stats,
        pool: search.pool,
    }
}

struct Search<'a, M> {
    instance: &'a Instance,
    config: &'a SolverConfig,
    monitor: &'a mut M,
    eps: f64,
    pool: ClusterPool,
    cache: BTreeMap<VarSet, f64>,
    incumbent: Option<Incumbent>,
    stats: SearchStats,
    /// `(variable, value)` of every placed variable, in order.
    path: Vec<(VariableId, u32)>,
    stopped: bool,
    node_bounds: u64,
}

/// Cheapest live value of `v` inside `placed`, with its cost.
fn best_fit(
    instance: &Instance,
    domains: &DomainState,
    v: VariableId,
    placed: &VarSet,
) -> Option<(u32, f64)> {
    domains.live(v).iter().find_map(|&i| {
        let s = instance.value(v, i);
        s.parents.is_subset(placed).then_some((i, s.score))
    })
}

impl<M: Monitor> Search<'_, M> {
    fn cutoff(&self) -> f64 {
        self.incumbent
            .as_ref()
            .map_or(f64::INFINITY, |inc| inc.cost - self.eps)
    }

    fn offer(&mut self, tail: &[(VariableId, u32)]) {
        let mut parents = vec![0u32; self.instance.n()];
        for &(v, i) in self.path.iter().chain(tail) {
            parents[v] = i;
        }
        let cost = self.instance.network_cost(&parents);
        if cost < self.cutoff() {
            debug_assert!(self.instance.is_acyclic(&parents));
            self.incumbent = Some(Incumbent { parents, cost });
            self.stats.incumbent_updates += 1;
        }
    }

    /// Candidates for the next position, by increasing regret, then index.
    fn candidates(
        &self,
        scope: &VarSet,
        placed: &VarSet,
        domains: &DomainState,
    ) -> Vec<(VariableId, u32, f64)> {
        let mut out: Vec<(VariableId, u32, f64, f64)> = scope
            .iter()
            .filter_map(|v| {
                let (i, c) = best_fit(self.instance, domains, v, placed)?;
                let min = domains.min_live_score(self.instance, v)?;
                Some((v, i, c, c - min))
            })
            .collect();
        out.sort_by(|a, b| a.3.total_cmp(&b.3).then(a.0.cmp(&b.0)));
        out.into_iter().map(|(v, i, c, _)| (v, i, c)).collect()
    }

    fn greedy_dive(&mut self, root: &DomainState) {
        let mut scope = self.instance.all_variables();
        let mut placed = VarSet::new();
        let mut tail = Vec::with_capacity(self.instance.n());
        while !scope.is_empty() {
            let Some(&(v, i, _)) = self.candidates(&scope, &placed, root).first() else {
                return;
            };
            tail.push((v, i));
            scope.remove(v);
            placed.insert(v);
        }
        self.offer(&tail);
    }

    /// Searches the completions of `scope` and returns a lower bound on the
    /// cheapest one.
    fn dfs(
        &mut self,
        scope: &VarSet,
        placed: &VarSet,
        committed: f64,
        domains: DomainState,
    ) -> f64 {
        if self.stopped || self.monitor.should_stop() {
            self.stopped = true;
            return 0.0;
        }
        self.stats.nodes += 1;
        if scope.is_empty() {
            if committed < self.cutoff() {
                self.offer(&[]);
            }
            return 0.0;
        }
        let cached = self.cache.get(scope).copied().unwrap_or(0.0);
        if committed + cached >= self.cutoff() {
            self.stats.cache_hits += 1;
            return cached;
        }

        let domains = if self.config.gac {
            match gac_propagate(self.instance, scope, &domains) {
                Ok(pruned) => {
                    self.stats.gac_prunings += (domains.live_count() - pruned.live_count()) as u64;
                    pruned
                }
                Err(_) => return self.store(scope, f64::INFINITY),
            }
        } else if is_satisfiable(self.instance, scope, &domains) {
            domains
        } else {
            return self.store(scope, f64::INFINITY);
        };

        let depth = self.instance.n() - scope.len();
        let mut bound = if depth.is_multiple_of(self.config.lb_every_k.max(1)) {
            match self.cluster_bound(scope, placed, committed, &domains, depth) {
                Some(b) => b,
                None => return self.store(scope, f64::INFINITY),
            }
        } else {
            scope
                .iter()
                .filter_map(|v| domains.min_live_score(self.instance, v))
                .sum()
        };
        bound = bound.max(cached);
        if committed + bound >= self.cutoff() {
            return self.store(scope, bound);
        }

        let mut best_child = f64::INFINITY;
        for (v, i, cost) in self.candidates(scope, placed, &domains) {
            if committed + cost >= self.cutoff() {
                best_child = best_child.min(cost);
                continue;
            }
            let mut child = domains.clone();
            child.assign(v, i);
            let mut child_scope = scope.clone();
            child_scope.remove(v);
            let mut child_placed = placed.clone();
            child_placed.insert(v);
            self.path.push((v, i));
            let sub = self.dfs(&child_scope, &child_placed, committed + cost, child);
            self.path.pop();
            best_child = best_child.min(cost + sub);
            if self.stopped {
                return bound;
            }
        }
        self.store(scope, bound.max(best_child))
    }

    fn cluster_bound(
        &mut self,
        scope: &VarSet,
        placed: &VarSet,
        committed: f64,
        domains: &DomainState,
        depth: usize,
    ) -> Option<f64> {
        let options = BoundOptions {
            minimise: self.config.minimise,
            pool_max: self.config.pool_max,
        };
        let lower = lower_bound_rc(
            self.instance,
            scope,
            domains,
            &mut self.pool,
            options,
            &mut self.stats.dual,
        )
        .ok();
        self.stats.bound_calls += 1;
        if depth == 0 {
            self.stats.root_bound = Some(lower.as_ref().map_or(f64::INFINITY, |l| l.bound));
            self.pool.evict(self.config.min_trials);
        } else {
            self.node_bounds += 1;
            if self
                .node_bounds
                .is_multiple_of(self.config.eviction_period.max(1))
            {
                self.pool.evict(self.config.min_trials);
            }
        }
        let lower = lower?;
        self.stats.clusters_generated += lower.discovered.len() as u64;
        self.monitor.on_bound(&BoundEvent {
            placed,
            scope,
            committed,
            domains,
            lower: &lower,
        });
        if committed + lower.bound < self.cutoff() {
            self.complete_along(&lower, placed, domains);
        }
        Some(lower.bound)
    }

    /// Turns the witness order of the zero-reduced-cost domains into a full
    /// network and offers it as incumbent.
    fn complete_along(&mut self, lower: &LowerBound, placed: &VarSet, domains: &DomainState) {
        let mut before = placed.clone();
        let mut tail = Vec::with_capacity(lower.order.order.len());
        for &v in &lower.order.order {
            let Some((i, _)) = best_fit(self.instance, domains, v, &before) else {
                return;
            };
            tail.push((v, i));
            before.insert(v);
        }
        self.offer(&tail);
    }

    fn store(&mut self, scope: &VarSet, bound: f64) -> f64 {
        if let Some(b) = self.cache.get_mut(scope) {
            *b = b.max(bound);
        } else if self.cache.len() < self.config.cache_budget {
            self.cache.insert(scope.clone(), bound);
        }
        bound
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::brute_force_optimum;
    use crate::testing::{example, random_instance};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn running_example_is_closed_at_the_root() {
        let inst = example();
        let sol = solve(&inst, &SolverConfig::default());
        assert_eq!(sol.status, Status::Optimal);
        let inc = sol.incumbent.unwrap();
        assert_eq!(inc.cost, 10.0);
        assert_eq!(sol.stats.root_bound, Some(10.0));
        assert_eq!(sol.stats.nodes, 1);
        let expect: [&[usize]; 5] = [&[2], &[2, 4], &[], &[0], &[2, 3]];
        for (v, e) in expect.iter().enumerate() {
            assert_eq!(
                inc.parent_set(&inst, v),
                &e.iter().copied().collect::<VarSet>()
            );
        }
    }

    #[test]
    fn single_variable() {
        let inst = Instance::from_costs(vec![vec![(VarSet::new(), 4.5)]]).unwrap();
        let sol = solve(&inst, &SolverConfig::default());
        assert_eq!(sol.status, Status::Optimal);
        assert_eq!(sol.incumbent.unwrap().cost, 4.5);
    }

    #[test]
    fn cyclic_only_instance_is_infeasible() {
        let inst = Instance::from_costs(vec![
            vec![(VarSet::singleton(1), 0.0)],
            vec![(VarSet::singleton(0), 0.0)],
        ])
        .unwrap();
        let sol = solve(&inst, &SolverConfig::default());
        assert_eq!(sol.status, Status::Infeasible);
        assert!(sol.incumbent.is_none());
    }

    struct StopAfter(u64);

    impl Monitor for StopAfter {
        fn should_stop(&mut self) -> bool {
            if self.0 == 0 {
                return true;
            }
            self.0 -= 1;
            false
        }
    }

    #[test]
    fn interruption_keeps_greedy_incumbent() {
        let inst = example();
        let sol = solve_with(&inst, &SolverConfig::default(), &mut StopAfter(0));
        assert_eq!(sol.status, Status::Interrupted);
        let inc = sol.incumbent.unwrap();
        assert!(inst.is_acyclic(&inc.parents));
        assert_eq!(inc.cost, inst.network_cost(&inc.parents));
    }

    #[test]
    fn matches_oracle_under_every_configuration() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let configs = [
            SolverConfig::default(),
            SolverConfig {
                gac: false,
                ..SolverConfig::default()
            },
            SolverConfig {
                cluster_order: ClusterOrder::Chronological,
                ..SolverConfig::default()
            },
            SolverConfig {
                minimise: false,
                ..SolverConfig::default()
            },
            SolverConfig {
                lb_every_k: 2,
                cache_budget: 0,
                ..SolverConfig::default()
            },
        ];
        for _ in 0..150 {
            let inst = random_instance(&mut rng, 5, 6, 0.35);
            let oracle = brute_force_optimum(&inst).unwrap();
            for config in &configs {
                let sol = solve(&inst, config);
                match &oracle {
                    None => assert_eq!(sol.status, Status::Infeasible),
                    Some(best) => {
                        assert_eq!(sol.status, Status::Optimal);
                        let inc = sol.incumbent.unwrap();
                        assert!((inc.cost - best.cost).abs() <= inst.eps());
                        assert!(inst.is_acyclic(&inc.parents));
                    }
                }
            }
        }
    }
}
