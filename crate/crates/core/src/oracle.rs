//! Brute-force references for small instances.
//!
//! Nothing here shares code with the solver beyond the instance types.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::instance::{DomainState, Instance, VariableId};
use crate::search::Incumbent;
use crate::varset::VarSet;

/// Largest number of variables the order enumeration accepts.
pub const MAX_ORDER_VARIABLES: usize = 10;
/// Largest number of variables the cluster enumeration accepts.
pub const MAX_CLUSTER_VARIABLES: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
#[error("{n} variables exceed the oracle limit of {max}")]
pub struct TooLarge {
    pub n: usize,
    pub max: usize,
}

/// A cost with one `(variable, domain index)` choice per variable.
pub type Completion = (f64, Vec<(VariableId, u32)>);

/// Cheapest completion of `scope` when every other variable is already
/// placed: the best over all orders of `scope`, each variable taking its
/// cheapest live value inside its predecessors. Returns `(cost, choices)`
/// with one `(variable, domain index)` per scope member, or `None` if no
/// order works.
pub fn brute_force_completion(
    instance: &Instance,
    scope: &VarSet,
    domains: &DomainState,
) -> Result<Option<Completion>, TooLarge> {
    let k = scope.len();
    if k > MAX_ORDER_VARIABLES {
        return Err(TooLarge {
            n: k,
            max: MAX_ORDER_VARIABLES,
        });
    }
    let outside = instance.all_variables().difference(scope);
    let mut perm: Vec<VariableId> = scope.iter().collect();
    let mut best: Option<Completion> = None;
    let mut evaluate = |perm: &[VariableId]| {
        let mut before = outside.clone();
        let mut cost = 0.0;
        let mut choice = Vec::with_capacity(perm.len());
        for &v in perm {
            let mut pick: Option<(f64, u32)> = None;
            for &i in domains.live(v) {
                let s = instance.value(v, i);
                if s.parents.is_subset(&before) && pick.is_none_or(|(c, _)| s.score < c) {
                    pick = Some((s.score, i));
                }
            }
            let Some((c, i)) = pick else { return };
            cost += c;
            choice.push((v, i));
            before.insert(v);
        }
        if best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, choice));
        }
    };
    // Heap's algorithm, iterative form
    let mut counters = vec![0usize; k];
    evaluate(&perm);
    let mut i = 1;
    while i < k {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            evaluate(&perm);
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    Ok(best)
}

/// Optimal network by enumerating every variable order.
pub fn brute_force_optimum(instance: &Instance) -> Result<Option<Incumbent>, TooLarge> {
    let best = brute_force_completion(
        instance,
        &instance.all_variables(),
        &instance.full_domains(),
    )?;
    Ok(best.map(|(cost, choices)| {
        let mut parents = vec![0u32; instance.n()];
        for (v, i) in choices {
            parents[v] = i;
        }
        Incumbent { parents, cost }
    }))
}

/// Every non-empty `C ⊆ V` such that each live value of each member meets
/// `C`.
pub fn enumerate_violated_clusters(
    instance: &Instance,
    domains: &DomainState,
) -> Result<Vec<VarSet>, TooLarge> {
    let n = instance.n();
    if n > MAX_CLUSTER_VARIABLES {
        return Err(TooLarge {
            n,
            max: MAX_CLUSTER_VARIABLES,
        });
    }
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << n) {
        let c: VarSet = (0..n).filter(|&v| mask & (1 << v) != 0).collect();
        let violated = c.iter().all(|v| {
            domains
                .live(v)
                .iter()
                .all(|&i| instance.value(v, i).parents.intersects(&c))
        });
        if violated {
            out.push(c);
        }
    }
    Ok(out)
}
