//! The acyclicity constraint over parent-set variables.
//!
//! Every function takes a `scope`: the variables that must be placed in an
//! order. Variables outside the scope are treated as already placed, so a
//! parent set may freely reference them.

use alloc::vec::Vec;

use thiserror::Error;

use crate::instance::{DomainState, Instance, VariableId};
use crate::varset::VarSet;

/// A (possibly partial) placement order with the value that justified each
/// placement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderWitness {
    /// Placed variables, in placement order.
    pub order: Vec<VariableId>,
    /// Domain index of the witnessing parent set, parallel to `order`.
    pub witness: Vec<u32>,
    placed: VarSet,
}

impl OrderWitness {
    /// The placed variables as a set.
    pub fn placed(&self) -> &VarSet {
        &self.placed
    }

    /// Variables of `scope` that could not be placed. Non-empty iff the
    /// checker failed; every live value of these variables meets the set.
    pub fn unplaced(&self, scope: &VarSet) -> VarSet {
        scope.difference(&self.placed)
    }

    pub fn is_complete(&self, scope: &VarSet) -> bool {
        scope.is_subset(&self.placed)
    }
}

/// The acyclicity constraint cannot be satisfied; `set` is a subset of the
/// scope in which every live parent set meets `set`.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("acyclicity violated on {set:?}")]
pub struct Violation {
    pub set: VarSet,
}

fn outside(instance: &Instance, scope: &VarSet) -> VarSet {
    instance.all_variables().difference(scope)
}

/// Greedy acyclicity checker producing a witness order.
///
/// Repeatedly places a variable that owns a live parent set contained in
/// the already placed variables (plus everything outside `scope`). When
/// several variables are placeable, the one whose first fitting live value
/// sits earliest in its domain goes first, ties going to the larger index.
/// The witness of a placed variable is its first fitting live value. The
/// set of placed variables is the same for every choice rule; only the
/// sequence depends on it.
pub fn acyc_checker(instance: &Instance, scope: &VarSet, domains: &DomainState) -> OrderWitness {
    let mut allowed = outside(instance, scope);
    let mut remaining: Vec<VariableId> = scope.iter().collect();
    // position in live(v) of the first value contained in `allowed`
    let mut rank: Vec<Option<usize>> = remaining
        .iter()
        .map(|&v| first_fit(instance, domains, v, &allowed, domains.live(v).len()))
        .collect();
    let mut order = Vec::with_capacity(remaining.len());
    let mut witness = Vec::with_capacity(remaining.len());
    loop {
        let mut pick: Option<(usize, usize)> = None;
        for (k, r) in rank.iter().enumerate() {
            if let Some(r) = *r {
                // `remaining` is ascending, so `<=` prefers larger indices
                if pick.is_none_or(|(_, best)| r <= best) {
                    pick = Some((k, r));
                }
            }
        }
        let Some((k, r)) = pick else { break };
        let v = remaining.remove(k);
        rank.remove(k);
        order.push(v);
        witness.push(domains.live(v)[r]);
        allowed.insert(v);
        for (u, slot) in remaining.iter().zip(rank.iter_mut()) {
            let limit = slot.unwrap_or(domains.live(*u).len());
            if let Some(earlier) = first_fit(instance, domains, *u, &allowed, limit) {
                *slot = Some(earlier);
            }
        }
    }
    let placed = order.iter().copied().collect();
    OrderWitness {
        order,
        witness,
        placed,
    }
}

fn first_fit(
    instance: &Instance,
    domains: &DomainState,
    v: VariableId,
    allowed: &VarSet,
    limit: usize,
) -> Option<usize> {
    domains.live(v)[..limit]
        .iter()
        .position(|&i| instance.value(v, i).parents.is_subset(allowed))
}

/// Least fixpoint of the greedy placement: the variables of `scope` that the
/// checker places. `fixed` overrides the live values of one variable with a
/// single value.
pub(crate) fn placeable(
    instance: &Instance,
    scope: &VarSet,
    domains: &DomainState,
    fixed: Option<(VariableId, u32)>,
) -> VarSet {
    let mut allowed = outside(instance, scope);
    let mut changes = true;
    while changes {
        changes = false;
        for v in scope.iter() {
            if allowed.contains(v) {
                continue;
            }
            let fits = |i: &u32| instance.value(v, *i).parents.is_subset(&allowed);
            let ok = match fixed {
                Some((fv, fi)) if fv == v => fits(&fi),
                _ => domains.live(v).iter().any(fits),
            };
            if ok {
                allowed.insert(v);
                changes = true;
            }
        }
    }
    allowed.intersection(scope)
}

/// Whether some acyclic assignment of `scope` exists under `domains`.
pub fn is_satisfiable(instance: &Instance, scope: &VarSet, domains: &DomainState) -> bool {
    scope.is_subset(&placeable(instance, scope, domains, None))
}

/// Grows `prefix` with every candidate that has a live value inside it,
/// until nothing changes. Candidates are scanned in the given order.
pub(crate) fn push_closure(
    instance: &Instance,
    domains: &DomainState,
    mut prefix: VarSet,
    candidates: &[VariableId],
) -> VarSet {
    let mut changes = true;
    while changes {
        changes = false;
        for &w in candidates {
            if prefix.contains(w) {
                continue;
            }
            if domains
                .live(w)
                .iter()
                .any(|&i| instance.value(w, i).parents.is_subset(&prefix))
            {
                prefix.insert(w);
                changes = true;
            }
        }
    }
    prefix
}

/// Enforces generalised arc consistency on acyclicity in `O(n^3 d)`.
///
/// One checker call gives an order `O`. For each `v`, the prefix of `v` in
/// `O` is grown by every later variable that can still be placed without
/// `v`; values of `v` outside that grown prefix have no acyclic support.
pub fn gac_propagate(
    instance: &Instance,
    scope: &VarSet,
    domains: &DomainState,
) -> Result<DomainState, Violation> {
    let witness = acyc_checker(instance, scope, domains);
    if !witness.is_complete(scope) {
        return Err(Violation {
            set: witness.unplaced(scope),
        });
    }
    let order = &witness.order;
    let mut prefix = outside(instance, scope);
    let mut pruned = domains.clone();
    for (i, &v) in order.iter().enumerate() {
        let grown = push_closure(instance, domains, prefix.clone(), &order[i + 1..]);
        let live = pruned.live_mut(v);
        live.retain(|&s| instance.value(v, s).parents.is_subset(&grown));
        // the witness of v lies inside its own prefix
        debug_assert!(!live.is_empty());
        prefix.insert(v);
    }
    Ok(pruned)
}

/// Reference GAC by probing: a value is kept iff fixing it leaves the
/// constraint satisfiable. `O(n^3 d^2)`.
pub fn gac_probe(
    instance: &Instance,
    scope: &VarSet,
    domains: &DomainState,
) -> Result<DomainState, Violation> {
    let root = placeable(instance, scope, domains, None);
    if !scope.is_subset(&root) {
        return Err(Violation {
            set: scope.difference(&root),
        });
    }
    let mut pruned = domains.clone();
    for v in scope.iter() {
        let kept: Vec<u32> = domains
            .live(v)
            .iter()
            .copied()
            .filter(|&i| scope.is_subset(&placeable(instance, scope, domains, Some((v, i)))))
            .collect();
        pruned.set_live(v, kept);
    }
    Ok(pruned)
}
