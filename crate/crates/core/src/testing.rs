use alloc::vec::Vec;

use rand::Rng;

use crate::instance::{DomainState, Instance};
use crate::varset::VarSet;

pub(crate) use crate::fixtures::running_example as example;

/// Live values restricted to zero cost.
pub(crate) fn zero_cost_domains(inst: &Instance) -> DomainState {
    DomainState::from_live(
        (0..inst.n())
            .map(|v| {
                (0..inst.domain(v).len() as u32)
                    .filter(|&i| inst.value(v, i).score == 0.0)
                    .collect()
            })
            .collect(),
    )
}

/// Up to `d` distinct parent sets per variable, members drawn with
/// probability `p`, integer costs in `0..=20`. The empty set is present
/// with probability 1/2.
pub(crate) fn random_instance<R: Rng>(rng: &mut R, n: usize, d: usize, p: f64) -> Instance {
    let domains = (0..n)
        .map(|v| {
            let mut values: Vec<(VarSet, f64)> = Vec::new();
            if rng.random_bool(0.5) {
                values.push((VarSet::new(), rng.random_range(0..=20) as f64));
            }
            let target = rng.random_range(1..=d);
            for _ in 0..4 * d {
                if values.len() >= target {
                    break;
                }
                let s: VarSet = (0..n).filter(|&u| u != v && rng.random_bool(p)).collect();
                if values.iter().all(|(t, _)| *t != s) {
                    values.push((s, rng.random_range(0..=20) as f64));
                }
            }
            values
        })
        .collect();
    Instance::from_costs(domains).unwrap()
}

/// Keeps each value with probability `keep`, never emptying a domain.
pub(crate) fn random_restriction<R: Rng>(rng: &mut R, inst: &Instance, keep: f64) -> DomainState {
    DomainState::from_live(
        (0..inst.n())
            .map(|v| {
                let len = inst.domain(v).len() as u32;
                let mut live: Vec<u32> = (0..len).filter(|_| rng.random_bool(keep)).collect();
                if live.is_empty() {
                    live.push(rng.random_range(0..len));
                }
                live
            })
            .collect(),
    )
}
