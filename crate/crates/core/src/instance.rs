//! Problem instances and search-time domains.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use thiserror::Error;

use crate::varset::{VarSet, MAX_VARIABLES};

/// Dense variable index in `0..n`.
pub type VariableId = usize;

/// How the scores of an input file are to be read.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScoreConvention {
    /// Scores are non-negative costs; smaller is better.
    Cost,
    /// Scores are log-likelihood style; larger is better. Each variable's
    /// scores become costs `best(v) - score`.
    LogLikelihood,
}

/// A candidate parent set together with its cost.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredValue {
    pub parents: VarSet,
    /// Normalised, non-negative cost.
    pub score: f64,
    /// The score as it was given on input.
    pub raw: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error("instance has {0} variables, at most {MAX_VARIABLES} are supported")]
    TooManyVariables(usize),
    #[error("{names} names given for {domains} domains")]
    NameCount { names: usize, domains: usize },
    #[error("variable `{name}` has no candidate parent sets")]
    EmptyDomain { name: String },
    #[error("variable `{name}` lists itself as a parent")]
    SelfParent { name: String },
    #[error("variable `{name}` references unknown parent index {parent}")]
    UnknownParent { name: String, parent: usize },
    #[error("variable `{name}` lists the same parent set twice")]
    DuplicateParentSet { name: String },
    #[error("variable `{name}` has a non-finite score")]
    NonFiniteScore { name: String },
    #[error("variable `{name}` has negative cost {score}")]
    NegativeCost { name: String, score: f64 },
}

/// An immutable BNSL instance: candidate parent sets per variable, each
/// domain sorted by ascending cost (ties by numeric bitset value).
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    names: Vec<String>,
    domains: Vec<Vec<ScoredValue>>,
    convention: ScoreConvention,
    eps: f64,
}

impl Instance {
    pub fn new(
        names: Vec<String>,
        domains: Vec<Vec<(VarSet, f64)>>,
        convention: ScoreConvention,
    ) -> Result<Self, InstanceError> {
        let n = domains.len();
        if n > MAX_VARIABLES {
            return Err(InstanceError::TooManyVariables(n));
        }
        if names.len() != n {
            return Err(InstanceError::NameCount {
                names: names.len(),
                domains: n,
            });
        }
        let mut sorted = Vec::with_capacity(n);
        let mut largest = 0.0f64;
        for (v, raw_domain) in domains.into_iter().enumerate() {
            let name = || names[v].clone();
            if raw_domain.is_empty() {
                return Err(InstanceError::EmptyDomain { name: name() });
            }
            let mut best = f64::NEG_INFINITY;
            for (parents, score) in &raw_domain {
                if !score.is_finite() {
                    return Err(InstanceError::NonFiniteScore { name: name() });
                }
                if parents.contains(v) {
                    return Err(InstanceError::SelfParent { name: name() });
                }
                if let Some(p) = parents.max_member().filter(|&p| p >= n) {
                    return Err(InstanceError::UnknownParent {
                        name: name(),
                        parent: p,
                    });
                }
                best = best.max(*score);
            }
            let mut values = Vec::with_capacity(raw_domain.len());
            for (parents, raw) in raw_domain {
                let score = match convention {
                    ScoreConvention::Cost => {
                        if raw < 0.0 {
                            return Err(InstanceError::NegativeCost {
                                name: name(),
                                score: raw,
                            });
                        }
                        raw
                    }
                    ScoreConvention::LogLikelihood => best - raw,
                };
                largest = largest.max(score);
                values.push(ScoredValue {
                    parents,
                    score,
                    raw,
                });
            }
            values.sort_by(|a, b| {
                a.score
                    .partial_cmp(&b.score)
                    .unwrap_or(Ordering::Equal)
                    .then_with(|| a.parents.cmp(&b.parents))
            });
            let mut sets: Vec<&VarSet> = values.iter().map(|s| &s.parents).collect();
            sets.sort();
            if sets.windows(2).any(|w| w[0] == w[1]) {
                return Err(InstanceError::DuplicateParentSet { name: name() });
            }
            sorted.push(values);
        }
        Ok(Self {
            names,
            domains: sorted,
            convention,
            eps: 1e-9 * largest.max(1.0),
        })
    }

    /// Builds a cost-convention instance with names `0..n`.
    pub fn from_costs(domains: Vec<Vec<(VarSet, f64)>>) -> Result<Self, InstanceError> {
        let names = (0..domains.len()).map(|v| alloc::format!("{v}")).collect();
        Self::new(names, domains, ScoreConvention::Cost)
    }

    pub fn n(&self) -> usize {
        self.domains.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: VariableId) -> &str {
        &self.names[v]
    }

    pub fn domain(&self, v: VariableId) -> &[ScoredValue] {
        &self.domains[v]
    }

    pub fn value(&self, v: VariableId, index: u32) -> &ScoredValue {
        &self.domains[v][index as usize]
    }

    pub fn convention(&self) -> ScoreConvention {
        self.convention
    }

    /// Zero tolerance for reduced costs: `1e-9` scaled by the largest cost.
    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn all_variables(&self) -> VarSet {
        VarSet::full(self.n())
    }

    pub fn total_domain_size(&self) -> usize {
        self.domains.iter().map(Vec::len).sum()
    }

    /// Domains with every value live and nothing assigned.
    pub fn full_domains(&self) -> DomainState {
        DomainState {
            live: self
                .domains
                .iter()
                .map(|d| (0..d.len() as u32).collect())
                .collect(),
            assigned: alloc::vec![false; self.n()],
        }
    }

    /// Sum of chosen costs, given one domain index per variable.
    pub fn network_cost(&self, choice: &[u32]) -> f64 {
        choice
            .iter()
            .enumerate()
            .map(|(v, &i)| self.value(v, i).score)
            .sum()
    }

    /// Sum of chosen input scores, given one domain index per variable.
    pub fn network_raw_score(&self, choice: &[u32]) -> f64 {
        choice
            .iter()
            .enumerate()
            .map(|(v, &i)| self.value(v, i).raw)
            .sum()
    }

    /// Whether choosing `choice[v]` for every `v` gives an acyclic graph.
    pub fn is_acyclic(&self, choice: &[u32]) -> bool {
        let n = self.n();
        let mut placed = VarSet::new();
        let mut progress = true;
        while progress && placed.len() < n {
            progress = false;
            for (v, &i) in choice.iter().enumerate() {
                if !placed.contains(v) && self.value(v, i).parents.is_subset(&placed) {
                    placed.insert(v);
                    progress = true;
                }
            }
        }
        placed.len() == n
    }
}

/// A domain was emptied by a restriction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("domain of variable {var} wiped out")]
pub struct Wipeout {
    pub var: VariableId,
}

/// The live values of every variable at a search node. Live indices are kept
/// ascending, which is ascending cost order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainState {
    live: Vec<Vec<u32>>,
    assigned: Vec<bool>,
}

impl DomainState {
    /// Builds a state from explicit live lists; each list is sorted.
    pub fn from_live(mut live: Vec<Vec<u32>>) -> Self {
        for l in &mut live {
            l.sort_unstable();
            l.dedup();
        }
        let assigned = alloc::vec![false; live.len()];
        Self { live, assigned }
    }

    pub fn n(&self) -> usize {
        self.live.len()
    }

    pub fn live(&self, v: VariableId) -> &[u32] {
        &self.live[v]
    }

    pub fn is_assigned(&self, v: VariableId) -> bool {
        self.assigned[v]
    }

    pub fn live_count(&self) -> usize {
        self.live.iter().map(Vec::len).sum()
    }

    /// Cheapest live value of `v`.
    pub fn min_live_score(&self, instance: &Instance, v: VariableId) -> Option<f64> {
        self.live[v].first().map(|&i| instance.value(v, i).score)
    }

    /// Keeps only the live values of `v` accepted by `keep`.
    pub fn restrict<F>(
        &self,
        instance: &Instance,
        v: VariableId,
        mut keep: F,
    ) -> Result<DomainState, Wipeout>
    where
        F: FnMut(&ScoredValue) -> bool,
    {
        let mut next = self.clone();
        next.live[v].retain(|&i| keep(instance.value(v, i)));
        if next.live[v].is_empty() {
            return Err(Wipeout { var: v });
        }
        Ok(next)
    }

    /// Fixes `v` to the single value `index`.
    pub fn assign(&mut self, v: VariableId, index: u32) {
        self.live[v].clear();
        self.live[v].push(index);
        self.assigned[v] = true;
    }

    pub(crate) fn set_live(&mut self, v: VariableId, live: Vec<u32>) {
        self.live[v] = live;
    }

    pub(crate) fn live_mut(&mut self, v: VariableId) -> &mut Vec<u32> {
        &mut self.live[v]
    }

    /// Whether every live value here is also live in `other`.
    pub fn is_subset_of(&self, other: &DomainState) -> bool {
        self.live
            .iter()
            .zip(&other.live)
            .all(|(a, b)| a.iter().all(|i| b.binary_search(i).is_ok()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::example;
    use alloc::vec;

    #[test]
    fn running_example_domains() {
        let inst = example();
        let sizes: Vec<usize> = (0..5).map(|v| inst.domain(v).len()).collect();
        assert_eq!(sizes, vec![1, 2, 2, 2, 4]);
        for v in 0..5 {
            assert_eq!(inst.domain(v)[0].score, 0.0);
        }
        assert_eq!(inst.domain(4)[3].parents, VarSet::new());
    }

    #[test]
    fn smallest_instance() {
        let inst = Instance::from_costs(vec![vec![(VarSet::new(), 0.0)]]).unwrap();
        assert_eq!(inst.n(), 1);
        assert_eq!(inst.domain(0).len(), 1);
    }

    #[test]
    fn loglik_normalisation_preserves_argmin() {
        let raw = vec![
            vec![(VarSet::new(), -12.5), (VarSet::singleton(1), -10.0)],
            vec![(VarSet::new(), -3.0), (VarSet::singleton(0), -4.25)],
        ];
        let inst = Instance::new(
            vec!["a".into(), "b".into()],
            raw.clone(),
            ScoreConvention::LogLikelihood,
        )
        .unwrap();
        for (v, dom) in raw.iter().enumerate() {
            let best = dom
                .iter()
                .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            assert_eq!(inst.domain(v)[0].parents, best.0);
            assert_eq!(inst.domain(v)[0].score, 0.0);
            assert!(inst.domain(v).iter().all(|s| s.score >= 0.0));
        }
        assert_eq!(inst.domain(0)[1].score, 2.5);
    }

    #[test]
    fn ties_broken_by_bitset_value() {
        let inst = Instance::from_costs(vec![
            vec![
                (VarSet::singleton(2), 1.0),
                (VarSet::singleton(1), 1.0),
                (VarSet::new(), 1.0),
            ],
            vec![(VarSet::new(), 0.0)],
            vec![(VarSet::new(), 0.0)],
        ])
        .unwrap();
        let order: Vec<_> = inst.domain(0).iter().map(|s| s.parents.clone()).collect();
        assert_eq!(
            order,
            vec![VarSet::new(), VarSet::singleton(1), VarSet::singleton(2)]
        );
    }

    #[test]
    fn validation_errors() {
        let self_parent = Instance::from_costs(vec![vec![(VarSet::singleton(0), 0.0)]]);
        assert!(matches!(self_parent, Err(InstanceError::SelfParent { .. })));
        let unknown = Instance::from_costs(vec![vec![(VarSet::singleton(3), 0.0)]]);
        assert!(matches!(
            unknown,
            Err(InstanceError::UnknownParent { parent: 3, .. })
        ));
        let dup = Instance::from_costs(vec![
            vec![
                (VarSet::singleton(1), 0.0),
                (VarSet::new(), 1.0),
                (VarSet::singleton(1), 2.0),
            ],
            vec![(VarSet::new(), 0.0)],
        ]);
        assert!(matches!(dup, Err(InstanceError::DuplicateParentSet { .. })));
        let empty = Instance::from_costs(vec![vec![]]);
        assert!(matches!(empty, Err(InstanceError::EmptyDomain { .. })));
        let neg = Instance::from_costs(vec![vec![(VarSet::new(), -1.0)]]);
        assert!(matches!(neg, Err(InstanceError::NegativeCost { .. })));
        let nan = Instance::from_costs(vec![vec![(VarSet::new(), f64::NAN)]]);
        assert!(matches!(nan, Err(InstanceError::NonFiniteScore { .. })));
    }

    #[test]
    fn restrict_examples() {
        let inst = example();
        let d = inst.full_domains();
        let sub23: VarSet = [2usize, 3].into_iter().collect();
        let r = d
            .restrict(&inst, 4, |s| s.parents.is_subset(&sub23))
            .unwrap();
        assert_eq!(r.live(4), d.live(4));
        let wiped = d.restrict(&inst, 0, |s| s.parents.is_empty());
        assert_eq!(wiped, Err(Wipeout { var: 0 }));
        assert_eq!(d.restrict(&inst, 2, |_| true).unwrap(), d);
    }
}
