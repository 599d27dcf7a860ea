//! Seeded random instances and datasets for tests and benchmarks.

use bnsl_core::{DomainState, Instance, VarSet, VariableId};
use rand::seq::index::sample;
use rand::Rng;

use crate::scorer::Dataset;

/// Shape of [`random_instance`] output.
#[derive(Clone, Copy, Debug)]
pub struct InstanceShape {
    pub n: usize,
    /// Each variable draws between `min_values` and `max_values` candidate
    /// parent sets.
    pub min_values: usize,
    pub max_values: usize,
    pub max_parents: usize,
    /// Costs are integers in `0..=max_cost`.
    pub max_cost: u32,
    /// Whether every domain contains the empty parent set.
    pub with_empty: bool,
}

impl InstanceShape {
    pub fn small(n: usize) -> Self {
        Self {
            n,
            min_values: 1,
            max_values: 8,
            max_parents: 3,
            max_cost: 20,
            with_empty: true,
        }
    }
}

/// Random cost-convention instance. Domains may come out smaller than the
/// drawn size when the variable has few distinct parent sets.
pub fn random_instance<R: Rng>(rng: &mut R, shape: InstanceShape) -> Instance {
    let n = shape.n;
    let max_parents = shape.max_parents.min(n.saturating_sub(1));
    let domains = (0..n)
        .map(|v| {
            let want = rng.random_range(shape.min_values.max(1)..=shape.max_values.max(1));
            let mut sets: Vec<VarSet> = Vec::with_capacity(want);
            if shape.with_empty {
                sets.push(VarSet::new());
            }
            let mut attempts = 0;
            while sets.len() < want && attempts < 20 * want && max_parents > 0 {
                attempts += 1;
                let size = rng.random_range(1..=max_parents);
                let set: VarSet = sample(rng, n - 1, size)
                    .into_iter()
                    .map(|p| if p >= v { p + 1 } else { p })
                    .collect();
                if !sets.contains(&set) {
                    sets.push(set);
                }
            }
            if sets.is_empty() {
                sets.push(VarSet::new());
            }
            sets.into_iter()
                .map(|s| (s, f64::from(rng.random_range(0..=shape.max_cost))))
                .collect()
        })
        .collect();
    Instance::from_costs(domains).expect("generated instance is valid")
}

/// Keeps each live value with probability `keep`, always keeping at least
/// one value per variable.
pub fn random_restriction<R: Rng>(rng: &mut R, instance: &Instance, keep: f64) -> DomainState {
    let live = (0..instance.n())
        .map(|v| {
            let d = instance.domain(v).len() as u32;
            let mut kept: Vec<u32> = (0..d).filter(|_| rng.random_bool(keep)).collect();
            if kept.is_empty() {
                kept.push(rng.random_range(0..d));
            }
            kept
        })
        .collect();
    DomainState::from_live(live)
}

/// A discrete Bayesian network with explicit conditional tables.
#[derive(Clone, Debug)]
pub struct Network {
    pub names: Vec<String>,
    pub arities: Vec<u32>,
    /// Parents of each variable; must describe a DAG listed in topological
    /// order (every parent precedes its child).
    pub parents: Vec<Vec<VariableId>>,
    /// `tables[v][j]` is the distribution of `v` under parent configuration
    /// `j` (mixed radix over `parents[v]`, first parent most significant).
    pub tables: Vec<Vec<Vec<f64>>>,
}

impl Network {
    /// Random tables for a fixed structure. Rows are skewed so that the
    /// dependencies are visible at moderate sample sizes.
    pub fn with_random_tables<R: Rng>(
        rng: &mut R,
        names: Vec<String>,
        arities: Vec<u32>,
        parents: Vec<Vec<VariableId>>,
    ) -> Self {
        let tables = (0..names.len())
            .map(|v| {
                let q: u32 = parents[v].iter().map(|&p| arities[p]).product();
                (0..q)
                    .map(|_| {
                        let w: Vec<f64> = (0..arities[v])
                            .map(|_| rng.random::<f64>().powi(3) + 0.02)
                            .collect();
                        let total: f64 = w.iter().sum();
                        w.into_iter().map(|x| x / total).collect()
                    })
                    .collect()
            })
            .collect();
        Self {
            names,
            arities,
            parents,
            tables,
        }
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    /// Forward sampling of `samples` complete rows.
    pub fn sample<R: Rng>(&self, rng: &mut R, samples: usize) -> Dataset {
        let n = self.names.len();
        let mut columns = vec![Vec::with_capacity(samples); n];
        let mut row = vec![0u32; n];
        for _ in 0..samples {
            for v in 0..n {
                let j = self.parents[v].iter().fold(0usize, |acc, &p| {
                    acc * self.arities[p] as usize + row[p] as usize
                });
                let dist = &self.tables[v][j];
                let mut u: f64 = rng.random();
                let mut k = dist.len() - 1;
                for (i, &pr) in dist.iter().enumerate() {
                    if u < pr {
                        k = i;
                        break;
                    }
                    u -= pr;
                }
                row[v] = k as u32;
                columns[v].push(row[v]);
            }
        }
        Dataset::new(self.names.clone(), self.arities.clone(), columns)
            .expect("sampled data is valid")
    }
}

/// Six variables, six edges: a->c, b->c, c->d, b->e, d->f, e->f.
pub fn six_edge_network<R: Rng>(rng: &mut R) -> Network {
    let names = ["a", "b", "c", "d", "e", "f"].map(String::from).to_vec();
    let arities = vec![2, 3, 2, 3, 2, 2];
    let parents = vec![vec![], vec![], vec![0, 1], vec![2], vec![1], vec![3, 4]];
    Network::with_random_tables(rng, names, arities, parents)
}
