//! BIC local scores for complete discrete data.

use std::collections::HashMap;
use std::io::Read;

use bnsl_core::{Instance, InstanceError, ScoreConvention, VarSet, VariableId};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("dataset has no samples")]
    NoSamples,
    #[error("{names} names given for {columns} columns")]
    NameCount { names: usize, columns: usize },
    #[error("column `{name}` has {len} rows, expected {expected}")]
    RaggedColumn {
        name: String,
        len: usize,
        expected: usize,
    },
    #[error("column `{name}` has value {value} outside arity {arity}")]
    OutOfRange {
        name: String,
        value: u32,
        arity: u32,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScoreError {
    #[error("parent configuration count of `{name}` overflows")]
    ConfigurationOverflow { name: String },
    #[error("variable `{name}` cannot be its own parent")]
    SelfParent { name: String },
}

/// Complete discrete data, stored by column. Category `k` of column `v`
/// lies in `0..arity(v)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    names: Vec<String>,
    arities: Vec<u32>,
    columns: Vec<Vec<u32>>,
}

impl Dataset {
    pub fn new(
        names: Vec<String>,
        arities: Vec<u32>,
        columns: Vec<Vec<u32>>,
    ) -> Result<Self, DataError> {
        if names.len() != columns.len() || arities.len() != columns.len() {
            return Err(DataError::NameCount {
                names: names.len(),
                columns: columns.len(),
            });
        }
        let expected = columns.first().map_or(0, Vec::len);
        if expected == 0 {
            return Err(DataError::NoSamples);
        }
        for ((name, &arity), column) in names.iter().zip(&arities).zip(&columns) {
            if column.len() != expected {
                return Err(DataError::RaggedColumn {
                    name: name.clone(),
                    len: column.len(),
                    expected,
                });
            }
            if let Some(&value) = column.iter().find(|&&x| x >= arity) {
                return Err(DataError::OutOfRange {
                    name: name.clone(),
                    value,
                    arity,
                });
            }
        }
        Ok(Self {
            names,
            arities,
            columns,
        })
    }

    /// Reads a CSV file whose first row holds the variable names. Each
    /// column's categories are numbered in order of first appearance.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, DataError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let names: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut codes: Vec<HashMap<String, u32>> = vec![HashMap::new(); names.len()];
        let mut columns: Vec<Vec<u32>> = vec![Vec::new(); names.len()];
        for record in rdr.records() {
            let record = record?;
            for ((field, column), code) in record.iter().zip(&mut columns).zip(&mut codes) {
                let next = code.len() as u32;
                column.push(*code.entry(field.to_string()).or_insert(next));
            }
        }
        let arities = codes.iter().map(|c| c.len() as u32).collect();
        Self::new(names, arities, columns)
    }

    pub fn n_vars(&self) -> usize {
        self.columns.len()
    }

    pub fn n_samples(&self) -> usize {
        self.columns[0].len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn arity(&self, v: VariableId) -> u32 {
        self.arities[v]
    }

    pub fn column(&self, v: VariableId) -> &[u32] {
        &self.columns[v]
    }
}

/// BIC score of `v` with parents `parents`: maximum log-likelihood minus
/// `ln(N)/2 * (r_v - 1) * q`, `q` the number of parent configurations.
/// Larger is better.
pub fn bic_local_score(data: &Dataset, v: VariableId, parents: &VarSet) -> Result<f64, ScoreError> {
    if parents.contains(v) {
        return Err(ScoreError::SelfParent {
            name: data.names[v].clone(),
        });
    }
    let overflow = || ScoreError::ConfigurationOverflow {
        name: data.names[v].clone(),
    };
    let r = u64::from(data.arity(v));
    let mut q: u64 = 1;
    for p in parents.iter() {
        q = q
            .checked_mul(u64::from(data.arity(p)))
            .ok_or_else(overflow)?;
    }
    q.checked_mul(r).ok_or_else(overflow)?;

    // (configuration, child value) per sample, sorted so equal cells are adjacent
    let mut cells: Vec<(u64, u32)> = (0..data.n_samples())
        .map(|s| {
            let j = parents.iter().fold(0u64, |acc, p| {
                acc * u64::from(data.arity(p)) + u64::from(data.columns[p][s])
            });
            (j, data.columns[v][s])
        })
        .collect();
    cells.sort_unstable();

    let mut ll = 0.0;
    let mut start = 0;
    while start < cells.len() {
        let j = cells[start].0;
        let end = start + cells[start..].partition_point(|c| c.0 == j);
        let n_j = (end - start) as f64;
        let mut k = start;
        while k < end {
            let run = cells[k..end].partition_point(|c| c.1 == cells[k].1);
            let n_jk = run as f64;
            ll += n_jk * (n_jk / n_j).ln();
            k += run;
        }
        start = end;
    }
    let penalty = (data.n_samples() as f64).ln() / 2.0 * (r - 1) as f64 * q as f64;
    Ok(ll - penalty)
}

/// All parent sets of up to `max_parents` members, scored with BIC. A set
/// is dropped when one of its proper subsets scores at least as well; sets
/// whose configuration count overflows are skipped.
pub fn enumerate_domains(data: &Dataset, max_parents: usize) -> Result<Instance, InstanceError> {
    let n = data.n_vars();
    let mut domains = Vec::with_capacity(n);
    for v in 0..n {
        let others: Vec<VariableId> = (0..n).filter(|&p| p != v).collect();
        // best score over each set and its subsets
        let mut best_below: HashMap<VarSet, f64> = HashMap::new();
        let mut domain = Vec::new();
        let mut layer = vec![VarSet::new()];
        for size in 0..=max_parents.min(others.len()) {
            let mut next = Vec::new();
            for set in &layer {
                let inherited = set
                    .iter()
                    .filter_map(|x| {
                        let mut sub = set.clone();
                        sub.remove(x);
                        best_below.get(&sub).copied()
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                let own = bic_local_score(data, v, set).ok();
                if let Some(score) = own {
                    if score > inherited {
                        domain.push((set.clone(), score));
                    }
                }
                let best = own.map_or(inherited, |s| s.max(inherited));
                if best > f64::NEG_INFINITY {
                    best_below.insert(set.clone(), best);
                }
                if size < max_parents {
                    // extend only with members above the current maximum
                    let floor = set.max_member().map_or(0, |m| m + 1);
                    for &p in others.iter().filter(|&&p| p >= floor) {
                        let mut bigger = set.clone();
                        bigger.insert(p);
                        next.push(bigger);
                    }
                }
            }
            layer = next;
        }
        domains.push(domain);
    }
    Instance::new(data.names.clone(), domains, ScoreConvention::LogLikelihood)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(arities: &[u32], columns: Vec<Vec<u32>>) -> Dataset {
        let names = (0..columns.len()).map(|v| format!("x{v}")).collect();
        Dataset::new(names, arities.to_vec(), columns).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn constant_binary_column() {
        let d = data(&[2], vec![vec![0, 0, 0, 0]]);
        let s = bic_local_score(&d, 0, &VarSet::new()).unwrap();
        assert!(close(s, -(4f64).ln() / 2.0));
        assert!(close(s, -std::f64::consts::LN_2));
    }

    #[test]
    fn hand_computed_table() {
        // x1 = (0,0,1,1), x0 = (0,1,1,1): N_00=1, N_01=1, N_11=2
        let d = data(&[2, 2], vec![vec![0, 1, 1, 1], vec![0, 0, 1, 1]]);
        let s = bic_local_score(&d, 0, &VarSet::singleton(1)).unwrap();
        let ll = 2.0 * (0.5f64).ln();
        assert!(close(s, ll - (4f64).ln() / 2.0 * 2.0));
        let empty = bic_local_score(&d, 0, &VarSet::new()).unwrap();
        assert!(close(
            empty,
            (0.25f64).ln() + 3.0 * (0.75f64).ln() - (4f64).ln() / 2.0
        ));
    }

    #[test]
    fn independent_parent_never_helps() {
        let d = data(&[2, 2], vec![vec![0, 1, 0, 1], vec![0, 0, 1, 1]]);
        let with = bic_local_score(&d, 0, &VarSet::singleton(1)).unwrap();
        let without = bic_local_score(&d, 0, &VarSet::new()).unwrap();
        assert!(with <= without);
    }

    #[test]
    fn copied_parent_helps_at_100_samples() {
        let p: Vec<u32> = (0..100).map(|i| i % 2).collect();
        let d = data(&[2, 2], vec![p.clone(), p]);
        let with = bic_local_score(&d, 0, &VarSet::singleton(1)).unwrap();
        let without = bic_local_score(&d, 0, &VarSet::new()).unwrap();
        assert!(close(with, -(100f64).ln()));
        assert!(close(without, 100.0 * (0.5f64).ln() - (100f64).ln() / 2.0));
        assert!(with > without);
    }

    #[test]
    fn overflowing_configuration_is_rejected() {
        let d = data(&[2, u32::MAX, u32::MAX, u32::MAX], vec![vec![0]; 4]);
        let parents: VarSet = [1usize, 2, 3].into_iter().collect();
        assert!(matches!(
            bic_local_score(&d, 0, &parents),
            Err(ScoreError::ConfigurationOverflow { .. })
        ));
        assert!(matches!(
            bic_local_score(&d, 0, &VarSet::singleton(0)),
            Err(ScoreError::SelfParent { .. })
        ));
    }

    #[test]
    fn no_parents_allowed() {
        let d = data(&[2, 3], vec![vec![0, 1, 1], vec![2, 0, 1]]);
        let inst = enumerate_domains(&d, 0).unwrap();
        for v in 0..2 {
            assert_eq!(inst.domain(v).len(), 1);
            assert!(inst.domain(v)[0].parents.is_empty());
        }
    }

    #[test]
    fn independent_uniform_variables_prune_to_empty() {
        let mut cols = vec![Vec::new(), Vec::new(), Vec::new()];
        for _ in 0..3 {
            for code in 0u32..8 {
                for (b, col) in cols.iter_mut().enumerate() {
                    col.push((code >> b) & 1);
                }
            }
        }
        let d = data(&[2, 2, 2], cols);
        for v in 0..3 {
            let others: Vec<usize> = (0..3).filter(|&p| p != v).collect();
            let empty = bic_local_score(&d, v, &VarSet::new()).unwrap();
            for mask in 1u32..4 {
                let s: VarSet = others
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, &p)| p)
                    .collect();
                assert!(bic_local_score(&d, v, &s).unwrap() < empty);
            }
        }
        let inst = enumerate_domains(&d, 2).unwrap();
        for v in 0..3 {
            assert_eq!(inst.domain(v).len(), 1);
            assert!(inst.domain(v)[0].parents.is_empty());
        }
    }

    #[test]
    fn pruning_keeps_strict_improvements_only() {
        let p: Vec<u32> = (0..60).map(|i| i % 3).collect();
        let q: Vec<u32> = (0..60).map(|i| (i / 3) % 2).collect();
        let child: Vec<u32> = p.iter().map(|&x| u32::from(x == 0)).collect();
        let d = data(&[2, 3, 2], vec![child, p, q]);
        let inst = enumerate_domains(&d, 2).unwrap();
        for v in 0..3 {
            for value in inst.domain(v) {
                let s = value.parents.clone();
                for x in s.iter() {
                    let mut sub = s.clone();
                    sub.remove(x);
                    assert!(value.raw > bic_local_score(&d, v, &sub).unwrap());
                }
            }
        }
        assert_eq!(inst.domain(0)[0].parents, VarSet::singleton(1));
    }

    #[test]
    fn csv_categories_follow_first_appearance() {
        let text = "a, b\nhigh, x\nlow, x\nhigh, y\n";
        let d = Dataset::from_csv(text.as_bytes()).unwrap();
        assert_eq!(d.names(), &["a".to_string(), "b".to_string()]);
        assert_eq!(d.column(0), &[0, 1, 0]);
        assert_eq!(d.column(1), &[0, 0, 1]);
        assert_eq!((d.arity(0), d.arity(1)), (2, 2));
        assert!(matches!(
            Dataset::from_csv("a,b\n".as_bytes()),
            Err(DataError::NoSamples)
        ));
        assert!(matches!(
            Dataset::from_csv("a,b\n1\n".as_bytes()),
            Err(DataError::Csv(_))
        ));
    }
}
