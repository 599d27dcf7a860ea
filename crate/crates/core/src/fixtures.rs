//! Small instances used by tests, examples and the CLI.

use alloc::vec;

use crate::instance::Instance;
use crate::varset::VarSet;

fn set(vs: &[usize]) -> VarSet {
    vs.iter().copied().collect()
}

/// Five-variable instance whose optimum (cost 10) is reached only after two
/// cluster cuts, `{1,2}` and `{0,2,3}`.
pub fn running_example() -> Instance {
    Instance::from_costs(vec![
        vec![(set(&[2]), 0.0)],
        vec![(set(&[2, 4]), 0.0), (set(&[]), 6.0)],
        vec![(set(&[1, 3]), 0.0), (set(&[]), 10.0)],
        vec![(set(&[0]), 0.0), (set(&[]), 5.0)],
        vec![
            (set(&[2, 3]), 0.0),
            (set(&[3]), 1.0),
            (set(&[2]), 2.0),
            (set(&[]), 3.0),
        ],
    ])
    .expect("valid fixture")
}
