//! File formats, BIC scoring and the command line front end around
//! [`bnsl_core`].

pub mod cli;
pub mod report;
pub mod scorefile;
pub mod scorer;
pub mod synth;

pub use report::{render, Format, RunStats};
pub use scorefile::{parse_scores, write_scores, ScoreFileError};
pub use scorer::{bic_local_score, enumerate_domains, DataError, Dataset, ScoreError};
