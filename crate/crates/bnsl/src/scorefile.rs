//! Plain-text local score files.
//!
//! ```text
//! <n>
//! <name> <k>
//! <score> <p> <parent_1> ... <parent_p>     (k lines)
//! ...                                       (n blocks)
//! ```
//!
//! Tokens are whitespace separated, parents are referenced by name and may
//! be declared later in the file. Blank lines are ignored.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use bnsl_core::{Instance, InstanceError, ScoreConvention, VarSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScoreFileError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: variable `{name}` declared twice")]
    DuplicateName { line: usize, name: String },
    #[error("line {line}: parent set of `{name}` listed twice")]
    DuplicateParentSet { line: usize, name: String },
    #[error("line {line}: `{name}` references unknown parent `{parent}`")]
    UnknownParent {
        line: usize,
        name: String,
        parent: String,
    },
    #[error("line {line}: `{name}` lists itself as a parent")]
    SelfParent { line: usize, name: String },
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

fn syntax(line: usize, msg: impl Into<String>) -> ScoreFileError {
    ScoreFileError::Syntax {
        line,
        msg: msg.into(),
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    /// Next non-blank line as `(line number, tokens)`.
    fn next_tokens(&mut self, what: &str) -> Result<(usize, Vec<&'a str>), ScoreFileError> {
        for (i, text) in self.inner.by_ref() {
            self.last = i + 1;
            let tokens: Vec<&str> = text.split_whitespace().collect();
            if !tokens.is_empty() {
                return Ok((i + 1, tokens));
            }
        }
        Err(syntax(
            self.last + 1,
            format!("unexpected end of file, expected {what}"),
        ))
    }
}

fn count(line: usize, token: &str, what: &str) -> Result<usize, ScoreFileError> {
    token
        .parse()
        .map_err(|_| syntax(line, format!("expected {what}, found `{token}`")))
}

struct RawValue<'a> {
    line: usize,
    score: f64,
    parents: Vec<&'a str>,
}

/// Parses a score file. With `convention == None` the file is read as
/// log-likelihoods if any score is negative and as costs otherwise.
pub fn parse_scores(
    text: &str,
    convention: Option<ScoreConvention>,
) -> Result<Instance, ScoreFileError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let (line, head) = lines.next_tokens("the variable count")?;
    if head.len() != 1 {
        return Err(syntax(line, "first line must hold only the variable count"));
    }
    let n = count(line, head[0], "the variable count")?;

    let mut names: Vec<String> = Vec::with_capacity(n);
    let mut index: HashMap<&str, usize> = HashMap::with_capacity(n);
    let mut blocks: Vec<Vec<RawValue>> = Vec::with_capacity(n);
    for _ in 0..n {
        let (line, header) = lines.next_tokens("a variable header")?;
        if header.len() != 2 {
            return Err(syntax(line, "variable header must be `<name> <count>`"));
        }
        let name = header[0];
        let k = count(line, header[1], "a parent set count")?;
        if index.insert(name, names.len()).is_some() {
            return Err(ScoreFileError::DuplicateName {
                line,
                name: name.to_string(),
            });
        }
        names.push(name.to_string());
        let mut values = Vec::with_capacity(k);
        for _ in 0..k {
            let (line, tokens) = lines.next_tokens("a score line")?;
            let score: f64 = tokens[0]
                .parse()
                .map_err(|_| syntax(line, format!("expected a score, found `{}`", tokens[0])))?;
            if !score.is_finite() {
                return Err(syntax(line, "score must be finite"));
            }
            let p = match tokens.get(1) {
                Some(t) => count(line, t, "a parent count")?,
                None => return Err(syntax(line, "missing parent count")),
            };
            if tokens.len() != p + 2 {
                return Err(syntax(
                    line,
                    format!("expected {p} parent names, found {}", tokens.len() - 2),
                ));
            }
            values.push(RawValue {
                line,
                score,
                parents: tokens[2..].to_vec(),
            });
        }
        blocks.push(values);
    }
    if let Ok((line, _)) = lines.next_tokens("") {
        return Err(syntax(line, "trailing content after the last variable"));
    }

    let convention = convention.unwrap_or_else(|| {
        let negative = blocks.iter().flatten().any(|r| r.score < 0.0);
        if negative {
            ScoreConvention::LogLikelihood
        } else {
            ScoreConvention::Cost
        }
    });

    let mut domains = Vec::with_capacity(n);
    for (v, block) in blocks.iter().enumerate() {
        let mut seen: HashSet<VarSet> = HashSet::with_capacity(block.len());
        let mut domain = Vec::with_capacity(block.len());
        for raw in block {
            let mut set = VarSet::new();
            for &p in &raw.parents {
                let Some(&id) = index.get(p) else {
                    return Err(ScoreFileError::UnknownParent {
                        line: raw.line,
                        name: names[v].clone(),
                        parent: p.to_string(),
                    });
                };
                if id == v {
                    return Err(ScoreFileError::SelfParent {
                        line: raw.line,
                        name: names[v].clone(),
                    });
                }
                set.insert(id);
            }
            if !seen.insert(set.clone()) {
                return Err(ScoreFileError::DuplicateParentSet {
                    line: raw.line,
                    name: names[v].clone(),
                });
            }
            domain.push((set, raw.score));
        }
        domains.push(domain);
    }
    Ok(Instance::new(names, domains, convention)?)
}

/// Writes `instance` back in score-file form using the input scores.
/// Values appear in the instance's domain order.
pub fn write_scores(instance: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", instance.n());
    for v in 0..instance.n() {
        let domain = instance.domain(v);
        let _ = writeln!(out, "{} {}", instance.name(v), domain.len());
        for value in domain {
            let _ = write!(out, "{} {}", value.raw, value.parents.len());
            for p in value.parents.iter() {
                let _ = write!(out, " {}", instance.name(p));
            }
            out.push('\n');
        }
    }
    out
}
