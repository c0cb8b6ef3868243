//! Class-level confusion matrices built from substitution steps, and the
//! first/second most-confused ranking per reference class.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alignment::{Alignment, EditStep};
use crate::phoneset::{BpcCategorization, CategorizationName};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfusionError {
    #[error("{from} is not a refinement of {to}: class {class} spans several target classes")]
    NotARefinement {
        from: CategorizationName,
        to: CategorizationName,
        class: String,
    },
    #[error("matrix for {categorization} has labels {labels:?}, expected the built-in classes")]
    LabelMismatch {
        categorization: CategorizationName,
        labels: Vec<String>,
    },
    #[error("matrix for {0} is not square in its label count")]
    Shape(CategorizationName),
}

/// `counts[i][j]` is the number of substitutions whose reference phone is in
/// class `i` and whose hypothesis phone is in class `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub categorization: CategorizationName,
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn zeros(cat: &BpcCategorization) -> Self {
        let k = cat.len();
        ConfusionMatrix {
            categorization: cat.name,
            labels: cat.labels().into_iter().map(String::from).collect(),
            counts: vec![vec![0; k]; k],
        }
    }

    /// Validates a matrix read from outside (labels and shape).
    pub fn from_parts(
        categorization: CategorizationName,
        labels: Vec<String>,
        counts: Vec<Vec<u64>>,
    ) -> Result<Self, ConfusionError> {
        let expected = BpcCategorization::get(categorization).labels();
        if labels.len() != expected.len() || labels.iter().zip(&expected).any(|(a, b)| a != b) {
            return Err(ConfusionError::LabelMismatch {
                categorization,
                labels,
            });
        }
        if counts.len() != labels.len() || counts.iter().any(|r| r.len() != labels.len()) {
            return Err(ConfusionError::Shape(categorization));
        }
        Ok(ConfusionMatrix {
            categorization,
            labels,
            counts,
        })
    }

    pub fn add(&mut self, alignment: &Alignment, cat: &BpcCategorization) {
        assert_eq!(self.categorization, cat.name);
        for step in &alignment.steps {
            if let EditStep::Substitute {
                reference,
                hypothesis,
            } = *step
            {
                self.counts[cat.class_index(reference)][cat.class_index(hypothesis)] += 1;
            }
        }
    }

    /// Element-wise sum.
    pub fn merge(mut self, other: &ConfusionMatrix) -> Self {
        assert_eq!(self.categorization, other.categorization);
        for (mine, theirs) in self.counts.iter_mut().zip(&other.counts) {
            for (a, b) in mine.iter_mut().zip(theirs) {
                *a += b;
            }
        }
        self
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_total(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    pub fn get(&self, reference: &str, hypothesis: &str) -> Option<u64> {
        let i = self.labels.iter().position(|l| l == reference)?;
        let j = self.labels.iter().position(|l| l == hypothesis)?;
        Some(self.counts[i][j])
    }

    /// Sums cells into a coarser categorisation. Every class of this matrix
    /// must lie inside a single class of `target`.
    pub fn coarsen(&self, target: &BpcCategorization) -> Result<ConfusionMatrix, ConfusionError> {
        let source = BpcCategorization::get(self.categorization);
        let mapping = source
            .classes
            .iter()
            .map(|class| {
                let first = target.class_index(class.members[0]);
                if class.members.iter().all(|&p| target.class_index(p) == first) {
                    Ok(first)
                } else {
                    Err(ConfusionError::NotARefinement {
                        from: source.name,
                        to: target.name,
                        class: class.id.to_string(),
                    })
                }
            })
            .collect::<Result<Vec<_>, _>>()?;

        let mut out = ConfusionMatrix::zeros(target);
        for (i, row) in self.counts.iter().enumerate() {
            for (j, &n) in row.iter().enumerate() {
                out.counts[mapping[i]][mapping[j]] += n;
            }
        }
        Ok(out)
    }
}

/// Confusion matrix over a collection of alignments.
pub fn confusion_matrix<'a, I>(alignments: I, cat: &BpcCategorization) -> ConfusionMatrix
where
    I: IntoIterator<Item = &'a Alignment>,
{
    alignments
        .into_iter()
        .fold(ConfusionMatrix::zeros(cat), |mut m, a| {
            m.add(a, cat);
            m
        })
}

/// Row-stochastic view of the counts. All-zero rows stay zero.
pub fn normalize_rows(m: &ConfusionMatrix) -> Vec<Vec<f64>> {
    m.counts
        .iter()
        .map(|row| {
            let total: u64 = row.iter().sum();
            row.iter()
                .map(|&n| if total == 0 { 0.0 } else { n as f64 / total as f64 })
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRanking {
    pub class: String,
    pub first: Vec<String>,
    pub second: Vec<String>,
}

impl ClassRanking {
    /// Renders as `first, second` with tied classes joined by `/`, e.g.
    /// `vow, dip/sem`. A missing second place renders as `—`; a row with no
    /// substitutions renders as `—` alone.
    pub fn render(&self) -> String {
        if self.first.is_empty() {
            return EMPTY_RANK.to_string();
        }
        let second = if self.second.is_empty() {
            EMPTY_RANK.to_string()
        } else {
            self.second.join("/")
        };
        format!("{}, {}", self.first.join("/"), second)
    }
}

const EMPTY_RANK: &str = "—";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionRanking {
    pub categorization: CategorizationName,
    pub per_class: Vec<ClassRanking>,
}

impl ConfusionRanking {
    pub fn class(&self, id: &str) -> Option<&ClassRanking> {
        self.per_class.iter().find(|r| r.class == id)
    }
}

// Columns holding the largest nonzero value among `candidates`, in label order.
fn argmax_set(row: &[u64], candidates: &[usize]) -> Vec<usize> {
    let best = candidates.iter().map(|&j| row[j]).max().unwrap_or(0);
    if best == 0 {
        return Vec::new();
    }
    candidates.iter().copied().filter(|&j| row[j] == best).collect()
}

/// First and second most-confused classes per row. The diagonal competes:
/// within-class confusions can rank first.
pub fn rank_confusions(m: &ConfusionMatrix) -> ConfusionRanking {
    let per_class = m
        .counts
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let all: Vec<usize> = (0..row.len()).collect();
            let first = argmax_set(row, &all);
            let rest: Vec<usize> = all.into_iter().filter(|j| !first.contains(j)).collect();
            let second = argmax_set(row, &rest);
            let names = |ix: Vec<usize>| ix.into_iter().map(|j| m.labels[j].clone()).collect();
            ClassRanking {
                class: m.labels[i].clone(),
                first: names(first),
                second: names(second),
            }
        })
        .collect();
    ConfusionRanking {
        categorization: m.categorization,
        per_class,
    }
}
