//! Per-class decomposition of phone error rate.
//!
//! Substitutions and deletions are charged to the class of the reference
//! phone, insertions to the class of the hypothesis phone. Every class share
//! is divided by the total reference count, so the shares of one
//! categorisation add up to the overall PER.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alignment::{Alignment, EditKind, EditStep};
use crate::phoneset::{BpcCategorization, CategorizationName};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("no reference phones to score against")]
    EmptyReference,
    #[error("categorisation mismatch: {0} vs {1}")]
    CategorizationMismatch(CategorizationName, CategorizationName),
    #[error("class labels for {categorization} do not match the built-in table: {labels:?}")]
    LabelMismatch {
        categorization: CategorizationName,
        labels: Vec<String>,
    },
    #[error("inconsistent totals for {0}: class counts do not add up")]
    InconsistentTotals(CategorizationName),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Attribution {
    pub kind: EditKind,
    /// Index into the categorisation's classes.
    pub class: usize,
}

/// Class attribution for each step; `None` for matches.
pub fn attribute(alignment: &Alignment, cat: &BpcCategorization) -> Vec<Option<Attribution>> {
    alignment
        .steps
        .iter()
        .map(|step| attribute_step(step, cat))
        .collect()
}

pub fn attribute_step(step: &EditStep, cat: &BpcCategorization) -> Option<Attribution> {
    let (kind, phone) = match *step {
        EditStep::Match(_) => return None,
        EditStep::Substitute { reference, .. } => (EditKind::Substitute, reference),
        EditStep::Delete(reference) => (EditKind::Delete, reference),
        EditStep::Insert(hypothesis) => (EditKind::Insert, hypothesis),
    };
    Some(Attribution {
        kind,
        class: cat.class_index(phone),
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorCounts {
    pub sub: u64,
    pub del: u64,
    pub ins: u64,
}

impl ErrorCounts {
    pub fn total(&self) -> u64 {
        self.sub + self.del + self.ins
    }

    fn add(&mut self, other: &ErrorCounts) {
        self.sub += other.sub;
        self.del += other.del;
        self.ins += other.ins;
    }
}

/// Raw per-class counts. Merging is associative and commutative, so partial
/// tallies can be built concurrently and combined in any order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrorTally {
    categorization: CategorizationName,
    per_class: Vec<ErrorCounts>,
    ref_count: u64,
}

impl ErrorTally {
    pub fn new(cat: &BpcCategorization) -> Self {
        ErrorTally {
            categorization: cat.name,
            per_class: vec![ErrorCounts::default(); cat.len()],
            ref_count: 0,
        }
    }

    pub fn from_alignment(alignment: &Alignment, cat: &BpcCategorization) -> Self {
        let mut tally = ErrorTally::new(cat);
        tally.add(alignment, cat);
        tally
    }

    pub fn add(&mut self, alignment: &Alignment, cat: &BpcCategorization) {
        assert_eq!(self.categorization, cat.name);
        self.ref_count += alignment.ref_len as u64;
        for a in alignment.steps.iter().filter_map(|s| attribute_step(s, cat)) {
            let counts = &mut self.per_class[a.class];
            match a.kind {
                EditKind::Substitute => counts.sub += 1,
                EditKind::Delete => counts.del += 1,
                EditKind::Insert => counts.ins += 1,
                EditKind::Match => unreachable!("matches are never attributed"),
            }
        }
    }

    pub fn merge(mut self, other: &ErrorTally) -> Self {
        assert_eq!(
            self.categorization, other.categorization,
            "cannot merge tallies of different categorisations"
        );
        for (mine, theirs) in self.per_class.iter_mut().zip(&other.per_class) {
            mine.add(theirs);
        }
        self.ref_count += other.ref_count;
        self
    }

    pub fn ref_count(&self) -> u64 {
        self.ref_count
    }

    pub fn finish(&self) -> Result<ErrorBreakdown, AnalysisError> {
        let cat = BpcCategorization::get(self.categorization);
        let per_class = cat
            .classes
            .iter()
            .zip(&self.per_class)
            .map(|(c, counts)| (c.id.to_string(), *counts))
            .collect();
        ErrorBreakdown::from_counts(self.categorization, per_class, self.ref_count)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassErrors {
    pub class: String,
    pub counts: ErrorCounts,
    /// (sub + del + ins) / total reference count.
    pub per_share: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub counts: ErrorCounts,
    pub ref_count: u64,
    pub per: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBreakdown {
    pub categorization: CategorizationName,
    pub per_class: Vec<ClassErrors>,
    pub totals: Totals,
}

impl ErrorBreakdown {
    /// Builds a breakdown from class-ordered counts, checking the labels
    /// against the built-in categorisation.
    pub fn from_counts(
        categorization: CategorizationName,
        per_class: Vec<(String, ErrorCounts)>,
        ref_count: u64,
    ) -> Result<Self, AnalysisError> {
        let cat = BpcCategorization::get(categorization);
        if per_class.len() != cat.len()
            || per_class.iter().zip(&cat.classes).any(|((id, _), c)| id != c.id)
        {
            return Err(AnalysisError::LabelMismatch {
                categorization,
                labels: per_class.into_iter().map(|(id, _)| id).collect(),
            });
        }
        if ref_count == 0 {
            return Err(AnalysisError::EmptyReference);
        }
        let denom = ref_count as f64;
        let mut totals = ErrorCounts::default();
        let per_class = per_class
            .into_iter()
            .map(|(class, counts)| {
                totals.add(&counts);
                ClassErrors {
                    class,
                    counts,
                    per_share: counts.total() as f64 / denom,
                }
            })
            .collect();
        Ok(ErrorBreakdown {
            categorization,
            per_class,
            totals: Totals {
                counts: totals,
                ref_count,
                per: totals.total() as f64 / denom,
            },
        })
    }

    pub fn class(&self, id: &str) -> Option<&ClassErrors> {
        self.per_class.iter().find(|c| c.class == id)
    }

    pub fn share(&self, id: &str) -> Option<f64> {
        self.class(id).map(|c| c.per_share)
    }

    /// Fraction of reference phones for one error kind in one class.
    pub fn kind_share(&self, id: &str, kind: EditKind) -> Option<f64> {
        let c = self.class(id)?;
        let n = match kind {
            EditKind::Substitute => c.counts.sub,
            EditKind::Delete => c.counts.del,
            EditKind::Insert => c.counts.ins,
            EditKind::Match => return Some(0.0),
        };
        Some(n as f64 / self.totals.ref_count as f64)
    }
}

/// Aggregates alignments into a per-class breakdown.
pub fn breakdown<'a, I>(alignments: I, cat: &BpcCategorization) -> Result<ErrorBreakdown, AnalysisError>
where
    I: IntoIterator<Item = &'a Alignment>,
{
    alignments
        .into_iter()
        .fold(ErrorTally::new(cat), |mut tally, a| {
            tally.add(a, cat);
            tally
        })
        .finish()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassGain {
    pub class: String,
    pub baseline: f64,
    pub improved: f64,
    /// `None` when the baseline share is zero.
    pub gain: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainReport {
    pub categorization: CategorizationName,
    pub per_class: Vec<ClassGain>,
    /// Unweighted mean over classes with a defined gain.
    pub average: Option<f64>,
    /// Relative reduction of the overall PER.
    pub overall: Option<f64>,
}

impl GainReport {
    pub fn gain(&self, id: &str) -> Option<f64> {
        self.per_class.iter().find(|c| c.class == id)?.gain
    }
}

fn relative_reduction(baseline: f64, improved: f64) -> Option<f64> {
    (baseline > 0.0).then(|| (baseline - improved) / baseline)
}

/// Relative per-class PER reduction from `baseline` to `improved`.
pub fn relative_gain(
    baseline: &ErrorBreakdown,
    improved: &ErrorBreakdown,
) -> Result<GainReport, AnalysisError> {
    if baseline.categorization != improved.categorization {
        return Err(AnalysisError::CategorizationMismatch(
            baseline.categorization,
            improved.categorization,
        ));
    }
    if baseline.per_class.len() != improved.per_class.len()
        || baseline
            .per_class
            .iter()
            .zip(&improved.per_class)
            .any(|(b, i)| b.class != i.class)
    {
        return Err(AnalysisError::LabelMismatch {
            categorization: improved.categorization,
            labels: improved.per_class.iter().map(|c| c.class.clone()).collect(),
        });
    }

    let per_class: Vec<ClassGain> = baseline
        .per_class
        .iter()
        .zip(&improved.per_class)
        .map(|(b, i)| ClassGain {
            class: b.class.clone(),
            baseline: b.per_share,
            improved: i.per_share,
            gain: relative_reduction(b.per_share, i.per_share),
        })
        .collect();
    let defined: Vec<f64> = per_class.iter().filter_map(|c| c.gain).collect();
    let average = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);

    Ok(GainReport {
        categorization: baseline.categorization,
        per_class,
        average,
        overall: relative_reduction(baseline.totals.per, improved.totals.per),
    })
}
