//! Corpus-level scoring: pair reference and hypothesis utterances by id,
//! align them, and reduce the alignments into breakdowns and confusion
//! matrices.
//!
//! Alignment fans out over rayon's current pool; tallies and matrices are
//! merged with commutative count additions, so results do not depend on the
//! number of threads.

use rayon::prelude::*;

use crate::alignment::{align, Alignment, EditCosts};
use crate::confusion::ConfusionMatrix;
use crate::error_analysis::{AnalysisError, ErrorBreakdown, ErrorTally};
use crate::io_formats::{Corpus, ParseError};
use crate::phoneset::{BpcCategorization, FoldMap, Phone};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UtterancePair {
    pub id: String,
    pub reference: Vec<Phone>,
    pub hypothesis: Vec<Phone>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MatchedCorpus {
    /// In reference order.
    pub pairs: Vec<UtterancePair>,
    /// Reference ids with no hypothesis.
    pub missing_hypothesis: Vec<String>,
    /// Hypothesis ids with no reference.
    pub extra_hypothesis: Vec<String>,
}

/// Pairs utterances by id and resolves their tokens to phones.
pub fn match_corpora(
    reference: &Corpus,
    hypothesis: &Corpus,
    fold: Option<&FoldMap>,
) -> Result<MatchedCorpus, ParseError> {
    let mut matched = MatchedCorpus::default();
    for r in reference.iter() {
        match hypothesis.get(&r.id) {
            Some(h) => matched.pairs.push(UtterancePair {
                id: r.id.clone(),
                reference: r.phones(fold)?,
                hypothesis: h.phones(fold)?,
            }),
            None => matched.missing_hypothesis.push(r.id.clone()),
        }
    }
    matched.extra_hypothesis = hypothesis
        .iter()
        .filter(|h| reference.get(&h.id).is_none())
        .map(|h| h.id.clone())
        .collect();
    Ok(matched)
}

/// Aligns every pair; output order follows `pairs`.
pub fn align_all(pairs: &[UtterancePair], costs: EditCosts) -> Vec<Alignment> {
    pairs
        .par_iter()
        .map(|p| align(&p.reference, &p.hypothesis, costs))
        .collect()
}

pub fn breakdown_parallel(
    alignments: &[Alignment],
    cat: &BpcCategorization,
) -> Result<ErrorBreakdown, AnalysisError> {
    alignments
        .par_iter()
        .map(|a| ErrorTally::from_alignment(a, cat))
        .reduce(|| ErrorTally::new(cat), |a, b| a.merge(&b))
        .finish()
}

pub fn confusion_parallel(alignments: &[Alignment], cat: &BpcCategorization) -> ConfusionMatrix {
    alignments
        .par_iter()
        .fold(
            || ConfusionMatrix::zeros(cat),
            |mut m, a| {
                m.add(a, cat);
                m
            },
        )
        .reduce(|| ConfusionMatrix::zeros(cat), |a, b| a.merge(&b))
}
