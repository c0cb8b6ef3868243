//! Phone error rate analysis by broad phonetic class.
//!
//! Aligns reference and hypothesis phone sequences, attributes every error to
//! a broad phonetic class under three categorisations of the 39-phone
//! inventory, and builds class-level confusion matrices. The [`sinc2net`]
//! module provides the sinc-squared parametric filter used by raw-waveform
//! front ends, with frequency-response and gradient checks.

pub mod alignment;
pub mod cli;
pub mod confusion;
pub mod error_analysis;
pub mod io_formats;
pub mod phoneset;
pub mod scoring;
pub mod sinc2net;

pub use alignment::{align, distance_only, Alignment, EditCosts, EditKind, EditStep};
pub use confusion::{confusion_matrix, normalize_rows, rank_confusions, ConfusionMatrix, ConfusionRanking};
pub use error_analysis::{attribute, breakdown, relative_gain, ErrorBreakdown, ErrorTally, GainReport};
pub use phoneset::{build_categorization, BpcCategorization, BpcClass, CategorizationName, FoldMap, Phone};
