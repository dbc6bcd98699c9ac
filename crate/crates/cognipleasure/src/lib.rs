//! Appraisal-driven computation of induced pleasure.
//!
//! The library goes from numeric cognitive-appraisal predictions to a crisp
//! pleasure score and two-/three-class pleasure labels:
//!
//! 1. [`appraisal`] fuzzifies numeric predictions into linguistic terms;
//! 2. [`rules`] parses the `.far` rule language and ships the canonical
//!    33-rule appraisal-to-emotion tree;
//! 3. [`inference`] fires rules and the calm/boredom direct path, producing
//!    emotion activations;
//! 4. [`circumplex`] places activations in the pleasure-arousal plane and
//!    aggregates them into the final score and labels;
//! 5. [`binning`] and [`metrics`] provide the evaluation machinery
//!    (fixed and k-means binners, ACC2/ACC3, confusion matrices, reports);
//! 6. [`fusion`] is a forward-only implementation of the cross-modal
//!    attention fusion math at desk scale, for invariant checking;
//! 7. [`pipeline`] and [`config`] tie everything to files and the CLI.
//!
//! ```
//! use cognipleasure::appraisal::{AppraisalVector, FuzzConfig};
//! use cognipleasure::circumplex::{aggregate_pleasure, AggregationOptions, GeometryTable, IntensityScale};
//! use cognipleasure::emotion::Label2;
//! use cognipleasure::inference::infer_all;
//! use cognipleasure::rules::RuleSet;
//!
//! let vector = AppraisalVector::new("clip-17", 2.6, 4.0, 4.8, 4.0, 2.0, 4.0, 1.0)?;
//! let activations = infer_all(&vector, RuleSet::canonical(), &FuzzConfig::crisp());
//! let result = aggregate_pleasure(
//!     &activations,
//!     &IntensityScale::default(),
//!     &GeometryTable::shipped(),
//!     &AggregationOptions::default(),
//! );
//! assert_eq!(result.label2, Label2::Pleasant);
//! # Ok::<(), cognipleasure::appraisal::AppraisalError>(())
//! ```

pub mod appraisal;
pub mod binning;
pub mod circumplex;
pub mod config;
pub mod emotion;
pub mod fusion;
pub mod inference;
pub mod metrics;
pub mod pipeline;
pub mod rules;

pub use appraisal::{AppraisalVector, FuzzConfig};
pub use circumplex::{
    aggregate_pleasure, pleasure_of, GeometryTable, IntensityScale, PleasureResult,
};
pub use emotion::{Emotion, Label2, Label3};
pub use inference::{direct_emotions, infer_all, infer_emotions, EmotionActivation};
pub use metrics::{acc2, acc3, report, ConfusionMatrix, MetricsReport};
pub use rules::{format_rules, parse_rules, validate, RuleSet};

// The guide's code blocks run as doctests, keeping book and library in
// lockstep: `cargo test --doc` fails if a chapter drifts.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/fuzzification.md")]
    mod fuzzification {}
    #[doc = include_str!("../../../book/src/rules.md")]
    mod rules {}
    #[doc = include_str!("../../../book/src/inference.md")]
    mod inference {}
    #[doc = include_str!("../../../book/src/pleasure.md")]
    mod pleasure {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/fusion.md")]
    mod fusion {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
