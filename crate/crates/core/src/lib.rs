//! Long-horizon equity movement classification toolkit.
//!
//! The pipeline turns quarterly fundamental snapshots into a binary
//! Good/Bad prediction problem (did the price rise at least 10% over one
//! year?), balances the classes, trains native classifiers, and scores
//! them with stratified cross-validation:
//!
//! - [`indicators`] / [`snapshot`] / [`features`] — the indicator registry,
//!   the company-quarter snapshot model, file parsing, and sentinel-encoded
//!   feature vectors
//! - [`labeling`] — horizon-return labeling, dataset assembly, class
//!   balancing by downsampling
//! - [`learners`] — decision tree (gain ratio, pessimistic pruning),
//!   random tree, random forest, Gaussian naive Bayes, logistic regression
//! - [`evaluation`] — stratified k-fold cross-validation, weighted
//!   precision/recall/F-score, paired t-test
//! - [`feature_selection`] — greedy backward elimination driven by
//!   cross-validated F-score
//! - [`synth`] — synthetic snapshot generator with a planted signal and a
//!   Monte-Carlo oracle for its Bayes rate
//! - [`model_io`] — versioned model files with canonical byte layout

pub mod evaluation;
pub mod feature_selection;
pub mod features;
pub mod indicators;
pub mod labeling;
pub mod learners;
pub mod model_io;
pub mod seeds;
pub mod snapshot;
pub mod synth;

pub use features::{FeatureId, FeatureSet, FeatureVector, SENTINEL};
pub use indicators::{registry, Indicator, IndicatorRegistry, Unit};
pub use labeling::{Label, LabeledDataset, LabeledExample};
pub use learners::{Algorithm, LearnerSpec, Prediction, TrainedModel};
pub use snapshot::{Quarter, StockSnapshot};
