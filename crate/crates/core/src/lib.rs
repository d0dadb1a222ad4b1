//! Trading-card pipeline: corpus parsing, labeled datasets, image and text
//! classifiers, a character-level card generator, and a matcher that pairs
//! an image with the generated card whose predictions lie closest.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the matcher's
//! distance functions also accept exact rationals. The aliases below fix the
//! scalar for everyday use.

pub mod artifact;
pub mod card_data;
pub mod dataset;
pub mod error;
pub mod fixtures;
pub mod image_classifier;
pub mod labels;
pub mod matcher;
pub mod nn;
pub mod prediction;
pub mod report;
pub mod scalar;
pub mod text_classifier;
pub mod text_generator;

pub use error::{Error, Result};
pub use labels::{ColorLabel, LabelKind, TypeLabel};
pub use prediction::PredictionVector;
pub use scalar::Scalar;

/// Image classifier in single precision.
pub type ImageModel = image_classifier::ImageCnn<f32>;
pub type ImageModel64 = image_classifier::ImageCnn<f64>;
/// Text classifier in single precision.
pub type TextModel = text_classifier::TextCnn<f32>;
pub type TextModel64 = text_classifier::TextCnn<f64>;
/// Character-level generator in single precision.
pub type GeneratorModel = text_generator::CharRnn<f32>;
pub type GeneratorModel64 = text_generator::CharRnn<f64>;
/// Prediction vectors as stored in banks and emitted by classifiers.
pub type Prediction = PredictionVector<f64>;
/// Prediction vectors over exact rationals.
pub type ExactPrediction = PredictionVector<num_rational::Ratio<i64>>;
