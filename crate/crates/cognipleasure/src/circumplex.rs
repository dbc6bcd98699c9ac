//! The pleasure-arousal plane: emotion geometry, defuzzification, and the
//! weighted pleasure aggregate.
//!
//! Each emotion sits at an empirically derived mean angle in the circumplex;
//! the horizontal axis is pleasure, the vertical axis arousal. An activated
//! (emotion, intensity) pair becomes a vector whose angle comes from the
//! geometry table and whose magnitude comes from the intensity scale, and its
//! pleasure contribution is `magnitude * cos(angle)`. Contributions are
//! combined as a weighted mean with condition-count weights.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::appraisal::Level;
use crate::emotion::{Emotion, Label2, Label3};
use crate::inference::EmotionActivation;

#[derive(Debug, Error, PartialEq)]
pub enum CircumplexError {
    #[error("geometry table is missing {0}")]
    MissingEmotion(Emotion),
    #[error("geometry row for {emotion} is invalid: {reason}")]
    InvalidGeometry { emotion: Emotion, reason: String },
    #[error("intensity magnitudes must satisfy neutral_ceiling < low < medium < high <= 1")]
    InvalidIntensityScale,
}

/// One emotion's empirical placement in the circumplex.
///
/// `pleasure` and `arousal` are the rater-study axis values retained for the
/// internal consistency check against the angle; the standard deviation is
/// shipped but unused by the defuzzification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmotionGeometry {
    pub mean_angle_deg: f64,
    pub sd_deg: f64,
    pub pleasure: f64,
    pub arousal: f64,
}

/// Shipped geometry rows: (emotion, pleasure, arousal, mean angle, sd).
const GEOMETRY_ROWS: [(Emotion, f64, f64, f64, f64); 10] = [
    (Emotion::Happiness, 0.90, 0.42, 25.09, 19.02),
    (Emotion::Excitement, 0.76, 0.64, 39.97, 10.32),
    (Emotion::Surprise, 0.31, 0.95, 71.63, 26.38),
    (Emotion::Fear, -0.58, 0.81, 125.51, 15.61),
    (Emotion::Anger, -0.74, 0.66, 138.55, 16.90),
    (Emotion::Disgust, -0.99, -0.04, 182.58, 43.65),
    (Emotion::Sadness, -0.96, -0.27, 196.02, 22.48),
    (Emotion::Boredom, -0.41, -0.91, 245.34, 21.41),
    (Emotion::Sleepiness, -0.11, -0.99, 263.59, 15.56),
    (Emotion::Calm, 0.74, -0.67, 318.12, 35.89),
];

/// Angle lookup for all ten emotions. Construction requires full coverage,
/// so lookups are infallible.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometryTable {
    rows: BTreeMap<Emotion, EmotionGeometry>,
}

impl GeometryTable {
    /// The empirical table shipped with the crate.
    pub fn shipped() -> GeometryTable {
        let rows = GEOMETRY_ROWS
            .iter()
            .map(|&(emotion, pleasure, arousal, mean_angle_deg, sd_deg)| {
                (
                    emotion,
                    EmotionGeometry {
                        mean_angle_deg,
                        sd_deg,
                        pleasure,
                        arousal,
                    },
                )
            })
            .collect();
        GeometryTable { rows }
    }

    /// Builds a table from explicit rows; every emotion must be present.
    pub fn from_rows(rows: BTreeMap<Emotion, EmotionGeometry>) -> Result<Self, CircumplexError> {
        for emotion in Emotion::ALL {
            let row = rows
                .get(&emotion)
                .ok_or(CircumplexError::MissingEmotion(emotion))?;
            if !(0.0..360.0).contains(&row.mean_angle_deg) {
                return Err(CircumplexError::InvalidGeometry {
                    emotion,
                    reason: format!("angle {} outside [0, 360)", row.mean_angle_deg),
                });
            }
            if row.pleasure.abs() > 1.0 || row.arousal.abs() > 1.0 || row.sd_deg < 0.0 {
                return Err(CircumplexError::InvalidGeometry {
                    emotion,
                    reason: "pleasure/arousal outside [-1, 1] or negative sd".to_string(),
                });
            }
        }
        Ok(GeometryTable { rows })
    }

    /// Replaces individual rows, keeping the rest of the table.
    pub fn with_overrides(
        &self,
        overrides: BTreeMap<Emotion, EmotionGeometry>,
    ) -> Result<Self, CircumplexError> {
        let mut rows = self.rows.clone();
        rows.extend(overrides);
        GeometryTable::from_rows(rows)
    }

    pub fn geometry(&self, emotion: Emotion) -> &EmotionGeometry {
        &self.rows[&emotion]
    }

    /// Mean circumplex angle of an emotion, in degrees.
    pub fn angle(&self, emotion: Emotion) -> f64 {
        self.rows[&emotion].mean_angle_deg
    }

    pub fn rows(&self) -> &BTreeMap<Emotion, EmotionGeometry> {
        &self.rows
    }
}

impl Default for GeometryTable {
    fn default() -> Self {
        GeometryTable::shipped()
    }
}

/// Mean angle of an emotion in the shipped table, in degrees.
pub fn emotion_angle(emotion: Emotion) -> f64 {
    GEOMETRY_ROWS
        .iter()
        .find(|(e, ..)| *e == emotion)
        .map(|&(_, _, _, angle, _)| angle)
        .expect("shipped geometry covers every emotion")
}

fn default_high() -> f64 {
    0.875
}
fn default_medium() -> f64 {
    0.625
}
fn default_low() -> f64 {
    0.375
}
fn default_neutral_ceiling() -> f64 {
    0.25
}

/// Scalar magnitudes of the intensity levels.
///
/// Defaults are the ring mid-points of a unit disk quartered at radius 0.25:
/// anything below the neutral ceiling counts as not evoked and has no
/// magnitude at all.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntensityScale {
    #[serde(default = "default_high")]
    pub high: f64,
    #[serde(default = "default_medium")]
    pub medium: f64,
    #[serde(default = "default_low")]
    pub low: f64,
    #[serde(default = "default_neutral_ceiling")]
    pub neutral_ceiling: f64,
}

impl Default for IntensityScale {
    fn default() -> Self {
        IntensityScale {
            high: default_high(),
            medium: default_medium(),
            low: default_low(),
            neutral_ceiling: default_neutral_ceiling(),
        }
    }
}

impl IntensityScale {
    /// A scale whose `high` ring reaches the rim of the unit disk.
    pub fn unit_high() -> Self {
        IntensityScale {
            high: 1.0,
            ..IntensityScale::default()
        }
    }

    pub fn validate(&self) -> Result<(), CircumplexError> {
        let ordered = self.neutral_ceiling < self.low
            && self.low < self.medium
            && self.medium < self.high
            && self.high <= 1.0
            && self.neutral_ceiling >= 0.0;
        if ordered {
            Ok(())
        } else {
            Err(CircumplexError::InvalidIntensityScale)
        }
    }

    pub fn magnitude(&self, level: Level) -> f64 {
        match level {
            Level::High => self.high,
            Level::Medium => self.medium,
            Level::Low => self.low,
        }
    }
}

/// A polar vector in the pleasure-arousal plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PAVector {
    pub angle_deg: f64,
    pub magnitude: f64,
}

impl PAVector {
    /// Horizontal (pleasure) component: `|e| * cos(angle)`.
    pub fn pleasure(&self) -> f64 {
        self.magnitude * self.angle_deg.to_radians().cos()
    }

    /// Vertical (arousal) component, used only for consistency checks.
    pub fn arousal(&self) -> f64 {
        self.magnitude * self.angle_deg.to_radians().sin()
    }
}

/// Places an activation in the plane.
pub fn pa_vector(
    activation: &EmotionActivation,
    scale: &IntensityScale,
    table: &GeometryTable,
) -> PAVector {
    PAVector {
        angle_deg: table.angle(activation.emotion),
        magnitude: scale.magnitude(activation.intensity),
    }
}

/// Crisp pleasure contribution of one activation.
pub fn pleasure_of(
    activation: &EmotionActivation,
    scale: &IntensityScale,
    table: &GeometryTable,
) -> f64 {
    pa_vector(activation, scale, table).pleasure()
}

/// One emotion's share of the final score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Contribution {
    pub emotion: Emotion,
    pub intensity: Level,
    pub pleasure: f64,
    /// Aggregation weight actually applied (condition count, or
    /// count x strength in the strength-weighted mode).
    pub weight: f64,
}

/// Final pleasure score with its labels and per-emotion breakdown.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PleasureResult {
    pub score: f64,
    pub label2: Label2,
    pub label3: Label3,
    pub contributions: Vec<Contribution>,
    /// True when no rule fired and no direct activation was supplied; the
    /// score is then 0 by convention and the three-class label is Neutral.
    pub no_activation: bool,
}

/// Aggregation settings. The condition-count weighting is the published
/// behaviour; the strength-weighted variant folds membership degrees into
/// the weights and is off by default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregationOptions {
    pub label3_eps: f64,
    pub strength_weighted: bool,
}

impl Default for AggregationOptions {
    fn default() -> Self {
        AggregationOptions {
            label3_eps: 0.1,
            strength_weighted: false,
        }
    }
}

/// Weighted-mean pleasure over a set of activations.
///
/// With unit weights this is the arithmetic mean; the score always lies
/// between the smallest and largest contribution. An empty activation list
/// scores 0 and labels Neutral, with `no_activation` set.
pub fn aggregate_pleasure(
    activations: &[EmotionActivation],
    scale: &IntensityScale,
    table: &GeometryTable,
    options: &AggregationOptions,
) -> PleasureResult {
    if activations.is_empty() {
        return PleasureResult {
            score: 0.0,
            label2: to_label2(0.0),
            label3: Label3::Neutral,
            contributions: Vec::new(),
            no_activation: true,
        };
    }
    let mut contributions = Vec::with_capacity(activations.len());
    let mut weighted_sum = 0.0;
    let mut weight_sum = 0.0;
    for activation in activations {
        let pleasure = pleasure_of(activation, scale, table);
        let weight = if options.strength_weighted {
            f64::from(activation.weight) * activation.strength
        } else {
            f64::from(activation.weight)
        };
        weighted_sum += weight * pleasure;
        weight_sum += weight;
        contributions.push(Contribution {
            emotion: activation.emotion,
            intensity: activation.intensity,
            pleasure,
            weight,
        });
    }
    let score = weighted_sum / weight_sum;
    PleasureResult {
        score,
        label2: to_label2(score),
        label3: to_label3(score, options.label3_eps),
        contributions,
        no_activation: false,
    }
}

/// Two-class label; an exactly zero score ties toward Unpleasant.
pub fn to_label2(score: f64) -> Label2 {
    if score > 0.0 {
        Label2::Pleasant
    } else {
        Label2::Unpleasant
    }
}

/// Three-class label with a neutral band of half-width `eps` around zero.
/// Outside the band the sign decides, with the same zero tie-break as
/// [`to_label2`].
pub fn to_label3(score: f64, eps: f64) -> Label3 {
    if score.abs() < eps {
        Label3::Neutral
    } else if score > 0.0 {
        Label3::Pleasant
    } else {
        Label3::Unpleasant
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn activation(emotion: Emotion, intensity: Level, weight: u32) -> EmotionActivation {
        EmotionActivation {
            emotion,
            intensity,
            weight,
            strength: 1.0,
        }
    }

    #[test]
    fn shipped_angles() {
        assert_eq!(emotion_angle(Emotion::Calm), 318.12);
        assert_eq!(emotion_angle(Emotion::Happiness), 25.09);
        assert_eq!(emotion_angle(Emotion::Disgust), 182.58);
    }

    #[test]
    fn geometry_is_consistent_with_axis_columns() {
        let table = GeometryTable::shipped();
        for emotion in Emotion::ALL {
            let row = table.geometry(emotion);
            let rad = row.mean_angle_deg.to_radians();
            assert!(
                (rad.cos() - row.pleasure).abs() <= 0.015,
                "{emotion}: cos deviates"
            );
            assert!(
                (rad.sin() - row.arousal).abs() <= 0.015,
                "{emotion}: sin deviates"
            );
        }
    }

    #[test]
    fn pleasure_of_matches_axis_values_at_unit_magnitude() {
        let table = GeometryTable::shipped();
        let scale = IntensityScale::unit_high();
        let calm = pleasure_of(&activation(Emotion::Calm, Level::High, 1), &scale, &table);
        assert_abs_diff_eq!(calm, 0.7446, epsilon = 1e-4);
        let disgust = pleasure_of(
            &activation(Emotion::Disgust, Level::High, 1),
            &scale,
            &table,
        );
        assert_abs_diff_eq!(disgust, -0.9990, epsilon = 1e-4);
    }

    #[test]
    fn pleasure_of_scales_with_magnitude() {
        let table = GeometryTable::shipped();
        let scale = IntensityScale::default();
        let happy = pleasure_of(
            &activation(Emotion::Happiness, Level::High, 1),
            &scale,
            &table,
        );
        assert_abs_diff_eq!(happy, 0.875 * 25.09f64.to_radians().cos(), epsilon = 1e-12);
        assert_abs_diff_eq!(happy, 0.7925, epsilon = 1e-4);
    }

    #[test]
    fn aggregate_reproduces_worked_example() {
        // (3 * cos 25.09 + 1 * cos 318.12) / 4 at unit High magnitude.
        let table = GeometryTable::shipped();
        let scale = IntensityScale::unit_high();
        let result = aggregate_pleasure(
            &[
                activation(Emotion::Happiness, Level::High, 3),
                activation(Emotion::Calm, Level::High, 1),
            ],
            &scale,
            &table,
            &AggregationOptions::default(),
        );
        assert_abs_diff_eq!(result.score, 0.8654, epsilon = 1e-4);
        assert_eq!(result.label2, Label2::Pleasant);
        assert!(!result.no_activation);
    }

    #[test]
    fn single_activation_mean_is_the_element() {
        let table = GeometryTable::shipped();
        let scale = IntensityScale::unit_high();
        let result = aggregate_pleasure(
            &[activation(Emotion::Sadness, Level::High, 3)],
            &scale,
            &table,
            &AggregationOptions::default(),
        );
        assert_abs_diff_eq!(result.score, -0.9612, epsilon = 1e-4);
    }

    #[test]
    fn empty_activations_score_zero_neutral() {
        let result = aggregate_pleasure(
            &[],
            &IntensityScale::default(),
            &GeometryTable::shipped(),
            &AggregationOptions::default(),
        );
        assert_eq!(result.score, 0.0);
        assert_eq!(result.label3, Label3::Neutral);
        assert_eq!(result.label2, Label2::Unpleasant);
        assert!(result.no_activation);
        assert!(result.contributions.is_empty());
    }

    #[test]
    fn score_is_exact_weighted_mean_of_contributions() {
        let table = GeometryTable::shipped();
        let scale = IntensityScale::default();
        let result = aggregate_pleasure(
            &[
                activation(Emotion::Happiness, Level::High, 3),
                activation(Emotion::Boredom, Level::Low, 1),
                activation(Emotion::Fear, Level::Medium, 5),
            ],
            &scale,
            &table,
            &AggregationOptions::default(),
        );
        let num: f64 = result
            .contributions
            .iter()
            .map(|c| c.weight * c.pleasure)
            .sum();
        let den: f64 = result.contributions.iter().map(|c| c.weight).sum();
        assert_abs_diff_eq!(result.score, num / den, epsilon = 1e-12);
        let lo = result
            .contributions
            .iter()
            .map(|c| c.pleasure)
            .fold(f64::INFINITY, f64::min);
        let hi = result
            .contributions
            .iter()
            .map(|c| c.pleasure)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(result.score >= lo && result.score <= hi);
    }

    #[test]
    fn labels() {
        assert_eq!(to_label2(0.5), Label2::Pleasant);
        assert_eq!(to_label2(-0.2), Label2::Unpleasant);
        assert_eq!(to_label2(0.0), Label2::Unpleasant);
        assert_eq!(to_label3(0.05, 0.1), Label3::Neutral);
        assert_eq!(to_label3(-0.3, 0.1), Label3::Unpleasant);
        assert_eq!(to_label3(0.1, 0.1), Label3::Pleasant);
        assert_eq!(to_label3(0.0, 0.0), Label3::Unpleasant);
    }

    #[test]
    fn intensity_scale_validation() {
        assert!(IntensityScale::default().validate().is_ok());
        assert!(IntensityScale::unit_high().validate().is_ok());
        let bad = IntensityScale {
            high: 0.3,
            medium: 0.625,
            low: 0.375,
            neutral_ceiling: 0.25,
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn geometry_table_requires_full_coverage() {
        let mut rows = GeometryTable::shipped().rows().clone();
        rows.remove(&Emotion::Sleepiness);
        assert_eq!(
            GeometryTable::from_rows(rows).unwrap_err(),
            CircumplexError::MissingEmotion(Emotion::Sleepiness)
        );
    }
}
