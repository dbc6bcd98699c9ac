//! Appraisal domain types and the fuzzification layer.
//!
//! Numeric appraisal predictions live on a fixed `[0, 5]` scale. Each
//! three-level variable carries two interior boundaries that partition the
//! scale into `Low | Medium | High` bins; desirability additionally carries a
//! six-level partition used by the rule language. Fuzzification turns a crisp
//! value into linguistic terms with membership degrees.
//!
//! Membership functions are symmetric trapezoids controlled by a single
//! overlap fraction `omega`. At every interior boundary the two adjacent
//! terms cross at degree 0.5 and their ramps mirror each other, so the
//! memberships of a variable's terms always sum to one (partition of unity).
//! With `omega = 0` the trapezoids degenerate to crisp bins: lower edge
//! inclusive, upper edge exclusive, top bin closed at the domain edge.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Lower edge of the appraisal scale.
pub const SCALE_MIN: f64 = 0.0;
/// Upper edge of the appraisal scale.
pub const SCALE_MAX: f64 = 5.0;

/// Errors from appraisal-vector construction and fuzzifier configuration.
#[derive(Debug, Error, PartialEq)]
pub enum AppraisalError {
    #[error("utterance id must be non-empty")]
    EmptyUtteranceId,
    #[error("{field} = {value} is outside the [0, 5] appraisal scale")]
    OutOfRange { field: &'static str, value: f64 },
    #[error("overlap fraction {0} is outside [0, 0.5)")]
    InvalidOverlap(f64),
    #[error("boundaries for {variable} must be strictly increasing within [0, 5]")]
    InvalidBoundaries { variable: String },
}

/// A variable with a three-level `Low | Medium | High` partition.
///
/// Desirability appears here with its three-cluster boundaries (used by the
/// evaluation binners); the rule language sees desirability through the
/// six-level partition instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    Expectedness,
    Likelihood,
    Desirability,
    Controllability,
    Calm,
    Boredom,
}

impl Variable {
    pub const ALL: [Variable; 6] = [
        Variable::Expectedness,
        Variable::Likelihood,
        Variable::Desirability,
        Variable::Controllability,
        Variable::Calm,
        Variable::Boredom,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Variable::Expectedness => "expectedness",
            Variable::Likelihood => "likelihood",
            Variable::Desirability => "desirability",
            Variable::Controllability => "controllability",
            Variable::Calm => "calm",
            Variable::Boredom => "boredom",
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Three-level linguistic term, also used for rule-outcome intensities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Low,
    Medium,
    High,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Low, Level::Medium, Level::High];

    pub fn name(&self) -> &'static str {
        match self {
            Level::Low => "low",
            Level::Medium => "medium",
            Level::High => "high",
        }
    }

    pub fn parse(s: &str) -> Option<Level> {
        Level::ALL.iter().copied().find(|l| l.name() == s)
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Six-level desirability term, ordered from most negative to most positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesirabilityLevel {
    HighlyUndesirable,
    Undesirable,
    LowUndesirable,
    LowDesirable,
    Desirable,
    HighlyDesirable,
}

impl DesirabilityLevel {
    pub const ALL: [DesirabilityLevel; 6] = [
        DesirabilityLevel::HighlyUndesirable,
        DesirabilityLevel::Undesirable,
        DesirabilityLevel::LowUndesirable,
        DesirabilityLevel::LowDesirable,
        DesirabilityLevel::Desirable,
        DesirabilityLevel::HighlyDesirable,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            DesirabilityLevel::HighlyUndesirable => "highly_undesirable",
            DesirabilityLevel::Undesirable => "undesirable",
            DesirabilityLevel::LowUndesirable => "low_undesirable",
            DesirabilityLevel::LowDesirable => "low_desirable",
            DesirabilityLevel::Desirable => "desirable",
            DesirabilityLevel::HighlyDesirable => "highly_desirable",
        }
    }

    pub fn parse(s: &str) -> Option<DesirabilityLevel> {
        DesirabilityLevel::ALL
            .iter()
            .copied()
            .find(|l| l.name() == s)
    }
}

impl fmt::Display for DesirabilityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Who is responsible for the appraised event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Agency {
    Other,
    None,
}

impl Agency {
    pub fn name(&self) -> &'static str {
        match self {
            Agency::Other => "other",
            Agency::None => "none",
        }
    }

    pub fn parse(s: &str) -> Option<Agency> {
        match s {
            "other" => Some(Agency::Other),
            "none" => Some(Agency::None),
            _ => None,
        }
    }
}

impl fmt::Display for Agency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A validated (variable, term) pairing for the generic membership entry
/// point. Construction rules out mismatched pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinguisticTerm {
    /// A `Low | Medium | High` term of one of the boundary-mapped variables.
    ThreeLevel(Variable, Level),
    /// A six-level desirability term.
    Desirability(DesirabilityLevel),
    /// An agency category (crisp membership).
    Agency(Agency),
}

/// One utterance's seven numeric predictions on the `[0, 5]` scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppraisalVector {
    pub utterance_id: String,
    pub expectedness: f64,
    pub likelihood: f64,
    pub desirability: f64,
    pub agency: f64,
    pub controllability: f64,
    pub calm: f64,
    pub boredom: f64,
}

impl AppraisalVector {
    /// Builds a vector, rejecting out-of-range or non-finite values and empty ids.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        utterance_id: impl Into<String>,
        expectedness: f64,
        likelihood: f64,
        desirability: f64,
        agency: f64,
        controllability: f64,
        calm: f64,
        boredom: f64,
    ) -> Result<Self, AppraisalError> {
        let utterance_id = utterance_id.into();
        if utterance_id.is_empty() {
            return Err(AppraisalError::EmptyUtteranceId);
        }
        let fields = [
            ("expectedness", expectedness),
            ("likelihood", likelihood),
            ("desirability", desirability),
            ("agency", agency),
            ("controllability", controllability),
            ("calm", calm),
            ("boredom", boredom),
        ];
        for (field, value) in fields {
            if !(SCALE_MIN..=SCALE_MAX).contains(&value) {
                return Err(AppraisalError::OutOfRange { field, value });
            }
        }
        Ok(AppraisalVector {
            utterance_id,
            expectedness,
            likelihood,
            desirability,
            agency,
            controllability,
            calm,
            boredom,
        })
    }

    /// Value of a boundary-mapped variable.
    pub fn get(&self, variable: Variable) -> f64 {
        match variable {
            Variable::Expectedness => self.expectedness,
            Variable::Likelihood => self.likelihood,
            Variable::Desirability => self.desirability,
            Variable::Controllability => self.controllability,
            Variable::Calm => self.calm,
            Variable::Boredom => self.boredom,
        }
    }
}

fn default_boundaries() -> BTreeMap<Variable, [f64; 2]> {
    // Cluster boundaries fitted on the appraisal training data; shipped as
    // configuration since the source predictions are not redistributable.
    [
        (Variable::Desirability, [1.72, 3.44]),
        (Variable::Calm, [1.72, 3.47]),
        (Variable::Boredom, [1.69, 3.50]),
        (Variable::Controllability, [1.71, 3.34]),
        (Variable::Likelihood, [1.75, 3.43]),
        (Variable::Expectedness, [1.75, 3.37]),
    ]
    .into_iter()
    .collect()
}

fn default_desirability_bins() -> [f64; 5] {
    // Six equal-width bins over [0, 5], symmetric about 2.5.
    [5.0 / 6.0, 10.0 / 6.0, 15.0 / 6.0, 20.0 / 6.0, 25.0 / 6.0]
}

fn default_overlap() -> f64 {
    0.2
}

fn default_agency_threshold() -> f64 {
    2.5
}

/// Fuzzification parameters: per-variable boundaries, the trapezoid overlap
/// fraction, the six-level desirability partition, and the agency threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuzzConfig {
    /// Interior `[b1, b2]` boundaries per three-level variable.
    #[serde(default = "default_boundaries")]
    pub boundaries: BTreeMap<Variable, [f64; 2]>,
    /// Overlap fraction `omega` in `[0, 0.5)`. Zero means crisp bins.
    #[serde(default = "default_overlap")]
    pub overlap: f64,
    /// Five interior boundaries of the six-level desirability partition.
    #[serde(default = "default_desirability_bins")]
    pub desirability_bins: [f64; 5],
    /// Values at or above this threshold count as `other` agency.
    #[serde(default = "default_agency_threshold")]
    pub agency_threshold: f64,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            boundaries: default_boundaries(),
            overlap: default_overlap(),
            desirability_bins: default_desirability_bins(),
            agency_threshold: default_agency_threshold(),
        }
    }
}

impl FuzzConfig {
    /// Crisp variant of the default configuration (`omega = 0`).
    pub fn crisp() -> Self {
        FuzzConfig {
            overlap: 0.0,
            ..FuzzConfig::default()
        }
    }

    pub fn with_overlap(overlap: f64) -> Result<Self, AppraisalError> {
        let cfg = FuzzConfig {
            overlap,
            ..FuzzConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks overlap range and boundary ordering.
    pub fn validate(&self) -> Result<(), AppraisalError> {
        if !(0.0..0.5).contains(&self.overlap) {
            return Err(AppraisalError::InvalidOverlap(self.overlap));
        }
        for (variable, bounds) in &self.boundaries {
            if !strictly_increasing_in_scale(bounds) {
                return Err(AppraisalError::InvalidBoundaries {
                    variable: variable.name().to_string(),
                });
            }
        }
        if !strictly_increasing_in_scale(&self.desirability_bins) {
            return Err(AppraisalError::InvalidBoundaries {
                variable: "desirability (six-level)".to_string(),
            });
        }
        Ok(())
    }

    fn bounds(&self, variable: Variable) -> &[f64] {
        self.boundaries
            .get(&variable)
            .map(|b| b.as_slice())
            .unwrap_or(&[])
    }

    /// Membership degree of a three-level term for `variable` at `value`.
    pub fn membership3(&self, variable: Variable, level: Level, value: f64) -> f64 {
        term_membership(value, level as usize, self.bounds(variable), self.overlap)
    }

    /// Membership degree of a six-level desirability term at `value`.
    pub fn membership_desirability(&self, level: DesirabilityLevel, value: f64) -> f64 {
        term_membership(value, level as usize, &self.desirability_bins, self.overlap)
    }

    /// Crisp agency membership: 1 when the thresholded category matches.
    pub fn membership_agency(&self, term: Agency, value: f64) -> f64 {
        if self.fuzzify_agency(value) == term {
            1.0
        } else {
            0.0
        }
    }

    /// Generic membership entry point over any validated (variable, term) pair.
    pub fn membership(&self, term: &LinguisticTerm, value: f64) -> f64 {
        match term {
            LinguisticTerm::ThreeLevel(variable, level) => {
                self.membership3(*variable, *level, value)
            }
            LinguisticTerm::Desirability(level) => self.membership_desirability(*level, value),
            LinguisticTerm::Agency(agency) => self.membership_agency(*agency, value),
        }
    }

    /// All three-level terms with positive membership, strongest first.
    /// Ties are broken toward the lower term so output order is total.
    pub fn fuzzify3(&self, variable: Variable, value: f64) -> Vec<(Level, f64)> {
        let bounds = self.bounds(variable);
        let mut out: Vec<(Level, f64)> = Level::ALL
            .iter()
            .map(|&level| {
                (
                    level,
                    term_membership(value, level as usize, bounds, self.overlap),
                )
            })
            .filter(|(_, degree)| *degree > 0.0)
            .collect();
        out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        out
    }

    /// All six-level desirability terms with positive membership, strongest first.
    pub fn fuzzify_desirability(&self, value: f64) -> Vec<(DesirabilityLevel, f64)> {
        let mut out: Vec<(DesirabilityLevel, f64)> = DesirabilityLevel::ALL
            .iter()
            .map(|&level| (level, self.membership_desirability(level, value)))
            .filter(|(_, degree)| *degree > 0.0)
            .collect();
        out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        out
    }

    /// Crisp agency category: at or above the threshold means `other`.
    pub fn fuzzify_agency(&self, value: f64) -> Agency {
        if value >= self.agency_threshold {
            Agency::Other
        } else {
            Agency::None
        }
    }
}

fn strictly_increasing_in_scale(bounds: &[f64]) -> bool {
    bounds.iter().all(|b| (SCALE_MIN..=SCALE_MAX).contains(b))
        && bounds.windows(2).all(|w| w[0] < w[1])
}

/// Half-ramp width at each interior boundary.
///
/// The ramp at a boundary must be shared by both adjacent terms for their
/// memberships to sum to one, so it is sized from the narrower of the two
/// bins: `h = omega * min(w_left, w_right) / 2`. For equal-width bins this
/// is exactly `omega * w / 2`. With `omega < 0.5` the two ramps inside any
/// bin never meet, so no point sees more than two terms.
fn half_ramps(bounds: &[f64], omega: f64) -> Vec<f64> {
    let mut edges = Vec::with_capacity(bounds.len() + 2);
    edges.push(SCALE_MIN);
    edges.extend_from_slice(bounds);
    edges.push(SCALE_MAX);
    (1..edges.len() - 1)
        .map(|j| {
            let w_left = edges[j] - edges[j - 1];
            let w_right = edges[j + 1] - edges[j];
            omega * w_left.min(w_right) / 2.0
        })
        .collect()
}

/// Rising edge at boundary `b`: 0 below the ramp, 1 above it. A zero-width
/// ramp degenerates to a lower-inclusive step.
fn ramp_up(value: f64, b: f64, h: f64) -> f64 {
    if h == 0.0 {
        if value >= b {
            1.0
        } else {
            0.0
        }
    } else {
        ((value - (b - h)) / (2.0 * h)).clamp(0.0, 1.0)
    }
}

/// Falling edge at boundary `b`, the mirror of `ramp_up`.
fn ramp_down(value: f64, b: f64, h: f64) -> f64 {
    if h == 0.0 {
        if value < b {
            1.0
        } else {
            0.0
        }
    } else {
        (((b + h) - value) / (2.0 * h)).clamp(0.0, 1.0)
    }
}

/// Trapezoidal membership of the `idx`-th term of the partition described by
/// `bounds`. Outermost terms stay flat out to the domain edges.
fn term_membership(value: f64, idx: usize, bounds: &[f64], omega: f64) -> f64 {
    let ramps = half_ramps(bounds, omega);
    let rise = if idx == 0 {
        1.0
    } else {
        ramp_up(value, bounds[idx - 1], ramps[idx - 1])
    };
    let fall = if idx == bounds.len() {
        1.0
    } else {
        ramp_down(value, bounds[idx], ramps[idx])
    };
    rise.min(fall)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg(overlap: f64) -> FuzzConfig {
        FuzzConfig::with_overlap(overlap).unwrap()
    }

    #[test]
    fn crisp_interior_point_has_full_membership() {
        // Likelihood boundaries [1.75, 3.43]: 2.5 sits inside the Medium bin.
        let c = cfg(0.0);
        assert_eq!(c.membership3(Variable::Likelihood, Level::Medium, 2.5), 1.0);
        assert_eq!(c.membership3(Variable::Likelihood, Level::Low, 2.5), 0.0);
    }

    #[test]
    fn shared_boundary_splits_membership_evenly() {
        // Three-level desirability at its own lower boundary with overlap.
        let c = cfg(0.2);
        let low = c.membership3(Variable::Desirability, Level::Low, 1.72);
        let med = c.membership3(Variable::Desirability, Level::Medium, 1.72);
        assert_abs_diff_eq!(low, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(med, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn domain_edge_stays_flat() {
        for overlap in [0.0, 0.2, 0.49] {
            let c = cfg(overlap);
            assert_eq!(c.membership3(Variable::Expectedness, Level::Low, 0.0), 1.0);
            assert_eq!(c.membership3(Variable::Expectedness, Level::High, 5.0), 1.0);
        }
    }

    #[test]
    fn fuzzify3_crisp_cases() {
        let c = cfg(0.0);
        assert_eq!(
            c.fuzzify3(Variable::Controllability, 4.0),
            vec![(Level::High, 1.0)]
        );
        // Upper boundary is inclusive for the bin above it.
        assert_eq!(
            c.fuzzify3(Variable::Controllability, 3.34),
            vec![(Level::High, 1.0)]
        );
    }

    #[test]
    fn fuzzify3_boundary_with_overlap() {
        let c = cfg(0.2);
        let terms = c.fuzzify3(Variable::Controllability, 1.71);
        assert_eq!(terms.len(), 2);
        assert_eq!(terms[0].0, Level::Low);
        assert_eq!(terms[1].0, Level::Medium);
        assert_abs_diff_eq!(terms[0].1, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(terms[1].1, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn desirability_six_level_crisp() {
        let c = cfg(0.0);
        assert_eq!(
            c.fuzzify_desirability(4.8),
            vec![(DesirabilityLevel::HighlyDesirable, 1.0)]
        );
        // 2.5 is the lower-inclusive edge of the low_desirable bin.
        assert_eq!(
            c.fuzzify_desirability(2.5),
            vec![(DesirabilityLevel::LowDesirable, 1.0)]
        );
    }

    #[test]
    fn desirability_ramp_near_first_boundary() {
        // h = 0.2 * (5/6) / 2 = 1/12 around the boundary at 5/6.
        let c = cfg(0.2);
        let terms = c.fuzzify_desirability(0.9);
        assert_eq!(terms[0].0, DesirabilityLevel::Undesirable);
        assert_eq!(terms[1].0, DesirabilityLevel::HighlyUndesirable);
        assert_abs_diff_eq!(terms[0].1, 0.9, epsilon = 1e-9);
        assert_abs_diff_eq!(terms[1].1, 0.1, epsilon = 1e-9);
        assert_abs_diff_eq!(terms[0].1 + terms[1].1, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn agency_threshold_is_inclusive() {
        let c = FuzzConfig::default();
        assert_eq!(c.fuzzify_agency(5.0), Agency::Other);
        assert_eq!(c.fuzzify_agency(0.0), Agency::None);
        assert_eq!(c.fuzzify_agency(2.5), Agency::Other);
    }

    #[test]
    fn vector_rejects_out_of_range_and_empty_id() {
        let err = AppraisalVector::new("u1", 0.0, 0.0, 6.2, 0.0, 0.0, 0.0, 0.0).unwrap_err();
        assert_eq!(
            err,
            AppraisalError::OutOfRange {
                field: "desirability",
                value: 6.2
            }
        );
        assert!(AppraisalVector::new("", 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(AppraisalVector::new("u", 1.0, f64::NAN, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(FuzzConfig::with_overlap(0.5).is_err());
        assert!(FuzzConfig::with_overlap(-0.1).is_err());
        let mut c = FuzzConfig::default();
        c.boundaries.insert(Variable::Calm, [3.0, 3.0]);
        assert!(c.validate().is_err());
    }

    #[test]
    fn partition_of_unity_randomized() {
        let mut state = 0x243f_6a88_85a3_08d3u64;
        let mut next = move || {
            // xorshift is plenty for test point generation
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..2000 {
            let omega = next() * 0.499;
            let value = next() * 5.0;
            let c = cfg(omega);
            for variable in Variable::ALL {
                let total: f64 = Level::ALL
                    .iter()
                    .map(|&l| c.membership3(variable, l, value))
                    .sum();
                assert!(
                    (total - 1.0).abs() < 1e-9,
                    "{variable} at {value}, omega {omega}"
                );
            }
            let total6: f64 = DesirabilityLevel::ALL
                .iter()
                .map(|&l| c.membership_desirability(l, value))
                .sum();
            assert!((total6 - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn monotone_term_order() {
        let c = cfg(0.3);
        for variable in Variable::ALL {
            let mut prev = Level::Low;
            for i in 0..=500 {
                let value = 5.0 * i as f64 / 500.0;
                let top = c.fuzzify3(variable, value)[0].0;
                assert!(top >= prev, "{variable}: top term regressed at {value}");
                prev = top;
            }
        }
    }
}
