//! Rule evaluation: from an appraisal vector to emotion activations.
//!
//! Every rule is gated by the min-combined membership of its non-wildcard
//! conditions (the standard fuzzy AND). A rule with positive strength emits
//! one activation per outcome, each carrying the rule's condition-count
//! weight. Calm and boredom bypass the rules entirely: the model's numeric
//! predictions for them are binned directly.

use serde::Serialize;

use crate::appraisal::{AppraisalVector, FuzzConfig, Level, Variable};
use crate::emotion::Emotion;
use crate::rules::{Outcome, Pattern, Rule, RuleSet};

/// One activated (emotion, intensity) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmotionActivation {
    pub emotion: Emotion,
    pub intensity: Level,
    /// Condition-count weight of the source rule (1 for the direct path).
    pub weight: u32,
    /// Min-combined membership of the source rule's conditions, in (0, 1].
    pub strength: f64,
}

/// Per-condition membership trace of a fired rule, for diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionTrace {
    pub variable: &'static str,
    pub term: String,
    pub degree: f64,
}

/// A fired rule with its full evaluation trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleFiring {
    pub rule: String,
    pub strength: f64,
    pub weight: u32,
    pub conditions: Vec<ConditionTrace>,
    pub outcomes: Vec<Outcome>,
}

fn trace_rule(vector: &AppraisalVector, rule: &Rule, cfg: &FuzzConfig) -> RuleFiring {
    let mut conditions = Vec::new();
    let mut strength = 1.0f64;
    let c = &rule.conditions;
    if let Pattern::Is(term) = c.desirability {
        let degree = cfg.membership_desirability(term, vector.desirability);
        strength = strength.min(degree);
        conditions.push(ConditionTrace {
            variable: "desirability",
            term: term.to_string(),
            degree,
        });
    }
    if let Pattern::Is(term) = c.agency {
        let degree = cfg.membership_agency(term, vector.agency);
        strength = strength.min(degree);
        conditions.push(ConditionTrace {
            variable: "agency",
            term: term.to_string(),
            degree,
        });
    }
    for (name, variable, pattern) in [
        (
            "controllability",
            Variable::Controllability,
            c.controllability,
        ),
        ("expectedness", Variable::Expectedness, c.expectedness),
        ("likelihood", Variable::Likelihood, c.likelihood),
    ] {
        if let Pattern::Is(term) = pattern {
            let degree = cfg.membership3(variable, term, vector.get(variable));
            strength = strength.min(degree);
            conditions.push(ConditionTrace {
                variable: name,
                term: term.to_string(),
                degree,
            });
        }
    }
    RuleFiring {
        rule: rule.name.clone(),
        strength,
        weight: rule.weight(),
        conditions,
        outcomes: rule.outcomes.clone(),
    }
}

/// Evaluation traces of all rules with positive strength, in rule order.
pub fn explain(vector: &AppraisalVector, rules: &RuleSet, cfg: &FuzzConfig) -> Vec<RuleFiring> {
    rules
        .rules()
        .iter()
        .map(|rule| trace_rule(vector, rule, cfg))
        .filter(|firing| firing.strength > 0.0)
        .collect()
}

/// Activations from every rule the vector fires.
///
/// Output order is total: strength descending, then weight descending, then
/// emotion name, then intensity descending. An empty result just means no
/// rule region contains the vector.
pub fn infer_emotions(
    vector: &AppraisalVector,
    rules: &RuleSet,
    cfg: &FuzzConfig,
) -> Vec<EmotionActivation> {
    let mut activations: Vec<EmotionActivation> = explain(vector, rules, cfg)
        .into_iter()
        .flat_map(|firing| {
            firing
                .outcomes
                .iter()
                .map(move |outcome| EmotionActivation {
                    emotion: outcome.emotion,
                    intensity: outcome.intensity,
                    weight: firing.weight,
                    strength: firing.strength,
                })
                .collect::<Vec<_>>()
        })
        .collect();
    activations.sort_by(|a, b| {
        b.strength
            .partial_cmp(&a.strength)
            .unwrap()
            .then(b.weight.cmp(&a.weight))
            .then(a.emotion.name().cmp(b.emotion.name()))
            .then(b.intensity.cmp(&a.intensity))
    });
    activations
}

/// The calm/boredom direct path: each prediction is binned with its own
/// boundaries and emitted at its strongest term with weight 1.
pub fn direct_emotions(calm: f64, boredom: f64, cfg: &FuzzConfig) -> Vec<EmotionActivation> {
    let mut out = Vec::with_capacity(2);
    for (emotion, variable, value) in [
        (Emotion::Calm, Variable::Calm, calm),
        (Emotion::Boredom, Variable::Boredom, boredom),
    ] {
        let (intensity, strength) = cfg.fuzzify3(variable, value)[0];
        out.push(EmotionActivation {
            emotion,
            intensity,
            weight: 1,
            strength,
        });
    }
    out
}

/// Rule activations followed by the two direct-path activations.
pub fn infer_all(
    vector: &AppraisalVector,
    rules: &RuleSet,
    cfg: &FuzzConfig,
) -> Vec<EmotionActivation> {
    let mut activations = infer_emotions(vector, rules, cfg);
    activations.extend(direct_emotions(vector.calm, vector.boredom, cfg));
    activations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::appraisal::{Agency, DesirabilityLevel};
    use crate::rules::{parse_rules, RuleSet, TermCombo};

    fn vector(
        desirability: f64,
        agency: f64,
        controllability: f64,
        expectedness: f64,
        likelihood: f64,
    ) -> AppraisalVector {
        AppraisalVector::new(
            "test",
            expectedness,
            likelihood,
            desirability,
            agency,
            controllability,
            2.5,
            2.5,
        )
        .unwrap()
    }

    #[test]
    fn happiness_high_path_fires_alone() {
        let v = vector(4.8, 4.0, 2.0, 2.6, 4.0);
        let activations = infer_emotions(&v, RuleSet::canonical(), &FuzzConfig::crisp());
        assert_eq!(
            activations,
            vec![EmotionActivation {
                emotion: Emotion::Happiness,
                intensity: Level::High,
                weight: 3,
                strength: 1.0
            }]
        );
    }

    #[test]
    fn surprise_high_path_fires_with_weight_five() {
        let v = vector(0.3, 4.0, 1.0, 1.0, 1.0);
        let activations = infer_emotions(&v, RuleSet::canonical(), &FuzzConfig::crisp());
        assert_eq!(
            activations,
            vec![EmotionActivation {
                emotion: Emotion::Surprise,
                intensity: Level::High,
                weight: 5,
                strength: 1.0
            }]
        );
    }

    #[test]
    fn midpoint_vector_fires_nothing() {
        let v = vector(2.5, 2.5, 2.5, 2.5, 2.5);
        assert!(infer_emotions(&v, RuleSet::canonical(), &FuzzConfig::crisp()).is_empty());
    }

    #[test]
    fn direct_path_crisp() {
        let cfg = FuzzConfig::crisp();
        assert_eq!(
            direct_emotions(4.0, 1.0, &cfg),
            vec![
                EmotionActivation {
                    emotion: Emotion::Calm,
                    intensity: Level::High,
                    weight: 1,
                    strength: 1.0
                },
                EmotionActivation {
                    emotion: Emotion::Boredom,
                    intensity: Level::Low,
                    weight: 1,
                    strength: 1.0
                },
            ]
        );
    }

    #[test]
    fn direct_path_boundary_inclusivity() {
        let cfg = FuzzConfig::crisp();
        let acts = direct_emotions(1.72, 3.50, &cfg);
        assert_eq!(
            (acts[0].emotion, acts[0].intensity),
            (Emotion::Calm, Level::Medium)
        );
        assert_eq!(
            (acts[1].emotion, acts[1].intensity),
            (Emotion::Boredom, Level::High)
        );
        assert_eq!((acts[0].strength, acts[1].strength), (1.0, 1.0));
    }

    #[test]
    fn direct_path_on_boundary_with_overlap_halves_strength() {
        let cfg = FuzzConfig::with_overlap(0.2).unwrap();
        let acts = direct_emotions(1.72, 1.69, &cfg);
        for act in acts {
            assert!((act.strength - 0.5).abs() < 1e-12, "{act:?}");
        }
    }

    #[test]
    fn infer_all_appends_direct_activations() {
        let mut v = vector(4.8, 4.0, 2.0, 2.6, 4.0);
        v.calm = 4.0;
        v.boredom = 1.0;
        let activations = infer_all(&v, RuleSet::canonical(), &FuzzConfig::crisp());
        assert_eq!(activations.len(), 3);
        assert_eq!(activations[0].emotion, Emotion::Happiness);
        assert_eq!(activations[1].emotion, Emotion::Calm);
        assert_eq!(activations[2].emotion, Emotion::Boredom);
    }

    #[test]
    fn empty_ruleset_yields_only_direct_activations() {
        let rs = RuleSet::from_rules(Vec::new()).unwrap();
        let v = vector(4.8, 4.0, 2.0, 2.6, 4.0);
        let activations = infer_all(&v, &rs, &FuzzConfig::crisp());
        assert_eq!(activations.len(), 2);
    }

    #[test]
    fn all_zero_vector_fires_the_low_likelihood_sadness_rule() {
        let v = AppraisalVector::new("origin", 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        let activations = infer_all(&v, RuleSet::canonical(), &FuzzConfig::crisp());
        assert_eq!(activations.len(), 3);
        assert_eq!(
            (
                activations[0].emotion,
                activations[0].intensity,
                activations[0].weight
            ),
            (Emotion::Sadness, Level::Low, 4)
        );
        assert_eq!(
            (activations[1].emotion, activations[1].intensity),
            (Emotion::Calm, Level::Low)
        );
        assert_eq!(
            (activations[2].emotion, activations[2].intensity),
            (Emotion::Boredom, Level::Low)
        );
    }

    /// Representative numeric value that crisp-bins to the given term.
    fn value_for_level(cfg: &FuzzConfig, variable: Variable, level: Level) -> f64 {
        let [b1, b2] = cfg.boundaries[&variable];
        match level {
            Level::Low => b1 / 2.0,
            Level::Medium => (b1 + b2) / 2.0,
            Level::High => (b2 + 5.0) / 2.0,
        }
    }

    #[test]
    fn crisp_grid_matches_direct_condition_evaluation() {
        // Independent oracle: compare terms directly, no membership math.
        let cfg = FuzzConfig::crisp();
        let rs = RuleSet::canonical();
        for combo in TermCombo::grid() {
            let v = vector(
                (combo.desirability as usize as f64 + 0.5) * 5.0 / 6.0,
                match combo.agency {
                    Agency::Other => 4.0,
                    Agency::None => 1.0,
                },
                value_for_level(&cfg, Variable::Controllability, combo.controllability),
                value_for_level(&cfg, Variable::Expectedness, combo.expectedness),
                value_for_level(&cfg, Variable::Likelihood, combo.likelihood),
            );
            let expected: Vec<(Emotion, Level, u32)> = rs
                .rules()
                .iter()
                .filter(|r| {
                    r.conditions.desirability.matches(&combo.desirability)
                        && r.conditions.agency.matches(&combo.agency)
                        && r.conditions.controllability.matches(&combo.controllability)
                        && r.conditions.expectedness.matches(&combo.expectedness)
                        && r.conditions.likelihood.matches(&combo.likelihood)
                })
                .flat_map(|r| {
                    r.outcomes
                        .iter()
                        .map(move |o| (o.emotion, o.intensity, r.weight()))
                })
                .collect();
            let mut actual: Vec<(Emotion, Level, u32)> = infer_emotions(&v, rs, &cfg)
                .into_iter()
                .inspect(|a| assert_eq!(a.strength, 1.0, "crisp firing must have strength 1"))
                .map(|a| (a.emotion, a.intensity, a.weight))
                .collect();
            let mut expected_sorted = expected.clone();
            expected_sorted.sort();
            actual.sort();
            assert_eq!(actual, expected_sorted, "combo {combo}");
        }
    }

    #[test]
    fn desirability_term_midpoints_bin_crisply() {
        // Guard for the grid oracle's desirability representative values.
        let cfg = FuzzConfig::crisp();
        for level in DesirabilityLevel::ALL {
            let v = (level as usize as f64 + 0.5) * 5.0 / 6.0;
            assert_eq!(cfg.fuzzify_desirability(v), vec![(level, 1.0)]);
        }
    }

    #[test]
    fn widening_overlap_never_unfires_rules() {
        let rs = RuleSet::canonical();
        let mut fired_counts = Vec::new();
        let v = vector(1.7, 2.4, 1.7, 1.8, 1.76);
        for omega in [0.0, 0.1, 0.2, 0.3, 0.4, 0.49] {
            let cfg = FuzzConfig::with_overlap(omega).unwrap();
            fired_counts.push(infer_emotions(&v, rs, &cfg).len());
        }
        assert!(
            fired_counts.windows(2).all(|w| w[0] <= w[1]),
            "{fired_counts:?}"
        );
    }

    #[test]
    fn determinism_identical_inputs_identical_outputs() {
        let cfg = FuzzConfig::with_overlap(0.3).unwrap();
        let v = vector(1.7, 2.6, 1.75, 1.8, 1.76);
        let a = infer_all(&v, RuleSet::canonical(), &cfg);
        let b = infer_all(&v, RuleSet::canonical(), &cfg);
        assert_eq!(a, b);
    }

    #[test]
    fn multi_outcome_rule_emits_both_with_full_weight() {
        let text = "rule two { when desirability is highly_undesirable and agency is other \
                    and controllability is low and expectedness is low and likelihood is high \
                    then surprise intensity low then fear intensity high }";
        let rs = parse_rules(text).unwrap();
        let v = vector(0.2, 4.0, 1.0, 1.0, 4.0);
        let acts = infer_emotions(&v, &rs, &FuzzConfig::crisp());
        assert_eq!(acts.len(), 2);
        assert!(acts.iter().all(|a| a.weight == 5 && a.strength == 1.0));
        // fear sorts before surprise by name at equal strength/weight
        assert_eq!(acts[0].emotion, Emotion::Fear);
        assert_eq!(acts[1].emotion, Emotion::Surprise);
    }
}
