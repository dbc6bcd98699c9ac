//! Emotion categories and pleasure labels shared across the crate.

use std::fmt;

use serde::{Deserialize, Serialize};

/// The emotion vocabulary of the circumplex geometry table.
///
/// Rules may only emit the eight members returned by
/// [`Emotion::rule_emotions`]; `Excitement` and `Sleepiness` exist in the
/// geometry table but never appear as rule outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Emotion {
    Happiness,
    Excitement,
    Surprise,
    Fear,
    Anger,
    Disgust,
    Sadness,
    Boredom,
    Sleepiness,
    Calm,
}

impl Emotion {
    /// All ten emotions, in geometry-table order.
    pub const ALL: [Emotion; 10] = [
        Emotion::Happiness,
        Emotion::Excitement,
        Emotion::Surprise,
        Emotion::Fear,
        Emotion::Anger,
        Emotion::Disgust,
        Emotion::Sadness,
        Emotion::Boredom,
        Emotion::Sleepiness,
        Emotion::Calm,
    ];

    /// The eight emotions that rules and the direct path may activate.
    pub const fn rule_emotions() -> [Emotion; 8] {
        [
            Emotion::Happiness,
            Emotion::Sadness,
            Emotion::Anger,
            Emotion::Fear,
            Emotion::Disgust,
            Emotion::Surprise,
            Emotion::Calm,
            Emotion::Boredom,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Emotion::Happiness => "happiness",
            Emotion::Excitement => "excitement",
            Emotion::Surprise => "surprise",
            Emotion::Fear => "fear",
            Emotion::Anger => "anger",
            Emotion::Disgust => "disgust",
            Emotion::Sadness => "sadness",
            Emotion::Boredom => "boredom",
            Emotion::Sleepiness => "sleepiness",
            Emotion::Calm => "calm",
        }
    }

    pub fn parse(s: &str) -> Option<Emotion> {
        Emotion::ALL.iter().copied().find(|e| e.name() == s)
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Two-class pleasure label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label2 {
    Pleasant,
    Unpleasant,
}

/// Three-class pleasure label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label3 {
    Pleasant,
    Unpleasant,
    Neutral,
}

impl Label2 {
    pub fn parse(s: &str) -> Option<Label2> {
        match s.to_ascii_lowercase().as_str() {
            "pleasant" => Some(Label2::Pleasant),
            "unpleasant" => Some(Label2::Unpleasant),
            _ => None,
        }
    }
}

impl Label3 {
    pub fn parse(s: &str) -> Option<Label3> {
        match s.to_ascii_lowercase().as_str() {
            "pleasant" => Some(Label3::Pleasant),
            "unpleasant" => Some(Label3::Unpleasant),
            "neutral" => Some(Label3::Neutral),
            _ => None,
        }
    }
}

impl fmt::Display for Label2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label2::Pleasant => "Pleasant",
            Label2::Unpleasant => "Unpleasant",
        })
    }
}

impl fmt::Display for Label3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label3::Pleasant => "Pleasant",
            Label3::Unpleasant => "Unpleasant",
            Label3::Neutral => "Neutral",
        })
    }
}
