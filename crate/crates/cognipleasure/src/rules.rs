//! The `.far` (fuzzy appraisal rules) language: parsing, formatting, and
//! static validation.
//!
//! A rule names a region of the appraisal space and the emotions it evokes:
//!
//! ```text
//! rule high_des_med_exp_high_lik {
//!   when desirability is highly_desirable
//!   and expectedness is medium
//!   and likelihood is high
//!   then happiness intensity high
//! }
//! ```
//!
//! Grammar:
//!
//! ```text
//! ruleset := rule+
//! rule    := "rule" IDENT "{" cond+ outcome+ "}"
//! cond    := ("when" | "and") VAR "is" TERM
//! outcome := "then" EMOTION "intensity" LEVEL
//! ```
//!
//! `VAR` is one of `desirability`, `agency`, `controllability`,
//! `expectedness`, `likelihood`; `TERM` is a term of that variable or `any`.
//! `#` starts a comment running to end of line. A rule's weight is the
//! number of non-`any` conditions; it is computed, never written.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::appraisal::{Agency, DesirabilityLevel, Level};
use crate::emotion::Emotion;

/// Canonical rule file shipped with the crate.
pub const CANONICAL_RULES: &str = include_str!("../rules/cognipleasure.far");

/// Parse failure with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// Failure constructing a rule set programmatically.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rule set: {0}")]
pub struct InvalidRuleSet(pub String);

/// A condition slot: either a concrete term or the `any` wildcard.
/// Wildcards match every value and contribute nothing to the rule weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pattern<T> {
    Any,
    Is(T),
}

impl<T: PartialEq> Pattern<T> {
    pub fn matches(&self, value: &T) -> bool {
        match self {
            Pattern::Any => true,
            Pattern::Is(t) => t == value,
        }
    }

    pub fn is_any(&self) -> bool {
        matches!(self, Pattern::Any)
    }

    /// Whether two patterns can both match some value.
    fn intersects(&self, other: &Pattern<T>) -> bool {
        match (self, other) {
            (Pattern::Is(a), Pattern::Is(b)) => a == b,
            _ => true,
        }
    }
}

/// One condition slot per appraisal variable, in the tree's level order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleConditions {
    pub desirability: Pattern<DesirabilityLevel>,
    pub agency: Pattern<Agency>,
    pub controllability: Pattern<Level>,
    pub expectedness: Pattern<Level>,
    pub likelihood: Pattern<Level>,
}

impl RuleConditions {
    pub const fn any() -> Self {
        RuleConditions {
            desirability: Pattern::Any,
            agency: Pattern::Any,
            controllability: Pattern::Any,
            expectedness: Pattern::Any,
            likelihood: Pattern::Any,
        }
    }

    /// Number of non-wildcard conditions.
    pub fn weight(&self) -> u32 {
        u32::from(!self.desirability.is_any())
            + u32::from(!self.agency.is_any())
            + u32::from(!self.controllability.is_any())
            + u32::from(!self.expectedness.is_any())
            + u32::from(!self.likelihood.is_any())
    }

    /// Whether a crisp term combination satisfies every condition.
    pub fn covers(&self, combo: &TermCombo) -> bool {
        self.desirability.matches(&combo.desirability)
            && self.agency.matches(&combo.agency)
            && self.controllability.matches(&combo.controllability)
            && self.expectedness.matches(&combo.expectedness)
            && self.likelihood.matches(&combo.likelihood)
    }

    /// Whether the crisp regions of two condition lists share any point.
    pub fn overlaps(&self, other: &RuleConditions) -> bool {
        self.desirability.intersects(&other.desirability)
            && self.agency.intersects(&other.agency)
            && self.controllability.intersects(&other.controllability)
            && self.expectedness.intersects(&other.expectedness)
            && self.likelihood.intersects(&other.likelihood)
    }
}

/// An (emotion, intensity) pair emitted by a rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Outcome {
    pub emotion: Emotion,
    pub intensity: Level,
}

/// A named rule: conditions plus one or more outcomes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub conditions: RuleConditions,
    pub outcomes: Vec<Outcome>,
}

impl Rule {
    /// Condition-count weight used by the pleasure aggregation.
    pub fn weight(&self) -> u32 {
        self.conditions.weight()
    }
}

/// A validated collection of rules with a content digest.
///
/// The digest is the SHA-256 of the canonical formatting, so it identifies
/// the rule *structure*: any text that parses to the same rules hashes the
/// same.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet {
    rules: Vec<Rule>,
    source_hash: String,
}

impl RuleSet {
    pub fn from_rules(rules: Vec<Rule>) -> Result<Self, InvalidRuleSet> {
        let mut names = BTreeSet::new();
        for rule in &rules {
            if !names.insert(rule.name.clone()) {
                return Err(InvalidRuleSet(format!(
                    "duplicate rule name '{}'",
                    rule.name
                )));
            }
            if rule.weight() == 0 {
                return Err(InvalidRuleSet(format!(
                    "rule '{}' has no conditions",
                    rule.name
                )));
            }
            if rule.outcomes.is_empty() {
                return Err(InvalidRuleSet(format!(
                    "rule '{}' has no outcomes",
                    rule.name
                )));
            }
        }
        let mut set = RuleSet {
            rules,
            source_hash: String::new(),
        };
        set.source_hash = content_hash(&format_rules(&set));
        Ok(set)
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Digest of the canonical form.
    pub fn source_hash(&self) -> &str {
        &self.source_hash
    }

    /// The rule set shipped with the crate.
    pub fn canonical() -> &'static RuleSet {
        static CANONICAL: OnceLock<RuleSet> = OnceLock::new();
        CANONICAL.get_or_init(|| {
            parse_rules(CANONICAL_RULES).expect("embedded canonical rule file must parse")
        })
    }
}

fn content_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

// ---------------------------------------------------------------------------
// Lexing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum TokenKind {
    Word(String),
    LBrace,
    RBrace,
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut line = 1usize;
    let mut column = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                chars.next();
                line += 1;
                column = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                column += 1;
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    column += 1;
                }
            }
            '{' => {
                tokens.push(Token {
                    kind: TokenKind::LBrace,
                    line,
                    column,
                });
                chars.next();
                column += 1;
            }
            '}' => {
                tokens.push(Token {
                    kind: TokenKind::RBrace,
                    line,
                    column,
                });
                chars.next();
                column += 1;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start_col = column;
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        word.push(c);
                        chars.next();
                        column += 1;
                    } else {
                        break;
                    }
                }
                tokens.push(Token {
                    kind: TokenKind::Word(word),
                    line,
                    column: start_col,
                });
            }
            other => {
                return Err(ParseError {
                    line,
                    column,
                    message: format!("unexpected character '{other}'"),
                });
            }
        }
    }
    Ok(tokens)
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let token = self.tokens.get(self.pos).cloned();
        if token.is_some() {
            self.pos += 1;
        }
        token
    }

    fn eof_error(&self, expected: &str) -> ParseError {
        let (line, column) = self
            .tokens
            .last()
            .map(|t| (t.line, t.column))
            .unwrap_or((1, 1));
        ParseError {
            line,
            column,
            message: format!("unexpected end of input, expected {expected}"),
        }
    }

    fn expect_word(&mut self, expected: &str) -> Result<Token, ParseError> {
        match self.next() {
            Some(token) => match &token.kind {
                TokenKind::Word(w) if w == expected => Ok(token),
                TokenKind::Word(w) => Err(err_at(
                    &token,
                    format!("expected '{expected}', found '{w}'"),
                )),
                _ => Err(err_at(&token, format!("expected '{expected}'"))),
            },
            None => Err(self.eof_error(&format!("'{expected}'"))),
        }
    }

    fn expect_any_word(&mut self, what: &str) -> Result<(String, Token), ParseError> {
        match self.next() {
            Some(token) => match token.kind.clone() {
                TokenKind::Word(w) => Ok((w, token)),
                _ => Err(err_at(&token, format!("expected {what}"))),
            },
            None => Err(self.eof_error(what)),
        }
    }

    fn expect_kind(&mut self, kind: TokenKind, what: &str) -> Result<Token, ParseError> {
        match self.next() {
            Some(token) if token.kind == kind => Ok(token),
            Some(token) => Err(err_at(&token, format!("expected {what}"))),
            None => Err(self.eof_error(what)),
        }
    }

    fn peek_word(&self) -> Option<&str> {
        match self.peek().map(|t| &t.kind) {
            Some(TokenKind::Word(w)) => Some(w.as_str()),
            _ => None,
        }
    }
}

fn err_at(token: &Token, message: String) -> ParseError {
    ParseError {
        line: token.line,
        column: token.column,
        message,
    }
}

/// Parses `.far` text into a validated [`RuleSet`].
///
/// Rejects unknown variables, terms, and emotions, duplicate rule names,
/// duplicate condition variables within a rule, and rules without effective
/// conditions — always with a source position. Rules whose condition lists
/// duplicate each other *across* rules parse fine and are surfaced by
/// [`validate`] instead.
pub fn parse_rules(text: &str) -> Result<RuleSet, ParseError> {
    let tokens = lex(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let mut rules = Vec::new();
    let mut names: BTreeMap<String, ()> = BTreeMap::new();

    if parser.peek().is_none() {
        return Err(ParseError {
            line: 1,
            column: 1,
            message: "expected at least one rule".to_string(),
        });
    }

    while parser.peek().is_some() {
        parser.expect_word("rule")?;
        let (name, name_token) = parser.expect_any_word("a rule name")?;
        if is_keyword(&name) {
            return Err(err_at(
                &name_token,
                format!("'{name}' cannot be used as a rule name"),
            ));
        }
        if names.insert(name.clone(), ()).is_some() {
            return Err(err_at(&name_token, format!("duplicate rule name '{name}'")));
        }
        parser.expect_kind(TokenKind::LBrace, "'{'")?;

        let mut conditions = RuleConditions::any();
        let mut seen_vars: Vec<&'static str> = Vec::new();
        let mut saw_condition_line = false;
        while matches!(parser.peek_word(), Some("when") | Some("and")) {
            parser.next();
            saw_condition_line = true;
            let (var, var_token) = parser.expect_any_word("a variable name")?;
            parser.expect_word("is")?;
            let (term, term_token) = parser.expect_any_word("a term")?;
            let slot = apply_condition(&mut conditions, &var, &term).map_err(|e| match e {
                CondError::UnknownVariable => {
                    err_at(&var_token, format!("unknown variable '{var}'"))
                }
                CondError::UnknownTerm => err_at(
                    &term_token,
                    format!("term '{term}' is not valid for variable '{var}'"),
                ),
            })?;
            if seen_vars.contains(&slot) {
                return Err(err_at(
                    &var_token,
                    format!("duplicate condition for variable '{var}'"),
                ));
            }
            seen_vars.push(slot);
        }

        let mut outcomes = Vec::new();
        while matches!(parser.peek_word(), Some("then")) {
            parser.next();
            let (emotion_word, emotion_token) = parser.expect_any_word("an emotion")?;
            let emotion = parse_rule_emotion(&emotion_word).ok_or_else(|| {
                err_at(&emotion_token, format!("unknown emotion '{emotion_word}'"))
            })?;
            parser.expect_word("intensity")?;
            let (level_word, level_token) = parser.expect_any_word("an intensity level")?;
            let intensity = Level::parse(&level_word)
                .ok_or_else(|| err_at(&level_token, format!("unknown intensity '{level_word}'")))?;
            outcomes.push(Outcome { emotion, intensity });
        }

        let close = parser.expect_kind(TokenKind::RBrace, "'}'")?;
        if !saw_condition_line {
            return Err(err_at(&close, format!("rule '{name}' has no conditions")));
        }
        if conditions.weight() == 0 {
            return Err(err_at(
                &close,
                format!("rule '{name}' has only wildcard conditions"),
            ));
        }
        if outcomes.is_empty() {
            return Err(err_at(&close, format!("rule '{name}' has no outcomes")));
        }

        rules.push(Rule {
            name,
            conditions,
            outcomes,
        });
    }

    RuleSet::from_rules(rules).map_err(|e| ParseError {
        line: 1,
        column: 1,
        message: e.0,
    })
}

fn is_keyword(word: &str) -> bool {
    matches!(word, "rule" | "when" | "and" | "then" | "is" | "intensity")
}

enum CondError {
    UnknownVariable,
    UnknownTerm,
}

fn apply_condition(
    conditions: &mut RuleConditions,
    var: &str,
    term: &str,
) -> Result<&'static str, CondError> {
    match var {
        "desirability" => {
            conditions.desirability = if term == "any" {
                Pattern::Any
            } else {
                Pattern::Is(DesirabilityLevel::parse(term).ok_or(CondError::UnknownTerm)?)
            };
            Ok("desirability")
        }
        "agency" => {
            conditions.agency = if term == "any" {
                Pattern::Any
            } else {
                Pattern::Is(Agency::parse(term).ok_or(CondError::UnknownTerm)?)
            };
            Ok("agency")
        }
        "controllability" => {
            conditions.controllability = parse_level_pattern(term)?;
            Ok("controllability")
        }
        "expectedness" => {
            conditions.expectedness = parse_level_pattern(term)?;
            Ok("expectedness")
        }
        "likelihood" => {
            conditions.likelihood = parse_level_pattern(term)?;
            Ok("likelihood")
        }
        _ => Err(CondError::UnknownVariable),
    }
}

fn parse_level_pattern(term: &str) -> Result<Pattern<Level>, CondError> {
    if term == "any" {
        Ok(Pattern::Any)
    } else {
        Level::parse(term)
            .map(Pattern::Is)
            .ok_or(CondError::UnknownTerm)
    }
}

fn parse_rule_emotion(word: &str) -> Option<Emotion> {
    let emotion = Emotion::parse(word)?;
    Emotion::rule_emotions()
        .contains(&emotion)
        .then_some(emotion)
}

// ---------------------------------------------------------------------------
// Formatting
// ---------------------------------------------------------------------------

/// Canonical pretty-printing. Wildcard conditions are omitted, conditions
/// appear in tree level order, and `parse_rules(format_rules(rs))` is
/// structurally identical to `rs`.
pub fn format_rules(rs: &RuleSet) -> String {
    let mut out = String::new();
    for (i, rule) in rs.rules.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format!("rule {} {{\n", rule.name));
        let mut keyword = "when";
        let mut push_cond = |text: String, out: &mut String| {
            out.push_str(&format!("  {keyword} {text}\n"));
            keyword = "and";
        };
        if let Pattern::Is(t) = rule.conditions.desirability {
            push_cond(format!("desirability is {t}"), &mut out);
        }
        if let Pattern::Is(t) = rule.conditions.agency {
            push_cond(format!("agency is {t}"), &mut out);
        }
        if let Pattern::Is(t) = rule.conditions.controllability {
            push_cond(format!("controllability is {t}"), &mut out);
        }
        if let Pattern::Is(t) = rule.conditions.expectedness {
            push_cond(format!("expectedness is {t}"), &mut out);
        }
        if let Pattern::Is(t) = rule.conditions.likelihood {
            push_cond(format!("likelihood is {t}"), &mut out);
        }
        for outcome in &rule.outcomes {
            out.push_str(&format!(
                "  then {} intensity {}\n",
                outcome.emotion, outcome.intensity
            ));
        }
        out.push_str("}\n");
    }
    out
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// A crisp combination of linguistic terms, one per variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TermCombo {
    pub desirability: DesirabilityLevel,
    pub agency: Agency,
    pub controllability: Level,
    pub expectedness: Level,
    pub likelihood: Level,
}

impl TermCombo {
    /// Every combination in the 6 x 2 x 3 x 3 x 3 crisp grid.
    pub fn grid() -> impl Iterator<Item = TermCombo> {
        DesirabilityLevel::ALL.into_iter().flat_map(|desirability| {
            [Agency::Other, Agency::None]
                .into_iter()
                .flat_map(move |agency| {
                    Level::ALL.into_iter().flat_map(move |controllability| {
                        Level::ALL.into_iter().flat_map(move |expectedness| {
                            Level::ALL.into_iter().map(move |likelihood| TermCombo {
                                desirability,
                                agency,
                                controllability,
                                expectedness,
                                likelihood,
                            })
                        })
                    })
                })
        })
    }
}

impl fmt::Display for TermCombo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}/{}/{}/{}",
            self.desirability,
            self.agency,
            self.controllability,
            self.expectedness,
            self.likelihood
        )
    }
}

/// Two rules whose crisp condition regions share at least one grid point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OverlapPair {
    pub first: String,
    pub second: String,
    /// True when the two condition lists are exactly equal.
    pub identical: bool,
}

/// Static findings about a rule set. Findings are reported, not errors.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub leaf_count: usize,
    /// Number of rules mentioning each emotion in an outcome.
    pub emotion_rule_counts: BTreeMap<Emotion, usize>,
    pub overlapping_pairs: Vec<OverlapPair>,
    /// Crisp term combinations no rule covers. The canonical tree is
    /// intentionally partial, so this is non-empty there.
    pub uncovered_combinations: Vec<TermCombo>,
}

/// Analyzes coverage and overlap of a rule set's crisp regions.
pub fn validate(rs: &RuleSet) -> ValidationReport {
    let rules = rs.rules();

    let mut emotion_rule_counts: BTreeMap<Emotion, usize> = BTreeMap::new();
    for rule in rules {
        let mut seen = BTreeSet::new();
        for outcome in &rule.outcomes {
            if seen.insert(outcome.emotion) {
                *emotion_rule_counts.entry(outcome.emotion).or_insert(0) += 1;
            }
        }
    }

    let mut overlapping_pairs = Vec::new();
    for (i, a) in rules.iter().enumerate() {
        for b in &rules[i + 1..] {
            if a.conditions.overlaps(&b.conditions) {
                overlapping_pairs.push(OverlapPair {
                    first: a.name.clone(),
                    second: b.name.clone(),
                    identical: a.conditions == b.conditions,
                });
            }
        }
    }

    let uncovered_combinations = TermCombo::grid()
        .filter(|combo| !rules.iter().any(|r| r.conditions.covers(combo)))
        .collect();

    ValidationReport {
        leaf_count: rules.len(),
        emotion_rule_counts,
        overlapping_pairs,
        uncovered_combinations,
    }
}
