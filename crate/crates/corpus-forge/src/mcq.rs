//! Placeholder-preserving template translation for multiple-choice items.
//!
//! Translating a bare stem (the sentence minus its answer) wrecks word order
//! in morphology-rich targets, so the stem travels through translation as a
//! full sentence template carrying one placeholder token where the answer
//! goes; the placeholder is stripped afterwards. Items whose placeholder a
//! translator mangles beyond the tolerant matcher land in a human-review
//! queue instead of being silently dropped.

use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ReasonCode;

/// Default placeholder: rare bracket characters that translation systems
/// tend to pass through unmangled (unlike "____").
pub const DEFAULT_PLACEHOLDER: &str = "⟦X⟧";

/// One multiple-choice item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McqItem {
    pub id: String,
    pub stem: String,
    pub choices: Vec<String>,
    pub answer_index: usize,
}

#[derive(Debug, Error, PartialEq)]
pub enum McqError {
    #[error("item {id}: answer_index {index} out of range for {count} choices")]
    BadAnswerIndex { id: String, index: usize, count: usize },
    #[error("item {id}: choices must be non-empty")]
    NoChoices { id: String },
    #[error("item {id}: stem already contains the placeholder")]
    PlaceholderInStem { id: String },
    #[error("item {id}: template does not contain the placeholder exactly once")]
    PlaceholderCount { id: String },
}

pub fn validate_item(item: &McqItem) -> Result<(), McqError> {
    if item.choices.is_empty() {
        return Err(McqError::NoChoices { id: item.id.clone() });
    }
    if item.answer_index >= item.choices.len() {
        return Err(McqError::BadAnswerIndex {
            id: item.id.clone(),
            index: item.answer_index,
            count: item.choices.len(),
        });
    }
    Ok(())
}

/// A stem carrying exactly one placeholder, plus the untouched choices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplatedItem {
    pub id: String,
    pub template: String,
    pub placeholder: String,
    pub choices: Vec<String>,
    pub answer_index: usize,
}

/// Item routed to human review, with the offending template.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewEntry {
    pub id: String,
    pub template: String,
    pub reason: ReasonCode,
    pub detail: String,
}

/// Tolerant matcher: the placeholder's characters with optional whitespace
/// between them, so "⟦ X ⟧" still counts as the placeholder.
fn tolerant_regex(placeholder: &str) -> Regex {
    let pattern: Vec<String> =
        placeholder.chars().map(|c| regex::escape(&c.to_string())).collect();
    Regex::new(&pattern.join(r"\s*")).expect("escaped placeholder is a valid pattern")
}

static DEFAULT_TOLERANT: Lazy<Regex> = Lazy::new(|| tolerant_regex(DEFAULT_PLACEHOLDER));

fn tolerant_for(placeholder: &str) -> Regex {
    if placeholder == DEFAULT_PLACEHOLDER {
        DEFAULT_TOLERANT.clone()
    } else {
        tolerant_regex(placeholder)
    }
}

/// Run of underscores marking an explicit answer slot in a source stem.
static SLOT_RE: Lazy<Regex> = Lazy::new(|| Regex::new(r"_+").unwrap());

/// Turns a stem into a template holding the placeholder exactly once: an
/// existing underscore blank is substituted, otherwise the placeholder is
/// appended after a space (alone, for an empty stem).
pub fn make_template(item: &McqItem, placeholder: &str) -> Result<TemplatedItem, McqError> {
    validate_item(item)?;
    if tolerant_for(placeholder).is_match(&item.stem) {
        return Err(McqError::PlaceholderInStem { id: item.id.clone() });
    }
    let template = if let Some(slot) = SLOT_RE.find(&item.stem) {
        format!("{}{}{}", &item.stem[..slot.start()], placeholder, &item.stem[slot.end()..])
    } else if item.stem.is_empty() {
        placeholder.to_string()
    } else {
        format!("{} {}", item.stem, placeholder)
    };
    Ok(TemplatedItem {
        id: item.id.clone(),
        template,
        placeholder: placeholder.to_string(),
        choices: item.choices.clone(),
        answer_index: item.answer_index,
    })
}

/// Any total text transform; the adapter slot for machine translation.
pub trait Translator: Send + Sync {
    fn translate(&self, text: &str) -> String;
}

/// Passes text through unchanged; the verification baseline.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityTranslator;

impl Translator for IdentityTranslator {
    fn translate(&self, text: &str) -> String {
        text.to_string()
    }
}

impl<F> Translator for F
where
    F: Fn(&str) -> String + Send + Sync,
{
    fn translate(&self, text: &str) -> String {
        self(text)
    }
}

/// Adapter invoking an external command per text: the text goes to stdin,
/// the translation is read from stdout.
#[derive(Debug, Clone)]
pub struct CommandTranslator {
    pub program: String,
    pub args: Vec<String>,
}

impl Translator for CommandTranslator {
    fn translate(&self, text: &str) -> String {
        use std::io::Write as _;
        use std::process::{Command, Stdio};
        let run = || -> std::io::Result<String> {
            let mut child = Command::new(&self.program)
                .args(&self.args)
                .stdin(Stdio::piped())
                .stdout(Stdio::piped())
                .stderr(Stdio::null())
                .spawn()?;
            child.stdin.as_mut().expect("piped stdin").write_all(text.as_bytes())?;
            let output = child.wait_with_output()?;
            Ok(String::from_utf8_lossy(&output.stdout).trim_end_matches('\n').to_string())
        };
        // A failing external translator degrades to an empty translation,
        // which the placeholder verification then routes to review.
        run().unwrap_or_default()
    }
}

/// What translation did to the placeholder.
#[derive(Debug, Clone, PartialEq)]
pub enum TranslateOutcome {
    /// Placeholder survived verbatim.
    Clean(TemplatedItem),
    /// Placeholder survived modulo whitespace; canonicalized back.
    Recovered(TemplatedItem),
    /// Placeholder lost or duplicated; routed to review.
    Lost(ReviewEntry),
}

/// Translates the template and verifies the placeholder still occurs exactly
/// once, canonicalizing whitespace-mangled variants. Choices are not touched
/// here; see [`translate_item`] for the full item workflow.
pub fn translate_template(item: &TemplatedItem, translator: &dyn Translator) -> TranslateOutcome {
    let translated = translator.translate(&item.template);
    let exact = translated.matches(&item.placeholder).count();
    if exact == 1 {
        return TranslateOutcome::Clean(TemplatedItem { template: translated, ..item.clone() });
    }
    let tolerant = tolerant_for(&item.placeholder);
    let tolerant_hits = tolerant.find_iter(&translated).count();
    if tolerant_hits == 1 {
        let canonical = tolerant.replace(&translated, item.placeholder.as_str()).into_owned();
        return TranslateOutcome::Recovered(TemplatedItem {
            template: canonical,
            ..item.clone()
        });
    }
    TranslateOutcome::Lost(ReviewEntry {
        id: item.id.clone(),
        template: translated,
        reason: ReasonCode::PlaceholderLost,
        detail: format!("placeholder occurs {tolerant_hits} times after translation"),
    })
}

/// Removes the placeholder and one adjacent space (the preceding one when
/// both exist), returning the bare stem. Inverse of [`make_template`] for
/// appended placeholders.
pub fn strip_placeholder(item: &TemplatedItem) -> Result<String, McqError> {
    let occurrences: Vec<usize> =
        item.template.match_indices(&item.placeholder).map(|(i, _)| i).collect();
    if occurrences.len() != 1 {
        return Err(McqError::PlaceholderCount { id: item.id.clone() });
    }
    let start = occurrences[0];
    let end = start + item.placeholder.len();
    let before = &item.template[..start];
    let after = &item.template[end..];
    if let Some(trimmed) = before.strip_suffix(' ') {
        return Ok(format!("{trimmed}{after}"));
    }
    if let Some(trimmed) = after.strip_prefix(' ') {
        return Ok(format!("{before}{trimmed}"));
    }
    Ok(format!("{before}{after}"))
}

/// One evaluation candidate per choice: `stem + " " + choice`, in order.
pub fn expand_choices(stem: &str, choices: &[String]) -> Vec<String> {
    choices
        .iter()
        .map(|choice| {
            if stem.is_empty() {
                choice.clone()
            } else {
                format!("{stem} {choice}")
            }
        })
        .collect()
}

/// Full per-item workflow: template the stem, translate it with placeholder
/// verification, strip, and translate each choice individually. Items that
/// lose their placeholder go to `review` and yield `None`. The answer index
/// is never reordered.
pub fn translate_item(
    item: &McqItem,
    placeholder: &str,
    translator: &dyn Translator,
    review: &mut Vec<ReviewEntry>,
) -> Result<Option<McqItem>, McqError> {
    let templated = make_template(item, placeholder)?;
    let translated = match translate_template(&templated, translator) {
        TranslateOutcome::Clean(t) | TranslateOutcome::Recovered(t) => t,
        TranslateOutcome::Lost(entry) => {
            review.push(entry);
            return Ok(None);
        }
    };
    let stem = strip_placeholder(&translated)?;
    let choices: Vec<String> =
        item.choices.iter().map(|c| translator.translate(c)).collect();
    Ok(Some(McqItem { id: item.id.clone(), stem, choices, answer_index: item.answer_index }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc_item() -> McqItem {
        McqItem {
            id: "arc-1".into(),
            stem: "Ладнокрвните животни често се".into(),
            choices: vec!["брзи".into(), "големи".into(), "без влакна".into(), "бавни".into()],
            answer_index: 3,
        }
    }

    #[test]
    fn template_appends_placeholder_once() {
        let t = make_template(&arc_item(), DEFAULT_PLACEHOLDER).unwrap();
        assert_eq!(t.template, "Ладнокрвните животни често се ⟦X⟧");
        assert_eq!(t.template.matches(DEFAULT_PLACEHOLDER).count(), 1);
    }

    #[test]
    fn empty_stem_becomes_bare_placeholder() {
        let item = McqItem { stem: String::new(), ..arc_item() };
        let t = make_template(&item, DEFAULT_PLACEHOLDER).unwrap();
        assert_eq!(t.template, "⟦X⟧");
    }

    #[test]
    fn stem_already_containing_placeholder_is_an_error() {
        let item = McqItem { stem: "веќе има ⟦X⟧ внатре".into(), ..arc_item() };
        assert_eq!(
            make_template(&item, DEFAULT_PLACEHOLDER).unwrap_err(),
            McqError::PlaceholderInStem { id: "arc-1".into() }
        );
    }

    #[test]
    fn underscore_slot_is_substituted() {
        let item = McqItem { stem: "Пред ____ потоа.".into(), ..arc_item() };
        let t = make_template(&item, DEFAULT_PLACEHOLDER).unwrap();
        assert_eq!(t.template, "Пред ⟦X⟧ потоа.");
        // Single underscore slots too.
        let item = McqItem { stem: "Таа _ замина.".into(), ..arc_item() };
        let t = make_template(&item, DEFAULT_PLACEHOLDER).unwrap();
        assert_eq!(t.template, "Таа ⟦X⟧ замина.");
    }

    #[test]
    fn identity_translation_keeps_template() {
        let t = make_template(&arc_item(), DEFAULT_PLACEHOLDER).unwrap();
        match translate_template(&t, &IdentityTranslator) {
            TranslateOutcome::Clean(out) => assert_eq!(out.template, t.template),
            other => panic!("expected clean, got {other:?}"),
        }
    }

    #[test]
    fn deleting_translator_routes_to_review() {
        let t = make_template(&arc_item(), DEFAULT_PLACEHOLDER).unwrap();
        let deleting = |text: &str| text.replace(DEFAULT_PLACEHOLDER, "");
        match translate_template(&t, &deleting) {
            TranslateOutcome::Lost(entry) => {
                assert_eq!(entry.reason, ReasonCode::PlaceholderLost);
                assert_eq!(entry.id, "arc-1");
            }
            other => panic!("expected lost, got {other:?}"),
        }
    }

    #[test]
    fn whitespace_mangled_placeholder_is_recovered() {
        // Unit oracle for the tolerant matcher first.
        let re = tolerant_regex(DEFAULT_PLACEHOLDER);
        assert!(re.is_match("⟦X⟧"));
        assert!(re.is_match("⟦ X ⟧"));
        assert!(re.is_match("⟦\u{a0}X ⟧")); // \s is unicode-aware, NBSP included
        assert!(!re.is_match("⟦Y⟧"));

        let t = make_template(&arc_item(), DEFAULT_PLACEHOLDER).unwrap();
        let mangling = |text: &str| text.replace("⟦X⟧", "⟦ X ⟧");
        match translate_template(&t, &mangling) {
            TranslateOutcome::Recovered(out) => {
                assert_eq!(out.template, "Ладнокрвните животни често се ⟦X⟧");
            }
            other => panic!("expected recovered, got {other:?}"),
        }
    }

    #[test]
    fn duplicated_placeholder_is_lost_not_passed() {
        let t = make_template(&arc_item(), DEFAULT_PLACEHOLDER).unwrap();
        let duplicating = |text: &str| format!("{text} ⟦X⟧");
        assert!(matches!(translate_template(&t, &duplicating), TranslateOutcome::Lost(_)));
    }

    #[test]
    fn strip_removes_placeholder_and_one_space() {
        let t = make_template(&arc_item(), DEFAULT_PLACEHOLDER).unwrap();
        assert_eq!(strip_placeholder(&t).unwrap(), "Ладнокрвните животни често се");
    }

    #[test]
    fn strip_inverts_make_template() {
        for stem in ["Ладнокрвните животни често се", "", "Едно", "Крај на реченица."] {
            let item = McqItem { stem: stem.into(), ..arc_item() };
            let t = make_template(&item, DEFAULT_PLACEHOLDER).unwrap();
            assert_eq!(strip_placeholder(&t).unwrap(), stem);
        }
    }

    #[test]
    fn mid_sentence_strip_preserves_both_sides() {
        // String-surgery oracle: splice the placeholder into a known spot,
        // strip, and compare against hand-built expectations.
        let item = TemplatedItem {
            id: "m".into(),
            template: "Пред ⟦X⟧ потоа продолжува.".into(),
            placeholder: DEFAULT_PLACEHOLDER.into(),
            choices: vec!["x".into()],
            answer_index: 0,
        };
        assert_eq!(strip_placeholder(&item).unwrap(), "Пред потоа продолжува.");

        let tight = TemplatedItem { template: "Пред⟦X⟧потоа".into(), ..item.clone() };
        assert_eq!(strip_placeholder(&tight).unwrap(), "Предпотоа");

        let missing = TemplatedItem { template: "нема ништо".into(), ..item };
        assert!(matches!(strip_placeholder(&missing), Err(McqError::PlaceholderCount { .. })));
    }

    #[test]
    fn expand_produces_one_candidate_per_choice() {
        let item = arc_item();
        let candidates = expand_choices(&item.stem, &item.choices);
        assert_eq!(candidates.len(), 4);
        assert_eq!(candidates[0], "Ладнокрвните животни често се брзи");
        assert_eq!(candidates[3], "Ладнокрвните животни често се бавни");
        assert!(expand_choices("стебло", &[]).is_empty());
        assert!(candidates.iter().all(|c| !c.contains(DEFAULT_PLACEHOLDER)));
    }

    #[test]
    fn full_workflow_with_identity_is_identity() {
        let mut review = Vec::new();
        let out =
            translate_item(&arc_item(), DEFAULT_PLACEHOLDER, &IdentityTranslator, &mut review)
                .unwrap()
                .unwrap();
        assert_eq!(out, arc_item());
        assert!(review.is_empty());
    }

    #[test]
    fn answer_index_survives_any_translator() {
        let upper = |text: &str| text.to_uppercase();
        let mut review = Vec::new();
        let out = translate_item(&arc_item(), DEFAULT_PLACEHOLDER, &upper, &mut review)
            .unwrap()
            .unwrap();
        assert_eq!(out.answer_index, 3);
        assert_eq!(out.choices[3], "БАВНИ");
        assert_eq!(out.choices.len(), 4);
    }

    #[test]
    fn invalid_items_are_rejected() {
        let no_choices = McqItem { choices: vec![], ..arc_item() };
        assert!(matches!(validate_item(&no_choices), Err(McqError::NoChoices { .. })));
        let bad_index = McqItem { answer_index: 4, ..arc_item() };
        assert!(matches!(validate_item(&bad_index), Err(McqError::BadAnswerIndex { .. })));
    }
}
