//! Replaces personally identifiable information spans with placeholder
//! tokens. Runs before any other filtering so later stages never see PII.
//!
//! Matching is best-effort pattern work, not a parser: emails are ASCII
//! mailbox syntax, IPs are candidate runs validated with `std::net` address
//! parsing, and phones cover international `+NNN` and local `0NN`-prefixed
//! groups of 8-12 digits with space/dash/slash separators (the North
//! Macedonia numbering plan shapes, without trying to match digit runs glued
//! to other numbers).

use std::net::{Ipv4Addr, Ipv6Addr};

use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Document, FilterOutcome, ReasonCode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    Email,
    Ipv6,
    Ipv4,
    Phone,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiiRule {
    pub kind: PatternKind,
    pub token: String,
}

#[derive(Debug, Error, PartialEq)]
pub enum PiiError {
    #[error("replacement token {token:?} is itself matched by the {kind:?} pattern")]
    UnsafeToken { token: String, kind: PatternKind },
}

/// Ordered replacement rules. Order is fixed most-specific-first by the
/// default set (email, IPv6, IPv4, phone); custom sets keep caller order.
#[derive(Debug, Clone, PartialEq)]
pub struct PiiRuleSet {
    rules: Vec<PiiRule>,
}

impl Default for PiiRuleSet {
    fn default() -> Self {
        PiiRuleSet::new(vec![
            PiiRule { kind: PatternKind::Email, token: "[EMAIL]".into() },
            PiiRule { kind: PatternKind::Ipv6, token: "[IP]".into() },
            PiiRule { kind: PatternKind::Ipv4, token: "[IP]".into() },
            PiiRule { kind: PatternKind::Phone, token: "[PHONE]".into() },
        ])
        .expect("default tokens are fixed-point safe")
    }
}

impl PiiRuleSet {
    /// Builds a rule set, rejecting replacement tokens that any pattern in
    /// the set could match again (the scrub must be a fixed point).
    pub fn new(rules: Vec<PiiRule>) -> Result<Self, PiiError> {
        for rule in &rules {
            for probe in &rules {
                if match_count(probe.kind, &rule.token) > 0 {
                    return Err(PiiError::UnsafeToken {
                        token: rule.token.clone(),
                        kind: probe.kind,
                    });
                }
            }
        }
        Ok(PiiRuleSet { rules })
    }

    pub fn rules(&self) -> &[PiiRule] {
        &self.rules
    }

    /// Replaces every maximal PII span, returning the new text and the
    /// number of replacements. Non-matched bytes are preserved exactly.
    pub fn scrub_text(&self, text: &str) -> (String, usize) {
        let mut current = text.to_string();
        let mut total = 0;
        for rule in &self.rules {
            let (next, n) = apply_kind(rule.kind, &current, &rule.token);
            current = next;
            total += n;
        }
        (current, total)
    }
}

/// Scrubs one document. `Transformed` iff at least one span was replaced.
pub fn scrub(doc: Document, rules: &PiiRuleSet) -> (Document, FilterOutcome) {
    let (text, replaced) = rules.scrub_text(&doc.text);
    if replaced == 0 {
        return (doc, FilterOutcome::keep());
    }
    let outcome = FilterOutcome::transformed_with(
        ReasonCode::PiiScrubbed,
        format!("replacements={replaced}"),
    );
    (Document { text, ..doc }, outcome)
}

static EMAIL_RE: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"\b[A-Za-z0-9._%+\-]+@[A-Za-z0-9.\-]+\.[A-Za-z]{2,}\b").unwrap()
});

// Candidate runs; real validation happens via address parsing / digit counts.
static IPV6_CANDIDATE_RE: Lazy<Regex> = Lazy::new(|| Regex::new(r"[0-9A-Fa-f:.]+").unwrap());
static IPV4_CANDIDATE_RE: Lazy<Regex> = Lazy::new(|| Regex::new(r"[0-9][0-9.]*").unwrap());
static PHONE_CANDIDATE_RE: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"(?:\+[0-9]{1,3}|\(0[0-9]{1,2}\)|0[0-9]{1,2})(?:[ \-/]?[0-9]){5,10}").unwrap()
});

fn apply_kind(kind: PatternKind, text: &str, token: &str) -> (String, usize) {
    match kind {
        PatternKind::Email => {
            let mut n = 0;
            let out = EMAIL_RE
                .replace_all(text, |_: &regex::Captures| {
                    n += 1;
                    token.to_string()
                })
                .into_owned();
            (out, n)
        }
        PatternKind::Ipv6 => replace_candidates(text, &IPV6_CANDIDATE_RE, token, validate_ipv6),
        PatternKind::Ipv4 => replace_candidates(text, &IPV4_CANDIDATE_RE, token, validate_ipv4),
        PatternKind::Phone => replace_candidates(text, &PHONE_CANDIDATE_RE, token, validate_phone),
    }
}

fn match_count(kind: PatternKind, text: &str) -> usize {
    apply_kind(kind, text, "\u{0}").1
}

/// Candidate validator: receives the candidate plus its neighbor chars and
/// returns the byte range (within the candidate) to replace, or `None`.
type SpanValidator = fn(&str, Option<char>, Option<char>) -> Option<std::ops::Range<usize>>;

/// Scans candidate runs and replaces the validated core of each.
fn replace_candidates(
    text: &str,
    candidate_re: &Regex,
    token: &str,
    validate: SpanValidator,
) -> (String, usize) {
    let mut out = String::with_capacity(text.len());
    let mut last = 0;
    let mut count = 0;
    for m in candidate_re.find_iter(text) {
        let before = text[..m.start()].chars().next_back();
        let after = text[m.end()..].chars().next();
        if let Some(core) = validate(m.as_str(), before, after) {
            out.push_str(&text[last..m.start() + core.start]);
            out.push_str(token);
            last = m.start() + core.end;
            count += 1;
        }
    }
    out.push_str(&text[last..]);
    (out, count)
}

fn is_alnum(c: Option<char>) -> bool {
    c.map(|c| c.is_alphanumeric()).unwrap_or(false)
}

fn validate_ipv6(
    candidate: &str,
    before: Option<char>,
    after: Option<char>,
) -> Option<std::ops::Range<usize>> {
    if is_alnum(before) || is_alnum(after) {
        return None;
    }
    if !candidate.contains(':') || !candidate.chars().any(|c| c.is_ascii_hexdigit()) {
        return None;
    }
    // Trailing dots are sentence punctuation, not address bytes.
    let core = candidate.trim_end_matches('.');
    core.parse::<Ipv6Addr>().ok()?;
    Some(0..core.len())
}

fn validate_ipv4(
    candidate: &str,
    before: Option<char>,
    after: Option<char>,
) -> Option<std::ops::Range<usize>> {
    if is_alnum(before) || before == Some('.') || is_alnum(after) {
        return None;
    }
    let core = candidate.trim_end_matches('.');
    core.parse::<Ipv4Addr>().ok()?;
    let trimmed = candidate.len() - core.len();
    // Keep exactly one trailing dot as punctuation; two or more dots means
    // this run was never a clean address ("1.2.3.4..x").
    if trimmed > 1 {
        return None;
    }
    Some(0..core.len())
}

fn validate_phone(
    candidate: &str,
    before: Option<char>,
    after: Option<char>,
) -> Option<std::ops::Range<usize>> {
    if is_alnum(before) || before == Some('+') || is_alnum(after) {
        return None;
    }
    let digits = candidate.chars().filter(|c| c.is_ascii_digit()).count();
    if (8..=12).contains(&digits) {
        Some(0..candidate.len())
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SourceKind;

    fn scrub_str(text: &str) -> (String, usize) {
        PiiRuleSet::default().scrub_text(text)
    }

    // Independent residual scan: intentionally simpler and broader shapes
    // than the scrubber's own patterns.
    fn oracle_residuals(text: &str) -> usize {
        let email = Regex::new(r"[A-Za-z0-9._%+\-]+@[A-Za-z0-9.\-]+\.[A-Za-z]{2,}").unwrap();
        let mut hits = email.find_iter(text).count();
        for candidate in Regex::new(r"[0-9][0-9.]*").unwrap().find_iter(text) {
            if candidate.as_str().trim_end_matches('.').parse::<Ipv4Addr>().is_ok() {
                hits += 1;
            }
        }
        for candidate in Regex::new(r"[0-9A-Fa-f:.]*:[0-9A-Fa-f:.]*").unwrap().find_iter(text) {
            let c = candidate.as_str().trim_end_matches('.');
            if c.chars().any(|ch| ch.is_ascii_hexdigit()) && c.parse::<Ipv6Addr>().is_ok() {
                hits += 1;
            }
        }
        let phone =
            Regex::new(r"(?:\+[0-9]{1,3}|\(0[0-9]{1,2}\)|0[0-9]{1,2})(?:[ \-/]?[0-9]){5,10}")
                .unwrap();
        for candidate in phone.find_iter(text) {
            let digits = candidate.as_str().chars().filter(|c| c.is_ascii_digit()).count();
            if (8..=12).contains(&digits) {
                hits += 1;
            }
        }
        hits
    }

    #[test]
    fn email_is_replaced_and_nothing_email_shaped_remains() {
        let (out, n) = scrub_str("Пиши на ana@example.mk.");
        assert_eq!(out, "Пиши на [EMAIL].");
        assert_eq!(n, 1);
        assert_eq!(oracle_residuals(&out), 0);
    }

    #[test]
    fn text_without_pii_is_untouched() {
        let text = "Ова е обичен текст без лични податоци, објавен во 2021 година.";
        let doc = Document::new("d", "s", SourceKind::Web, text);
        let (out, outcome) = scrub(doc.clone(), &PiiRuleSet::default());
        assert_eq!(out, doc);
        assert!(outcome.is_keep());
    }

    #[test]
    fn ip_and_phone_are_both_replaced() {
        let (out, n) = scrub_str("IP: 192.168.1.1, тел: +389 70 123 456");
        assert_eq!(out, "IP: [IP], тел: [PHONE]");
        assert_eq!(n, 2);
        assert_eq!(oracle_residuals(&out), 0);
    }

    #[test]
    fn ipv6_forms_are_replaced_but_times_are_not() {
        let (out, n) = scrub_str("Серверот 2001:db8::1 падна во 12:30:45 часот.");
        assert_eq!(out, "Серверот [IP] падна во 12:30:45 часот.");
        assert_eq!(n, 1);
        let (out, _) = scrub_str("Локална адреса ::1.");
        assert_eq!(out, "Локална адреса [IP].");
        // Bare "::" is punctuation-like, leave it.
        let (out, n) = scrub_str("В пример: std разделувач :: остане.");
        assert_eq!(n, 0);
        assert!(out.contains("::"));
    }

    #[test]
    fn local_phone_forms_are_replaced() {
        let (out, _) = scrub_str("Јавете се на 070/123-456 или (02) 3110 000.");
        assert_eq!(out, "Јавете се на [PHONE] или [PHONE].");
    }

    #[test]
    fn years_and_short_numbers_survive() {
        let text = "Во 1999 година имаше 45 настани, цена 1200 денари.";
        let (out, n) = scrub_str(text);
        assert_eq!(out, text);
        assert_eq!(n, 0);
    }

    #[test]
    fn version_strings_with_letters_survive() {
        let (out, n) = scrub_str("Инсталирајте v1.2.3.4 веднаш.");
        assert_eq!(out, "Инсталирајте v1.2.3.4 веднаш.");
        assert_eq!(n, 0);
    }

    #[test]
    fn dotted_run_that_is_not_an_address_survives() {
        let (out, n) = scrub_str("Поглавје 1.2.3.4.5 од книгата.");
        assert_eq!(out, "Поглавје 1.2.3.4.5 од книгата.");
        assert_eq!(n, 0);
    }

    #[test]
    fn scrub_is_idempotent() {
        let text = "Контакт: ana@example.mk, 192.168.1.1, +389 70 123 456, 2001:db8::1.";
        let (once, n) = scrub_str(text);
        assert_eq!(n, 4);
        let (twice, again) = scrub_str(&once);
        assert_eq!(once, twice);
        assert_eq!(again, 0);
    }

    #[test]
    fn unsafe_replacement_tokens_are_rejected() {
        let err = PiiRuleSet::new(vec![PiiRule {
            kind: PatternKind::Email,
            token: "contact@scrubbed.example".into(),
        }])
        .unwrap_err();
        assert!(matches!(err, PiiError::UnsafeToken { kind: PatternKind::Email, .. }));
    }

    #[test]
    fn transformed_outcome_carries_reason() {
        let doc = Document::new("d", "s", SourceKind::Web, "мејл: a@b.mk");
        let (_, outcome) = scrub(doc, &PiiRuleSet::default());
        assert!(outcome.is_transformed());
        assert_eq!(outcome.reason(), Some(ReasonCode::PiiScrubbed));
    }

    proptest::proptest! {
        #[test]
        fn scrubbing_twice_equals_once(text in "\\PC{0,200}") {
            let (once, _) = scrub_str(&text);
            let (twice, n) = scrub_str(&once);
            proptest::prop_assert_eq!(&once, &twice);
            proptest::prop_assert_eq!(n, 0);
        }
    }
}
