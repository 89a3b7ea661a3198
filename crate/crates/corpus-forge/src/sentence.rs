//! Sentence segmentation with exact reconstruction.
//!
//! The text is tiled into regions, one per sentence: a region carries the
//! sentence itself plus its trailing whitespace (the first region also
//! absorbs any leading whitespace). Concatenating the regions in order is
//! the identity, which is what lets dedup remove sentences and the chunker
//! cut documents without disturbing a single byte elsewhere.

/// One sentence region. Byte offsets into the original text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SentenceSpan {
    /// Start of the region (leading whitespace belongs to the first region).
    pub region_start: usize,
    /// Start of the sentence content.
    pub sent_start: usize,
    /// End of the sentence content.
    pub sent_end: usize,
    /// End of the region: through the trailing separator, equal to the next
    /// region's start (the last region ends at the text length).
    pub region_end: usize,
}

impl SentenceSpan {
    pub fn sentence<'a>(&self, text: &'a str) -> &'a str {
        &text[self.sent_start..self.sent_end]
    }

    pub fn region<'a>(&self, text: &'a str) -> &'a str {
        &text[self.region_start..self.region_end]
    }
}

/// Tokens before a terminal period that do not end a sentence.
/// Matching is case-insensitive on the whitespace-delimited token that ends
/// at the split candidate.
pub const ABBREVIATIONS: &[&str] = &[
    "д-р", "м-р", "г-дин", "г-ѓа", "г-ца", "бр.", "стр.", "св.", "сл.", "т.е.", "т.н.",
    "итн.", "пр.", "год.", "г.", "в.", "гл.", "проф.", "доц.", "акад.", "ул.", "бул.",
    "о.", "с.", "мин.", "макс.", "англ.", "лат.",
];

pub fn is_abbreviation(token: &str) -> bool {
    let lowered = token.to_lowercase();
    ABBREVIATIONS.iter().any(|a| *a == lowered)
}

const SENTENCE_TERMINALS: [char; 4] = ['.', '!', '?', '…'];
const CLOSING_MARKS: [char; 8] = ['"', '»', '“', '”', '\'', ')', ']', '’'];

fn is_opening_mark(c: char) -> bool {
    matches!(c, '"' | '«' | '„' | '(' | '[' | '‘' | '“')
}

/// Splits `text` into sentence regions. Splits occur only after terminal
/// punctuation (plus any closing quotes) followed by whitespace, when the
/// token before the mark is not a configured abbreviation; a bare '.' also
/// requires the next sentence to open with an uppercase letter, digit, or
/// opening quote, which avoids cutting at unlisted abbreviations.
pub fn segment_sentences(text: &str) -> Vec<SentenceSpan> {
    if text.is_empty() {
        return Vec::new();
    }

    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let n = chars.len();
    let byte_end = |i: usize| if i < n { chars[i].0 } else { text.len() };

    let mut spans = Vec::new();
    let mut region_start = 0usize;

    // Leading whitespace belongs to the first region.
    let mut i = 0usize;
    while i < n && chars[i].1.is_whitespace() {
        i += 1;
    }
    let mut sent_start = byte_end(i);

    while i < n {
        let c = chars[i].1;
        if !SENTENCE_TERMINALS.contains(&c) {
            i += 1;
            continue;
        }

        // Absorb a run of terminal marks ("?!", "...") and closing quotes.
        let mut j = i + 1;
        while j < n && (SENTENCE_TERMINALS.contains(&chars[j].1) || CLOSING_MARKS.contains(&chars[j].1))
        {
            j += 1;
        }

        let followed_by_space = j >= n || chars[j].1.is_whitespace();
        if !followed_by_space {
            i = j;
            continue;
        }

        // The whitespace-delimited token ending at the last mark, for the
        // abbreviation check ("бр.", "т.е.", ...).
        let mut t = i;
        while t > 0 && !chars[t - 1].1.is_whitespace() {
            t -= 1;
        }
        let token = &text[chars[t].0..byte_end(j)];
        if is_abbreviation(token.trim_end_matches(|c| CLOSING_MARKS.contains(&c))) {
            i = j;
            continue;
        }

        // For a bare period, peek at how the next sentence would open.
        if c == '.' && chars[i..j].iter().all(|(_, c)| *c == '.' || CLOSING_MARKS.contains(c)) {
            let ellipsis = i + 1 < j && chars[i + 1].1 == '.';
            if !ellipsis {
                let mut k = j;
                while k < n && chars[k].1.is_whitespace() {
                    k += 1;
                }
                if k < n {
                    let next = chars[k].1;
                    let opens_sentence =
                        next.is_uppercase() || next.is_ascii_digit() || is_opening_mark(next);
                    if !opens_sentence {
                        i = j;
                        continue;
                    }
                }
            }
        }

        // Split: sentence ends at j, separator runs to the next non-space.
        let sent_end = byte_end(j);
        let mut k = j;
        while k < n && chars[k].1.is_whitespace() {
            k += 1;
        }
        let region_end = byte_end(k);
        spans.push(SentenceSpan { region_start, sent_start, sent_end, region_end });
        region_start = region_end;
        sent_start = region_end;
        i = k;
    }

    // Trailing text without a terminal mark forms a final sentence; its
    // trailing whitespace stays inside the region.
    if region_start < text.len() {
        let tail = &text[sent_start..];
        let sent_end = sent_start + tail.trim_end().len();
        spans.push(SentenceSpan {
            region_start,
            sent_start,
            sent_end,
            region_end: text.len(),
        });
    } else if let Some(last) = spans.last_mut() {
        last.region_end = text.len();
    }

    spans
}

/// The sentences of `text`, without their separators.
pub fn split_sentences(text: &str) -> Vec<&str> {
    segment_sentences(text)
        .into_iter()
        .map(|s| s.sentence(text))
        .filter(|s| !s.is_empty())
        .collect()
}
