//! Deterministic, offset-preserving sentence splitting and tokenization.
//!
//! A sentence ends after `.`, `!` or `?` (plus any run of further
//! terminators and closing quotes/brackets) when whitespace and then an
//! uppercase letter or digit follow. There is no abbreviation list.
//!
//! A token is a maximal run of alphanumerics, where a single `-`, `_`, `.`,
//! `'` or `+` between two alphanumerics stays inside the token; any other
//! non-whitespace character is a token by itself.

use super::{SentenceTokenization, Token};

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_closer(c: char) -> bool {
    matches!(
        c,
        '"' | '\'' | ')' | ']' | '}' | '\u{201d}' | '\u{2019}' | '\u{bb}'
    )
}

fn is_joiner(c: char) -> bool {
    matches!(c, '-' | '_' | '.' | '\'' | '+')
}

fn trimmed(chars: &[char], mut start: usize, mut end: usize) -> Option<(usize, usize)> {
    while start < end && chars[start].is_whitespace() {
        start += 1;
    }
    while end > start && chars[end - 1].is_whitespace() {
        end -= 1;
    }
    (start < end).then_some((start, end))
}

pub(crate) fn split_chars(chars: &[char]) -> Vec<(usize, usize)> {
    let n = chars.len();
    let mut sentences = Vec::new();
    let mut seg_start = 0;
    let mut i = 0;
    while i < n {
        if !is_terminator(chars[i]) {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < n && is_terminator(chars[j]) {
            j += 1;
        }
        while j < n && is_closer(chars[j]) {
            j += 1;
        }
        let mut k = j;
        while k < n && chars[k].is_whitespace() {
            k += 1;
        }
        if k > j && k < n && (chars[k].is_uppercase() || chars[k].is_numeric()) {
            sentences.extend(trimmed(chars, seg_start, j));
            seg_start = k;
            i = k;
        } else {
            i = j;
        }
    }
    sentences.extend(trimmed(chars, seg_start, n));
    sentences
}

/// Sentence spans `(start, end)` in char offsets, covering all non-whitespace text.
pub fn split_sentences(text: &str) -> Vec<(usize, usize)> {
    let chars: Vec<char> = text.chars().collect();
    split_chars(&chars)
}

pub(crate) fn tokenize_chars(chars: &[char], start: usize, end: usize) -> Vec<Token> {
    let end = end.min(chars.len());
    let mut tokens = Vec::new();
    let mut i = start;
    while i < end {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        if c.is_alphanumeric() {
            loop {
                while j < end && chars[j].is_alphanumeric() {
                    j += 1;
                }
                if j + 1 < end && is_joiner(chars[j]) && chars[j + 1].is_alphanumeric() {
                    j += 1;
                } else {
                    break;
                }
            }
        }
        tokens.push(Token {
            start: i,
            end: j,
            text: chars[i..j].iter().collect(),
        });
        i = j;
    }
    tokens
}

/// Tokens of `text` inside the char span `sentence`, with absolute offsets.
pub fn tokenize(text: &str, sentence: (usize, usize)) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    tokenize_chars(&chars, sentence.0, sentence.1)
}

/// Splits and tokenizes a whole text.
pub fn tokenize_document(text: &str) -> Vec<SentenceTokenization> {
    let chars: Vec<char> = text.chars().collect();
    split_chars(&chars)
        .into_iter()
        .map(|(start, end)| SentenceTokenization {
            start,
            end,
            tokens: tokenize_chars(&chars, start, end),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::SAMPLE_TEXT;

    fn words(text: &str) -> Vec<String> {
        tokenize(text, (0, text.chars().count()))
            .into_iter()
            .map(|t| t.text)
            .collect()
    }

    #[test]
    fn sample_has_three_sentences() {
        let spans = split_sentences(SAMPLE_TEXT);
        let chars: Vec<char> = SAMPLE_TEXT.chars().collect();
        let ends: Vec<String> = spans
            .iter()
            .map(|&(s, e)| chars[s..e].iter().collect::<String>())
            .collect();
        assert_eq!(spans.len(), 3);
        assert!(ends[0].ends_with("question answering."));
        assert!(ends[1].ends_with("(CRF)."));
        assert!(ends[2].ends_with("corpus."));
        assert_eq!(spans, vec![(0, 169), (170, 311), (312, 365)]);
    }

    #[test]
    fn no_terminator_is_one_sentence() {
        assert_eq!(split_sentences("One sentence"), vec![(0, 12)]);
    }

    #[test]
    fn two_short_sentences() {
        assert_eq!(split_sentences("A. B."), vec![(0, 2), (3, 5)]);
    }

    #[test]
    fn lowercase_after_period_does_not_split() {
        assert_eq!(
            split_sentences("see e.g. the table. Then"),
            vec![(0, 19), (20, 24)]
        );
        assert_eq!(split_sentences("Fig. 3 shows it."), vec![(0, 4), (5, 16)]);
    }

    #[test]
    fn closing_brackets_stay_with_sentence() {
        assert_eq!(
            split_sentences("It works (mostly.) Next!"),
            vec![(0, 18), (19, 24)]
        );
        assert_eq!(split_sentences("Really?! Yes."), vec![(0, 8), (9, 13)]);
    }

    #[test]
    fn whitespace_only_text_has_no_sentences() {
        assert!(split_sentences("").is_empty());
        assert!(split_sentences(" \n\t ").is_empty());
    }

    #[test]
    fn tokenizes_parenthesized_acronym() {
        assert_eq!(
            words("conditional random fields (CRF)."),
            ["conditional", "random", "fields", "(", "CRF", ")", "."]
        );
    }

    #[test]
    fn internal_hyphen_joins() {
        assert_eq!(
            words("ConLL-2003 NER corpus"),
            ["ConLL-2003", "NER", "corpus"]
        );
        assert_eq!(
            words("end-to-end C++ x_1 it's"),
            ["end-to-end", "C", "+", "+", "x_1", "it's"]
        );
        assert_eq!(
            words("3.5 e.g. a--b"),
            ["3.5", "e.g", ".", "a", "-", "-", "b"]
        );
    }

    #[test]
    fn empty_text_has_no_tokens() {
        assert!(words("").is_empty());
    }

    #[test]
    fn offsets_are_char_based() {
        let toks = tokenize("über-cool Ω", (0, 11));
        assert_eq!((toks[0].start, toks[0].end), (0, 9));
        assert_eq!((toks[1].start, toks[1].end), (10, 11));
    }
}
