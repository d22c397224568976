//! Tokenization and the preprocessing transforms used by the classical
//! pipelines: word duplication and character/word n-gram extraction.
//!
//! No normalization is applied anywhere: no diacritic stripping, no
//! orthography folding. Dialect cues live in surface forms, so the text is
//! taken as-is. Character n-grams operate on Unicode scalar values and are
//! computed on the full string including spaces, so grams can span word
//! boundaries (this is what makes word duplication useful: a gram can cover
//! the end of a word followed by the start of its copy, exposing circumfix
//! patterns).

use crate::error::{Error, Result};

/// An ordered sequence of whitespace-free tokens.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    /// Build from pre-split tokens. Rejects empty tokens and tokens
    /// containing whitespace.
    pub fn new(tokens: Vec<String>) -> Result<Self> {
        for t in &tokens {
            if t.is_empty() {
                return Err(Error::invalid("empty token in token sequence"));
            }
            if t.chars().any(char::is_whitespace) {
                return Err(Error::invalid(format!("token {t:?} contains whitespace")));
            }
        }
        Ok(TokenSequence(tokens))
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.0.iter()
    }

    /// Tokens joined by single spaces.
    pub fn join(&self) -> String {
        self.0.join(" ")
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.0
    }
}

/// Split on runs of Unicode whitespace, dropping empty tokens.
pub fn tokenize(text: &str) -> TokenSequence {
    TokenSequence(text.split_whitespace().map(str::to_owned).collect())
}

/// Emit every token twice in a row, joined by single spaces:
/// `[x, y]` becomes `"x x y y"`.
pub fn duplicate_words(tokens: &TokenSequence) -> String {
    let mut out = String::new();
    for t in tokens.iter() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(t);
        out.push(' ');
        out.push_str(t);
    }
    out
}

/// All contiguous length-`n` substrings of `text`, in order, counted in
/// Unicode scalar values. Strings shorter than `n` yield nothing.
pub fn char_ngrams(text: &str, n: usize) -> Result<Vec<String>> {
    if n == 0 {
        return Err(Error::invalid("char n-gram order must be >= 1"));
    }
    let chars: Vec<char> = text.chars().collect();
    if chars.len() < n {
        return Ok(Vec::new());
    }
    Ok(chars.windows(n).map(|w| w.iter().collect()).collect())
}

/// Concatenation of [`char_ngrams`] for every order in `lo..=hi`.
pub fn char_ngram_range(text: &str, lo: usize, hi: usize) -> Result<Vec<String>> {
    if lo == 0 {
        return Err(Error::invalid("char n-gram order must be >= 1"));
    }
    if lo > hi {
        return Err(Error::invalid(format!(
            "invalid char n-gram range {lo}..{hi}: lo > hi"
        )));
    }
    let mut out = Vec::new();
    for n in lo..=hi {
        out.extend(char_ngrams(text, n)?);
    }
    Ok(out)
}

/// Contiguous `n`-token windows joined by single spaces.
pub fn word_ngrams(tokens: &TokenSequence, n: usize) -> Result<Vec<String>> {
    if n == 0 {
        return Err(Error::invalid("word n-gram order must be >= 1"));
    }
    if tokens.len() < n {
        return Ok(Vec::new());
    }
    Ok(tokens
        .tokens()
        .windows(n)
        .map(|w| w.join(" "))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tokenize_splits_on_whitespace_runs() {
        let toks = tokenize("مرحبا يا عالم");
        assert_eq!(toks.tokens(), ["مرحبا", "يا", "عالم"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("a  b").tokens(), ["a", "b"]);
        assert_eq!(tokenize(" a\tb\n").tokens(), ["a", "b"]);
    }

    #[test]
    fn duplicate_words_doubles_each_token() {
        assert_eq!(duplicate_words(&tokenize("x y")), "x x y y");
        assert_eq!(duplicate_words(&tokenize("")), "");
        assert_eq!(duplicate_words(&tokenize("a")), "a a");
    }

    #[test]
    fn char_ngrams_basic() {
        assert_eq!(char_ngrams("abc", 2).unwrap(), ["ab", "bc"]);
        assert_eq!(char_ngrams("abc", 1).unwrap(), ["a", "b", "c"]);
        assert!(char_ngrams("ab", 3).unwrap().is_empty());
        assert!(char_ngrams("abc", 0).is_err());
    }

    #[test]
    fn char_ngrams_count_unicode_scalars_not_bytes() {
        // Arabic letters are multi-byte in UTF-8; counts must follow chars.
        let grams = char_ngrams("يال", 2).unwrap();
        assert_eq!(grams, ["يا", "ال"]);
    }

    #[test]
    fn char_ngram_range_concatenates_orders() {
        assert_eq!(
            char_ngram_range("abc", 1, 2).unwrap(),
            ["a", "b", "c", "ab", "bc"]
        );
        assert!(char_ngram_range("a", 2, 3).unwrap().is_empty());
        assert_eq!(char_ngram_range("abcd", 4, 6).unwrap(), ["abcd"]);
        assert!(char_ngram_range("abc", 2, 1).is_err());
        assert!(char_ngram_range("abc", 0, 1).is_err());
    }

    #[test]
    fn word_ngrams_windows() {
        assert_eq!(word_ngrams(&tokenize("a b c"), 2).unwrap(), ["a b", "b c"]);
        assert_eq!(word_ngrams(&tokenize("a"), 1).unwrap(), ["a"]);
        assert!(word_ngrams(&tokenize("a"), 2).unwrap().is_empty());
        assert!(word_ngrams(&tokenize("a b"), 0).is_err());
    }

    #[test]
    fn token_sequence_rejects_whitespace() {
        assert!(TokenSequence::new(vec!["a b".into()]).is_err());
        assert!(TokenSequence::new(vec![String::new()]).is_err());
    }

    proptest! {
        #[test]
        fn char_ngram_count_law(s in "\\PC{0,40}", n in 1usize..6) {
            let len = s.chars().count();
            let grams = char_ngrams(&s, n).unwrap();
            prop_assert_eq!(grams.len(), len.saturating_sub(n - 1));
        }

        #[test]
        fn duplicate_words_doubles_and_recovers(s in "[a-z\u{0621}-\u{064a}]{1,8}( [a-z\u{0621}-\u{064a}]{1,8}){0,6}") {
            let toks = tokenize(&s);
            let dup = duplicate_words(&toks);
            let dup_toks = tokenize(&dup);
            prop_assert_eq!(dup_toks.len(), 2 * toks.len());
            // De-duplicating adjacent pairs recovers the input.
            let recovered: Vec<&String> = dup_toks.tokens().chunks(2).map(|p| &p[0]).collect();
            prop_assert!(dup_toks.tokens().chunks(2).all(|p| p[0] == p[1]));
            prop_assert_eq!(recovered, toks.tokens().iter().collect::<Vec<_>>());
        }

        #[test]
        fn tokenize_is_idempotent_through_join(s in "\\PC{0,60}") {
            let once = tokenize(&s);
            let twice = tokenize(&once.join());
            prop_assert_eq!(once, twice);
        }
    }
}
