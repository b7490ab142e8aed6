//! Text ingestion: keep self-written messages, tokenize, drop stop words and
//! links, and produce one reference document per user.

use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::PrepError;

const BUNDLED_STOPWORDS: &str = include_str!("../assets/stopwords_en.txt");
const BUNDLED_ENGLISH: &str = include_str!("../assets/english_words.txt");

const URL_PREFIXES: [&str; 3] = ["http://", "https://", "www."];

/// Whole-chunk ASCII emoticons that survive tokenization (already lowercased).
const EMOTICONS: [&str; 14] = [
    ":)", ":-)", ":(", ":-(", ";)", ";-)", ":d", ":-d", ":p", ":-p", ":'(", "<3", ":o", "xd",
];

/// One user's raw texting history.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawHistory {
    pub messages: Vec<Message>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub author_is_self: bool,
    pub text: String,
}

impl RawHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, author_is_self: bool, text: impl Into<String>) {
        self.messages.push(Message {
            author_is_self,
            text: text.into(),
        });
    }

    /// Plain text: every line is a self-written message.
    pub fn from_plain_text(input: &str) -> Self {
        let messages = input
            .lines()
            .map(|line| Message {
                author_is_self: true,
                text: line.to_string(),
            })
            .collect();
        Self { messages }
    }

    /// Two-column TSV `author<TAB>text`; author `self` marks own messages.
    /// Lines without a tab are rejected.
    pub fn from_tsv(input: &str) -> Result<Self, PrepError> {
        let mut messages = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (author, text) = line
                .split_once('\t')
                .ok_or(PrepError::MalformedTsv { line: lineno + 1 })?;
            messages.push(Message {
                author_is_self: author.trim().eq_ignore_ascii_case("self"),
                text: text.to_string(),
            });
        }
        Ok(Self { messages })
    }

    /// Reads a history file; `.tsv` files use the two-column format, anything
    /// else is treated as plain text.
    pub fn from_path(path: &Path) -> Result<Self, PrepError> {
        let raw = fs::read_to_string(path).map_err(|source| PrepError::Io {
            path: path.display().to_string(),
            source,
        })?;
        match InputFormat::detect(path) {
            InputFormat::Tsv => Self::from_tsv(&raw),
            InputFormat::Plain => Ok(Self::from_plain_text(&raw)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Plain,
    Tsv,
}

impl InputFormat {
    pub fn detect(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("tsv") => InputFormat::Tsv,
            _ => InputFormat::Plain,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceDocument {
    pub user_id: String,
    pub tokens: Vec<String>,
}

impl ReferenceDocument {
    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// A set of lowercase words loaded from a one-word-per-line list.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WordList(HashSet<String>);

impl WordList {
    /// Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Self {
        WordList(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn load(path: &Path) -> Result<Self, PrepError> {
        let raw = fs::read_to_string(path).map_err(|source| PrepError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(Self::parse(&raw))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Sorted copy of the words.
    pub fn to_sorted_vec(&self) -> Vec<String> {
        let mut v: Vec<String> = self.0.iter().cloned().collect();
        v.sort();
        v
    }
}

/// The bundled English stop list.
pub fn english_stopwords() -> &'static WordList {
    static LIST: OnceLock<WordList> = OnceLock::new();
    LIST.get_or_init(|| WordList::parse(BUNDLED_STOPWORDS))
}

/// The bundled common-English content wordlist (stop words not included).
pub fn english_wordlist() -> &'static WordList {
    static LIST: OnceLock<WordList> = OnceLock::new();
    LIST.get_or_init(|| WordList::parse(BUNDLED_ENGLISH))
}

#[derive(Debug, Clone)]
pub struct PrepConfig {
    pub stopwords: WordList,
    /// Minimum share of recognised English tokens for a history to be kept.
    pub english_threshold: f64,
    pub language_filter: bool,
    /// Keep a leading `#` / `@` on hashtags and mentions.
    pub keep_tags: bool,
}

impl Default for PrepConfig {
    fn default() -> Self {
        Self {
            stopwords: english_stopwords().clone(),
            english_threshold: 0.5,
            language_filter: true,
            keep_tags: true,
        }
    }
}

fn is_url(chunk: &str) -> bool {
    URL_PREFIXES.iter().any(|p| chunk.starts_with(p))
}

/// Characters that glue emoji sequences together (ZWJ, variation selectors,
/// skin-tone modifiers are already covered by `is_emoji_char`).
fn is_emoji_joiner(c: char) -> bool {
    matches!(c, '\u{200D}' | '\u{FE0E}' | '\u{FE0F}' | '\u{20E3}')
}

fn is_emoji_char(c: char) -> bool {
    if c.is_alphanumeric() || c.is_whitespace() || c.is_ascii() || c.is_control() {
        return false;
    }
    let cp = c as u32;
    // Latin-1 punctuation and the general punctuation block are separators.
    let punctuation = (0x00A1..=0x00BF).contains(&cp)
        || cp == 0x00D7
        || cp == 0x00F7
        || (0x2000..=0x206F).contains(&cp)
        || (0x3000..=0x303F).contains(&cp)
        || (0xFF01..=0xFF0F).contains(&cp);
    !punctuation || is_emoji_joiner(c)
}

#[derive(PartialEq, Eq, Clone, Copy)]
enum Run {
    None,
    Word,
    Emoji,
}

fn tokenize_chunk(chunk: &str, keep_tags: bool, out: &mut Vec<String>) {
    if is_url(chunk) {
        return;
    }
    if EMOTICONS.contains(&chunk) {
        out.push(chunk.to_string());
        return;
    }
    let chars: Vec<char> = chunk.chars().collect();
    let mut current = String::new();
    let mut run = Run::None;
    let flush = |current: &mut String, run: &mut Run, out: &mut Vec<String>| {
        if !current.is_empty() {
            out.push(std::mem::take(current));
        }
        *run = Run::None;
    };
    for (idx, &c) in chars.iter().enumerate() {
        if c.is_alphanumeric() {
            if run == Run::Emoji {
                flush(&mut current, &mut run, out);
            }
            current.push(c);
            run = Run::Word;
        } else if keep_tags
            && (c == '#' || c == '@')
            && run == Run::None
            && chars.get(idx + 1).is_some_and(|n| n.is_alphanumeric())
        {
            current.push(c);
            run = Run::Word;
        } else if is_emoji_char(c) {
            if run == Run::Word {
                flush(&mut current, &mut run, out);
            }
            if run == Run::None && is_emoji_joiner(c) {
                // A joiner never starts a run on its own.
                continue;
            }
            current.push(c);
            run = Run::Emoji;
        } else {
            flush(&mut current, &mut run, out);
        }
    }
    flush(&mut current, &mut run, out);
}

/// Lowercases, drops URL chunks, and splits at whitespace and punctuation.
/// Runs of emoji stay together as one token.
pub fn tokenize(text: &str) -> Vec<String> {
    tokenize_with(text, true)
}

pub fn tokenize_with(text: &str, keep_tags: bool) -> Vec<String> {
    let lowered = text.to_lowercase();
    let mut out = Vec::new();
    for chunk in lowered.split_whitespace() {
        tokenize_chunk(chunk, keep_tags, &mut out);
    }
    out
}

/// Wordlist lookup that also accepts regular inflections (`speaks`,
/// `voted`, `parties`, `helping`) of listed words.
fn is_known_english(token: &str, extra_stop: &WordList) -> bool {
    let english = english_wordlist();
    let known =
        |w: &str| english.contains(w) || english_stopwords().contains(w) || extra_stop.contains(w);
    if known(token) {
        return true;
    }
    if let Some(stem) = token.strip_suffix("ies") {
        if known(&format!("{stem}y")) {
            return true;
        }
    }
    ["s", "es", "ed", "d", "ing", "ly"]
        .iter()
        .filter_map(|suffix| token.strip_suffix(suffix))
        .any(|stem| stem.len() >= 2 && (known(stem) || known(&format!("{stem}e"))))
}

/// True when the share of tokens found in the bundled English wordlist or the
/// stop list reaches `config.english_threshold`. Empty input is accepted.
pub fn majority_language_ok(tokens: &[String], config: &PrepConfig) -> bool {
    if tokens.is_empty() {
        return true;
    }
    let known = tokens
        .iter()
        .filter(|t| is_known_english(t, &config.stopwords))
        .count();
    known as f64 / tokens.len() as f64 >= config.english_threshold
}

/// Builds the reference document from the self-written part of a history.
///
/// The language check runs over the whole self-written history before stop
/// words are removed; a rejected history yields an empty document.
pub fn build_reference(
    user_id: impl Into<String>,
    history: &RawHistory,
    config: &PrepConfig,
) -> ReferenceDocument {
    let raw_tokens: Vec<String> = history
        .messages
        .iter()
        .filter(|m| m.author_is_self)
        .flat_map(|m| tokenize_with(&m.text, config.keep_tags))
        .collect();
    let tokens = if config.language_filter && !majority_language_ok(&raw_tokens, config) {
        Vec::new()
    } else {
        raw_tokens
            .into_iter()
            .filter(|t| !config.stopwords.contains(t))
            .collect()
    };
    ReferenceDocument {
        user_id: user_id.into(),
        tokens,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn tokenize_examples() {
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("Hello, WORLD!"), toks(&["hello", "world"]));
        assert_eq!(tokenize("good 😂😂 job"), toks(&["good", "😂😂", "job"]));
        assert_eq!(tokenize("see https://x.co now"), toks(&["see", "now"]));
        assert_eq!(tokenize("www.example.org rocks"), toks(&["rocks"]));
    }

    #[test]
    fn tokenize_splits_emoji_from_words() {
        assert_eq!(tokenize("great😂job"), toks(&["great", "😂", "job"]));
        assert_eq!(tokenize("👍🏽 fine"), toks(&["👍🏽", "fine"]));
        assert_eq!(
            tokenize("family 👨\u{200D}👩\u{200D}👧"),
            toks(&["family", "👨\u{200D}👩\u{200D}👧"])
        );
    }

    #[test]
    fn tags_kept_by_default_and_strippable() {
        assert_eq!(
            tokenize("#MAGA @potus rally"),
            toks(&["#maga", "@potus", "rally"])
        );
        assert_eq!(
            tokenize_with("#MAGA @potus rally", false),
            toks(&["maga", "potus", "rally"])
        );
        assert_eq!(tokenize("a#b ##x"), toks(&["a", "b", "#x"]));
    }

    #[test]
    fn emoticons_are_tokens() {
        assert_eq!(tokenize("ok :) bye :D"), toks(&["ok", ":)", "bye", ":d"]));
    }

    #[test]
    fn apostrophes_split() {
        assert_eq!(tokenize("Don't stop"), toks(&["don", "t", "stop"]));
    }

    #[test]
    fn build_reference_keeps_only_self_messages() {
        let mut h = RawHistory::new();
        h.push(true, "Obama speaks to the media");
        h.push(false, "nope");
        let doc = build_reference("a", &h, &PrepConfig::default());
        assert_eq!(doc.tokens, toks(&["obama", "speaks", "media"]));
    }

    #[test]
    fn build_reference_drops_urls() {
        let mut h = RawHistory::new();
        h.push(true, "see https://x.co now");
        let doc = build_reference("a", &h, &PrepConfig::default());
        assert_eq!(doc.tokens, toks(&["see", "now"]));
    }

    #[test]
    fn no_self_messages_gives_empty_document() {
        let mut h = RawHistory::new();
        h.push(false, "hello there");
        assert!(build_reference("a", &h, &PrepConfig::default()).is_empty());
        assert!(build_reference("a", &RawHistory::new(), &PrepConfig::default()).is_empty());
    }

    #[test]
    fn language_heuristic() {
        let cfg = PrepConfig::default();
        assert!(majority_language_ok(&[], &cfg));
        assert!(majority_language_ok(&toks(&["the", "and", "house"]), &cfg));
        assert!(!majority_language_ok(&toks(&["der", "und", "haus"]), &cfg));
        assert!(majority_language_ok(
            &toks(&["speaks", "voted", "parties", "xq"]),
            &cfg
        ));
        let strict = PrepConfig {
            english_threshold: 0.9,
            ..PrepConfig::default()
        };
        assert!(!majority_language_ok(
            &toks(&["speaks", "voted", "parties", "xq"]),
            &strict
        ));
    }

    #[test]
    fn foreign_history_rejected_unless_filter_off() {
        let mut h = RawHistory::new();
        h.push(true, "der hund und das haus");
        assert!(build_reference("a", &h, &PrepConfig::default()).is_empty());
        let cfg = PrepConfig {
            language_filter: false,
            ..PrepConfig::default()
        };
        assert_eq!(
            build_reference("a", &h, &cfg).tokens,
            toks(&["der", "hund", "und", "das", "haus"])
        );
    }

    #[test]
    fn tsv_parsing() {
        let h = RawHistory::from_tsv("self\thi there\nbob\tyo\n\nSELF\tagain").unwrap();
        assert_eq!(h.messages.len(), 3);
        assert!(h.messages[0].author_is_self);
        assert!(!h.messages[1].author_is_self);
        assert!(h.messages[2].author_is_self);
        assert!(matches!(
            RawHistory::from_tsv("no tab here"),
            Err(PrepError::MalformedTsv { line: 1 })
        ));
    }

    #[test]
    fn custom_stoplist() {
        let cfg = PrepConfig {
            stopwords: WordList::parse("# custom\nmedia\n"),
            language_filter: false,
            ..PrepConfig::default()
        };
        let mut h = RawHistory::new();
        h.push(true, "Obama speaks to the media");
        assert_eq!(
            build_reference("a", &h, &cfg).tokens,
            toks(&["obama", "speaks", "to", "the"])
        );
    }

    proptest! {
        #[test]
        fn tokenize_is_idempotent(text in "\\PC{0,80}") {
            let once = tokenize(&text);
            let twice = tokenize(&once.join(" "));
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn output_has_no_stopwords_or_urls(text in "(the|a|to|https://q.io|www.z.com|house|Vote|😂|, )(\\s(the|a|to|https://q.io|www.z.com|house|Vote|😂|, )){0,20}") {
            let mut h = RawHistory::new();
            h.push(true, text.clone());
            let cfg = PrepConfig { language_filter: false, ..PrepConfig::default() };
            let doc = build_reference("u", &h, &cfg);
            for t in &doc.tokens {
                prop_assert!(!cfg.stopwords.contains(t));
                prop_assert!(!is_url(t));
                prop_assert_eq!(t.to_lowercase(), t.clone());
            }
        }

        #[test]
        fn order_is_preserved(words in proptest::collection::vec("[a-z]{1,6}", 0..30)) {
            let mut h = RawHistory::new();
            h.push(true, words.join(" "));
            let cfg = PrepConfig { language_filter: false, ..PrepConfig::default() };
            let doc = build_reference("u", &h, &cfg);
            let expected: Vec<String> = words.into_iter().filter(|w| !cfg.stopwords.contains(w)).collect();
            prop_assert_eq!(doc.tokens, expected);
        }
    }
}
