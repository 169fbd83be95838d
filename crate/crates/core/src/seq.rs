//! Token, tag and span types shared by the metrics and the oracles.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Interned token id. Ids are dense within one [`Vocab`], starting at 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Token(pub u32);

impl Token {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<u32> for Token {
    fn from(id: u32) -> Self {
        Token(id)
    }
}

pub type TokenSeq = Vec<Token>;
pub type TagSeq = Vec<Tag>;

/// A BIO label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tag {
    Outside,
    Begin(String),
    Inside(String),
}

/// Leading letter of a tag: `B`, `I` or `O`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TagPrefix {
    B,
    I,
    O,
}

impl Tag {
    pub fn begin(entity_type: impl Into<String>) -> Self {
        Tag::Begin(entity_type.into())
    }

    pub fn inside(entity_type: impl Into<String>) -> Self {
        Tag::Inside(entity_type.into())
    }

    pub fn prefix(&self) -> TagPrefix {
        match self {
            Tag::Outside => TagPrefix::O,
            Tag::Begin(_) => TagPrefix::B,
            Tag::Inside(_) => TagPrefix::I,
        }
    }

    pub fn entity_type(&self) -> Option<&str> {
        match self {
            Tag::Outside => None,
            Tag::Begin(t) | Tag::Inside(t) => Some(t),
        }
    }

    pub fn is_outside(&self) -> bool {
        matches!(self, Tag::Outside)
    }
}

/// Parses `"O"`, `"B-X"` or `"I-X"`.
pub fn parse_tag(text: &str) -> Result<Tag> {
    if text == "O" {
        return Ok(Tag::Outside);
    }
    let malformed = || Error::MalformedTag(text.to_string());
    let (head, entity_type) = text.split_once('-').ok_or_else(malformed)?;
    if entity_type.is_empty() {
        return Err(malformed());
    }
    match head {
        "B" => Ok(Tag::Begin(entity_type.to_string())),
        "I" => Ok(Tag::Inside(entity_type.to_string())),
        _ => Err(malformed()),
    }
}

pub fn render_tag(tag: &Tag) -> String {
    tag.to_string()
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tag::Outside => f.write_str("O"),
            Tag::Begin(t) => write!(f, "B-{t}"),
            Tag::Inside(t) => write!(f, "I-{t}"),
        }
    }
}

impl FromStr for Tag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_tag(s)
    }
}

/// Parses a whitespace-separated tag line.
pub fn parse_tags(line: &str) -> Result<TagSeq> {
    line.split_whitespace().map(parse_tag).collect()
}

/// An entity span with 0-based inclusive token bounds.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub entity_type: String,
}

impl Span {
    pub fn new(start: usize, end: usize, entity_type: impl Into<String>) -> Self {
        debug_assert!(start <= end);
        Span {
            start,
            end,
            entity_type: entity_type.into(),
        }
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

/// What a tag does to the span that is open before it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SpanTransition {
    /// The open span (if any) continues.
    Continue,
    /// The open span (if any) closes; nothing opens.
    Close,
    /// The open span (if any) closes and a new one opens.
    Open,
}

/// IOB2 transition with lenient repair: an `I-X` that cannot continue an
/// open `X` span opens a new one.
pub(crate) fn transition(open_type: Option<&str>, tag: &Tag) -> SpanTransition {
    match tag {
        Tag::Outside => SpanTransition::Close,
        Tag::Begin(_) => SpanTransition::Open,
        Tag::Inside(t) if open_type == Some(t.as_str()) => SpanTransition::Continue,
        Tag::Inside(_) => SpanTransition::Open,
    }
}

/// Extracts entity spans in left-to-right order.
pub fn extract_spans(tags: &[Tag]) -> Vec<Span> {
    let mut spans = Vec::new();
    let mut open: Option<(usize, &str)> = None;
    for (i, tag) in tags.iter().enumerate() {
        match transition(open.map(|(_, t)| t), tag) {
            SpanTransition::Continue => {}
            SpanTransition::Close => {
                if let Some((start, t)) = open.take() {
                    spans.push(Span::new(start, i - 1, t));
                }
            }
            SpanTransition::Open => {
                if let Some((start, t)) = open.take() {
                    spans.push(Span::new(start, i - 1, t));
                }
                open = tag.entity_type().map(|t| (i, t));
            }
        }
    }
    if let Some((start, t)) = open {
        spans.push(Span::new(start, tags.len() - 1, t));
    }
    spans
}

/// Bidirectional surface/id table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocab {
    ids: HashMap<String, Token>,
    surfaces: Vec<String>,
}

impl Vocab {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, surface: &str) -> Token {
        if let Some(&tok) = self.ids.get(surface) {
            return tok;
        }
        let tok = Token(self.surfaces.len() as u32);
        self.surfaces.push(surface.to_string());
        self.ids.insert(surface.to_string(), tok);
        tok
    }

    pub fn get(&self, surface: &str) -> Option<Token> {
        self.ids.get(surface).copied()
    }

    pub fn surface(&self, tok: Token) -> Option<&str> {
        self.surfaces.get(tok.index()).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.surfaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surfaces.is_empty()
    }

    pub fn encode<S: AsRef<str>>(&mut self, words: &[S]) -> TokenSeq {
        words.iter().map(|w| self.intern(w.as_ref())).collect()
    }

    /// Renders tokens as space-separated surfaces; unknown ids print as `#<id>`.
    pub fn decode(&self, tokens: &[Token]) -> String {
        tokens
            .iter()
            .map(|&t| match self.surface(t) {
                Some(s) => s.to_string(),
                None => format!("#{}", t.0),
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Builds a vocabulary with ids in first-appearance order.
pub fn build_vocab<S: AsRef<str>>(corpus: &[Vec<S>]) -> Vocab {
    let mut vocab = Vocab::new();
    for sentence in corpus {
        for word in sentence {
            vocab.intern(word.as_ref());
        }
    }
    vocab
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tags(s: &str) -> TagSeq {
        parse_tags(s).unwrap()
    }

    #[test]
    fn parse_examples() {
        assert_eq!(parse_tag("B-LOC").unwrap(), Tag::begin("LOC"));
        assert_eq!(parse_tag("I-PER").unwrap(), Tag::inside("PER"));
        assert_eq!(parse_tag("O").unwrap(), Tag::Outside);
    }

    #[test]
    fn parse_errors_name_the_text() {
        for bad in ["X-LOC", "B", "B-", "BLOC", "", "o", "I_LOC"] {
            match parse_tag(bad) {
                Err(Error::MalformedTag(t)) => assert_eq!(t, bad),
                other => panic!("{bad:?} parsed as {other:?}"),
            }
        }
    }

    #[test]
    fn render_examples() {
        assert_eq!(render_tag(&Tag::begin("PER")), "B-PER");
        assert_eq!(render_tag(&Tag::Outside), "O");
        assert_eq!(render_tag(&Tag::inside("MISC")), "I-MISC");
    }

    #[test]
    fn render_parse_round_trip_exhaustive() {
        for label in ["LOC", "PER", "ORG", "MISC", "B-X", "a"] {
            for tag in [Tag::Outside, Tag::begin(label), Tag::inside(label)] {
                assert_eq!(parse_tag(&render_tag(&tag)).unwrap(), tag);
            }
        }
    }

    #[test]
    fn extract_examples() {
        assert!(extract_spans(&tags("O O O")).is_empty());
        assert_eq!(
            extract_spans(&tags("B-LOC I-LOC O B-PER")),
            vec![Span::new(0, 1, "LOC"), Span::new(3, 3, "PER")]
        );
        assert_eq!(
            extract_spans(&tags("O I-LOC I-LOC")),
            vec![Span::new(1, 2, "LOC")]
        );
    }

    #[test]
    fn extract_repairs_type_switch_and_adjacent_begins() {
        assert_eq!(
            extract_spans(&tags("B-LOC I-PER I-PER B-PER B-PER")),
            vec![
                Span::new(0, 0, "LOC"),
                Span::new(1, 2, "PER"),
                Span::new(3, 3, "PER"),
                Span::new(4, 4, "PER"),
            ]
        );
        assert_eq!(extract_spans(&tags("I-LOC")), vec![Span::new(0, 0, "LOC")]);
    }

    #[test]
    fn vocab_examples() {
        let v = build_vocab(&[vec!["a", "b"], vec!["b", "c"]]);
        assert_eq!(v.get("a"), Some(Token(0)));
        assert_eq!(v.get("b"), Some(Token(1)));
        assert_eq!(v.get("c"), Some(Token(2)));
        assert_eq!(v.len(), 3);

        let empty: Vec<Vec<&str>> = vec![];
        assert!(build_vocab(&empty).is_empty());

        let v = build_vocab(&[vec!["a", "a"]]);
        assert_eq!(v.len(), 1);
        assert_eq!(v.surface(Token(0)), Some("a"));
    }

    fn arb_tag() -> impl Strategy<Value = Tag> {
        prop_oneof![
            Just(Tag::Outside),
            Just(Tag::begin("LOC")),
            Just(Tag::inside("LOC")),
            Just(Tag::begin("PER")),
            Just(Tag::inside("PER")),
        ]
    }

    /// Textbook IOB2 reading: spans start only at `B-X`, continue on `I-X`.
    fn textbook_iob2(tags: &[Tag]) -> Vec<Span> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < tags.len() {
            if let Tag::Begin(t) = &tags[i] {
                let mut j = i;
                while j + 1 < tags.len() && tags[j + 1] == Tag::inside(t.clone()) {
                    j += 1;
                }
                out.push(Span::new(i, j, t.clone()));
                i = j + 1;
            } else {
                i += 1;
            }
        }
        out
    }

    /// Replaces every `I-X` that does not follow a tag of type `X` with `O`.
    fn make_repair_free(mut tags: Vec<Tag>) -> Vec<Tag> {
        for i in 0..tags.len() {
            if let Tag::Inside(t) = &tags[i] {
                if i == 0 || tags[i - 1].entity_type() != Some(t.as_str()) {
                    tags[i] = Tag::Outside;
                }
            }
        }
        tags
    }

    proptest! {
        #[test]
        fn spans_are_sorted_and_disjoint(tags in prop::collection::vec(arb_tag(), 0..20)) {
            let spans = extract_spans(&tags);
            for s in &spans {
                prop_assert!(s.start <= s.end && s.end < tags.len());
            }
            for w in spans.windows(2) {
                prop_assert!(w[0].end < w[1].start);
            }
        }

        #[test]
        fn repair_free_sequences_read_as_textbook(
            tags in prop::collection::vec(arb_tag(), 0..20).prop_map(make_repair_free)) {
            prop_assert_eq!(extract_spans(&tags), textbook_iob2(&tags));
        }

        #[test]
        fn vocab_tables_are_inverse(corpus in prop::collection::vec(
            prop::collection::vec("[a-e]{1,2}", 0..6), 0..5)) {
            let v = build_vocab(&corpus);
            for id in 0..v.len() as u32 {
                let s = v.surface(Token(id)).unwrap();
                prop_assert_eq!(v.get(s), Some(Token(id)));
            }
        }
    }
}
