//! Tagged-text data model, column file formats, IOB scheme conversion and
//! chunk span extraction.
//!
//! Flat chunk files carry one token per line (`word pos [chunk_tag]`) with a
//! blank line after every sentence. Nested bracket files carry
//! `word pos bracket`, where the bracket column is zero or more `(NP`
//! openers, a mandatory `*`, and zero or more `)` closers.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// The two IOB variants found in the shared-task data sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TagScheme {
    /// `I-X` opens a chunk; `B-X` only separates two adjacent chunks of type X.
    Iob1,
    /// `B-X` opens every chunk.
    #[default]
    Iob2,
}

impl fmt::Display for TagScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TagScheme::Iob1 => write!(f, "iob1"),
            TagScheme::Iob2 => write!(f, "iob2"),
        }
    }
}

impl FromStr for TagScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "iob1" => Ok(TagScheme::Iob1),
            "iob2" => Ok(TagScheme::Iob2),
            other => Err(Error::Config(format!("unknown tag scheme '{other}'"))),
        }
    }
}

/// A parsed chunk tag.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ChunkTag {
    Outside,
    Begin(String),
    Inside(String),
}

impl ChunkTag {
    /// Parses `O`, `B-<TYPE>` or `I-<TYPE>` with an alphanumeric type.
    pub fn parse(tag: &str) -> Option<ChunkTag> {
        if tag == "O" {
            return Some(ChunkTag::Outside);
        }
        let (prefix, label) = tag.split_once('-')?;
        if label.is_empty() || !label.chars().all(|c| c.is_ascii_alphanumeric()) {
            return None;
        }
        match prefix {
            "B" => Some(ChunkTag::Begin(label.to_string())),
            "I" => Some(ChunkTag::Inside(label.to_string())),
            _ => None,
        }
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            ChunkTag::Outside => None,
            ChunkTag::Begin(l) | ChunkTag::Inside(l) => Some(l),
        }
    }
}

impl fmt::Display for ChunkTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChunkTag::Outside => write!(f, "O"),
            ChunkTag::Begin(l) => write!(f, "B-{l}"),
            ChunkTag::Inside(l) => write!(f, "I-{l}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub word: String,
    pub pos: String,
    pub chunk_tag: Option<String>,
}

impl Token {
    pub fn new(word: impl Into<String>, pos: impl Into<String>, chunk_tag: Option<String>) -> Self {
        Token {
            word: word.into(),
            pos: pos.into(),
            chunk_tag,
        }
    }

    pub fn unlabeled(word: impl Into<String>, pos: impl Into<String>) -> Self {
        Token::new(word, pos, None)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sentence {
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Self {
        Sentence { tokens }
    }

    /// Builds an unlabeled sentence from parallel word and POS lists.
    pub fn from_words_pos<W: AsRef<str>, P: AsRef<str>>(words: &[W], pos: &[P]) -> Self {
        Sentence {
            tokens: words
                .iter()
                .zip(pos)
                .map(|(w, p)| Token::unlabeled(w.as_ref(), p.as_ref()))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn words(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.word.as_str()).collect()
    }

    pub fn pos_tags(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.pos.as_str()).collect()
    }

    /// The chunk tags, or `None` if any token is unlabeled.
    pub fn chunk_tags(&self) -> Option<Vec<&str>> {
        self.tokens.iter().map(|t| t.chunk_tag.as_deref()).collect()
    }

    /// A copy of this sentence carrying `tags` as chunk tags.
    pub fn with_tags<S: AsRef<str>>(&self, tags: &[S]) -> Sentence {
        debug_assert_eq!(tags.len(), self.tokens.len());
        Sentence {
            tokens: self
                .tokens
                .iter()
                .zip(tags)
                .map(|(t, tag)| {
                    Token::new(
                        t.word.clone(),
                        t.pos.clone(),
                        Some(tag.as_ref().to_string()),
                    )
                })
                .collect(),
        }
    }

    /// A copy of this sentence with every chunk tag removed.
    pub fn unlabeled(&self) -> Sentence {
        Sentence {
            tokens: self
                .tokens
                .iter()
                .map(|t| Token::unlabeled(t.word.clone(), t.pos.clone()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
    pub scheme: TagScheme,
}

impl Corpus {
    /// Builds a corpus, validating every sentence against `scheme`.
    pub fn new(sentences: Vec<Sentence>, scheme: TagScheme) -> Result<Self> {
        for (si, s) in sentences.iter().enumerate() {
            validate_sentence(s, si, scheme)?;
        }
        Ok(Corpus { sentences, scheme })
    }

    pub fn empty(scheme: TagScheme) -> Self {
        Corpus {
            sentences: Vec::new(),
            scheme,
        }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    pub fn is_labeled(&self) -> bool {
        self.sentences.iter().all(|s| s.chunk_tags().is_some())
    }

    /// Chunk spans of every sentence; unlabeled sentences yield no spans.
    /// A copy with every chunk tag removed.
    pub fn unlabeled(&self) -> Corpus {
        Corpus {
            sentences: self.sentences.iter().map(Sentence::unlabeled).collect(),
            scheme: self.scheme,
        }
    }

    pub fn chunk_spans(&self) -> Vec<Vec<ChunkSpan>> {
        self.sentences
            .iter()
            .map(|s| match s.chunk_tags() {
                Some(tags) => extract_chunks(&tags, self.scheme),
                None => Vec::new(),
            })
            .collect()
    }

    /// Re-encodes every sentence under `scheme`.
    pub fn to_scheme(&self, scheme: TagScheme) -> Result<Corpus> {
        let sentences = self
            .sentences
            .iter()
            .map(|s| match s.chunk_tags() {
                Some(tags) => Ok(s.with_tags(&convert_scheme(&tags, self.scheme, scheme)?)),
                None => Ok(s.clone()),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Corpus { sentences, scheme })
    }
}

/// A typed, half-open token interval.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChunkSpan {
    pub begin: usize,
    pub end: usize,
    pub label: String,
}

impl ChunkSpan {
    pub fn new(begin: usize, end: usize, label: impl Into<String>) -> Self {
        ChunkSpan {
            begin,
            end,
            label: label.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.begin
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.begin
    }

    /// True when the two intervals share a token.
    pub fn overlaps(&self, other: &ChunkSpan) -> bool {
        self.begin < other.end && other.begin < self.end
    }

    /// True when `other` lies inside `self` (equal intervals included).
    pub fn contains(&self, other: &ChunkSpan) -> bool {
        self.begin <= other.begin && other.end <= self.end
    }

    /// Overlapping but neither contains the other.
    pub fn crosses(&self, other: &ChunkSpan) -> bool {
        self.overlaps(other) && !self.contains(other) && !other.contains(self)
    }
}

impl fmt::Display for ChunkSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{},{})", self.label, self.begin, self.end)
    }
}

/// A sentence annotated with possibly nested phrases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NestedSentence {
    pub tokens: Vec<Token>,
    pub spans: Vec<ChunkSpan>,
}

impl NestedSentence {
    pub fn sentence(&self) -> Sentence {
        Sentence::new(self.tokens.clone())
    }

    /// True if no two spans partially overlap.
    pub fn is_properly_nested(&self) -> bool {
        is_properly_nested(&self.spans)
    }
}

pub fn is_properly_nested(spans: &[ChunkSpan]) -> bool {
    spans
        .iter()
        .enumerate()
        .all(|(i, a)| spans[i + 1..].iter().all(|b| !a.crosses(b)))
}

/// Checks a tag sequence against the strict form of `scheme`.
///
/// On failure returns the offending token index and a message.
pub fn validate_tags<S: AsRef<str>>(
    tags: &[S],
    scheme: TagScheme,
) -> std::result::Result<(), (usize, String)> {
    let mut prev = ChunkTag::Outside;
    for (i, raw) in tags.iter().enumerate() {
        let raw = raw.as_ref();
        let tag =
            ChunkTag::parse(raw).ok_or_else(|| (i, format!("malformed chunk tag '{raw}'")))?;
        match (&tag, scheme) {
            (ChunkTag::Inside(x), TagScheme::Iob2) if prev.label() != Some(x.as_str()) => {
                return Err((
                    i,
                    format!("'{raw}' does not continue a chunk of type {x} under iob2"),
                ));
            }
            (ChunkTag::Begin(x), TagScheme::Iob1) if prev.label() != Some(x.as_str()) => {
                return Err((
                    i,
                    format!("'{raw}' does not follow a chunk of type {x} under iob1"),
                ));
            }
            _ => {}
        }
        prev = tag;
    }
    Ok(())
}

fn validate_sentence(s: &Sentence, index: usize, scheme: TagScheme) -> Result<()> {
    if s.is_empty() {
        return Err(Error::Validation {
            sentence: index,
            token: 0,
            message: "empty sentence".into(),
        });
    }
    for (ti, t) in s.tokens.iter().enumerate() {
        for (name, field) in [("word", &t.word), ("pos", &t.pos)] {
            if field.is_empty() || field.chars().any(char::is_whitespace) {
                return Err(Error::Validation {
                    sentence: index,
                    token: ti,
                    message: format!("invalid {name} '{field}'"),
                });
            }
        }
    }
    if let Some(tags) = s.chunk_tags() {
        validate_tags(&tags, scheme).map_err(|(token, message)| Error::Validation {
            sentence: index,
            token,
            message,
        })?;
    }
    Ok(())
}

/// Extracts chunk spans from a tag sequence.
///
/// Illegal sequences are read leniently: an `I-X` that does not continue an
/// open chunk of type X starts a new chunk, and malformed tags count as `O`.
/// Both schemes decode identically under this reading.
pub fn extract_chunks<S: AsRef<str>>(tags: &[S], _scheme: TagScheme) -> Vec<ChunkSpan> {
    let mut spans = Vec::new();
    let mut open: Option<(usize, String)> = None;
    for (i, raw) in tags.iter().enumerate() {
        match ChunkTag::parse(raw.as_ref()).unwrap_or(ChunkTag::Outside) {
            ChunkTag::Outside => {
                if let Some((b, l)) = open.take() {
                    spans.push(ChunkSpan::new(b, i, l));
                }
            }
            ChunkTag::Begin(x) => {
                if let Some((b, l)) = open.take() {
                    spans.push(ChunkSpan::new(b, i, l));
                }
                open = Some((i, x));
            }
            ChunkTag::Inside(x) => match &open {
                Some((_, l)) if *l == x => {}
                _ => {
                    if let Some((b, l)) = open.take() {
                        spans.push(ChunkSpan::new(b, i, l));
                    }
                    open = Some((i, x));
                }
            },
        }
    }
    if let Some((b, l)) = open {
        spans.push(ChunkSpan::new(b, tags.len(), l));
    }
    spans
}

/// Encodes non-overlapping spans (sorted by begin) as tags under `scheme`.
pub fn encode_chunks(spans: &[ChunkSpan], len: usize, scheme: TagScheme) -> Vec<String> {
    let mut tags = vec!["O".to_string(); len];
    let mut prev: Option<&ChunkSpan> = None;
    for span in spans {
        let adjacent_same = prev.is_some_and(|p| p.end == span.begin && p.label == span.label);
        for (i, tag) in tags.iter_mut().enumerate().take(span.end).skip(span.begin) {
            let begin = i == span.begin
                && match scheme {
                    TagScheme::Iob2 => true,
                    TagScheme::Iob1 => adjacent_same,
                };
            *tag = if begin {
                format!("B-{}", span.label)
            } else {
                format!("I-{}", span.label)
            };
        }
        prev = Some(span);
    }
    tags
}

/// Converts a valid tag sequence from one scheme to another.
pub fn convert_scheme<S: AsRef<str>>(
    tags: &[S],
    from: TagScheme,
    to: TagScheme,
) -> Result<Vec<String>> {
    validate_tags(tags, from).map_err(|(token, message)| Error::Validation {
        sentence: 0,
        token,
        message,
    })?;
    if from == to {
        return Ok(tags.iter().map(|t| t.as_ref().to_string()).collect());
    }
    Ok(encode_chunks(&extract_chunks(tags, from), tags.len(), to))
}

/// Rewrites a possibly illegal tag sequence into its valid form under `scheme`.
pub fn repair_tags<S: AsRef<str>>(tags: &[S], scheme: TagScheme) -> Vec<String> {
    encode_chunks(&extract_chunks(tags, scheme), tags.len(), scheme)
}

/// Collapses `B-X` to `I-X`, giving the two-tag inside/outside encoding.
pub fn io_encode<S: AsRef<str>>(tags: &[S]) -> Vec<String> {
    tags.iter()
        .map(|t| match ChunkTag::parse(t.as_ref()) {
            Some(ChunkTag::Begin(x)) => format!("I-{x}"),
            _ => t.as_ref().to_string(),
        })
        .collect()
}

fn split_columns(line: &str) -> Vec<&str> {
    line.split([' ', '\t']).filter(|c| !c.is_empty()).collect()
}

fn is_blank(line: &str) -> bool {
    line.chars().all(|c| c == ' ' || c == '\t' || c == '\r')
}

/// Groups non-blank lines into sentences, keeping 1-based line numbers.
fn sentence_blocks(text: &str) -> Vec<Vec<(usize, &str)>> {
    let mut blocks = Vec::new();
    let mut current = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if is_blank(line) {
            if !current.is_empty() {
                blocks.push(std::mem::take(&mut current));
            }
        } else {
            current.push((n + 1, line));
        }
    }
    if !current.is_empty() {
        blocks.push(current);
    }
    blocks
}

fn read_tokens(text: &str, columns: usize) -> Result<Vec<Sentence>> {
    if columns != 2 && columns != 3 {
        return Err(Error::Config(format!(
            "column count must be 2 or 3, got {columns}"
        )));
    }
    sentence_blocks(text)
        .into_iter()
        .map(|block| {
            let tokens = block
                .into_iter()
                .map(|(line, content)| {
                    let cols = split_columns(content);
                    if cols.len() != columns {
                        return Err(Error::Parse {
                            line,
                            message: format!("expected {columns} columns, found {}", cols.len()),
                        });
                    }
                    Ok(Token::new(
                        cols[0],
                        cols[1],
                        cols.get(2).map(|t| t.to_string()),
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Sentence::new(tokens))
        })
        .collect()
}

/// Reads a 2- or 3-column chunk file and validates it under `scheme`.
pub fn parse_conll(text: &str, scheme: TagScheme, columns: usize) -> Result<Corpus> {
    Corpus::new(read_tokens(text, columns)?, scheme)
}

/// Reads a 3-column file whose tags may be illegal (typically system output)
/// and rewrites them into their valid form under `scheme`.
pub fn parse_conll_repaired(text: &str, scheme: TagScheme) -> Result<Corpus> {
    let sentences = read_tokens(text, 3)?
        .into_iter()
        .map(|s| {
            let tags: Vec<String> = s
                .tokens
                .iter()
                .map(|t| t.chunk_tag.clone().unwrap_or_default())
                .collect();
            s.with_tags(&repair_tags(&tags, scheme))
        })
        .collect();
    Corpus::new(sentences, scheme)
}

/// Writes a corpus in canonical column format.
pub fn write_conll(corpus: &Corpus) -> String {
    let mut out = String::new();
    for s in &corpus.sentences {
        for t in &s.tokens {
            out.push_str(&t.word);
            out.push(' ');
            out.push_str(&t.pos);
            if let Some(tag) = &t.chunk_tag {
                out.push(' ');
                out.push_str(tag);
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

/// Splits a bracket cell like `(NP(NP*))` into opener labels and a closer count.
fn parse_bracket_cell(cell: &str) -> Option<(Vec<String>, usize)> {
    let star = cell.find('*')?;
    let (openers, rest) = cell.split_at(star);
    let closers = &rest[1..];
    if !closers.chars().all(|c| c == ')') {
        return None;
    }
    let mut labels = Vec::new();
    if !openers.is_empty() {
        if !openers.starts_with('(') {
            return None;
        }
        for label in openers[1..].split('(') {
            if label.is_empty() || !label.chars().all(|c| c.is_ascii_alphanumeric()) {
                return None;
            }
            labels.push(label.to_string());
        }
    }
    Some((labels, closers.len()))
}

/// Reads a nested bracket file.
pub fn parse_nested(text: &str) -> Result<Vec<NestedSentence>> {
    sentence_blocks(text)
        .into_iter()
        .enumerate()
        .map(|(si, block)| {
            let mut tokens = Vec::with_capacity(block.len());
            let mut stack: Vec<(usize, String)> = Vec::new();
            let mut spans = Vec::new();
            for (ti, (line, content)) in block.into_iter().enumerate() {
                let cols = split_columns(content);
                if cols.len() != 3 {
                    return Err(Error::Parse {
                        line,
                        message: format!("expected 3 columns, found {}", cols.len()),
                    });
                }
                let (openers, closers) =
                    parse_bracket_cell(cols[2]).ok_or_else(|| Error::Parse {
                        line,
                        message: format!("malformed bracket cell '{}'", cols[2]),
                    })?;
                stack.extend(openers.into_iter().map(|l| (ti, l)));
                for _ in 0..closers {
                    let (begin, label) = stack.pop().ok_or_else(|| Error::Bracket {
                        sentence: si,
                        message: format!("closing bracket at token {ti} has no opener"),
                    })?;
                    spans.push(ChunkSpan::new(begin, ti + 1, label));
                }
                tokens.push(Token::unlabeled(cols[0], cols[1]));
            }
            if !stack.is_empty() {
                return Err(Error::Bracket {
                    sentence: si,
                    message: format!("{} unclosed bracket(s)", stack.len()),
                });
            }
            sort_nested(&mut spans);
            Ok(NestedSentence { tokens, spans })
        })
        .collect()
}

/// Orders spans by begin, outermost first.
pub fn sort_nested(spans: &mut [ChunkSpan]) {
    spans.sort_by(|a, b| {
        a.begin
            .cmp(&b.begin)
            .then(b.end.cmp(&a.end))
            .then(a.label.cmp(&b.label))
    });
}

/// Writes nested sentences in the 3-column bracket format.
pub fn write_nested(sentences: &[NestedSentence]) -> String {
    let mut out = String::new();
    for s in sentences {
        let mut spans = s.spans.clone();
        sort_nested(&mut spans);
        for (i, t) in s.tokens.iter().enumerate() {
            out.push_str(&t.word);
            out.push(' ');
            out.push_str(&t.pos);
            out.push(' ');
            for span in spans.iter().filter(|sp| sp.begin == i) {
                out.push('(');
                out.push_str(&span.label);
            }
            out.push('*');
            for _ in spans.iter().filter(|sp| sp.end == i + 1) {
                out.push(')');
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tags(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn parse_simple_file() {
        let c = parse_conll("He PRP B-NP\nreckons VBZ B-VP\n\n", TagScheme::Iob2, 3).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.sentences[0].len(), 2);
        assert_eq!(c.sentences[0].chunk_tags().unwrap(), vec!["B-NP", "B-VP"]);
    }

    #[test]
    fn parse_empty_and_trailing_blanks() {
        assert!(parse_conll("", TagScheme::Iob2, 3).unwrap().is_empty());
        let c = parse_conll("a DT B-NP\n\n\n\nb NN B-NP\n\n\n", TagScheme::Iob2, 3).unwrap();
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn tabs_and_runs_of_spaces_are_separators() {
        let c = parse_conll("He\tPRP   B-NP\n", TagScheme::Iob2, 3).unwrap();
        assert_eq!(c.sentences[0].tokens[0].pos, "PRP");
        assert_eq!(write_conll(&c), "He PRP B-NP\n\n");
    }

    #[test]
    fn wrong_column_count_reports_line() {
        let err = parse_conll("He PRP\n", TagScheme::Iob2, 3).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err:?}");
        let err = parse_conll("a DT B-NP\n\nb NN\n", TagScheme::Iob2, 3).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn scheme_violation_reports_position() {
        let err = parse_conll("a DT B-NP\n\nb NN O\nc NN I-NP\n", TagScheme::Iob2, 3).unwrap_err();
        assert_eq!(
            err,
            Error::Validation {
                sentence: 1,
                token: 1,
                message: "'I-NP' does not continue a chunk of type NP under iob2".into()
            }
        );
        assert!(parse_conll("a DT B-NP\n", TagScheme::Iob1, 3).is_err());
        assert!(parse_conll("a DT X-NP\n", TagScheme::Iob2, 3).is_err());
    }

    #[test]
    fn two_column_files_are_unlabeled() {
        let c = parse_conll("He PRP\nreckons VBZ\n\n", TagScheme::Iob2, 2).unwrap();
        assert!(!c.is_labeled());
        assert_eq!(write_conll(&c), "He PRP\nreckons VBZ\n\n");
    }

    #[test]
    fn write_examples() {
        let text = "He PRP B-NP\nreckons VBZ B-VP\n\n";
        let c = parse_conll(text, TagScheme::Iob2, 3).unwrap();
        assert_eq!(write_conll(&c), text);
        assert_eq!(write_conll(&Corpus::empty(TagScheme::Iob2)), "");
    }

    #[test]
    fn convert_examples() {
        assert_eq!(
            convert_scheme(&tags("I-NP I-NP B-NP"), TagScheme::Iob1, TagScheme::Iob2).unwrap(),
            tags("B-NP I-NP B-NP")
        );
        assert_eq!(
            convert_scheme(&tags("B-NP I-NP O"), TagScheme::Iob2, TagScheme::Iob1).unwrap(),
            tags("I-NP I-NP O")
        );
        assert_eq!(
            convert_scheme(&tags("B-NP B-NP I-VP"), TagScheme::Iob1, TagScheme::Iob1),
            Err(Error::Validation {
                sentence: 0,
                token: 0,
                message: "'B-NP' does not follow a chunk of type NP under iob1".into()
            })
        );
        let same = tags("I-NP B-NP O I-VP");
        assert_eq!(
            convert_scheme(&same, TagScheme::Iob1, TagScheme::Iob1).unwrap(),
            same
        );
    }

    #[test]
    fn extract_examples() {
        assert_eq!(
            extract_chunks(&tags("B-NP I-NP O B-VP"), TagScheme::Iob2),
            vec![ChunkSpan::new(0, 2, "NP"), ChunkSpan::new(3, 4, "VP")]
        );
        assert!(extract_chunks(&tags("O O"), TagScheme::Iob2).is_empty());
        assert_eq!(
            extract_chunks(&tags("I-NP I-NP"), TagScheme::Iob2),
            vec![ChunkSpan::new(0, 2, "NP")]
        );
        assert_eq!(
            extract_chunks(&tags("B-NP I-VP I-VP B-VP"), TagScheme::Iob2),
            vec![
                ChunkSpan::new(0, 1, "NP"),
                ChunkSpan::new(1, 3, "VP"),
                ChunkSpan::new(3, 4, "VP")
            ]
        );
    }

    #[test]
    fn io_encoding_drops_begin_markers() {
        assert_eq!(
            io_encode(&tags("B-NP I-NP O B-VP")),
            tags("I-NP I-NP O I-VP")
        );
    }

    #[test]
    fn nested_ounce_example() {
        let text = "$ $ (NP(NP*\n366.50 CD *)\nan DT (NP*\nounce NN *))\n\n";
        let parsed = parse_nested(text).unwrap();
        assert_eq!(parsed.len(), 1);
        let mut got = parsed[0].spans.clone();
        got.sort();
        let mut want = vec![
            ChunkSpan::new(0, 4, "NP"),
            ChunkSpan::new(0, 2, "NP"),
            ChunkSpan::new(2, 4, "NP"),
        ];
        want.sort();
        assert_eq!(got, want);
        assert!(parsed[0].is_properly_nested());
        assert_eq!(write_nested(&parsed), text);
    }

    #[test]
    fn nested_without_brackets() {
        let parsed = parse_nested("a DT *\nb NN *\n").unwrap();
        assert!(parsed[0].spans.is_empty());
    }

    #[test]
    fn nested_errors() {
        assert!(matches!(
            parse_nested("a DT (NP*\n"),
            Err(Error::Bracket { sentence: 0, .. })
        ));
        assert!(matches!(
            parse_nested("a DT *\n\nb NN *)\n"),
            Err(Error::Bracket { sentence: 1, .. })
        ));
        assert!(matches!(
            parse_nested("a DT (NP\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_nested("a DT *)(\n"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn repaired_parse_accepts_system_output() {
        let c = parse_conll_repaired("a DT I-NP\nb NN I-NP\nc VB I-VP\n", TagScheme::Iob2).unwrap();
        assert_eq!(
            c.sentences[0].chunk_tags().unwrap(),
            vec!["B-NP", "I-NP", "B-VP"]
        );
    }
}
