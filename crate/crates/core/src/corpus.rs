//! Corpus loading and per-word position indexing.
//!
//! Both halves of a parallel corpus are plain whitespace-tokenized text.
//! The source half carries `surface/TAG` part-of-speech annotations; the
//! target half is bare tokens. Loading assigns each token its offset in
//! reading order, and [`noun_positions`] turns one side into per-word
//! position vectors, optionally restricted to a tag set.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use crate::error::{Error, Result};

/// How tokens encode their part-of-speech tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenFormat {
    /// Bare tokens; every token gets an empty tag.
    Bare,
    /// `surface/TAG`, split at the last slash. Tokens without a slash get
    /// an empty tag.
    SlashTag,
}

/// One token of a corpus side: surface form, POS tag and token offset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedToken {
    pub surface: String,
    pub tag: String,
    pub offset: usize,
}

impl TaggedToken {
    /// Renders the token back into its input form.
    pub fn to_text(&self) -> String {
        if self.tag.is_empty() {
            self.surface.clone()
        } else {
            format!("{}/{}", self.surface, self.tag)
        }
    }
}

/// One half of the parallel corpus, immutable after load.
#[derive(Debug, Clone, Default)]
pub struct CorpusSide {
    tokens: Vec<TaggedToken>,
}

impl CorpusSide {
    pub fn new(tokens: Vec<TaggedToken>) -> Self {
        CorpusSide { tokens }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[TaggedToken] {
        &self.tokens
    }

    /// Token sequence rendered back to text, one token per whitespace gap.
    pub fn to_text(&self) -> String {
        let parts: Vec<String> = self.tokens.iter().map(TaggedToken::to_text).collect();
        parts.join(" ")
    }
}

/// Parses whitespace-separated tokens from a stream into a [`CorpusSide`].
///
/// Offsets are assigned in reading order. With [`TokenFormat::SlashTag`] a
/// token whose surface would be empty (for example `/NNP`) is a parse error
/// reporting the token index.
pub fn load_tagged_text<R: Read>(reader: R, format: TokenFormat) -> Result<CorpusSide> {
    let mut text = String::new();
    let mut reader = BufReader::new(reader);
    reader
        .read_to_string(&mut text)
        .map_err(|e| Error::io("<stream>", e))?;
    parse_tokens(&text, format)
}

/// Loads one corpus side from a file, reporting the path on IO failure.
pub fn load_tagged_file(path: &Path, format: TokenFormat) -> Result<CorpusSide> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut text = String::new();
    BufReader::new(file)
        .read_to_string(&mut text)
        .map_err(|e| Error::io(path, e))?;
    parse_tokens(&text, format)
}

fn parse_tokens(text: &str, format: TokenFormat) -> Result<CorpusSide> {
    let mut tokens = Vec::new();
    for (index, raw) in text.split_whitespace().enumerate() {
        let (surface, tag) = match format {
            TokenFormat::Bare => (raw, ""),
            TokenFormat::SlashTag => match raw.rfind('/') {
                Some(pos) => (&raw[..pos], &raw[pos + 1..]),
                None => (raw, ""),
            },
        };
        if surface.is_empty() {
            return Err(Error::MalformedToken {
                index,
                token: raw.to_string(),
            });
        }
        tokens.push(TaggedToken {
            surface: surface.to_string(),
            tag: tag.to_string(),
            offset: index,
        });
    }
    Ok(CorpusSide::new(tokens))
}

/// Which tokens of a side participate in position indexing.
#[derive(Debug, Clone)]
pub enum TagFilter {
    /// Keep every token regardless of tag (the target side is scored
    /// against all of its words).
    Any,
    /// Keep tokens whose tag is in the set, exact match.
    Tags(std::collections::BTreeSet<String>),
}

impl TagFilter {
    pub fn matches(&self, tag: &str) -> bool {
        match self {
            TagFilter::Any => true,
            TagFilter::Tags(set) => set.contains(tag),
        }
    }
}

/// Sorted occurrence offsets of one word type in one text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionVector {
    /// Type identity; case-folded when the side was indexed with folding.
    pub word: String,
    /// Original surface form of the first occurrence, kept for output.
    pub display: String,
    /// Strictly increasing token offsets.
    pub positions: Vec<usize>,
}

impl PositionVector {
    pub fn count(&self) -> usize {
        self.positions.len()
    }

    pub fn first(&self) -> usize {
        self.positions[0]
    }
}

/// Indexes one corpus side into per-word position vectors.
///
/// Tokens whose tag fails `filter` are skipped. With `fold_case` the word
/// key is lowercased for type identity while the first-seen surface is
/// kept as the display form.
pub fn noun_positions(
    side: &CorpusSide,
    filter: &TagFilter,
    fold_case: bool,
) -> BTreeMap<String, PositionVector> {
    let mut map: BTreeMap<String, PositionVector> = BTreeMap::new();
    for token in side.tokens() {
        if !filter.matches(&token.tag) {
            continue;
        }
        let key = if fold_case {
            token.surface.to_lowercase()
        } else {
            token.surface.clone()
        };
        map.entry(key.clone())
            .or_insert_with(|| PositionVector {
                word: key,
                display: token.surface.clone(),
                positions: Vec::new(),
            })
            .positions
            .push(token.offset);
    }
    map
}
