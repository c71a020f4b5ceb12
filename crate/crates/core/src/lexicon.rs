//! Lexicon entry types shared by both extraction stages.

use std::fmt;

/// Which pass produced an entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    /// Warp-cost matching of high-frequency words.
    Primary,
    /// Mutual-information matching of segment vectors.
    Secondary,
}

impl Stage {
    /// Name of the score column for entries of this stage.
    pub fn score_type(self) -> &'static str {
        match self {
            Stage::Primary => "dtw_norm",
            Stage::Secondary => "mi",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stage::Primary => f.write_str("primary"),
            Stage::Secondary => f.write_str("secondary"),
        }
    }
}

impl std::str::FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "primary" => Ok(Stage::Primary),
            "secondary" => Ok(Stage::Secondary),
            other => Err(format!("unknown stage {other:?}")),
        }
    }
}

/// One ranked translation candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub target_word: String,
    /// Normalized warp cost (primary, ascending is better) or mutual
    /// information in bits (secondary, descending is better).
    pub score: f64,
    /// 1-based rank within the entry.
    pub rank: usize,
    /// Confidence score, present on secondary entries only.
    pub t: Option<f64>,
}

/// All candidates proposed for one source word.
#[derive(Debug, Clone, PartialEq)]
pub struct LexiconEntry {
    /// Source word in its original casing.
    pub source_word: String,
    pub stage: Stage,
    /// Ranked candidates, ranks contiguous from 1.
    pub candidates: Vec<Candidate>,
}

impl LexiconEntry {
    /// Case-folded form used for type identity.
    pub fn source_key(&self) -> String {
        self.source_word.to_lowercase()
    }
}
