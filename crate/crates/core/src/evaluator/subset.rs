use std::fmt;

use serde::{Deserialize, Serialize};

use super::EvalError;

/// A set of channel indices over a universe of `universe_size` channels,
/// kept sorted so equal sets compare and hash equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawSubset")]
pub struct ChannelSubset {
    members: Vec<usize>,
    universe_size: usize,
}

#[derive(Deserialize)]
struct RawSubset {
    members: Vec<usize>,
    universe_size: usize,
}

impl TryFrom<RawSubset> for ChannelSubset {
    type Error = EvalError;

    fn try_from(raw: RawSubset) -> Result<Self, Self::Error> {
        ChannelSubset::new(raw.members, raw.universe_size)
    }
}

impl ChannelSubset {
    /// Canonicalizes `members` (any order). Duplicates and out-of-range
    /// indices are rejected.
    pub fn new<I>(members: I, universe_size: usize) -> Result<Self, EvalError>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        if let Some(&bad) = members.iter().find(|&&m| m >= universe_size) {
            return Err(EvalError::InvalidSubset(format!(
                "channel {bad} out of range for {universe_size} channels"
            )));
        }
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(EvalError::InvalidSubset(format!(
                "duplicate channel in {members:?}"
            )));
        }
        Ok(Self {
            members,
            universe_size,
        })
    }

    pub fn empty(universe_size: usize) -> Self {
        Self {
            members: Vec::new(),
            universe_size,
        }
    }

    pub fn full(universe_size: usize) -> Self {
        Self {
            members: (0..universe_size).collect(),
            universe_size,
        }
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        Self {
            members: mask
                .iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(i, _)| i)
                .collect(),
            universe_size: mask.len(),
        }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn universe_size(&self) -> usize {
        self.universe_size
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, channel: usize) -> bool {
        self.members.binary_search(&channel).is_ok()
    }

    pub fn with(&self, channel: usize) -> Result<Self, EvalError> {
        Self::new(
            self.members.iter().copied().chain(std::iter::once(channel)),
            self.universe_size,
        )
    }

    pub fn to_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.universe_size];
        for &m in &self.members {
            mask[m] = true;
        }
        mask
    }

    pub fn intersection_len(&self, other: &ChannelSubset) -> usize {
        self.members.iter().filter(|m| other.contains(**m)).count()
    }

    pub fn union_len(&self, other: &ChannelSubset) -> usize {
        self.len() + other.len() - self.intersection_len(other)
    }
}

impl fmt::Display for ChannelSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, m) in self.members.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "}}/{}", self.universe_size)
    }
}
