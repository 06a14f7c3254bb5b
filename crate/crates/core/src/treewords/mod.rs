//! Closed words on bipartite trees.
//!
//! A word `i1 j1 i2 j2 ... jk i1` alternates row letters (side `I`) and column
//! letters (side `J`). Two words are equivalent when one is obtained from the
//! other by relabeling rows and columns independently; each class has a unique
//! representative in which indices on each side first appear in the order
//! 1, 2, 3, ...
//!
//! The moment formula only needs words whose letter graph is a tree. Those are
//! generated directly in canonical form by [`enumerate_tree_words`] and
//! tallied by [`count_table`].

mod cache;
mod enumerate;
mod table;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cache::{CountTableSource, TableCache, COUNT_TABLE_SCHEMA_VERSION};
pub use enumerate::{
    count_quadruple_words, count_table, count_table_with_excess, enumerate_tree_words,
    DEFAULT_GUARD,
};
pub use table::{CountTable, WordClassKey};

/// Which side of the bipartite graph a letter lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    /// Row index (`i` letters).
    I,
    /// Column index (`j` letters).
    J,
}

impl Side {
    pub fn other(self) -> Self {
        match self {
            Side::I => Side::J,
            Side::J => Side::I,
        }
    }

    fn slot(self) -> usize {
        match self {
            Side::I => 0,
            Side::J => 1,
        }
    }
}

/// A letter: a side plus a positive index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub side: Side,
    pub index: u32,
}

impl Letter {
    pub const fn i(index: u32) -> Self {
        Self { side: Side::I, index }
    }

    pub const fn j(index: u32) -> Self {
        Self { side: Side::J, index }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.side {
            Side::I => write!(f, "i{}", self.index),
            Side::J => write!(f, "j{}", self.index),
        }
    }
}

/// Canonical representative of an equivalence class of closed words.
///
/// Invariants: odd length `2k + 1 >= 3`, sides alternate starting with `I`,
/// first letter equals last letter, and indices on each side appear for the
/// first time in increasing order starting at 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalWord {
    letters: Vec<Letter>,
}

impl CanonicalWord {
    /// Builds a word from letters already in canonical form. Used by the
    /// enumerator, which issues labels in first-appearance order.
    pub(crate) fn from_canonical_letters(letters: Vec<Letter>) -> Self {
        debug_assert!(validate_shape(&letters).is_ok());
        Self { letters }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// Half-length: the number of `J` positions.
    pub fn k(&self) -> u32 {
        (self.letters.len() / 2) as u32
    }

    /// Row indices `i1..ik` and column indices `j1..jk` as plain integers.
    pub fn index_sequence(&self) -> Vec<u32> {
        self.letters.iter().map(|l| l.index).collect()
    }
}

impl fmt::Display for CanonicalWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (pos, l) in self.letters.iter().enumerate() {
            if pos > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

fn validate_shape(raw: &[Letter]) -> Result<()> {
    if raw.len() < 3 || raw.len().is_multiple_of(2) {
        return Err(Error::MalformedWord(format!(
            "length {} is not odd and at least 3",
            raw.len()
        )));
    }
    for (pos, l) in raw.iter().enumerate() {
        let expected = if pos % 2 == 0 { Side::I } else { Side::J };
        if l.side != expected {
            return Err(Error::MalformedWord(format!(
                "letter {pos} ({l}) breaks the I/J alternation"
            )));
        }
        if l.index == 0 {
            return Err(Error::MalformedWord(format!("letter {pos} has index 0")));
        }
    }
    if raw.first() != raw.last() {
        return Err(Error::MalformedWord(format!(
            "word is not closed: starts at {} and ends at {}",
            raw[0],
            raw[raw.len() - 1]
        )));
    }
    Ok(())
}

/// Relabels a closed word into its canonical first-appearance form.
///
/// Two raw words map to the same [`CanonicalWord`] exactly when they differ by
/// independent permutations of row and column indices.
pub fn canonicalize(raw: &[Letter]) -> Result<CanonicalWord> {
    validate_shape(raw)?;
    let mut relabel: [HashMap<u32, u32>; 2] = [HashMap::new(), HashMap::new()];
    let letters = raw
        .iter()
        .map(|l| {
            let map = &mut relabel[l.side.slot()];
            let next = map.len() as u32 + 1;
            let index = *map.entry(l.index).or_insert(next);
            Letter { side: l.side, index }
        })
        .collect();
    Ok(CanonicalWord { letters })
}

/// Graph quantities of a word: edge count, vertex count, `J`-vertex count and
/// the sorted edge multiplicities.
pub fn classify(word: &CanonicalWord) -> WordClassKey {
    let mut mult: HashMap<(u32, u32), u32> = HashMap::new();
    let mut max_index = [0u32; 2];
    for pair in word.letters.windows(2) {
        let (row, col) = match pair[0].side {
            Side::I => (pair[0].index, pair[1].index),
            Side::J => (pair[1].index, pair[0].index),
        };
        *mult.entry((row, col)).or_default() += 1;
    }
    for l in &word.letters {
        let slot = &mut max_index[l.side.slot()];
        *slot = (*slot).max(l.index);
    }
    let mut b: Vec<u32> = mult.into_values().collect();
    b.sort_unstable_by(|x, y| y.cmp(x));
    // Canonical labels are contiguous, so the largest index is the count.
    let l = max_index[Side::J.slot()];
    WordClassKey {
        k: word.k(),
        a: b.len() as u32,
        s: max_index[0] + max_index[1],
        l,
        b,
    }
}
