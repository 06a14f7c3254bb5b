use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::IntPoly;

/// Graph quantities that index the counts `|W_k(a, s, l, b)|`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WordClassKey {
    /// Half-length of the word.
    pub k: u32,
    /// Number of distinct edges.
    pub a: u32,
    /// Number of distinct vertices.
    pub s: u32,
    /// Number of `J` (column) vertices.
    pub l: u32,
    /// Edge multiplicities, sorted non-increasing.
    pub b: Vec<u32>,
}

impl WordClassKey {
    /// Key of a tree word (`s = a + 1`).
    pub fn tree(k: u32, l: u32, mut b: Vec<u32>) -> Self {
        b.sort_unstable_by(|x, y| y.cmp(x));
        Self {
            k,
            a: b.len() as u32,
            s: b.len() as u32 + 1,
            l,
            b,
        }
    }

    pub fn is_tree(&self) -> bool {
        self.s == self.a + 1
    }

    /// `true` when every multiplicity is 2 (a contour walk of a planar tree).
    pub fn all_twos(&self) -> bool {
        self.b.iter().all(|&m| m == 2)
    }

    /// `true` for `b = (4, 2, ..., 2)`.
    pub fn one_quadruple(&self) -> bool {
        self.b.first() == Some(&4) && self.b[1..].iter().all(|&m| m == 2)
    }

    /// `sum_i (b_i / 2 - 1)`: how far the word is from a plain contour walk.
    /// Equals `k - a` for tree words.
    pub fn excess(&self) -> u32 {
        self.b.iter().map(|&m| m / 2 - 1).sum()
    }
}

/// Exact counts of canonical tree words of half-length `k`, by class key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountTable {
    k: u32,
    entries: BTreeMap<WordClassKey, BigUint>,
}

/// Upper bound `(2k)^k / (k + 1) * binomial(2k, k)` on any single count.
pub fn cardinality_bound(k: u32) -> BigUint {
    let k = k as usize;
    let pow = BigUint::from(2 * k).pow(k as u32);
    let binom = binomial(2 * k, k);
    pow * binom / BigUint::from(k + 1)
}

fn binomial(n: usize, r: usize) -> BigUint {
    (0..r).fold(BigUint::from(1u32), |acc, i| acc * BigUint::from(n - i) / BigUint::from(i + 1))
}

impl CountTable {
    /// Builds a table and checks its structural invariants.
    pub fn new(k: u32, entries: BTreeMap<WordClassKey, BigUint>) -> Result<Self> {
        let table = Self { k, entries };
        table.validate()?;
        Ok(table)
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn entries(&self) -> &BTreeMap<WordClassKey, BigUint> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &WordClassKey) -> BigUint {
        self.entries.get(key).cloned().unwrap_or_default()
    }

    /// Total number of canonical words in the table.
    pub fn total(&self) -> BigUint {
        self.entries.values().sum()
    }

    /// Tree shape, parity, multiplicity sum and cardinality bound.
    pub fn validate(&self) -> Result<()> {
        let bound = cardinality_bound(self.k);
        for (key, count) in &self.entries {
            let fail = |why: &str| Err(Error::Numeric(format!("count table k={}: {why} at {key:?}", self.k)));
            if key.k != self.k {
                return fail("mismatched k");
            }
            if !key.is_tree() {
                return fail("non-tree key");
            }
            if key.a as usize != key.b.len() || key.l == 0 || key.l > key.a {
                return fail("inconsistent a/l");
            }
            if key.b.iter().sum::<u32>() != 2 * self.k {
                return fail("multiplicities do not sum to 2k");
            }
            if key.b.iter().any(|&m| m < 2 || m % 2 != 0) {
                return fail("odd or sub-2 multiplicity");
            }
            if key.b.windows(2).any(|w| w[0] < w[1]) {
                return fail("multiplicities not sorted");
            }
            if count.is_zero() || *count > bound {
                return fail("count outside (0, bound]");
            }
        }
        Ok(())
    }

    /// `sum_l alpha^l * count` over the entries accepted by `filter`.
    pub fn alpha_polynomial(&self, filter: impl Fn(&WordClassKey) -> bool) -> IntPoly {
        let mut acc = IntPoly::zero();
        for (key, count) in self.entries.iter().filter(|(k, _)| filter(k)) {
            acc += &IntPoly::monomial(BigInt::from(count.clone()), key.l as usize);
        }
        acc
    }

    /// Counts of the contour words `W_k(k, k+1, l, (2, ..., 2))`, keyed by `l`.
    pub fn contour_counts(&self) -> BTreeMap<u32, BigUint> {
        self.counts_by_l(WordClassKey::all_twos)
    }

    /// Counts of `W_k(k-1, k, l, (4, 2, ..., 2))`, keyed by `l`.
    pub fn quadruple_counts(&self) -> BTreeMap<u32, BigUint> {
        self.counts_by_l(WordClassKey::one_quadruple)
    }

    fn counts_by_l(&self, filter: impl Fn(&WordClassKey) -> bool) -> BTreeMap<u32, BigUint> {
        let mut out = BTreeMap::new();
        for (key, count) in self.entries.iter().filter(|(k, _)| filter(k)) {
            *out.entry(key.l).or_insert_with(BigUint::zero) += count;
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&TableFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TableFile = serde_json::from_str(text)?;
        file.try_into()
    }
}

/// On-disk layout: `{ "k": int, "entries": [ { "a", "l", "b", "count" } ] }`
/// with the count written as a decimal string.
#[derive(Serialize, Deserialize)]
struct TableFile {
    k: u32,
    entries: Vec<TableFileEntry>,
}

#[derive(Serialize, Deserialize)]
struct TableFileEntry {
    a: u32,
    l: u32,
    b: Vec<u32>,
    count: String,
}

impl From<&CountTable> for TableFile {
    fn from(t: &CountTable) -> Self {
        Self {
            k: t.k,
            entries: t
                .entries
                .iter()
                .map(|(key, count)| TableFileEntry {
                    a: key.a,
                    l: key.l,
                    b: key.b.clone(),
                    count: count.to_string(),
                })
                .collect(),
        }
    }
}

impl TryFrom<TableFile> for CountTable {
    type Error = Error;

    fn try_from(file: TableFile) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for e in file.entries {
            if e.a as usize != e.b.len() {
                return Err(Error::Cache(format!("entry a={} but |b|={}", e.a, e.b.len())));
            }
            let count: BigUint = e
                .count
                .parse()
                .map_err(|_| Error::Cache(format!("bad count string {:?}", e.count)))?;
            let key = WordClassKey::tree(file.k, e.l, e.b);
            if entries.insert(key, count).is_some() {
                return Err(Error::Cache("duplicate entry".into()));
            }
        }
        CountTable::new(file.k, entries)
    }
}
