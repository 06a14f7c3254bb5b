//! Depth-first generation of canonical closed walks on trees grown on the fly.
//!
//! From the current vertex the walk either steps to an existing neighbour
//! (parent or an existing child) or creates a fresh child whose label is the
//! next unused index on its side. Labels are therefore issued in
//! first-appearance order and every generated word is already canonical;
//! distinct branches produce distinct words, so no deduplication is needed.
//! A branch is cut as soon as the remaining steps cannot bring the walk back
//! to the root, or when the multiplicity excess exceeds the caller's budget.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;

use super::{CanonicalWord, CountTable, Letter, WordClassKey};
use crate::error::{Error, Result};

/// Default upper limit on the half-length `k`.
pub const DEFAULT_GUARD: u32 = 10;

const NO_PARENT: usize = usize::MAX;

struct Walker {
    parent: Vec<usize>,
    depth: Vec<u32>,
    label: Vec<Letter>,
    children: Vec<Vec<usize>>,
    /// Traversals of the edge from each vertex to its parent.
    up_mult: Vec<u32>,
    next_index: [u32; 2],
    excess: u32,
    max_excess: u32,
    path: Vec<Letter>,
}

/// What the walker reports at each completed word.
trait Sink {
    fn word(&mut self, w: &Walker);
}

struct Collect(Vec<CanonicalWord>);

impl Sink for Collect {
    fn word(&mut self, w: &Walker) {
        self.0.push(CanonicalWord::from_canonical_letters(w.path.clone()));
    }
}

struct Tally {
    k: u32,
    counts: HashMap<WordClassKey, u64>,
    scratch: Vec<u32>,
}

impl Sink for Tally {
    fn word(&mut self, w: &Walker) {
        self.scratch.clear();
        self.scratch.extend_from_slice(&w.up_mult[1..]);
        self.scratch.sort_unstable_by(|x, y| y.cmp(x));
        let a = self.scratch.len() as u32;
        let key = WordClassKey {
            k: self.k,
            a,
            s: a + 1,
            l: w.next_index[1],
            b: self.scratch.clone(),
        };
        let slot = self.counts.entry(key).or_default();
        *slot = slot.checked_add(1).expect("word count overflowed u64");
    }
}

impl Walker {
    fn new(max_excess: u32) -> Self {
        Self {
            parent: vec![NO_PARENT],
            depth: vec![0],
            label: vec![Letter::i(1)],
            children: vec![Vec::new()],
            up_mult: vec![0],
            next_index: [1, 0],
            excess: 0,
            max_excess,
            path: vec![Letter::i(1)],
        }
    }

    /// Records a traversal of the edge above `child`. Returns `false` when the
    /// excess budget is blown (state is left updated; caller must undo).
    fn cross(&mut self, child: usize) -> bool {
        self.up_mult[child] += 1;
        let m = self.up_mult[child];
        // Reopening an edge already used twice forces two more traversals.
        if m >= 3 && m % 2 == 1 {
            self.excess += 1;
        }
        self.excess <= self.max_excess
    }

    fn uncross(&mut self, child: usize) {
        let m = self.up_mult[child];
        if m >= 3 && m % 2 == 1 {
            self.excess -= 1;
        }
        self.up_mult[child] -= 1;
    }

    fn walk<S: Sink>(&mut self, cur: usize, remaining: u32, sink: &mut S) {
        if remaining == 0 {
            if cur == 0 {
                sink.word(self);
            }
            return;
        }
        let after = remaining - 1;

        // Parent first: its index is smaller than any child's on that side.
        let p = self.parent[cur];
        if p != NO_PARENT && self.depth[p] <= after {
            self.step(p, cur, after, sink);
        }
        for ci in 0..self.children[cur].len() {
            let c = self.children[cur][ci];
            if self.depth[c] <= after {
                self.step(c, c, after, sink);
            }
        }
        if self.depth[cur] < after {
            let side = self.label[cur].side.other();
            let slot = side.slot();
            self.next_index[slot] += 1;
            let v = self.parent.len();
            self.parent.push(cur);
            self.depth.push(self.depth[cur] + 1);
            self.label.push(Letter {
                side,
                index: self.next_index[slot],
            });
            self.children.push(Vec::new());
            self.up_mult.push(0);
            self.children[cur].push(v);

            self.step(v, v, after, sink);

            self.children[cur].pop();
            self.up_mult.pop();
            self.children.pop();
            self.label.pop();
            self.depth.pop();
            self.parent.pop();
            self.next_index[slot] -= 1;
        }
    }

    fn step<S: Sink>(&mut self, to: usize, edge_child: usize, after: u32, sink: &mut S) {
        if self.cross(edge_child) {
            self.path.push(self.label[to]);
            self.walk(to, after, sink);
            self.path.pop();
        }
        self.uncross(edge_child);
    }
}

fn check_guard(k: u32, guard: u32) -> Result<()> {
    if k == 0 {
        return Err(Error::Domain("half-length k must be at least 1".into()));
    }
    if k > guard {
        return Err(Error::ResourceLimit { k, guard });
    }
    Ok(())
}

/// All canonical closed tree words of half-length `k`, in lexicographic order.
pub fn enumerate_tree_words(k: u32, guard: u32) -> Result<Vec<CanonicalWord>> {
    check_guard(k, guard)?;
    let mut sink = Collect(Vec::new());
    Walker::new(u32::MAX).walk(0, 2 * k, &mut sink);
    Ok(sink.0)
}

/// Counts restricted to words whose total excess `sum (b_i/2 - 1)` is at most
/// `max_excess`. `max_excess = 0` keeps only contour walks, `1` adds the
/// single-quadruple-edge words, and `u32::MAX` gives the full table.
pub fn count_table_with_excess(k: u32, guard: u32, max_excess: u32) -> Result<CountTable> {
    check_guard(k, guard)?;
    let mut sink = Tally {
        k,
        counts: HashMap::new(),
        scratch: Vec::new(),
    };
    Walker::new(max_excess).walk(0, 2 * k, &mut sink);
    let entries: BTreeMap<WordClassKey, BigUint> = sink
        .counts
        .into_iter()
        .map(|(key, c)| (key, BigUint::from(c)))
        .collect();
    CountTable::new(k, entries)
}

/// Exact table of `|W_k(a, a+1, l, b)|` for every `(a, l, b)`.
pub fn count_table(k: u32, guard: u32) -> Result<CountTable> {
    count_table_with_excess(k, guard, u32::MAX)
}

/// `|W_k(k-1, k, l, (4, 2, ..., 2))|` for each `l`.
pub fn count_quadruple_words(k: u32, guard: u32) -> Result<BTreeMap<u32, BigUint>> {
    if k < 2 {
        return Err(Error::Domain(format!(
            "no word of half-length {k} has a quadruple edge"
        )));
    }
    Ok(count_table_with_excess(k, guard, 1)?.quadruple_counts())
}
