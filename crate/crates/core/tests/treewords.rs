use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use proptest::prelude::*;
use wishart_core::treewords::*;

/// Alternating closed word `i j i j ... i` from index lists.
fn word(is: &[u32], js: &[u32]) -> Vec<Letter> {
    let mut out = Vec::with_capacity(2 * js.len() + 1);
    for (&i, &j) in is.iter().zip(js) {
        out.push(Letter::i(i));
        out.push(Letter::j(j));
    }
    out.push(Letter::i(is[0]));
    out
}

/// `(a, s, l, sorted multiplicities)` computed from the raw letters.
fn graph_of(w: &[Letter]) -> (u32, u32, u32, Vec<u32>) {
    let mut edges: BTreeMap<(u32, u32), u32> = BTreeMap::new();
    for p in w.windows(2) {
        let e = if p[0].side == Side::I { (p[0].index, p[1].index) } else { (p[1].index, p[0].index) };
        *edges.entry(e).or_default() += 1;
    }
    let rows: BTreeSet<u32> = w.iter().filter(|l| l.side == Side::I).map(|l| l.index).collect();
    let cols: BTreeSet<u32> = w.iter().filter(|l| l.side == Side::J).map(|l| l.index).collect();
    let mut b: Vec<u32> = edges.values().copied().collect();
    b.sort_unstable_by(|x, y| y.cmp(x));
    (b.len() as u32, (rows.len() + cols.len()) as u32, cols.len() as u32, b)
}

fn raw_word() -> impl Strategy<Value = Vec<Letter>> {
    (1usize..=6).prop_flat_map(|k| {
        (prop::collection::vec(1u32..=5, k), prop::collection::vec(1u32..=5, k)).prop_map(|(is, js)| word(&is, &js))
    })
}

proptest! {
    #[test]
    fn canonical_form_ignores_relabelling(w in raw_word(), shift_i in 1u32..50, shift_j in 1u32..50) {
        // Any injective relabelling on each side, here x -> 7x + shift.
        let moved: Vec<Letter> = w
            .iter()
            .map(|l| match l.side {
                Side::I => Letter::i(7 * l.index + shift_i),
                Side::J => Letter::j(7 * l.index + shift_j),
            })
            .collect();
        prop_assert_eq!(canonicalize(&w).unwrap(), canonicalize(&moved).unwrap());
    }

    #[test]
    fn canonicalize_is_idempotent(w in raw_word()) {
        let c = canonicalize(&w).unwrap();
        prop_assert_eq!(canonicalize(c.letters()).unwrap(), c);
    }

    #[test]
    fn classification_matches_the_graph(w in raw_word()) {
        let key = classify(&canonicalize(&w).unwrap());
        let (a, s, l, b) = graph_of(&w);
        prop_assert_eq!((key.a, key.s, key.l, &key.b), (a, s, l, &b));
        prop_assert_eq!(key.b.iter().sum::<u32>(), 2 * key.k);
        // A connected graph has at least s - 1 edges.
        prop_assert!(key.s <= key.a + 1);
    }
}

#[test]
fn table_matches_brute_force() {
    for k in 1..=4u32 {
        let top = k + 1;
        let mut seen = BTreeSet::new();
        let total = (top as u64).pow(2 * k);
        for code in 0..total {
            let mut c = code;
            let mut digit = || {
                let d = (c % top as u64) as u32 + 1;
                c /= top as u64;
                d
            };
            let is: Vec<u32> = (0..k).map(|_| digit()).collect();
            let js: Vec<u32> = (0..k).map(|_| digit()).collect();
            let w = word(&is, &js);
            let (a, s, _, _) = graph_of(&w);
            if s == a + 1 {
                seen.insert(canonicalize(&w).unwrap());
            }
        }
        let mut expected: BTreeMap<(u32, u32, u32, Vec<u32>), u32> = BTreeMap::new();
        for cw in &seen {
            *expected.entry(graph_of(cw.letters())).or_default() += 1;
        }
        let table = count_table(k, DEFAULT_GUARD).unwrap();
        let got: BTreeMap<(u32, u32, u32, Vec<u32>), u32> = table
            .entries()
            .iter()
            .map(|(key, n)| ((key.a, key.s, key.l, key.b.clone()), u32::try_from(n.clone()).unwrap()))
            .collect();
        assert_eq!(got, expected, "k={k}");
        assert_eq!(table.total(), BigUint::from(seen.len()));
    }
}

#[test]
fn contour_counts_are_narayana_numbers() {
    // Planar trees with k edges and l column vertices: N(k, l) = C(k,l) C(k,l-1) / k.
    let binom = |n: u64, r: u64| (0..r).fold(1u64, |acc, i| acc * (n - i) / (i + 1));
    for k in 1..=8u32 {
        let t = count_table(k, DEFAULT_GUARD).unwrap();
        for (l, count) in t.contour_counts() {
            let (kk, ll) = (k as u64, l as u64);
            assert_eq!(count, BigUint::from(binom(kk, ll) * binom(kk, ll - 1) / kk), "k={k} l={l}");
        }
    }
}

#[test]
fn json_round_trip_and_cache_files() {
    let dir = tempfile::tempdir().unwrap();
    let cache = TableCache::with_dir(dir.path(), DEFAULT_GUARD);
    let t = cache.count_table(5).unwrap();
    assert!(TableCache::file_for(dir.path(), 5).exists());
    assert_eq!(CountTable::from_json(&t.to_json().unwrap()).unwrap(), *t);
    let fresh = TableCache::with_dir(dir.path(), DEFAULT_GUARD);
    assert_eq!(*fresh.count_table(5).unwrap(), *t);
    assert!(matches!(cache.count_table(11), Err(wishart_core::Error::ResourceLimit { k: 11, guard: 10 })));
}
