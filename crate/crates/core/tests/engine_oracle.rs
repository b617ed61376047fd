//! Semi-naive closure and query evaluation against brute-force oracles.

#[path = "support/oracle.rs"]
mod oracle;

use std::collections::BTreeSet;

use cnldoc::engine::FactBase;
use cnldoc::logic::Atom;
use oracle::{discrepancies, random_instance, statements, INSTANCES};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn closure_and_queries_match_oracles() {
    let (closures, queries) = discrepancies(INSTANCES);
    assert!(closures.is_empty(), "seeds with closure discrepancies: {closures:?}");
    assert!(queries.is_empty(), "{} query discrepancies: {queries:?}", queries.len());
}

#[test]
fn incremental_insertion_matches_batch() {
    for seed in 0..50 {
        let inst = random_instance(seed);
        let batch: BTreeSet<Atom> = FactBase::from_statements(statements(&inst)).closure().into_iter().collect();
        let mut items = statements(&inst);
        items.shuffle(&mut ChaCha8Rng::seed_from_u64(seed + 77));
        let mut fb = FactBase::new();
        for (s, text, prov) in items {
            fb.insert(s, text, prov).unwrap();
        }
        let incremental: BTreeSet<Atom> = fb.closure().into_iter().collect();
        assert_eq!(incremental, batch, "seed {seed}");
    }
}

#[test]
fn retract_equals_fresh_build() {
    for seed in 0..50 {
        let inst = random_instance(seed);
        let items = statements(&inst);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 99);
        let victim = items[rng.gen_range(0..items.len())].0.clone();
        let mut fb = FactBase::from_statements(items.clone());
        fb.retract(&victim).unwrap();
        let rest: Vec<_> = items.into_iter().filter(|(s, _, _)| *s != victim).collect();
        let fresh = FactBase::from_statements(rest);
        let a: BTreeSet<Atom> = fb.closure().into_iter().collect();
        let b: BTreeSet<Atom> = fresh.closure().into_iter().collect();
        assert_eq!(a, b, "seed {seed}, retracted {victim}");
    }
}
