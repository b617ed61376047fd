use std::path::PathBuf;

use cnldoc::cnl::generate::{random_sentence, walk};
use cnldoc::cnl::{join_surfaces, Cnl, CnlError, Lexicon};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn corpus_cnl() -> Cnl {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/corpus/lexicon.lex");
    Cnl::new(Lexicon::parse(&std::fs::read_to_string(path).unwrap()).unwrap())
}

fn sentences(cnl: &Cnl, n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_sentence(cnl, &mut rng, 7).expect("non-empty grammar")).collect()
}

#[test]
fn generated_sentences_have_one_parse() {
    let cnl = corpus_cnl();
    for s in sentences(&cnl, 1000, 11) {
        cnl.parse_text(&s).unwrap_or_else(|e| panic!("{s}: {e}"));
    }
}

#[test]
fn every_prefix_offers_the_true_next_token() {
    let cnl = corpus_cnl();
    for s in sentences(&cnl, 1000, 12) {
        let tokens = cnl.tokenize(&s).unwrap();
        for k in 0..tokens.len() {
            let set = cnl.complete(&tokens[..k]).unwrap_or_else(|e| panic!("{s} @{k}: {e}"));
            assert!(set.contains(&tokens[k].surface), "`{s}`: `{}` not offered after {k} tokens", tokens[k].surface);
        }
        assert!(cnl.complete(&tokens).unwrap().is_empty(), "{s}");
    }
}

#[test]
fn offered_tokens_can_be_finished() {
    let cnl = corpus_cnl();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for s in sentences(&cnl, 150, 14) {
        let tokens = cnl.tokenize(&s).unwrap();
        let k = rng.gen_range(0..tokens.len());
        let prefix: Vec<&str> = tokens[..k].iter().map(|t| t.surface.as_str()).collect();
        for item in cnl.complete(&tokens[..k]).unwrap().surfaces() {
            let mut words = prefix.clone();
            words.push(item);
            let text = join_surfaces(words);
            let extended = cnl.tokenize(&text).unwrap();
            assert!(cnl.min_to_finish(&extended).is_some(), "`{text}` offered but dead");
        }
    }
}

#[test]
fn tokens_outside_the_completion_set_are_rejected() {
    let cnl = corpus_cnl();
    let vocabulary: Vec<String> = ["every", "is", "a", "the", "that", "and", "Core", "classes", "uses", "X", ".", "?", "by"]
        .into_iter()
        .map(String::from)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for s in sentences(&cnl, 200, 16) {
        let tokens = cnl.tokenize(&s).unwrap();
        let k = rng.gen_range(0..tokens.len());
        let set = cnl.complete(&tokens[..k]).unwrap();
        let mut words: Vec<&str> = tokens[..k].iter().map(|t| t.surface.as_str()).collect();
        let w = &vocabulary[rng.gen_range(0..vocabulary.len())];
        let offered = set.contains(w) || (k == 0 && set.surfaces().any(|o| o.eq_ignore_ascii_case(w)));
        if offered {
            continue;
        }
        words.push(w);
        let text = join_surfaces(words);
        match cnl.tokenize(&text) {
            Ok(t) => assert!(cnl.min_to_finish(&t).is_none(), "`{text}` accepted though `{w}` was not offered"),
            Err(CnlError::UnknownWord { .. }) => {}
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn parse_round_trips_through_the_tree_surface() {
    let cnl = corpus_cnl();
    for s in sentences(&cnl, 300, 17) {
        let tree = cnl.parse_text(&s).unwrap();
        assert_eq!(tree.surface(), s);
    }
}

#[test]
fn random_walks_finish_within_budget() {
    let cnl = corpus_cnl();
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    for _ in 0..1000 {
        let s = walk(&cnl, 25, |v| rng.gen_range(0..v.len())).unwrap();
        let tokens = cnl.tokenize(&s).unwrap();
        assert!(tokens.len() <= 25, "{s}");
        cnl.parse_text(&s).unwrap_or_else(|e| panic!("{s}: {e}"));
    }
}
