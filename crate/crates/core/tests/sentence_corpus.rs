use std::path::PathBuf;

use cnldoc::cnl::{Cnl, Lexicon};

fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/corpus").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn corpus() -> Vec<String> {
    fixture("corpus.txt")
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect()
}

#[test]
fn every_corpus_sentence_has_exactly_one_parse() {
    let cnl = Cnl::new(Lexicon::parse(&fixture("lexicon.lex")).unwrap());
    let sentences = corpus();
    assert!(sentences.len() >= 100, "corpus has {} sentences", sentences.len());
    let failures: Vec<String> = sentences
        .iter()
        .filter_map(|s| cnl.parse_text(s).err().map(|e| format!("{s}: {e}")))
        .collect();
    assert!(failures.is_empty(), "{} failures:\n{}", failures.len(), failures.join("\n"));
}
