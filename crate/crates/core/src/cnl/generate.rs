//! Random sentence generation and completion-driven walks, used by tests,
//! benchmarks and the corpus tooling.

use rand::Rng;
use thiserror::Error;

use super::grammar::{Symbol, Terminal};
use super::{join_surfaces, Cnl};

/// Expands the start symbol at random. Past `depth_cap` nested nonterminals
/// every choice falls back to a shortest alternative, so generation ends.
pub fn random_sentence<R: Rng>(cnl: &Cnl, rng: &mut R, depth_cap: usize) -> Option<String> {
    let grammar = cnl.grammar();
    if grammar.is_empty() {
        return None;
    }
    let mut words: Vec<String> = Vec::new();
    let mut stack: Vec<(Symbol, usize)> = vec![(Symbol::N(grammar.start()), 0)];
    while let Some((symbol, depth)) = stack.pop() {
        match symbol {
            Symbol::N(nt) => {
                let alts = grammar.alternatives(nt);
                let prod = if depth >= depth_cap {
                    *alts
                        .iter()
                        .min_by_key(|p| grammar.min_len_of(&grammar.production(**p).rhs))?
                } else {
                    alts[rng.gen_range(0..alts.len())]
                };
                for s in grammar.production(prod).rhs.iter().rev() {
                    stack.push((*s, depth + 1));
                }
            }
            Symbol::T(t) => {
                let surface = match t {
                    Terminal::Many => {
                        let n: u64 = rng.gen_range(0..200);
                        if n == 1 { "2".to_string() } else { n.to_string() }
                    }
                    _ => {
                        let items = cnl.surfaces_for(t, words.is_empty());
                        if items.is_empty() {
                            return None;
                        }
                        items[rng.gen_range(0..items.len())].surface.clone()
                    }
                };
                words.push(surface);
            }
        }
    }
    Some(join_surfaces(words.iter().map(String::as_str)))
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum WalkError {
    #[error("no continuation fits within {budget} tokens after `{prefix}`")]
    Stuck { prefix: String, budget: usize },
}

/// Builds a sentence by repeatedly picking one of the offered completions.
/// Choices that could not be finished within `budget` tokens are withheld,
/// so the walk always terminates with a complete sentence.
pub fn walk(
    cnl: &Cnl,
    budget: usize,
    mut choose: impl FnMut(&[String]) -> usize,
) -> Result<String, WalkError> {
    let mut words: Vec<String> = Vec::new();
    loop {
        let text = join_surfaces(words.iter().map(String::as_str));
        let stuck = || WalkError::Stuck { prefix: text.clone(), budget };
        let tokens = cnl.tokenize(&text).map_err(|_| stuck())?;
        let set = cnl.complete(&tokens).map_err(|_| stuck())?;
        let mut candidates: Vec<String> = set.surfaces().map(str::to_string).collect();
        if set.any_number && !candidates.iter().any(|c| c == "2") {
            candidates.push("2".into());
        }
        let viable: Vec<String> = candidates
            .into_iter()
            .filter(|c| {
                let mut next = words.clone();
                next.push(c.clone());
                let text = join_surfaces(next.iter().map(String::as_str));
                match cnl.tokenize(&text) {
                    Ok(t) if t.len() == tokens.len() + 1 => cnl
                        .min_to_finish(&t)
                        .is_some_and(|rest| t.len() + rest <= budget),
                    _ => false,
                }
            })
            .collect();
        if viable.is_empty() {
            return Err(stuck());
        }
        let pick = viable[choose(&viable) % viable.len()].clone();
        let done = pick == "." || pick == "?";
        words.push(pick);
        if done {
            return Ok(join_surfaces(words.iter().map(String::as_str)));
        }
    }
}
