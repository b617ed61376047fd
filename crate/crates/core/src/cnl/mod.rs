//! Controlled-English front end: lexicon, tokenizer, parser and predictive
//! completion.
//!
//! [`Cnl`] bundles a lexicon with the grammar restricted to what that lexicon
//! can fill. It is immutable; extending the lexicon means building a new
//! `Cnl`, so in-flight parses keep working against the old one.

pub mod earley;
pub mod generate;
pub mod grammar;
pub mod lexicon;
pub mod token;

use std::collections::BTreeSet;
use std::ops::Range;
use std::sync::{Arc, OnceLock};

use serde::Serialize;
use thiserror::Error;

use earley::{Chart, ParseNode, TreeBuilder};
use grammar::{Grammar, Tag, Terminal};
pub use lexicon::{Category, LexEntry, Lexicon};
use token::{Token, VARIABLES};

pub use earley::{Leaf, ParseChild};

fn full_grammar() -> &'static Grammar {
    static GRAMMAR: OnceLock<Grammar> = OnceLock::new();
    GRAMMAR.get_or_init(Grammar::controlled_english)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SentenceKind {
    Declarative,
    Question,
}

/// The unique syntax tree of an accepted sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseTree {
    pub kind: SentenceKind,
    pub root: ParseNode,
}

impl ParseTree {
    pub fn render(&self) -> String {
        self.root.render()
    }

    /// The sentence text reassembled from its tokens.
    pub fn surface(&self) -> String {
        join_surfaces(self.root.tokens().iter().map(|t| t.surface.as_str()))
    }
}

/// Joins token surfaces with single spaces, attaching final punctuation.
pub fn join_surfaces<'a>(surfaces: impl IntoIterator<Item = &'a str>) -> String {
    let mut out = String::new();
    for s in surfaces {
        if !out.is_empty() && s != "." && s != "?" {
            out.push(' ');
        }
        out.push_str(s);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompletionCategory {
    FunctionWord,
    ProperName,
    Noun,
    TransitiveVerb,
    OfConstruct,
    AdjectivePreposition,
    Variable,
    Number,
    Punctuation,
}

impl From<Category> for CompletionCategory {
    fn from(c: Category) -> Self {
        match c {
            Category::ProperName => CompletionCategory::ProperName,
            Category::Noun => CompletionCategory::Noun,
            Category::TransitiveVerb => CompletionCategory::TransitiveVerb,
            Category::OfConstruct => CompletionCategory::OfConstruct,
            Category::AdjectivePreposition => CompletionCategory::AdjectivePreposition,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CompletionItem {
    pub surface: String,
    pub category: CompletionCategory,
}

/// Tokens that may come next. Numbers are represented by the samples "1"
/// (which takes a singular noun) and "2"; `any_number` says that every
/// non-negative integer other than 1 is accepted as well.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct CompletionSet {
    pub items: Vec<CompletionItem>,
    pub sentence_end: bool,
    pub any_number: bool,
}

impl CompletionSet {
    pub fn contains(&self, surface: &str) -> bool {
        self.items.iter().any(|i| i.surface == surface)
            || (self.any_number
                && surface != "1"
                && !surface.is_empty()
                && surface.chars().all(|c| c.is_ascii_digit()))
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(|i| i.surface.as_str())
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Lexicon categories among the offered items.
    pub fn lexical_categories(&self) -> Vec<Category> {
        let mut cats: Vec<Category> = self
            .items
            .iter()
            .filter_map(|i| match i.category {
                CompletionCategory::ProperName => Some(Category::ProperName),
                CompletionCategory::Noun => Some(Category::Noun),
                CompletionCategory::TransitiveVerb => Some(Category::TransitiveVerb),
                CompletionCategory::OfConstruct => Some(Category::OfConstruct),
                CompletionCategory::AdjectivePreposition => Some(Category::AdjectivePreposition),
                _ => None,
            })
            .collect();
        cats.sort();
        cats.dedup();
        cats
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CnlError {
    #[error("unknown word `{word}` at {span:?}")]
    UnknownWord {
        word: String,
        span: Range<usize>,
        /// Index of the token the word would have become.
        position: usize,
        /// Categories a new entry could take to let the sentence continue.
        suggestions: Vec<Category>,
    },
    #[error("syntax error at token {position}{}", found.as_ref().map(|f| format!(" (`{f}`)")).unwrap_or_default())]
    Syntax {
        position: usize,
        found: Option<String>,
        expected: CompletionSet,
    },
    #[error("ambiguous sentence; grammar defect: {}", parses.join(" | "))]
    Ambiguous { parses: Vec<String> },
    #[error("prefix has no continuation after token {position}")]
    DeadPrefix { position: usize },
}

#[derive(Debug, Clone)]
pub struct Cnl {
    lexicon: Arc<Lexicon>,
    grammar: Arc<Grammar>,
}

impl Cnl {
    pub fn new(lexicon: Lexicon) -> Cnl {
        let grammar = full_grammar().for_lexicon(&lexicon);
        Cnl { lexicon: Arc::new(lexicon), grammar: Arc::new(grammar) }
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    pub fn tokenize(&self, text: &str) -> Result<Vec<Token>, CnlError> {
        token::tokenize(text, &self.lexicon).map_err(|unmatched| {
            let suggestions = self
                .complete(&unmatched.preceding)
                .map(|set| set.lexical_categories())
                .unwrap_or_default();
            CnlError::UnknownWord {
                word: unmatched.word,
                span: unmatched.span,
                position: unmatched.preceding.len(),
                suggestions,
            }
        })
    }

    pub fn parse(&self, tokens: &[Token]) -> Result<ParseTree, CnlError> {
        let chart = Chart::build(&self.grammar, tokens, &self.lexicon);
        if let Some(k) = chart.stuck_at {
            return Err(CnlError::Syntax {
                position: k,
                found: Some(tokens[k].surface.clone()),
                expected: self.complete(&tokens[..k]).unwrap_or_default(),
            });
        }
        if !chart.accepted() {
            return Err(CnlError::Syntax {
                position: tokens.len(),
                found: None,
                expected: self.expand(&chart.expected(), tokens.is_empty()),
            });
        }
        let mut builder = TreeBuilder::new(&chart, tokens, &self.lexicon);
        let mut trees = builder.trees();
        if trees.len() > 1 {
            return Err(CnlError::Ambiguous { parses: trees.iter().map(ParseNode::render).collect() });
        }
        let root = trees.pop().expect("accepted input has a tree");
        let kind = match root.tag {
            Tag::WhichQuestion | Tag::WhatQuestion => SentenceKind::Question,
            _ => SentenceKind::Declarative,
        };
        Ok(ParseTree { kind, root })
    }

    pub fn parse_text(&self, text: &str) -> Result<ParseTree, CnlError> {
        let tokens = self.tokenize(text)?;
        self.parse(&tokens)
    }

    /// Every token that keeps `prefix` extensible to a complete sentence.
    pub fn complete(&self, prefix: &[Token]) -> Result<CompletionSet, CnlError> {
        let chart = Chart::build(&self.grammar, prefix, &self.lexicon);
        if let Some(k) = chart.stuck_at {
            return Err(CnlError::DeadPrefix { position: k });
        }
        let expected = chart.expected();
        if expected.is_empty() && !prefix.is_empty() && !chart.accepted() {
            return Err(CnlError::DeadPrefix { position: prefix.len() });
        }
        Ok(self.expand(&expected, prefix.is_empty()))
    }

    pub fn complete_text(&self, prefix: &str) -> Result<CompletionSet, CnlError> {
        let tokens = self.tokenize(prefix)?;
        self.complete(&tokens)
    }

    /// Fewest tokens (including final punctuation) needed to finish `prefix`.
    pub fn min_to_finish(&self, prefix: &[Token]) -> Option<usize> {
        Chart::build(&self.grammar, prefix, &self.lexicon).min_to_finish()
    }

    /// Terminal classes expected after `prefix`, before expansion to surfaces.
    pub fn expected_terminals(&self, prefix: &[Token]) -> Vec<Terminal> {
        Chart::build(&self.grammar, prefix, &self.lexicon).expected()
    }

    /// Concrete surfaces for a terminal class.
    pub fn surfaces_for(&self, terminal: Terminal, sentence_start: bool) -> Vec<CompletionItem> {
        let capitalize = |s: &str| -> String {
            if !sentence_start {
                return s.to_string();
            }
            let mut chars = s.chars();
            match chars.next() {
                Some(c) => c.to_uppercase().collect::<String>() + chars.as_str(),
                None => String::new(),
            }
        };
        let function = |s: &str| CompletionItem {
            surface: capitalize(s),
            category: CompletionCategory::FunctionWord,
        };
        match terminal {
            Terminal::Word(w) => vec![function(w)],
            Terminal::Article => vec![function("a"), function("an")],
            Terminal::Comparator => ["more than", "at most", "at least", "exactly"]
                .into_iter()
                .map(function)
                .collect(),
            Terminal::Variable => VARIABLES
                .iter()
                .map(|v| CompletionItem { surface: v.to_string(), category: CompletionCategory::Variable })
                .collect(),
            Terminal::One => {
                vec![CompletionItem { surface: "1".into(), category: CompletionCategory::Number }]
            }
            Terminal::Many => {
                vec![CompletionItem { surface: "2".into(), category: CompletionCategory::Number }]
            }
            Terminal::Period => {
                vec![CompletionItem { surface: ".".into(), category: CompletionCategory::Punctuation }]
            }
            Terminal::QuestionMark => {
                vec![CompletionItem { surface: "?".into(), category: CompletionCategory::Punctuation }]
            }
            lexical => {
                let (category, slot) = lexical.lexical_slot().expect("lexical terminal");
                self.lexicon
                    .entries()
                    .iter()
                    .filter(|e| e.category() == category)
                    .filter(|e| lexical != Terminal::VerbPassive || e.passive_allowed)
                    .filter_map(|e| e.surface(slot).map(|s| (e, s)))
                    .map(|(e, s)| CompletionItem {
                        surface: if e.definite { capitalize(&s) } else { s },
                        category: category.into(),
                    })
                    .collect()
            }
        }
    }

    fn expand(&self, expected: &[Terminal], sentence_start: bool) -> CompletionSet {
        let mut items = BTreeSet::new();
        let mut sentence_end = false;
        let mut any_number = false;
        for &term in expected {
            match term {
                Terminal::Period | Terminal::QuestionMark => sentence_end = true,
                Terminal::Many => any_number = true,
                _ => {}
            }
            items.extend(self.surfaces_for(term, sentence_start));
        }
        CompletionSet { items: items.into_iter().collect(), sentence_end, any_number }
    }
}
