//! The controlled-English grammar as a context-free grammar without empty
//! productions.
//!
//! Agreement (singular/plural), the licensing of variables (only inside
//! `If ... then ...`) and the places where counting phrases may occur are
//! encoded in the nonterminals themselves, so that the chart parser can
//! predict next tokens without semantic post-filters. Every production carries
//! a [`Tag`] naming the construct it builds; translation into logic works on
//! tags only.
//!
//! See `docs/grammar.md` for the production list with example sentences.

use std::collections::HashMap;
use std::fmt;

use super::lexicon::{Category, FormSlot, Lexicon};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Terminal {
    Word(&'static str),
    /// "a" or "an".
    Article,
    /// "more than", "at most", "at least" or "exactly".
    Comparator,
    Name,
    NounSingular,
    NounPlural,
    VerbSingular,
    VerbPlural,
    /// Past participle of a verb that allows the passive.
    VerbPassive,
    OfSingular,
    OfPlural,
    AdjectivePreposition,
    Variable,
    /// The number 1.
    One,
    /// Any number other than 1.
    Many,
    Period,
    QuestionMark,
}

impl Terminal {
    /// The lexicon category and form slot this terminal is filled from.
    pub fn lexical_slot(self) -> Option<(Category, FormSlot)> {
        Some(match self {
            Terminal::Name => (Category::ProperName, FormSlot::Name),
            Terminal::NounSingular => (Category::Noun, FormSlot::Singular),
            Terminal::NounPlural => (Category::Noun, FormSlot::Plural),
            Terminal::VerbSingular => (Category::TransitiveVerb, FormSlot::ThirdSingular),
            Terminal::VerbPlural => (Category::TransitiveVerb, FormSlot::BarePlural),
            Terminal::VerbPassive => (Category::TransitiveVerb, FormSlot::PastParticiple),
            Terminal::OfSingular => (Category::OfConstruct, FormSlot::OfSingular),
            Terminal::OfPlural => (Category::OfConstruct, FormSlot::OfPlural),
            Terminal::AdjectivePreposition => {
                (Category::AdjectivePreposition, FormSlot::AdjectivePreposition)
            }
            _ => return None,
        })
    }

    /// Whether the lexicon offers at least one filler for this terminal.
    pub fn available(self, lexicon: &Lexicon) -> bool {
        match self.lexical_slot() {
            None => true,
            Some((category, _)) => lexicon.entries().iter().any(|e| {
                e.category() == category && (self != Terminal::VerbPassive || e.passive_allowed)
            }),
        }
    }
}

impl fmt::Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Terminal::Word(w) => write!(f, "\"{w}\""),
            other => write!(f, "{other:?}"),
        }
    }
}

/// Construct built by a production.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    FactSentence,
    OfFactSentence,
    EverySentence,
    NoSentence,
    IfSentence,
    EverythingSentence,
    WhichQuestion,
    WhatQuestion,
    /// A verb phrase, or a verb phrase followed by "and" and more verb phrases.
    VpList,
    VpIsA,
    VpPassive,
    VpAdjective,
    VpActive,
    VpCountActive,
    VpCountPassive,
    VpEveryObject,
    NounBar,
    OfBar,
    RelClause,
    NpName,
    NpVariable,
    NpIndefinite,
    NpSomething,
    Count,
}

pub type NtId = usize;
pub type ProdId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    N(NtId),
    T(Terminal),
}

#[derive(Debug, Clone)]
pub struct Production {
    pub lhs: NtId,
    pub rhs: Vec<Symbol>,
    pub tag: Tag,
}

#[derive(Debug, Clone)]
pub struct Grammar {
    names: Vec<String>,
    productions: Vec<Production>,
    by_lhs: Vec<Vec<ProdId>>,
    start: NtId,
    min_len: Vec<usize>,
}

/// Symbol spec used while building: a nonterminal by name, a terminal, or an
/// optional relative clause (expanded into two productions).
#[derive(Clone)]
enum Spec {
    N(String),
    T(Terminal),
    OptRel(String),
}

fn n(name: impl Into<String>) -> Spec {
    Spec::N(name.into())
}

fn t(terminal: Terminal) -> Spec {
    Spec::T(terminal)
}

fn w(word: &'static str) -> Spec {
    Spec::T(Terminal::Word(word))
}

#[derive(Default)]
struct Builder {
    names: Vec<String>,
    ids: HashMap<String, NtId>,
    productions: Vec<Production>,
}

impl Builder {
    fn nt(&mut self, name: &str) -> NtId {
        if let Some(id) = self.ids.get(name) {
            return *id;
        }
        let id = self.names.len();
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), id);
        id
    }

    fn add(&mut self, lhs: &str, tag: Tag, rhs: Vec<Spec>) {
        let lhs = self.nt(lhs);
        let mut variants: Vec<Vec<Symbol>> = vec![Vec::new()];
        for spec in rhs {
            match spec {
                Spec::N(name) => {
                    let id = self.nt(&name);
                    variants.iter_mut().for_each(|v| v.push(Symbol::N(id)));
                }
                Spec::T(term) => variants.iter_mut().for_each(|v| v.push(Symbol::T(term))),
                Spec::OptRel(name) => {
                    let id = self.nt(&name);
                    let mut with = variants.clone();
                    with.iter_mut().for_each(|v| v.push(Symbol::N(id)));
                    variants.extend(with);
                }
            }
        }
        for rhs in variants {
            self.productions.push(Production { lhs, rhs, tag });
        }
    }
}

const NUMBERS: [(&str, Terminal, Terminal, Terminal, Terminal); 2] = [
    ("sg", Terminal::NounSingular, Terminal::VerbSingular, Terminal::OfSingular, Terminal::Word("is")),
    ("pl", Terminal::NounPlural, Terminal::VerbPlural, Terminal::OfPlural, Terminal::Word("are")),
];

impl Grammar {
    /// The full grammar of the controlled language.
    pub fn controlled_english() -> Grammar {
        use Terminal::*;
        let mut b = Builder::default();
        b.nt("S");

        // Sentences.
        b.add("S", Tag::FactSentence, vec![t(Name), n("VPD"), t(Period)]);
        b.add(
            "S",
            Tag::OfFactSentence,
            vec![t(Article), t(OfSingular), t(Name), w("is"), t(Name), t(Period)],
        );
        b.add(
            "S",
            Tag::EverySentence,
            vec![w("every"), n("NB.sg.g"), Spec::OptRel("REL.sg.g".into()), n("VPC.sg.g"), t(Period)],
        );
        b.add(
            "S",
            Tag::NoSentence,
            vec![w("no"), n("NB.sg.g"), Spec::OptRel("REL.sg.g".into()), n("VPC.sg.g"), t(Period)],
        );
        b.add(
            "S",
            Tag::IfSentence,
            vec![w("if"), n("IFSUBJ"), n("VPC.sg.v"), w("then"), n("THENSUBJ"), n("VPC.sg.v"), t(Period)],
        );
        b.add(
            "S",
            Tag::EverythingSentence,
            vec![w("everything"), t(VerbSingular), t(Comparator), n("COUNT"), t(Period)],
        );
        for (num, ..) in NUMBERS {
            b.add(
                "S",
                Tag::WhichQuestion,
                vec![
                    w("which"),
                    n(format!("NB.{num}.g")),
                    Spec::OptRel(format!("REL.{num}.g")),
                    n(format!("QVP.{num}")),
                    t(QuestionMark),
                ],
            );
        }
        b.add("S", Tag::WhatQuestion, vec![w("what"), n("QVP.sg"), t(QuestionMark)]);

        b.add("IFSUBJ", Tag::NpVariable, vec![t(Variable)]);
        b.add("IFSUBJ", Tag::NpSomething, vec![w("something")]);
        b.add("THENSUBJ", Tag::NpVariable, vec![t(Variable)]);

        // Declarative verb-phrase lists after a proper-name subject may also
        // count or quantify their object universally.
        for head in ["VP.sg.g", "CVP.sg", "EVERYOBJ"] {
            b.add("VPD", Tag::VpList, vec![n(head)]);
            b.add("VPD", Tag::VpList, vec![n(head), w("and"), n("VPD")]);
        }
        b.add(
            "EVERYOBJ",
            Tag::VpEveryObject,
            vec![t(VerbSingular), w("every"), n("NB.sg.g"), Spec::OptRel("REL.sg.g".into())],
        );

        for (num, noun, verb, of, be) in NUMBERS {
            b.add(&format!("QVP.{num}"), Tag::VpList, vec![n(format!("VPC.{num}.g"))]);
            b.add(&format!("QVP.{num}"), Tag::VpList, vec![n(format!("CVP.{num}"))]);

            b.add(&format!("CVP.{num}"), Tag::VpCountActive, vec![t(verb), t(Comparator), n("COUNT")]);
            b.add(
                &format!("CVP.{num}"),
                Tag::VpCountPassive,
                vec![t(be), t(VerbPassive), w("by"), t(Comparator), n("COUNT")],
            );

            for ctx in ["g", "v"] {
                let vp = format!("VP.{num}.{ctx}");
                let vpc = format!("VPC.{num}.{ctx}");
                let np = format!("NP.{ctx}");
                b.add(&vpc, Tag::VpList, vec![n(&vp)]);
                b.add(&vpc, Tag::VpList, vec![n(&vp), w("and"), n(&vpc)]);

                if num == "sg" {
                    b.add(
                        &vp,
                        Tag::VpIsA,
                        vec![
                            w("is"),
                            t(Article),
                            n(format!("NB.sg.{ctx}")),
                            Spec::OptRel(format!("REL.sg.{ctx}")),
                        ],
                    );
                }
                b.add(&vp, Tag::VpPassive, vec![t(be), t(VerbPassive), w("by"), n(&np)]);
                b.add(&vp, Tag::VpAdjective, vec![t(be), t(AdjectivePreposition), n(&np)]);
                b.add(&vp, Tag::VpActive, vec![t(verb), n(&np)]);

                let nb = format!("NB.{num}.{ctx}");
                b.add(&nb, Tag::NounBar, vec![t(noun)]);
                b.add(&nb, Tag::OfBar, vec![t(of), n(format!("REF.{ctx}"))]);

                b.add(&format!("REL.{num}.{ctx}"), Tag::RelClause, vec![w("that"), n(&vp)]);
            }
        }

        for ctx in ["g", "v"] {
            let refn = format!("REF.{ctx}");
            let np = format!("NP.{ctx}");
            b.add(&refn, Tag::NpName, vec![t(Name)]);
            b.add(&np, Tag::NpName, vec![t(Name)]);
            if ctx == "v" {
                b.add(&refn, Tag::NpVariable, vec![t(Variable)]);
                b.add(&np, Tag::NpVariable, vec![t(Variable)]);
            }
            b.add(
                &np,
                Tag::NpIndefinite,
                vec![t(Article), n(format!("NB.sg.{ctx}")), Spec::OptRel(format!("REL.sg.{ctx}"))],
            );
            b.add(&np, Tag::NpSomething, vec![w("something"), Spec::OptRel(format!("REL.sg.{ctx}"))]);
        }

        // "of something that …" inside an of-construct. The clause is a
        // single verb phrase whose object cannot take a relative clause of
        // its own, so a following clause attaches in exactly one place.
        for ctx in ["g", "v"] {
            let refn = format!("REF.{ctx}");
            let rel = format!("RELX.{ctx}");
            let vp = format!("VPX.{ctx}");
            let np = format!("NPX.{ctx}");
            let nb = format!("NBX.{ctx}");
            let leaf_ref = format!("REFX.{ctx}");
            b.add(&refn, Tag::NpSomething, vec![w("something"), n(&rel)]);
            b.add(&rel, Tag::RelClause, vec![w("that"), n(&vp)]);
            b.add(&vp, Tag::VpIsA, vec![w("is"), t(Article), n(&nb)]);
            b.add(&vp, Tag::VpPassive, vec![w("is"), t(VerbPassive), w("by"), n(&np)]);
            b.add(&vp, Tag::VpAdjective, vec![w("is"), t(AdjectivePreposition), n(&np)]);
            b.add(&vp, Tag::VpActive, vec![t(VerbSingular), n(&np)]);
            b.add(&np, Tag::NpName, vec![t(Name)]);
            b.add(&np, Tag::NpIndefinite, vec![t(Article), n(&nb)]);
            b.add(&np, Tag::NpSomething, vec![w("something")]);
            b.add(&nb, Tag::NounBar, vec![t(NounSingular)]);
            b.add(&nb, Tag::OfBar, vec![t(OfSingular), n(&leaf_ref)]);
            b.add(&leaf_ref, Tag::NpName, vec![t(Name)]);
            if ctx == "v" {
                b.add(&np, Tag::NpVariable, vec![t(Variable)]);
                b.add(&leaf_ref, Tag::NpVariable, vec![t(Variable)]);
            }
        }

        b.add("COUNT", Tag::Count, vec![t(One), t(NounSingular)]);
        b.add("COUNT", Tag::Count, vec![t(Many), t(NounPlural)]);

        Grammar::from_parts(b.names, b.productions, 0)
    }

    fn from_parts(names: Vec<String>, productions: Vec<Production>, start: NtId) -> Grammar {
        let mut by_lhs = vec![Vec::new(); names.len()];
        for (id, p) in productions.iter().enumerate() {
            by_lhs[p.lhs].push(id);
        }
        let min_len = compute_min_len(names.len(), &productions);
        Grammar { names, productions, by_lhs, start, min_len }
    }

    /// Drops every production that cannot derive a terminal string when only
    /// the terminals accepted by `available` exist.
    pub fn restrict(&self, available: impl Fn(Terminal) -> bool) -> Grammar {
        let mut productive = vec![false; self.names.len()];
        loop {
            let mut changed = false;
            for p in &self.productions {
                if productive[p.lhs] {
                    continue;
                }
                let ok = p.rhs.iter().all(|s| match s {
                    Symbol::N(id) => productive[*id],
                    Symbol::T(term) => available(*term),
                });
                if ok {
                    productive[p.lhs] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let productions = self
            .productions
            .iter()
            .filter(|p| {
                productive[p.lhs]
                    && p.rhs.iter().all(|s| match s {
                        Symbol::N(id) => productive[*id],
                        Symbol::T(term) => available(*term),
                    })
            })
            .cloned()
            .collect();
        Grammar::from_parts(self.names.clone(), productions, self.start)
    }

    /// The grammar restricted to what `lexicon` can fill.
    pub fn for_lexicon(&self, lexicon: &Lexicon) -> Grammar {
        let mut cache: HashMap<Terminal, bool> = HashMap::new();
        for p in &self.productions {
            for s in &p.rhs {
                if let Symbol::T(term) = s {
                    cache.entry(*term).or_insert_with(|| term.available(lexicon));
                }
            }
        }
        self.restrict(|term| cache.get(&term).copied().unwrap_or(false))
    }

    pub fn start(&self) -> NtId {
        self.start
    }

    pub fn productions(&self) -> &[Production] {
        &self.productions
    }

    pub fn production(&self, id: ProdId) -> &Production {
        &self.productions[id]
    }

    pub fn alternatives(&self, nt: NtId) -> &[ProdId] {
        &self.by_lhs[nt]
    }

    pub fn name(&self, nt: NtId) -> &str {
        &self.names[nt]
    }

    /// Fewest tokens `nt` can derive; `usize::MAX` when it derives nothing.
    pub fn min_len(&self, nt: NtId) -> usize {
        self.min_len[nt]
    }

    pub fn min_len_of(&self, symbols: &[Symbol]) -> usize {
        symbols.iter().fold(0usize, |acc, s| match s {
            Symbol::T(_) => acc.saturating_add(1),
            Symbol::N(id) => acc.saturating_add(self.min_len[*id]),
        })
    }

    /// Whether the grammar can derive any sentence at all.
    pub fn is_empty(&self) -> bool {
        self.by_lhs[self.start].is_empty()
    }

    /// Human-readable production listing.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        for p in &self.productions {
            let rhs: Vec<String> = p
                .rhs
                .iter()
                .map(|s| match s {
                    Symbol::N(id) => self.names[*id].clone(),
                    Symbol::T(term) => term.to_string(),
                })
                .collect();
            out.push_str(&format!("{:<10} -> {:<60} [{:?}]\n", self.names[p.lhs], rhs.join(" "), p.tag));
        }
        out
    }
}

fn compute_min_len(nts: usize, productions: &[Production]) -> Vec<usize> {
    let mut min = vec![usize::MAX; nts];
    loop {
        let mut changed = false;
        for p in productions {
            let len = p.rhs.iter().fold(0usize, |acc, s| match s {
                Symbol::T(_) => acc.saturating_add(1),
                Symbol::N(id) => acc.saturating_add(min[*id]),
            });
            if len < min[p.lhs] {
                min[p.lhs] = len;
                changed = true;
            }
        }
        if !changed {
            return min;
        }
    }
}
