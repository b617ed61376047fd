//! Source code facts: the record dump format, the built-in prelude that
//! axiomatizes it, and extraction of tagged documentation comments.

mod doc;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::cnl::lexicon::{Category, LexEntry, Lexicon, LexiconError};
use crate::cnl::{Cnl, CnlError};
use crate::logic::{translate, Atom, LogicError, PredKind, Predicate, Statement, Term};

pub use doc::{extract_doc_comments, DocComment, DocCommentError};

pub const PRELUDE: &str = include_str!("../../assets/prelude.cnl");
pub const CODE_LEXICON: &str = include_str!("../../assets/code-model.lex");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntityKind {
    Class,
    Method,
    Package,
    Interface,
}

impl EntityKind {
    pub fn label(self) -> &'static str {
        match self {
            EntityKind::Class => "class",
            EntityKind::Method => "method",
            EntityKind::Package => "package",
            EntityKind::Interface => "interface",
        }
    }

    fn from_label(s: &str) -> Option<EntityKind> {
        [EntityKind::Class, EntityKind::Method, EntityKind::Package, EntityKind::Interface]
            .into_iter()
            .find(|k| k.label() == s)
    }

    pub fn predicate(self) -> Predicate {
        Predicate::concept(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationKind {
    DirectSubclassOf,
    Defines,
    Invokes,
    Instantiates,
    InPackage,
    Implements,
}

impl RelationKind {
    pub const ALL: [RelationKind; 6] = [
        RelationKind::DirectSubclassOf,
        RelationKind::Defines,
        RelationKind::Invokes,
        RelationKind::Instantiates,
        RelationKind::InPackage,
        RelationKind::Implements,
    ];

    pub fn label(self) -> &'static str {
        match self {
            RelationKind::DirectSubclassOf => "direct-subclass-of",
            RelationKind::Defines => "defines",
            RelationKind::Invokes => "invokes",
            RelationKind::Instantiates => "instantiates",
            RelationKind::InPackage => "in-package",
            RelationKind::Implements => "implements",
        }
    }

    /// Required kinds of the two endpoints.
    pub fn signature(self) -> (EntityKind, EntityKind) {
        use EntityKind::*;
        match self {
            RelationKind::DirectSubclassOf => (Class, Class),
            RelationKind::Defines => (Class, Method),
            RelationKind::Invokes => (Method, Method),
            RelationKind::Instantiates => (Method, Class),
            RelationKind::InPackage => (Class, Package),
            RelationKind::Implements => (Class, Interface),
        }
    }

    pub fn predicate(self) -> Predicate {
        match self {
            RelationKind::DirectSubclassOf => Predicate::of("direct subclass"),
            RelationKind::Defines => Predicate::relation("defines"),
            RelationKind::Invokes => Predicate::relation("invokes"),
            RelationKind::Instantiates => Predicate::relation("instantiates"),
            RelationKind::InPackage => Predicate::adjective("contained in"),
            RelationKind::Implements => Predicate::relation("implements"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CodeEntity {
    pub kind: EntityKind,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CodeRelation {
    pub relation: RelationKind,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dump {
    pub entities: Vec<CodeEntity>,
    pub relations: Vec<CodeRelation>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CodeModelError {
    #[error("line {line}: malformed record `{text}`")]
    BadRecord { line: usize, text: String },
    #[error("line {line}: unknown entity kind `{kind}`")]
    UnknownKind { line: usize, kind: String },
    #[error("line {line}: unknown relation `{relation}`")]
    UnknownRelation { line: usize, relation: String },
    #[error("method name `{0}` must be `Owner-selector`")]
    BadMethodName(String),
    #[error("entity `{0}` is declared more than once")]
    DuplicateEntity(String),
    #[error("{relation} refers to undeclared entity `{name}`")]
    DanglingReference { relation: &'static str, name: String },
    #[error("{relation} expects {expected} `{name}` but it is a {found}")]
    KindMismatch { relation: &'static str, name: String, expected: &'static str, found: &'static str },
    #[error("entity name `{name}` collides with the {category} entry of the same spelling")]
    NameCollision { name: String, category: Category },
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
}

fn valid_method_name(name: &str) -> bool {
    matches!(name.split_once('-'), Some((owner, selector)) if !owner.is_empty() && !selector.is_empty())
}

impl Dump {
    pub fn parse(text: &str) -> Result<Dump, CodeModelError> {
        let mut dump = Dump::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split('|').map(str::trim).collect();
            let bad = || CodeModelError::BadRecord { line, text: trimmed.to_string() };
            match fields.as_slice() {
                ["E", kind, name] if !name.is_empty() => {
                    let kind = EntityKind::from_label(kind)
                        .ok_or_else(|| CodeModelError::UnknownKind { line, kind: kind.to_string() })?;
                    dump.entities.push(CodeEntity { kind, name: name.to_string() });
                }
                ["R", relation, from, to] if !from.is_empty() && !to.is_empty() => {
                    let kind = RelationKind::ALL
                        .into_iter()
                        .find(|k| k.label() == *relation)
                        .ok_or_else(|| CodeModelError::UnknownRelation { line, relation: relation.to_string() })?;
                    dump.relations.push(CodeRelation { relation: kind, from: from.to_string(), to: to.to_string() });
                }
                _ => return Err(bad()),
            }
        }
        Ok(dump)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entities {
            out.push_str(&format!("E|{}|{}\n", e.kind.label(), e.name));
        }
        for r in &self.relations {
            out.push_str(&format!("R|{}|{}|{}\n", r.relation.label(), r.from, r.to));
        }
        out
    }

    /// Adds the records of `other`. Entities declared in both must agree on
    /// their kind.
    pub fn merge(&mut self, other: &Dump) -> Result<(), CodeModelError> {
        let kinds: HashMap<String, EntityKind> = self.entities.iter().map(|e| (e.name.clone(), e.kind)).collect();
        for e in &other.entities {
            match kinds.get(&e.name) {
                Some(k) if *k == e.kind => {}
                Some(_) => return Err(CodeModelError::DuplicateEntity(e.name.clone())),
                None => self.entities.push(e.clone()),
            }
        }
        let known: BTreeSet<CodeRelation> = self.relations.iter().cloned().collect();
        self.relations.extend(other.relations.iter().filter(|r| !known.contains(*r)).cloned());
        Ok(())
    }

    /// Like [`Dump::facts`], each fact paired with a sentence stating it.
    pub fn sentences(&self) -> Result<Vec<(Atom, String)>, CodeModelError> {
        let facts = self.facts()?;
        Ok(facts
            .into_iter()
            .map(|atom| {
                let text = fact_sentence(&atom);
                (atom, text)
            })
            .collect())
    }

    /// Checks the record invariants and returns one fact per entity and per
    /// distinct relation edge.
    pub fn facts(&self) -> Result<Vec<Atom>, CodeModelError> {
        let mut kinds: HashMap<&str, EntityKind> = HashMap::new();
        let mut facts = Vec::with_capacity(self.entities.len() + self.relations.len());
        for e in &self.entities {
            if e.kind == EntityKind::Method && !valid_method_name(&e.name) {
                return Err(CodeModelError::BadMethodName(e.name.clone()));
            }
            if kinds.insert(&e.name, e.kind).is_some() {
                return Err(CodeModelError::DuplicateEntity(e.name.clone()));
            }
            facts.push(Atom::unary(e.kind.predicate(), Term::Const(e.name.clone())));
        }
        let mut seen = BTreeSet::new();
        for r in &self.relations {
            let kind = r.relation;
            let (want_from, want_to) = kind.signature();
            for (name, want) in [(&r.from, want_from), (&r.to, want_to)] {
                match kinds.get(name.as_str()) {
                    None => {
                        return Err(CodeModelError::DanglingReference { relation: kind.label(), name: name.clone() })
                    }
                    Some(found) if *found != want => {
                        return Err(CodeModelError::KindMismatch {
                            relation: kind.label(),
                            name: name.clone(),
                            expected: want.label(),
                            found: found.label(),
                        })
                    }
                    Some(_) => {}
                }
            }
            if seen.insert(r) {
                facts.push(Atom::binary(kind.predicate(), Term::Const(r.from.clone()), Term::Const(r.to.clone())));
            }
        }
        Ok(facts)
    }
}

/// The sentence an ingested fact stands for, e.g. "MOShape is a class.".
fn fact_sentence(atom: &Atom) -> String {
    let name = |i: usize| match &atom.args[i] {
        Term::Const(c) => c.clone(),
        Term::Var(v) => v.clone(),
    };
    if atom.args.len() == 1 {
        let noun = &atom.pred.name;
        let article = if noun.starts_with(['a', 'e', 'i', 'o', 'u']) { "an" } else { "a" };
        return format!("{} is {article} {noun}.", name(0));
    }
    let link = match atom.pred.kind {
        PredKind::Relation => atom.pred.name.clone(),
        PredKind::Of => format!("is a {}", atom.pred.name),
        PredKind::Adjective | PredKind::Concept => format!("is {}", atom.pred.name),
    };
    format!("{} {link} {}.", name(0), name(1))
}

/// A fact from the code model with the sentence it stands for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestedFact {
    pub statement: Statement,
    pub sentence: String,
}

/// Validates `dump`, registers every entity name as a proper name in
/// `lexicon`, and returns the facts.
pub fn ingest_model(dump: &Dump, lexicon: &mut Lexicon) -> Result<Vec<IngestedFact>, CodeModelError> {
    let facts = dump.sentences()?;
    register_names(dump.entities.iter().map(|e| e.name.as_str()), lexicon)?;
    Ok(facts.into_iter().map(|(atom, sentence)| IngestedFact { statement: Statement::Fact(atom), sentence }).collect())
}

/// Adds proper names, failing on a spelling already used by another category.
pub fn register_names<'a>(names: impl IntoIterator<Item = &'a str>, lexicon: &mut Lexicon) -> Result<(), CodeModelError> {
    for name in names {
        if lexicon.has_proper_name(name) {
            continue;
        }
        if lexicon.surface_in_use(name) {
            let category = lexicon
                .lookup(name)
                .first()
                .map(|(id, _)| lexicon.entry(*id).category())
                .unwrap_or(Category::ProperName);
            return Err(CodeModelError::NameCollision { name: name.to_string(), category });
        }
        lexicon.add(LexEntry::proper_name(name))?;
    }
    Ok(())
}

/// The vocabulary the prelude is written in.
pub fn base_lexicon() -> Lexicon {
    Lexicon::parse(CODE_LEXICON).expect("shipped lexicon is well formed")
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PreludeError {
    #[error("line {line}: {error}")]
    Parse { line: usize, error: CnlError },
    #[error("line {line}: {error}")]
    Translate { line: usize, error: LogicError },
}

/// A sentence with the statements it translates to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslatedSentence {
    pub sentence: String,
    pub line: usize,
    pub statements: Vec<Statement>,
}

impl fmt::Display for TranslatedSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.sentence)
    }
}

/// Parses a file of sentences, one per line with `#` comments.
pub fn translate_lines(text: &str, cnl: &Cnl) -> Result<Vec<TranslatedSentence>, PreludeError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let sentence = raw.trim();
        if sentence.is_empty() || sentence.starts_with('#') {
            continue;
        }
        let tree = cnl.parse_text(sentence).map_err(|error| PreludeError::Parse { line, error })?;
        let statements = translate(&tree, cnl.lexicon()).map_err(|error| PreludeError::Translate { line, error })?;
        out.push(TranslatedSentence { sentence: sentence.to_string(), line, statements });
    }
    Ok(out)
}

/// The shipped prelude, translated against `cnl` (whose lexicon must include
/// the base vocabulary).
pub fn prelude(cnl: &Cnl) -> Result<Vec<TranslatedSentence>, PreludeError> {
    translate_lines(PRELUDE, cnl)
}
