//! User-extensible dictionary of content words.
//!
//! Entries are read from a line-oriented text format:
//!
//! ```text
//! # comment
//! proper-name | Simon Denier
//! proper-name | The EventManager Tutorial
//! noun | code element | code elements
//! transitive-verb | maintains | maintain | maintained
//! transitive-verb | belongs to | belong to | belonged to
//! of-construct | member of | members of
//! adjective-preposition | related | to
//! ```
//!
//! A proper name starting with `The ` is stored without the article and
//! flagged as definite. A transitive verb whose third-singular form contains
//! a space carries a fused preposition and does not allow the passive unless
//! an explicit trailing `passive` field says otherwise (`no-passive` forces
//! the opposite).

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    ProperName,
    Noun,
    TransitiveVerb,
    OfConstruct,
    AdjectivePreposition,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::ProperName,
        Category::Noun,
        Category::TransitiveVerb,
        Category::OfConstruct,
        Category::AdjectivePreposition,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Category::ProperName => "proper-name",
            Category::Noun => "noun",
            Category::TransitiveVerb => "transitive-verb",
            Category::OfConstruct => "of-construct",
            Category::AdjectivePreposition => "adjective-preposition",
        }
    }

    pub fn from_label(label: &str) -> Option<Category> {
        Category::ALL.into_iter().find(|c| c.label() == label)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A morphological slot of an entry, i.e. which surface of the entry a token uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FormSlot {
    Name,
    Singular,
    Plural,
    ThirdSingular,
    BarePlural,
    PastParticiple,
    OfSingular,
    OfPlural,
    AdjectivePreposition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Forms {
    ProperName { name: String },
    Noun { singular: String, plural: String },
    TransitiveVerb { third_singular: String, plural: String, past_participle: String },
    OfConstruct { singular: String, plural: String },
    AdjectivePreposition { adjective: String, preposition: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexEntry {
    pub forms: Forms,
    /// Proper names written with a definite article ("The EventManager Tutorial").
    pub definite: bool,
    pub passive_allowed: bool,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LexiconError {
    #[error("line {line}: unknown category `{category}`")]
    UnknownCategory { line: usize, category: String },
    #[error("line {line}: {category} needs {expected} form(s), found {found}")]
    FormCount { line: usize, category: Category, expected: usize, found: usize },
    #[error("line {line}: empty form")]
    EmptyForm { line: usize },
    #[error("line {line}: of-construct form `{form}` must end with ` of`")]
    MissingOf { line: usize, form: String },
    #[error("{category} surface `{surface}` is already defined")]
    Duplicate { category: Category, surface: String },
    #[error("line {line}: unknown flag `{flag}`")]
    UnknownFlag { line: usize, flag: String },
}

impl LexEntry {
    pub fn proper_name(surface: &str) -> LexEntry {
        let (name, definite) = match surface.strip_prefix("The ") {
            Some(rest) if !rest.is_empty() => (rest.to_string(), true),
            _ => (surface.to_string(), false),
        };
        LexEntry { forms: Forms::ProperName { name }, definite, passive_allowed: false }
    }

    pub fn noun(singular: &str, plural: &str) -> LexEntry {
        LexEntry {
            forms: Forms::Noun { singular: singular.into(), plural: plural.into() },
            definite: false,
            passive_allowed: false,
        }
    }

    pub fn verb(third_singular: &str, plural: &str, past_participle: &str) -> LexEntry {
        LexEntry {
            forms: Forms::TransitiveVerb {
                third_singular: third_singular.into(),
                plural: plural.into(),
                past_participle: past_participle.into(),
            },
            definite: false,
            passive_allowed: !third_singular.contains(' '),
        }
    }

    pub fn of_construct(singular: &str, plural: &str) -> LexEntry {
        LexEntry {
            forms: Forms::OfConstruct { singular: singular.into(), plural: plural.into() },
            definite: false,
            passive_allowed: false,
        }
    }

    pub fn adjective(adjective: &str, preposition: &str) -> LexEntry {
        LexEntry {
            forms: Forms::AdjectivePreposition {
                adjective: adjective.into(),
                preposition: preposition.into(),
            },
            definite: false,
            passive_allowed: false,
        }
    }

    pub fn category(&self) -> Category {
        match self.forms {
            Forms::ProperName { .. } => Category::ProperName,
            Forms::Noun { .. } => Category::Noun,
            Forms::TransitiveVerb { .. } => Category::TransitiveVerb,
            Forms::OfConstruct { .. } => Category::OfConstruct,
            Forms::AdjectivePreposition { .. } => Category::AdjectivePreposition,
        }
    }

    /// The name the logic uses for this entry: the proper name without article,
    /// the noun singular, the verb third-singular, the of-construct without
    /// `of`, or the adjective with its preposition.
    pub fn lemma(&self) -> String {
        match &self.forms {
            Forms::ProperName { name } => name.clone(),
            Forms::Noun { singular, .. } => singular.clone(),
            Forms::TransitiveVerb { third_singular, .. } => third_singular.clone(),
            Forms::OfConstruct { singular, .. } => singular.clone(),
            Forms::AdjectivePreposition { adjective, preposition } => {
                format!("{adjective} {preposition}")
            }
        }
    }

    /// Every (slot, surface) pair of the entry as it appears mid-sentence.
    pub fn surfaces(&self) -> Vec<(FormSlot, String)> {
        match &self.forms {
            Forms::ProperName { name } => {
                let surface = if self.definite { format!("the {name}") } else { name.clone() };
                vec![(FormSlot::Name, surface)]
            }
            Forms::Noun { singular, plural } => {
                vec![(FormSlot::Singular, singular.clone()), (FormSlot::Plural, plural.clone())]
            }
            Forms::TransitiveVerb { third_singular, plural, past_participle } => vec![
                (FormSlot::ThirdSingular, third_singular.clone()),
                (FormSlot::BarePlural, plural.clone()),
                (FormSlot::PastParticiple, past_participle.clone()),
            ],
            Forms::OfConstruct { singular, plural } => {
                vec![(FormSlot::OfSingular, format!("{singular} of")), (FormSlot::OfPlural, format!("{plural} of"))]
            }
            Forms::AdjectivePreposition { adjective, preposition } => {
                vec![(FormSlot::AdjectivePreposition, format!("{adjective} {preposition}"))]
            }
        }
    }

    pub fn surface(&self, slot: FormSlot) -> Option<String> {
        self.surfaces().into_iter().find(|(s, _)| *s == slot).map(|(_, text)| text)
    }

    /// Serializes the entry back to a lexicon file line.
    pub fn to_line(&self) -> String {
        let cat = self.category().label();
        match &self.forms {
            Forms::ProperName { name } => {
                if self.definite {
                    format!("{cat} | The {name}")
                } else {
                    format!("{cat} | {name}")
                }
            }
            Forms::Noun { singular, plural } => format!("{cat} | {singular} | {plural}"),
            Forms::TransitiveVerb { third_singular, plural, past_participle } => {
                let mut line = format!("{cat} | {third_singular} | {plural} | {past_participle}");
                let default = !third_singular.contains(' ');
                if self.passive_allowed != default {
                    line.push_str(if self.passive_allowed { " | passive" } else { " | no-passive" });
                }
                line
            }
            Forms::OfConstruct { singular, plural } => {
                format!("{cat} | {singular} of | {plural} of")
            }
            Forms::AdjectivePreposition { adjective, preposition } => {
                format!("{cat} | {adjective} | {preposition}")
            }
        }
    }
}

/// Index of an entry inside its lexicon.
pub type EntryId = usize;

/// An immutable-by-convention dictionary. Updates go through [`Lexicon::add`]
/// on an owned value; callers that share a lexicon clone it first.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: Vec<LexEntry>,
    by_surface: HashMap<String, Vec<(EntryId, FormSlot)>>,
    max_words: usize,
}

impl Lexicon {
    pub fn new() -> Lexicon {
        Lexicon::default()
    }

    pub fn parse(text: &str) -> Result<Lexicon, LexiconError> {
        let mut lexicon = Lexicon::new();
        lexicon.extend_from_text(text)?;
        Ok(lexicon)
    }

    pub fn extend_from_text(&mut self, text: &str) -> Result<(), LexiconError> {
        for (idx, raw) in text.lines().enumerate() {
            if let Some(entry) = parse_line(raw, idx + 1)? {
                self.add(entry)?;
            }
        }
        Ok(())
    }

    pub fn add(&mut self, entry: LexEntry) -> Result<EntryId, LexiconError> {
        let category = entry.category();
        let surfaces = entry.surfaces();
        for (_, surface) in &surfaces {
            if let Some(hits) = self.by_surface.get(surface) {
                if hits.iter().any(|(id, _)| self.entries[*id].category() == category) {
                    return Err(LexiconError::Duplicate { category, surface: surface.clone() });
                }
            }
        }
        let id = self.entries.len();
        for (slot, surface) in surfaces {
            self.max_words = self.max_words.max(surface.split(' ').count());
            let hits = self.by_surface.entry(surface).or_default();
            // Entries whose forms coincide (e.g. a noun with identical singular
            // and plural) register one hit per slot.
            hits.push((id, slot));
        }
        self.entries.push(entry);
        Ok(id)
    }

    pub fn entries(&self) -> &[LexEntry] {
        &self.entries
    }

    pub fn entry(&self, id: EntryId) -> &LexEntry {
        &self.entries[id]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, surface: &str) -> &[(EntryId, FormSlot)] {
        self.by_surface.get(surface).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Longest surface measured in space-separated words.
    pub fn max_words(&self) -> usize {
        self.max_words
    }

    pub fn find(&self, category: Category, lemma: &str) -> Option<EntryId> {
        self.entries.iter().position(|e| e.category() == category && e.lemma() == lemma)
    }

    pub fn has_proper_name(&self, name: &str) -> bool {
        self.find(Category::ProperName, name).is_some()
    }

    /// Any entry, of any category, that uses `surface` as one of its forms.
    pub fn surface_in_use(&self, surface: &str) -> bool {
        self.by_surface.contains_key(surface)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for entry in &self.entries {
            out.push_str(&entry.to_line());
            out.push('\n');
        }
        out
    }
}

fn parse_line(raw: &str, line: usize) -> Result<Option<LexEntry>, LexiconError> {
    let text = match raw.find('#') {
        Some(pos) => &raw[..pos],
        None => raw,
    };
    let text = text.trim();
    if text.is_empty() {
        return Ok(None);
    }
    let fields: Vec<String> =
        text.split('|').map(|f| f.split_whitespace().collect::<Vec<_>>().join(" ")).collect();
    let category = Category::from_label(&fields[0])
        .ok_or_else(|| LexiconError::UnknownCategory { line, category: fields[0].clone() })?;
    let forms = &fields[1..];
    if forms.iter().any(String::is_empty) {
        return Err(LexiconError::EmptyForm { line });
    }
    let expect = |n: usize, found: usize| -> Result<(), LexiconError> {
        if found == n {
            Ok(())
        } else {
            Err(LexiconError::FormCount { line, category, expected: n, found })
        }
    };
    let entry = match category {
        Category::ProperName => {
            expect(1, forms.len())?;
            LexEntry::proper_name(&forms[0])
        }
        Category::Noun => {
            expect(2, forms.len())?;
            LexEntry::noun(&forms[0], &forms[1])
        }
        Category::TransitiveVerb => {
            let (forms, flag) = match forms.len() {
                4 => (&forms[..3], Some(forms[3].as_str())),
                _ => (forms, None),
            };
            expect(3, forms.len())?;
            let mut entry = LexEntry::verb(&forms[0], &forms[1], &forms[2]);
            match flag {
                None => {}
                Some("passive") => entry.passive_allowed = true,
                Some("no-passive") => entry.passive_allowed = false,
                Some(other) => return Err(LexiconError::UnknownFlag { line, flag: other.into() }),
            }
            entry
        }
        Category::OfConstruct => {
            expect(2, forms.len())?;
            let strip = |form: &str| -> Result<String, LexiconError> {
                form.strip_suffix(" of")
                    .filter(|s| !s.is_empty())
                    .map(str::to_string)
                    .ok_or_else(|| LexiconError::MissingOf { line, form: form.to_string() })
            };
            LexEntry::of_construct(&strip(&forms[0])?, &strip(&forms[1])?)
        }
        Category::AdjectivePreposition => {
            expect(2, forms.len())?;
            LexEntry::adjective(&forms[0], &forms[1])
        }
    };
    Ok(Some(entry))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_category() {
        let lex = Lexicon::parse(
            "# people\nproper-name | Simon Denier\nproper-name | The EventManager Tutorial\n\
             noun | code element | code elements\n\
             transitive-verb | maintains | maintain | maintained\n\
             transitive-verb | belongs to | belong to | belonged to\n\
             of-construct | member of | members of\n\
             adjective-preposition | related | to\n",
        )
        .unwrap();
        assert_eq!(lex.len(), 7);
        let tutorial = lex.entry(1);
        assert!(tutorial.definite);
        assert_eq!(tutorial.lemma(), "EventManager Tutorial");
        assert_eq!(tutorial.surfaces()[0].1, "the EventManager Tutorial");
        assert!(lex.entry(3).passive_allowed);
        assert!(!lex.entry(4).passive_allowed);
        assert_eq!(lex.entry(5).surface(FormSlot::OfPlural).unwrap(), "members of");
        assert_eq!(lex.entry(5).lemma(), "member");
        assert_eq!(lex.entry(6).lemma(), "related to");
        assert_eq!(lex.max_words(), 3);
    }

    #[test]
    fn rejects_duplicate_surface_in_same_category() {
        let err = Lexicon::parse("noun | class | classes\nnoun | class | clazzes\n").unwrap_err();
        assert_eq!(err, LexiconError::Duplicate { category: Category::Noun, surface: "class".into() });
    }

    #[test]
    fn same_surface_across_categories_is_allowed() {
        let lex = Lexicon::parse("noun | test | tests\nproper-name | test\n").unwrap();
        assert_eq!(lex.lookup("test").len(), 2);
    }

    #[test]
    fn form_count_and_empty_forms_are_checked() {
        assert!(matches!(
            Lexicon::parse("noun | class\n"),
            Err(LexiconError::FormCount { expected: 2, found: 1, .. })
        ));
        assert!(matches!(Lexicon::parse("noun | class | \n"), Err(LexiconError::EmptyForm { .. })));
        assert!(matches!(
            Lexicon::parse("of-construct | member | members\n"),
            Err(LexiconError::MissingOf { .. })
        ));
        assert!(matches!(
            Lexicon::parse("adverb | quickly\n"),
            Err(LexiconError::UnknownCategory { .. })
        ));
    }

    #[test]
    fn passive_flag_overrides_default() {
        let lex = Lexicon::parse(
            "transitive-verb | depends on | depend on | depended on | passive\n\
             transitive-verb | likes | like | liked | no-passive\n",
        )
        .unwrap();
        assert!(lex.entry(0).passive_allowed);
        assert!(!lex.entry(1).passive_allowed);
    }

    #[test]
    fn lines_round_trip() {
        let text = "proper-name | The Medical Database\nnoun | hash table | hash tables\n\
                    transitive-verb | depends on | depend on | depended on\n\
                    of-construct | part of | parts of\nadjective-preposition | related | to\n";
        let lex = Lexicon::parse(text).unwrap();
        assert_eq!(lex.to_text(), text);
    }
}
