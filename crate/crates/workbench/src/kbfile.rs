//! The knowledge-base file: controlled-English text with a few directives.
//!
//! ```text
//! # comment
//! @prelude builtin          (or `none`, or a path to a sentence file)
//! @lexicon
//! noun | component | components
//! @dump model.dump          (one line per dump; paths relative to this file)
//! @source src               (directories scanned for tagged comments)
//! @sentences
//! Core is a component.
//! ```
//!
//! Lines after `@lexicon` are lexicon entries, lines after `@sentences` are
//! documentation sentences. Lines before any section directive are
//! sentences. Saving writes every line back as read; sentences excluded from
//! the base get a `# quarantined:` comment above them, which loading drops.

use std::collections::BTreeMap;

use thiserror::Error;

pub const QUARANTINE_MARK: &str = "# quarantined:";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PreludeRef {
    Builtin,
    None,
    File(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LineKind {
    Blank,
    Comment,
    Prelude(PreludeRef),
    LexiconSection,
    SentenceSection,
    Dump(String),
    Source(String),
    LexiconEntry,
    Sentence,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KbLine {
    /// Line number in the file as read; 0 for lines added since.
    pub number: usize,
    pub text: String,
    pub kind: LineKind,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum KbError {
    #[error("line {line}: unknown directive `{text}`")]
    UnknownDirective { line: usize, text: String },
    #[error("line {line}: `{directive}` needs an argument")]
    MissingArgument { line: usize, directive: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KbFile {
    pub lines: Vec<KbLine>,
}

impl KbFile {
    pub fn parse(text: &str) -> Result<KbFile, KbError> {
        let mut lines = Vec::new();
        let mut in_lexicon = false;
        for (i, raw) in text.lines().enumerate() {
            let number = i + 1;
            let trimmed = raw.trim();
            if trimmed.starts_with(QUARANTINE_MARK) {
                continue;
            }
            let kind = if trimmed.is_empty() {
                LineKind::Blank
            } else if trimmed.starts_with('#') {
                LineKind::Comment
            } else if let Some(directive) = trimmed.strip_prefix('@') {
                let (name, arg) = match directive.split_once(char::is_whitespace) {
                    Some((n, a)) => (n, a.trim()),
                    None => (directive, ""),
                };
                let need = |kind: fn(String) -> LineKind| {
                    if arg.is_empty() {
                        Err(KbError::MissingArgument { line: number, directive: name.to_string() })
                    } else {
                        Ok(kind(arg.to_string()))
                    }
                };
                match name {
                    "prelude" => LineKind::Prelude(match arg {
                        "" | "builtin" => PreludeRef::Builtin,
                        "none" => PreludeRef::None,
                        path => PreludeRef::File(path.to_string()),
                    }),
                    "lexicon" => {
                        in_lexicon = true;
                        LineKind::LexiconSection
                    }
                    "sentences" => {
                        in_lexicon = false;
                        LineKind::SentenceSection
                    }
                    "dump" => need(LineKind::Dump)?,
                    "source" => need(LineKind::Source)?,
                    _ => return Err(KbError::UnknownDirective { line: number, text: trimmed.to_string() }),
                }
            } else if in_lexicon {
                LineKind::LexiconEntry
            } else {
                LineKind::Sentence
            };
            lines.push(KbLine { number, text: raw.to_string(), kind });
        }
        Ok(KbFile { lines })
    }

    /// Renders the file, annotating the lines at the given indexes.
    pub fn render(&self, quarantine: &BTreeMap<usize, String>) -> String {
        let mut out = String::new();
        for (i, line) in self.lines.iter().enumerate() {
            if let Some(reason) = quarantine.get(&i) {
                let reason = reason.lines().next().unwrap_or_default();
                out.push_str(&format!("{QUARANTINE_MARK} {reason}\n"));
            }
            out.push_str(&line.text);
            out.push('\n');
        }
        out
    }

    pub fn prelude(&self) -> PreludeRef {
        self.lines
            .iter()
            .find_map(|l| match &l.kind {
                LineKind::Prelude(p) => Some(p.clone()),
                _ => None,
            })
            .unwrap_or(PreludeRef::Builtin)
    }

    pub fn lexicon_entries(&self) -> impl Iterator<Item = &KbLine> {
        self.lines.iter().filter(|l| l.kind == LineKind::LexiconEntry)
    }

    pub fn dumps(&self) -> Vec<&str> {
        self.lines
            .iter()
            .filter_map(|l| match &l.kind {
                LineKind::Dump(p) => Some(p.as_str()),
                _ => None,
            })
            .collect()
    }

    pub fn sources(&self) -> Vec<&str> {
        self.lines
            .iter()
            .filter_map(|l| match &l.kind {
                LineKind::Source(p) => Some(p.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Sentence lines with their indexes.
    pub fn sentences(&self) -> impl Iterator<Item = (usize, &KbLine)> {
        self.lines.iter().enumerate().filter(|(_, l)| l.kind == LineKind::Sentence)
    }

    /// Appends a sentence, opening a sentence section if the file does not
    /// end in one. Returns the index of the new line.
    pub fn push_sentence(&mut self, sentence: &str) -> usize {
        let in_sentences = self
            .lines
            .iter()
            .rev()
            .find_map(|l| match l.kind {
                LineKind::LexiconSection => Some(false),
                LineKind::SentenceSection => Some(true),
                _ => None,
            })
            .unwrap_or(true);
        if !in_sentences {
            self.lines.push(KbLine { number: 0, text: "@sentences".into(), kind: LineKind::SentenceSection });
        }
        self.lines.push(KbLine { number: 0, text: sentence.to_string(), kind: LineKind::Sentence });
        self.lines.len() - 1
    }

    /// Removes sentence lines whose text equals `sentence`; returns how many.
    pub fn remove_sentence(&mut self, sentence: &str) -> usize {
        let before = self.lines.len();
        self.lines.retain(|l| !(l.kind == LineKind::Sentence && l.text.trim() == sentence.trim()));
        before - self.lines.len()
    }

    /// Adds a directive line after the last one of its kind, or else before
    /// the first section header.
    fn insert_directive(&mut self, text: String, kind: LineKind) {
        let same = self.lines.iter().rposition(|l| std::mem::discriminant(&l.kind) == std::mem::discriminant(&kind));
        let at = same.map_or_else(
            || {
                self.lines
                    .iter()
                    .position(|l| {
                        matches!(
                            l.kind,
                            LineKind::LexiconSection | LineKind::SentenceSection | LineKind::Sentence | LineKind::LexiconEntry
                        )
                    })
                    .unwrap_or(self.lines.len())
            },
            |p| p + 1,
        );
        self.lines.insert(at, KbLine { number: 0, text, kind });
    }

    pub fn add_dump(&mut self, path: &str) {
        if !self.dumps().contains(&path) {
            self.insert_directive(format!("@dump {path}"), LineKind::Dump(path.to_string()));
        }
    }

    /// Replaces every dump reference with `path`.
    pub fn replace_dumps(&mut self, path: &str) {
        let first = self.lines.iter().position(|l| matches!(l.kind, LineKind::Dump(_)));
        self.lines.retain(|l| !matches!(l.kind, LineKind::Dump(_)));
        let line = KbLine { number: 0, text: format!("@dump {path}"), kind: LineKind::Dump(path.to_string()) };
        match first {
            Some(i) => self.lines.insert(i, line),
            None => self.insert_directive(line.text, line.kind),
        }
    }

    pub fn add_source(&mut self, path: &str) {
        if !self.sources().contains(&path) {
            self.insert_directive(format!("@source {path}"), LineKind::Source(path.to_string()));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "# doc\n@prelude none\n\n@lexicon\nnoun | component | components\n@dump a.dump\n\
                          @sentences\nCore is a component.\n# note\nShapes is a component.\n";

    #[test]
    fn classifies_lines() {
        let kb = KbFile::parse(SAMPLE).unwrap();
        assert_eq!(kb.prelude(), PreludeRef::None);
        assert_eq!(kb.lexicon_entries().count(), 1);
        assert_eq!(kb.dumps(), vec!["a.dump"]);
        let s: Vec<(usize, &str)> = kb.sentences().map(|(_, l)| (l.number, l.text.as_str())).collect();
        assert_eq!(s, vec![(8, "Core is a component."), (10, "Shapes is a component.")]);
    }

    #[test]
    fn render_round_trips_and_strips_annotations() {
        let kb = KbFile::parse(SAMPLE).unwrap();
        assert_eq!(kb.render(&BTreeMap::new()), SAMPLE);
        let idx = kb.sentences().next().unwrap().0;
        let annotated = kb.render(&BTreeMap::from([(idx, "unknown word `Core`".to_string())]));
        assert!(annotated.contains("# quarantined: unknown word `Core`\nCore is a component."));
        assert_eq!(KbFile::parse(&annotated).unwrap().render(&BTreeMap::new()), SAMPLE);
    }

    #[test]
    fn sentences_before_sections_and_defaults() {
        let kb = KbFile::parse("Core is a component.\n").unwrap();
        assert_eq!(kb.prelude(), PreludeRef::Builtin);
        assert_eq!(kb.sentences().count(), 1);
    }

    #[test]
    fn edits() {
        let mut kb = KbFile::parse("@lexicon\nnoun | component | components\n").unwrap();
        kb.push_sentence("Core is a component.");
        kb.add_dump("m.dump");
        kb.add_dump("m.dump");
        kb.add_source("src");
        kb.add_dump("n.dump");
        let text = kb.render(&BTreeMap::new());
        assert_eq!(text, "@dump m.dump\n@dump n.dump\n@source src\n@lexicon\nnoun | component | components\n@sentences\nCore is a component.\n");
        let mut kb = KbFile::parse(&text).unwrap();
        assert_eq!(kb.sentences().count(), 1);
        kb.replace_dumps("n.dump");
        assert_eq!(kb.dumps(), vec!["n.dump"]);
        assert_eq!(kb.remove_sentence("Core is a component."), 1);
        assert_eq!(kb.sentences().count(), 0);
    }

    #[test]
    fn bad_directives() {
        assert!(matches!(KbFile::parse("@frobnicate\n"), Err(KbError::UnknownDirective { line: 1, .. })));
        assert!(matches!(KbFile::parse("x\n@dump\n"), Err(KbError::MissingArgument { line: 2, .. })));
    }
}
