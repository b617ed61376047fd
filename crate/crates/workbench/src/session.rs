//! A loaded knowledge base: lexicon, code model, fact base, and the file
//! they came from. Both the CLI and the HTTP service work through this.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use cnldoc::cnl::{CnlError, CompletionSet, Lexicon, ParseTree, SentenceKind};
use cnldoc::cnl::lexicon::LexiconError;
use cnldoc::code_model::{
    base_lexicon, extract_doc_comments, ingest_model, prelude, translate_lines, CodeModelError, DocCommentError, Dump,
    PreludeError,
};
use cnldoc::cnl::Cnl;
use cnldoc::engine::{AnswerSet, BatchOutcome, ConsistencyReport, EngineError, FactBase, Provenance, Violation};
use cnldoc::logic::{translate, LogicError, Statement};
use serde::Serialize;
use thiserror::Error;
use walkdir::WalkDir;

use crate::config::{CommentSyntax, ConfigError, SessionConfig};
use crate::kbfile::{KbError, KbFile, LineKind, PreludeRef};

/// Failures that stop a session from loading or a file operation from
/// completing.
#[derive(Debug, Error)]
pub enum SessionError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Kb { path: PathBuf, source: KbError },
    #[error("{path}:{line}: {source}")]
    Lexicon { path: PathBuf, line: usize, source: LexiconError },
    #[error("{path}: {source}")]
    Dump { path: PathBuf, source: CodeModelError },
    #[error("{path}: {source}")]
    Prelude { path: PathBuf, source: PreludeError },
}

/// Problems with a sentence or question supplied by the user.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SentenceError {
    #[error(transparent)]
    Syntax(#[from] CnlError),
    #[error(transparent)]
    Translation(#[from] LogicError),
    #[error("questions cannot be added to the knowledge base")]
    Question,
    #[error("not a question")]
    NotAQuestion,
    #[error("not in the knowledge base: {0}")]
    NotPresent(String),
    #[error("the knowledge base has {0} violation(s); resolve them before asking")]
    Inconsistent(usize),
}

impl From<EngineError> for SentenceError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::NotAssertable => SentenceError::Question,
            EngineError::NotPresent(s) => SentenceError::NotPresent(s),
            EngineError::Inconsistent(n) => SentenceError::Inconsistent(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum QuarantineReason {
    Syntax { message: String },
    Untranslatable { message: String },
    Question,
    Rejected { report: ConsistencyReport },
}

impl fmt::Display for QuarantineReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuarantineReason::Syntax { message } | QuarantineReason::Untranslatable { message } => f.write_str(message),
            QuarantineReason::Question => f.write_str("questions are not documentation"),
            QuarantineReason::Rejected { report } => {
                let v = &report.violations[0];
                let bindings: Vec<String> = v.bindings.iter().map(|(k, c)| format!("{k} = {c}")).collect();
                write!(f, "inconsistent with the knowledge base ({})", bindings.join(", "))
            }
        }
    }
}

/// A documentation sentence kept out of the base.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Quarantined {
    pub file: String,
    pub line: usize,
    pub sentence: String,
    pub reason: QuarantineReason,
    #[serde(skip)]
    in_kb: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub consistent: bool,
    pub violations: Vec<Violation>,
    pub quarantined: Vec<Quarantined>,
}

impl CheckReport {
    pub fn is_clean(&self) -> bool {
        self.consistent && self.quarantined.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        if self.consistent {
            out.push_str("consistent, 0 violations\n");
        } else {
            out.push_str(&format!("inconsistent, {} violation(s)\n", self.violations.len()));
            out.push_str(&ConsistencyReport { violations: self.violations.clone() }.explain());
        }
        if !self.quarantined.is_empty() {
            out.push_str(&format!("{} quarantined sentence(s):\n", self.quarantined.len()));
            for q in &self.quarantined {
                out.push_str(&format!("{}:{}: {}\n  {}\n", q.file, q.line, q.sentence, q.reason));
                if let QuarantineReason::Rejected { report } = &q.reason {
                    for line in report.explain().lines() {
                        out.push_str(&format!("  {line}\n"));
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum AddOutcome {
    Accepted { ids: Vec<usize>, duplicate: bool },
    Rejected { report: ConsistencyReport, explanation: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseSummary {
    pub kind: String,
    pub tree: String,
    pub statements: Vec<String>,
    /// Set when the sentence parses but has no logical form.
    pub translation_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StatementInfo {
    pub id: usize,
    pub text: String,
    pub kind: String,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IngestSummary {
    pub facts: usize,
    pub report: ConsistencyReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtractSummary {
    pub found: usize,
    pub asserted: usize,
    pub quarantined: Vec<Quarantined>,
}

pub struct Session {
    config: SessionConfig,
    kb: KbFile,
    lexicon: Lexicon,
    cnl: Cnl,
    dump: Dump,
    base: FactBase,
    quarantine: Vec<Quarantined>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SessionError + '_ {
    move |source| SessionError::Io { path: path.to_path_buf(), source }
}

impl Session {
    pub fn load(config: SessionConfig) -> Result<Session, SessionError> {
        config.validate()?;
        let path = config.kb.clone();
        let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
        let kb = KbFile::parse(&text).map_err(|source| SessionError::Kb { path: path.clone(), source })?;

        let mut lexicon = base_lexicon();
        for line in kb.lexicon_entries() {
            lexicon
                .extend_from_text(&line.text)
                .map_err(|source| SessionError::Lexicon { path: path.clone(), line: line.number, source })?;
        }

        let mut dump = Dump::default();
        for rel in kb.dumps() {
            let dump_path = resolve(&path, rel);
            let text = std::fs::read_to_string(&dump_path).map_err(io_err(&dump_path))?;
            let part = Dump::parse(&text).map_err(|source| SessionError::Dump { path: dump_path.clone(), source })?;
            part.facts().map_err(|source| SessionError::Dump { path: dump_path.clone(), source })?;
            dump.merge(&part).map_err(|source| SessionError::Dump { path: dump_path.clone(), source })?;
        }
        let facts =
            ingest_model(&dump, &mut lexicon).map_err(|source| SessionError::Dump { path: path.clone(), source })?;
        let cnl = Cnl::new(lexicon.clone());

        let prelude_sentences = match kb.prelude() {
            PreludeRef::Builtin => {
                prelude(&cnl).map_err(|source| SessionError::Prelude { path: "<builtin prelude>".into(), source })?
            }
            PreludeRef::None => Vec::new(),
            PreludeRef::File(rel) => {
                let p = resolve(&path, &rel);
                let text = std::fs::read_to_string(&p).map_err(io_err(&p))?;
                translate_lines(&text, &cnl).map_err(|source| SessionError::Prelude { path: p.clone(), source })?
            }
        };

        let mut base = FactBase::new();
        base.insert_many(
            prelude_sentences
                .iter()
                .flat_map(|t| t.statements.iter().map(move |s| (s.clone(), Some(t.sentence.clone()), Provenance::Prelude)))
                .chain(facts.into_iter().map(|f| (f.statement, Some(f.sentence), Provenance::Ingested))),
        );

        let mut session = Session { config, kb, lexicon, cnl, dump, base, quarantine: Vec::new() };
        let kb_name = session.kb_name();
        let docs: Vec<(usize, String)> =
            session.kb.sentences().map(|(_, l)| (l.number, l.text.trim().to_string())).collect();
        for (line, sentence) in docs {
            let provenance = Provenance::Documented { file: kb_name.clone(), line };
            if let Some(q) = session.assert_documented(&sentence, provenance, &kb_name, line, true) {
                session.quarantine.push(q);
            }
        }
        for root in session.source_roots() {
            session.extract_root(&root);
        }
        Ok(session)
    }

    fn kb_name(&self) -> String {
        self.config.kb.file_name().map_or_else(|| self.config.kb.display().to_string(), |n| n.to_string_lossy().into())
    }

    fn source_roots(&self) -> Vec<PathBuf> {
        let mut roots: Vec<PathBuf> = self.kb.sources().into_iter().map(|r| resolve(&self.config.kb, r)).collect();
        for r in &self.config.source_roots {
            if !roots.contains(r) {
                roots.push(r.clone());
            }
        }
        roots
    }

    /// Asserts one documentation sentence; returns why it was kept out, if
    /// it was.
    fn assert_documented(
        &mut self,
        sentence: &str,
        provenance: Provenance,
        file: &str,
        line: usize,
        in_kb: bool,
    ) -> Option<Quarantined> {
        let quarantined = |reason| Quarantined { file: file.to_string(), line, sentence: sentence.to_string(), reason, in_kb };
        let statements = match self.translate(sentence) {
            Ok((_, s)) => s,
            Err(SentenceError::Syntax(e)) => return Some(quarantined(QuarantineReason::Syntax { message: e.to_string() })),
            Err(e) => return Some(quarantined(QuarantineReason::Untranslatable { message: e.to_string() })),
        };
        if statements.iter().any(|s| matches!(s, Statement::Query(_))) {
            return Some(quarantined(QuarantineReason::Question));
        }
        let items = statements.into_iter().map(|s| (s, Some(sentence.to_string()), provenance.clone())).collect();
        match self.base.assert_all(items).expect("questions filtered") {
            BatchOutcome::Accepted { .. } => None,
            BatchOutcome::Rejected(report) => Some(quarantined(QuarantineReason::Rejected { report })),
        }
    }

    fn translate(&self, sentence: &str) -> Result<(ParseTree, Vec<Statement>), SentenceError> {
        let tree = self.cnl.parse_text(sentence)?;
        let statements = translate(&tree, self.cnl.lexicon())?;
        Ok((tree, statements))
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn cnl(&self) -> &Cnl {
        &self.cnl
    }

    pub fn base(&self) -> &FactBase {
        &self.base
    }

    pub fn quarantined(&self) -> &[Quarantined] {
        &self.quarantine
    }

    pub fn kb_text(&self) -> String {
        let annotations: BTreeMap<usize, String> = self
            .quarantine
            .iter()
            .filter(|q| q.in_kb)
            .filter_map(|q| {
                let idx = self.kb.lines.iter().position(|l| l.kind == LineKind::Sentence && l.number == q.line)?;
                Some((idx, q.reason.to_string()))
            })
            .collect();
        self.kb.render(&annotations)
    }

    pub fn save(&self) -> Result<(), SessionError> {
        std::fs::write(&self.config.kb, self.kb_text()).map_err(io_err(&self.config.kb))
    }

    pub fn check(&self) -> CheckReport {
        let report = self.base.check();
        CheckReport { consistent: report.is_consistent(), violations: report.violations, quarantined: self.quarantine.clone() }
    }

    pub fn parse(&self, sentence: &str) -> Result<ParseSummary, SentenceError> {
        let tree = self.cnl.parse_text(sentence)?;
        let kind = match tree.kind {
            SentenceKind::Declarative => "declarative",
            SentenceKind::Question => "question",
        };
        let (statements, translation_error) = match translate(&tree, self.cnl.lexicon()) {
            Ok(s) => (s.iter().map(ToString::to_string).collect(), None),
            Err(e) => (Vec::new(), Some(e.to_string())),
        };
        Ok(ParseSummary { kind: kind.into(), tree: tree.render(), statements, translation_error })
    }

    /// Completions after `prefix`. A trailing word that is not yet complete
    /// filters the completions of the text before it.
    pub fn complete(&self, prefix: &str) -> Result<CompletionSet, SentenceError> {
        match self.cnl.complete_text(prefix) {
            Ok(set) => Ok(set),
            Err(CnlError::UnknownWord { span, .. })
                if span.end == prefix.chars().count() && !prefix.ends_with(char::is_whitespace) =>
            {
                let start: String = prefix.chars().take(span.start).collect();
                let partial: String = prefix.chars().skip(span.start).collect();
                let mut set = self.cnl.complete_text(&start)?;
                let at_start = start.trim().is_empty();
                set.items.retain(|i| {
                    let prefix_of = if at_start {
                        i.surface.to_lowercase().starts_with(&partial.to_lowercase())
                    } else {
                        i.surface.starts_with(&partial)
                    };
                    prefix_of && i.surface != partial
                });
                set.sentence_end = false;
                set.any_number &= partial.chars().all(|c| c.is_ascii_digit());
                Ok(set)
            }
            Err(e) => Err(e.into()),
        }
    }

    pub fn add(&mut self, sentence: &str) -> Result<AddOutcome, SentenceError> {
        let sentence = sentence.trim();
        let (_, statements) = self.translate(sentence)?;
        if statements.iter().any(|s| matches!(s, Statement::Query(_))) {
            return Err(SentenceError::Question);
        }
        let items = statements.into_iter().map(|s| (s, Some(sentence.to_string()), Provenance::Interactive)).collect();
        Ok(match self.base.assert_all(items)? {
            BatchOutcome::Accepted { ids, new } => {
                if new > 0 {
                    self.kb.push_sentence(sentence);
                }
                AddOutcome::Accepted { ids, duplicate: new == 0 }
            }
            BatchOutcome::Rejected(report) => AddOutcome::Rejected { explanation: report.explain(), report },
        })
    }

    /// Retracts the statements of `sentence` and drops its line from the kb
    /// file. A quarantined line is removed from the file only.
    pub fn remove(&mut self, sentence: &str) -> Result<ConsistencyReport, SentenceError> {
        let sentence = sentence.trim();
        let quarantined = self.quarantine.iter().position(|q| q.in_kb && q.sentence == sentence);
        if let Some(i) = quarantined {
            self.quarantine.remove(i);
            self.kb.remove_sentence(sentence);
            return Ok(self.base.check());
        }
        let (_, statements) = self.translate(sentence)?;
        let mut ids = Vec::new();
        for s in &statements {
            ids.push(self.base.find(s).ok_or_else(|| SentenceError::NotPresent(sentence.to_string()))?);
        }
        let report = self.base.retract_ids(&ids)?;
        self.kb.remove_sentence(sentence);
        Ok(report)
    }

    pub fn ask(&self, question: &str) -> Result<AnswerSet, SentenceError> {
        let (_, statements) = self.translate(question)?;
        match statements.as_slice() {
            [Statement::Query(q)] => Ok(self.base.ask(q)?),
            _ => Err(SentenceError::NotAQuestion),
        }
    }

    pub fn statements(&self) -> Vec<StatementInfo> {
        self.base
            .statements()
            .iter()
            .map(|r| StatementInfo {
                id: r.id,
                text: r.label(),
                kind: format!("{:?}", r.statement.kind()).to_lowercase(),
                provenance: r.provenance.clone(),
            })
            .collect()
    }

    /// Adds the records of a dump file. With `replace` the dump becomes the
    /// whole code model and the session is rebuilt.
    pub fn ingest(&mut self, dump_path: &Path, replace: bool) -> Result<IngestSummary, SessionError> {
        let text = std::fs::read_to_string(dump_path).map_err(io_err(dump_path))?;
        let part = Dump::parse(&text).map_err(|source| SessionError::Dump { path: dump_path.into(), source })?;
        let rel = relative_to_kb(&self.config.kb, dump_path);
        if replace {
            let facts = part.facts().map_err(|source| SessionError::Dump { path: dump_path.into(), source })?.len();
            self.kb.replace_dumps(&rel);
            self.save()?;
            *self = Session::load(self.config.clone())?;
            return Ok(IngestSummary { facts, report: self.base.check() });
        }
        let mut merged = self.dump.clone();
        merged.merge(&part).map_err(|source| SessionError::Dump { path: dump_path.into(), source })?;
        let mut lexicon = self.lexicon.clone();
        let facts =
            ingest_model(&part, &mut lexicon).map_err(|source| SessionError::Dump { path: dump_path.into(), source })?;
        let before = self.base.statements().len();
        self.base.insert_many(facts.into_iter().map(|f| (f.statement, Some(f.sentence), Provenance::Ingested)));
        let added = self.base.statements().len() - before;
        self.cnl = Cnl::new(lexicon.clone());
        self.lexicon = lexicon;
        self.dump = merged;
        self.kb.add_dump(&rel);
        Ok(IngestSummary { facts: added, report: self.base.check() })
    }

    /// Collects tagged comments under `root`, asserts them, and records the
    /// root in the kb file.
    pub fn extract(&mut self, root: &Path) -> Result<ExtractSummary, SessionError> {
        if !root.exists() {
            return Err(ConfigError::Missing { what: "source root", path: root.into() }.into());
        }
        let summary = self.extract_root(root);
        self.kb.add_source(&relative_to_kb(&self.config.kb, root));
        Ok(summary)
    }

    fn extract_root(&mut self, root: &Path) -> ExtractSummary {
        let syntax: CommentSyntax = self.config.comment_syntax.clone();
        let mut summary = ExtractSummary { found: 0, asserted: 0, quarantined: Vec::new() };
        let base_dir = self.config.kb.parent().map(Path::to_path_buf).unwrap_or_default();
        let files = WalkDir::new(root).sort_by_file_name().into_iter().filter_map(Result::ok).filter(|e| e.file_type().is_file());
        for entry in files {
            let path = entry.path();
            let Some(prefixes) = syntax.prefixes(path) else { continue };
            let Ok(text) = std::fs::read_to_string(path) else { continue };
            let name = path.strip_prefix(&base_dir).unwrap_or(path).display().to_string();
            let comments = match extract_doc_comments(&name, &text, prefixes) {
                Ok(c) => c,
                Err(DocCommentError::Malformed { file, line, text }) => {
                    let q = Quarantined {
                        file,
                        line,
                        sentence: text,
                        reason: QuarantineReason::Syntax { message: "tagged comment does not end with `.` or `?`".into() },
                        in_kb: false,
                    };
                    summary.quarantined.push(q.clone());
                    self.quarantine.push(q);
                    continue;
                }
            };
            for c in comments {
                summary.found += 1;
                let before = self.base.statements().len();
                let provenance = Provenance::Documented { file: c.file.clone(), line: c.line };
                match self.assert_documented(&c.sentence, provenance, &c.file, c.line, false) {
                    Some(q) => {
                        if !self.quarantine.contains(&q) {
                            self.quarantine.push(q.clone());
                        }
                        summary.quarantined.push(q);
                    }
                    None if self.base.statements().len() > before => summary.asserted += 1,
                    None => {}
                }
            }
        }
        summary
    }
}

fn resolve(kb: &Path, rel: &str) -> PathBuf {
    kb.parent().unwrap_or(Path::new(".")).join(rel)
}

/// `path` relative to the kb file's directory when it lies below it,
/// otherwise absolute.
fn relative_to_kb(kb: &Path, path: &Path) -> String {
    let abs = |p: &Path| std::fs::canonicalize(p).unwrap_or_else(|_| p.to_path_buf());
    let dir = abs(kb.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new(".")));
    let target = abs(path);
    match target.strip_prefix(&dir) {
        Ok(rel) => rel.display().to_string(),
        Err(_) => target.display().to_string(),
    }
}
