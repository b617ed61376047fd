//! The `cnldoc` command line.
//!
//! Exit codes: 0 success or consistent, 1 violations (or a rejected
//! sentence), 2 usage, load and parse errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use cnldoc::cnl::{CnlError, CompletionSet};
use serde::Serialize;

use crate::bench;
use crate::config::{SessionConfig, CONFIG_FILE};
use crate::server;
use crate::session::{AddOutcome, Session, SentenceError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATIONS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "cnldoc", version, about = "Controlled-English documentation checked against the code")]
pub struct Cli {
    /// Configuration file. Defaults to ./cnldoc.toml when it exists.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Knowledge-base file; overrides the one in the configuration.
    #[arg(long, global = true)]
    pub kb: Option<PathBuf>,
    /// Print results as JSON, in the same shape the HTTP service returns.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Add the facts of a code-model dump.
    Ingest {
        dump: PathBuf,
        /// Make this dump the whole code model instead of adding to it.
        #[arg(long)]
        replace: bool,
    },
    /// Report violations and quarantined sentences.
    Check,
    /// Add a sentence to the knowledge base.
    Add { sentence: String },
    /// Remove a sentence from the knowledge base.
    Remove { sentence: String },
    /// Answer a question.
    Ask { question: String },
    /// List the words that may follow a prefix.
    Complete {
        #[arg(default_value = "")]
        prefix: String,
    },
    /// Show the syntax tree and logical form of a sentence.
    Parse { sentence: String },
    /// Collect `@cnl:` comments under a source directory and add them.
    Extract { root: PathBuf },
    /// Serve the HTTP API.
    Serve {
        #[arg(long)]
        port: Option<u16>,
    },
    /// Time load, add, check and inconsistency detection on a synthetic base.
    Bench {
        facts: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

/// Runs the command line and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(message) => {
            let _ = writeln!(err, "error: {message}");
            EXIT_USAGE
        }
    }
}

fn config_for(cli: &Cli) -> Result<SessionConfig, String> {
    let path = match &cli.config {
        Some(p) => Some(p.clone()),
        None => Some(PathBuf::from(CONFIG_FILE)).filter(|p| p.exists()),
    };
    let mut config = match (path, &cli.kb) {
        (Some(p), _) => SessionConfig::load(&p).map_err(|e| e.to_string())?,
        (None, Some(kb)) => SessionConfig::for_kb(kb),
        (None, None) => return Err(format!("no knowledge base: pass --kb or create {CONFIG_FILE}")),
    };
    if let Some(kb) = &cli.kb {
        config.kb = kb.clone();
    }
    Ok(config)
}

fn open(cli: &Cli) -> Result<Session, String> {
    Session::load(config_for(cli)?).map_err(|e| e.to_string())
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("serializable")
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32, String> {
    let as_json = cli.json;
    let emit = |out: &mut dyn Write, text: &str| -> Result<(), String> {
        out.write_all(text.as_bytes()).map_err(|e| e.to_string())
    };
    match &cli.command {
        Command::Bench { facts, seed } => {
            let budget = match config_for(&cli) {
                Ok(c) => c.budget,
                Err(_) => Default::default(),
            };
            let report = bench::run(*facts, *seed).map_err(|e| e.to_string())?;
            if as_json {
                emit(out, &format!("{}\n", json(&report)))?;
            } else {
                emit(out, &report.render(&budget))?;
            }
            return Ok(if report.within(&budget) { EXIT_OK } else { EXIT_VIOLATIONS });
        }
        Command::Serve { port } => {
            let session = open(&cli)?;
            let port = port.unwrap_or(session.config().port);
            emit(out, &format!("listening on 127.0.0.1:{port}\n"))?;
            out.flush().map_err(|e| e.to_string())?;
            server::serve(session, port).map_err(|e| e.to_string())?;
            return Ok(EXIT_OK);
        }
        _ => {}
    }

    let mut session = open(&cli)?;
    match cli.command {
        Command::Check => {
            let report = session.check();
            emit(out, &if as_json { format!("{}\n", json(&report)) } else { report.render() })?;
            Ok(if report.is_clean() { EXIT_OK } else { EXIT_VIOLATIONS })
        }
        Command::Add { sentence } => match session.add(&sentence) {
            Ok(outcome) => {
                if as_json {
                    emit(out, &format!("{}\n", json(&outcome)))?;
                }
                match outcome {
                    AddOutcome::Accepted { duplicate, .. } => {
                        if !as_json {
                            emit(out, if duplicate { "accepted (already present)\n" } else { "accepted\n" })?;
                        }
                        if !duplicate {
                            session.save().map_err(|e| e.to_string())?;
                        }
                        Ok(EXIT_OK)
                    }
                    AddOutcome::Rejected { explanation, .. } => {
                        if !as_json {
                            emit(out, &format!("rejected: inconsistent with the knowledge base\n{explanation}"))?;
                        }
                        Ok(EXIT_VIOLATIONS)
                    }
                }
            }
            Err(e) => sentence_failure(&session, &sentence, e, out, as_json),
        },
        Command::Remove { sentence } => match session.remove(&sentence) {
            Ok(report) => {
                session.save().map_err(|e| e.to_string())?;
                if as_json {
                    emit(out, &format!("{}\n", json(&report)))?;
                } else if report.is_consistent() {
                    emit(out, "removed; consistent\n")?;
                } else {
                    emit(out, &format!("removed; {} violation(s) remain\n{}", report.violations.len(), report.explain()))?;
                }
                Ok(if report.is_consistent() { EXIT_OK } else { EXIT_VIOLATIONS })
            }
            Err(e) => sentence_failure(&session, &sentence, e, out, as_json),
        },
        Command::Ask { question } => match session.ask(&question) {
            Ok(answers) => {
                if as_json {
                    emit(out, &format!("{}\n", json(&answers)))?;
                } else if answers.answers.is_empty() {
                    emit(out, "no answers\n")?;
                } else {
                    for a in &answers.answers {
                        emit(out, &format!("{a}\n"))?;
                    }
                }
                Ok(EXIT_OK)
            }
            Err(e) => sentence_failure(&session, &question, e, out, as_json),
        },
        Command::Complete { prefix } => match session.complete(&prefix) {
            Ok(set) => {
                emit(out, &if as_json { format!("{}\n", json(&set)) } else { render_completions(&set, usize::MAX) })?;
                Ok(EXIT_OK)
            }
            Err(e) => sentence_failure(&session, &prefix, e, out, as_json),
        },
        Command::Parse { sentence } => match session.parse(&sentence) {
            Ok(summary) => {
                if as_json {
                    emit(out, &format!("{}\n", json(&summary)))?;
                } else {
                    emit(out, &format!("{} sentence\n{}\n", summary.kind, summary.tree))?;
                    for s in &summary.statements {
                        emit(out, &format!("  {s}\n"))?;
                    }
                    if let Some(e) = &summary.translation_error {
                        emit(out, &format!("no logical form: {e}\n"))?;
                    }
                }
                Ok(if summary.translation_error.is_some() { EXIT_USAGE } else { EXIT_OK })
            }
            Err(e) => sentence_failure(&session, &sentence, e, out, as_json),
        },
        Command::Ingest { dump, replace } => {
            let summary = session.ingest(&dump, replace).map_err(|e| e.to_string())?;
            session.save().map_err(|e| e.to_string())?;
            if as_json {
                emit(out, &format!("{}\n", json(&summary)))?;
            } else {
                emit(out, &format!("{} new fact(s)\n", summary.facts))?;
                if !summary.report.is_consistent() {
                    emit(out, &format!("{} violation(s)\n{}", summary.report.violations.len(), summary.report.explain()))?;
                }
            }
            Ok(if summary.report.is_consistent() { EXIT_OK } else { EXIT_VIOLATIONS })
        }
        Command::Extract { root } => {
            let summary = session.extract(&root).map_err(|e| e.to_string())?;
            session.save().map_err(|e| e.to_string())?;
            if as_json {
                emit(out, &format!("{}\n", json(&summary)))?;
            } else {
                emit(out, &format!("{} tagged comment(s), {} added\n", summary.found, summary.asserted))?;
                for q in &summary.quarantined {
                    emit(out, &format!("{}:{}: {}\n  {}\n", q.file, q.line, q.sentence, q.reason))?;
                }
            }
            Ok(if summary.quarantined.is_empty() { EXIT_OK } else { EXIT_VIOLATIONS })
        }
        Command::Serve { .. } | Command::Bench { .. } => unreachable!("handled above"),
    }
}

/// Prints a sentence error with what could have come instead, and maps it
/// to an exit code.
fn sentence_failure(
    session: &Session,
    text: &str,
    error: SentenceError,
    out: &mut dyn Write,
    as_json: bool,
) -> Result<i32, String> {
    let code = match error {
        SentenceError::Inconsistent(_) => EXIT_VIOLATIONS,
        _ => EXIT_USAGE,
    };
    let body = server::ErrorBody::from_sentence_error(session, text, &error);
    let text = if as_json {
        format!("{}\n", json(&body))
    } else {
        let mut s = format!("error: {}\n", body.message);
        if let Some(set) = &body.completions {
            if !set.is_empty() || set.sentence_end {
                s.push_str("expected one of:\n");
                s.push_str(&render_completions(set, 40));
            }
        }
        s
    };
    out.write_all(text.as_bytes()).map_err(|e| e.to_string())?;
    Ok(code)
}

/// One surface per line, with its category; at most `limit` lines.
pub fn render_completions(set: &CompletionSet, limit: usize) -> String {
    let mut out = String::new();
    for item in set.items.iter().take(limit) {
        let category = serde_json::to_value(item.category).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        out.push_str(&format!("{}\t{}\n", item.surface, category));
    }
    if set.items.len() > limit {
        out.push_str(&format!("... {} more\n", set.items.len() - limit));
    }
    if set.any_number {
        out.push_str("<number>\tnumber\n");
    }
    out
}

/// The tokens before the failure, for locating completions.
pub fn position_of(error: &CnlError) -> Option<usize> {
    match error {
        CnlError::UnknownWord { position, .. } | CnlError::Syntax { position, .. } | CnlError::DeadPrefix { position } => {
            Some(*position)
        }
        CnlError::Ambiguous { .. } => None,
    }
}
