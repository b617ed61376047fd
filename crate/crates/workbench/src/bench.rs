//! Timings on a synthetic code base of a given size: load, add one fact,
//! check consistency, and detect an inconsistent addition.
//!
//! The base has ten packages, each documented as a component, with classes,
//! methods, subclass edges and random invocations. One denial forbids
//! methods of the first component from using the last one; the generator
//! keeps to it and the detection step breaks it.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use cnldoc::engine::FactBase;

use crate::config::{Budget, SessionConfig};
use crate::session::{AddOutcome, Session, SessionError, SentenceError};

const PACKAGES: usize = 10;
// Proportions of a mid-sized code base: classes and methods per fact.
const CLASSES_PER_FACT: f64 = 148.0 / 23_342.0;
const METHODS_PER_FACT: f64 = 1_902.0 / 23_342.0;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Sentence(#[from] SentenceError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("the synthetic base is inconsistent after loading")]
    Inconsistent,
    #[error("the forbidden invocation was not rejected")]
    NotDetected,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub classes: usize,
    pub methods: usize,
    pub facts: usize,
    pub load_seconds: f64,
    pub add_seconds: f64,
    pub check_seconds: f64,
    pub detect_seconds: f64,
}

impl BenchReport {
    /// Whether load, add and check stay within `budget`.
    pub fn within(&self, budget: &Budget) -> bool {
        self.load_seconds <= budget.load_seconds
            && self.add_seconds <= budget.add_seconds
            && self.check_seconds <= budget.check_seconds
    }

    pub fn render(&self, budget: &Budget) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:>9} {:>9} {:>9} {:>11} {:>9} {:>12} {:>12}",
            "#classes", "#methods", "#facts", "load facts", "add fact", "check for", "detect"
        );
        let _ = writeln!(out, "{:>9} {:>9} {:>9} {:>11} {:>9} {:>12} {:>12}", "", "", "", "", "", "consist.", "inconsist.");
        let _ = writeln!(
            out,
            "{:>9} {:>9} {:>9} {:>11.4} {:>9.4} {:>12.4} {:>12.4}",
            self.classes, self.methods, self.facts, self.load_seconds, self.add_seconds, self.check_seconds, self.detect_seconds
        );
        let verdict = |took: f64, limit: f64| if took <= limit { "ok" } else { "OVER" };
        let _ = writeln!(
            out,
            "budget: load {} (<= {}s), add {} (<= {}s), check {} (<= {}s)",
            verdict(self.load_seconds, budget.load_seconds),
            budget.load_seconds,
            verdict(self.add_seconds, budget.add_seconds),
            budget.add_seconds,
            verdict(self.check_seconds, budget.check_seconds),
            budget.check_seconds
        );
        out
    }
}

/// A synthetic dump and knowledge base.
#[derive(Debug, Clone)]
pub struct Synthetic {
    pub dump: String,
    pub kb: String,
    pub classes: usize,
    pub methods: usize,
    pub facts: usize,
    /// An invocation absent from the dump that keeps the base consistent.
    pub harmless: (String, String),
    /// An invocation the denial forbids.
    pub forbidden: (String, String),
}

struct Method {
    name: String,
    package: usize,
}

/// Builds a code base with about `target` facts.
pub fn synthesize(target: usize, seed: u64) -> Synthetic {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let classes = ((target as f64 * CLASSES_PER_FACT).round() as usize).max(2 * PACKAGES);
    let methods = ((target as f64 * METHODS_PER_FACT).round() as usize).max(classes);

    let mut dump = String::from("# synthetic code model\n");
    let mut facts = 0;
    for p in 0..PACKAGES {
        let _ = writeln!(dump, "E|package|Package-{p}");
        facts += 1;
    }
    // Classes are dealt to packages round-robin; each but the first in its
    // package subclasses an earlier one.
    let mut class_names = Vec::with_capacity(classes);
    let mut by_package: Vec<Vec<usize>> = vec![Vec::new(); PACKAGES];
    for c in 0..classes {
        let p = c % PACKAGES;
        let name = format!("K{p}-{}", by_package[p].len());
        let _ = writeln!(dump, "E|class|{name}");
        let _ = writeln!(dump, "R|in-package|{name}|Package-{p}");
        facts += 2;
        if let Some(&parent) = by_package[p].choose(&mut rng) {
            let _ = writeln!(dump, "R|direct-subclass-of|{name}|{}", class_names[parent]);
            facts += 1;
        }
        by_package[p].push(c);
        class_names.push(name);
    }
    let mut method_list = Vec::with_capacity(methods);
    for m in 0..methods {
        // The first pass gives every class a method.
        let c = if m < classes { m } else { rng.gen_range(0..classes) };
        let name = format!("{}-m{m}", class_names[c]);
        let _ = writeln!(dump, "E|method|{name}");
        let _ = writeln!(dump, "R|defines|{}|{name}", class_names[c]);
        facts += 2;
        method_list.push(Method { name, package: c % PACKAGES });
    }

    let allowed = |a: &Method, b: &Method| !(a.package == 0 && b.package == PACKAGES - 1);
    let mut edges = BTreeSet::new();
    let wanted = target.saturating_sub(facts).min(methods * (methods - 1) / 2);
    while edges.len() < wanted {
        let a = rng.gen_range(0..methods);
        let b = rng.gen_range(0..methods);
        if a != b && allowed(&method_list[a], &method_list[b]) {
            edges.insert((a, b));
        }
    }
    for &(a, b) in &edges {
        let _ = writeln!(dump, "R|invokes|{}|{}", method_list[a].name, method_list[b].name);
    }
    facts += edges.len();

    let pick = |rng: &mut ChaCha8Rng, package: usize| loop {
        let i = rng.gen_range(0..methods);
        if method_list[i].package == package {
            return i;
        }
    };
    let harmless = loop {
        let (a, b) = (pick(&mut rng, 1), pick(&mut rng, 2));
        if !edges.contains(&(a, b)) {
            break (method_list[a].name.clone(), method_list[b].name.clone());
        }
    };
    let (a, b) = (pick(&mut rng, 0), pick(&mut rng, PACKAGES - 1));
    let forbidden = (method_list[a].name.clone(), method_list[b].name.clone());

    let mut kb = String::from("@prelude builtin\n@lexicon\nnoun | component | components\n");
    for p in 0..PACKAGES {
        let _ = writeln!(kb, "proper-name | Comp-{p}");
    }
    kb.push_str("@dump synthetic.dump\n@sentences\n");
    kb.push_str("Everything belongs to at most 1 component.\n");
    for p in 0..PACKAGES {
        let _ = writeln!(kb, "Comp-{p} is a component.");
        let _ = writeln!(kb, "Every class that is contained in Package-{p} belongs to Comp-{p}.");
    }
    let _ = writeln!(kb, "No method of Comp-0 uses Comp-{}.", PACKAGES - 1);

    Synthetic { dump, kb, classes, methods, facts, harmless, forbidden }
}

fn seconds(d: Duration) -> f64 {
    d.as_secs_f64()
}

/// Writes a synthetic base to a temporary directory and times the four
/// operations on it.
pub fn run(target: usize, seed: u64) -> Result<BenchReport, BenchError> {
    let synthetic = synthesize(target, seed);
    let dir = tempfile::tempdir()?;
    std::fs::write(dir.path().join("synthetic.dump"), &synthetic.dump)?;
    let kb_path = dir.path().join("synthetic.kb");
    std::fs::write(&kb_path, &synthetic.kb)?;

    let started = Instant::now();
    let mut session = Session::load(SessionConfig::for_kb(&kb_path))?;
    let load = started.elapsed();
    if !session.check().is_clean() {
        return Err(BenchError::Inconsistent);
    }

    let (a, b) = &synthetic.harmless;
    let started = Instant::now();
    let outcome = session.add(&format!("{a} invokes {b}."))?;
    let add = started.elapsed();
    if !matches!(outcome, AddOutcome::Accepted { .. }) {
        return Err(BenchError::Inconsistent);
    }

    // A full check re-derives the closure from the asserted statements.
    let started = Instant::now();
    let records = session.base().statements().iter();
    let rebuilt = FactBase::from_statements(records.map(|r| (r.statement.clone(), r.text.clone(), r.provenance.clone())));
    let report = rebuilt.verify();
    let check = started.elapsed();
    if !report.is_consistent() {
        return Err(BenchError::Inconsistent);
    }

    let (a, b) = &synthetic.forbidden;
    let started = Instant::now();
    let outcome = session.add(&format!("{a} invokes {b}."))?;
    let detect = started.elapsed();
    if !matches!(outcome, AddOutcome::Rejected { .. }) {
        return Err(BenchError::NotDetected);
    }

    Ok(BenchReport {
        classes: synthetic.classes,
        methods: synthetic.methods,
        facts: synthetic.facts,
        load_seconds: seconds(load),
        add_seconds: seconds(add),
        check_seconds: seconds(check),
        detect_seconds: seconds(detect),
    })
}
