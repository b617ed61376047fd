//! Closed-world reasoning over facts, Horn rules, denials and cardinality
//! checks, with incremental assertion, explanation and query answering.

mod store;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::logic::{normalize, Atom, Comparator, Query, Rule, Statement, Term};
use store::{AtomId, CAtom, Compiled, ConstId, PredId, Slot, Store};

pub type StmtId = usize;
/// A derived atom, the rule that derived it and the body atoms it used.
type Derived = ((PredId, ConstId, ConstId), StmtId, Vec<AtomId>);
type Match = (Vec<(String, String)>, Vec<AtomId>);

/// Where a statement came from. The derived order is the order explanations
/// list support in.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    Prelude,
    Ingested,
    Documented { file: String, line: usize },
    Interactive,
}

impl Provenance {
    fn rank(&self) -> u8 {
        match self {
            Provenance::Prelude => 0,
            Provenance::Ingested => 1,
            Provenance::Documented { .. } => 2,
            Provenance::Interactive => 3,
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Prelude => f.write_str("prelude"),
            Provenance::Ingested => f.write_str("ingested"),
            Provenance::Documented { file, line } => write!(f, "documented {file}:{line}"),
            Provenance::Interactive => f.write_str("interactive"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatementRecord {
    pub id: StmtId,
    pub statement: Statement,
    pub normal: Statement,
    /// The sentence the statement was translated from, if any.
    pub text: Option<String>,
    pub provenance: Provenance,
}

impl StatementRecord {
    pub fn label(&self) -> String {
        self.text.clone().unwrap_or_else(|| self.statement.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SupportEntry {
    pub id: StmtId,
    pub text: String,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub statement: StmtId,
    pub sentence: String,
    /// Variable bindings of the witnessing match, by variable name.
    pub bindings: Vec<(String, String)>,
    /// For cardinality checks, the constants that were counted.
    pub witnesses: Vec<String>,
    /// Asserted statements the violation rests on, prelude first,
    /// interactive last.
    pub support: Vec<SupportEntry>,
}

impl Violation {
    fn key(&self) -> (StmtId, Vec<(String, String)>) {
        (self.statement, self.bindings.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ConsistencyReport {
    pub violations: Vec<Violation>,
}

impl ConsistencyReport {
    pub fn is_consistent(&self) -> bool {
        self.violations.is_empty()
    }

    /// Per violation, the violated statement followed by its support.
    pub fn explain(&self) -> String {
        let mut out = String::new();
        for v in &self.violations {
            let bindings: Vec<String> = v.bindings.iter().map(|(k, c)| format!("{k} = {c}")).collect();
            out.push_str(&format!("violated: {} [{}]", v.sentence, bindings.join(", ")));
            if !v.witnesses.is_empty() {
                out.push_str(&format!(" counted: {}", v.witnesses.join(", ")));
            }
            out.push('\n');
            for s in &v.support {
                out.push_str(&format!("  ({}) {}\n", s.provenance, s.text));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct AnswerSet {
    pub answers: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AssertOutcome {
    Accepted { id: StmtId, duplicate: bool },
    Rejected(ConsistencyReport),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BatchOutcome {
    /// `new` counts the statements that were not already present.
    Accepted { ids: Vec<StmtId>, new: usize },
    Rejected(ConsistencyReport),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("questions cannot be asserted")]
    NotAssertable,
    #[error("statement is not in the knowledge base: {0}")]
    NotPresent(String),
    #[error("the knowledge base is inconsistent ({0} violation(s)); resolve them before asking")]
    Inconsistent(usize),
}

#[derive(Debug, Clone)]
enum Origin {
    Asserted(StmtId),
    Derived { rule: StmtId, premises: Vec<AtomId> },
}

#[derive(Debug, Clone)]
struct CompiledRule {
    stmt: StmtId,
    body: Compiled,
    head: CAtom,
}

#[derive(Debug, Clone)]
struct CountSpec {
    relation: PredId,
    inverse: bool,
    filter: PredId,
    cmp: Comparator,
    bound: u64,
}

#[derive(Debug, Clone)]
enum Constraint {
    Denial { stmt: StmtId, body: Compiled },
    Card { stmt: StmtId, subject: Slot, subject_name: String, scope: Compiled, count: CountSpec },
}

struct Checkpoint {
    atoms: usize,
    records: usize,
    rules: usize,
    constraints: usize,
    saturated_upto: usize,
    pending: usize,
    undo: usize,
}

/// Asserted statements with provenance, the saturated closure, and the
/// violations of the current state.
#[derive(Debug, Clone, Default)]
pub struct FactBase {
    store: Store,
    origins: Vec<Origin>,
    records: Vec<StatementRecord>,
    by_normal: HashMap<Statement, StmtId>,
    rules: Vec<CompiledRule>,
    constraints: Vec<Constraint>,
    saturated_upto: usize,
    pending_rules: Vec<usize>,
    undo: Vec<(AtomId, Origin)>,
    violations: Vec<Violation>,
}

impl FactBase {
    pub fn new() -> FactBase {
        FactBase::default()
    }

    /// Builds a base from statements without rejecting anything.
    pub fn from_statements(items: impl IntoIterator<Item = (Statement, Option<String>, Provenance)>) -> FactBase {
        let mut base = FactBase::new();
        base.insert_many(items);
        base
    }

    pub fn statements(&self) -> &[StatementRecord] {
        &self.records
    }

    pub fn record(&self, id: StmtId) -> Option<&StatementRecord> {
        self.records.get(id)
    }

    pub fn find(&self, statement: &Statement) -> Option<StmtId> {
        self.by_normal.get(&normalize(statement)).copied()
    }

    pub fn closure_len(&self) -> usize {
        self.store.len()
    }

    pub fn closure(&self) -> Vec<Atom> {
        (0..self.store.len() as AtomId).map(|id| self.store.atom(id)).collect()
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.store.find_atom(atom).is_some()
    }

    /// The report for the current state.
    pub fn check(&self) -> ConsistencyReport {
        ConsistencyReport { violations: self.violations.clone() }
    }

    /// Evaluates every constraint against the closure again instead of
    /// returning the report kept since the last mutation.
    pub fn verify(&self) -> ConsistencyReport {
        ConsistencyReport { violations: self.compute_violations() }
    }

    /// Adds statements unconditionally (prelude, ingestion, loading) and
    /// saturates once. Queries are skipped; duplicates are ignored.
    pub fn insert_many(&mut self, items: impl IntoIterator<Item = (Statement, Option<String>, Provenance)>) -> Vec<StmtId> {
        let mut ids = Vec::new();
        for (statement, text, provenance) in items {
            if statement.kind() == crate::logic::StatementKind::Query {
                continue;
            }
            let normal = normalize(&statement);
            match self.by_normal.get(&normal) {
                Some(&id) => ids.push(id),
                None => ids.push(self.add(statement, normal, text, provenance)),
            }
        }
        self.saturate();
        self.undo.clear();
        self.violations = self.compute_violations();
        ids
    }

    pub fn insert(&mut self, statement: Statement, text: Option<String>, provenance: Provenance) -> Result<StmtId, EngineError> {
        if statement.kind() == crate::logic::StatementKind::Query {
            return Err(EngineError::NotAssertable);
        }
        Ok(self.insert_many([(statement, text, provenance)])[0])
    }

    /// Adds a statement unless doing so introduces a violation that was not
    /// already present, in which case the base is left unchanged.
    pub fn assert(&mut self, statement: Statement, text: Option<String>, provenance: Provenance) -> Result<AssertOutcome, EngineError> {
        Ok(match self.assert_all(vec![(statement, text, provenance)])? {
            BatchOutcome::Accepted { ids, new } => AssertOutcome::Accepted { id: ids[0], duplicate: new == 0 },
            BatchOutcome::Rejected(report) => AssertOutcome::Rejected(report),
        })
    }

    /// Asserts several statements as one unit: all are added or none.
    pub fn assert_all(&mut self, items: Vec<(Statement, Option<String>, Provenance)>) -> Result<BatchOutcome, EngineError> {
        if items.iter().any(|(s, _, _)| s.kind() == crate::logic::StatementKind::Query) {
            return Err(EngineError::NotAssertable);
        }
        let before: HashSet<_> = self.violations.iter().map(Violation::key).collect();
        let checkpoint = self.checkpoint();
        let mut ids = Vec::with_capacity(items.len());
        let mut new = 0;
        for (statement, text, provenance) in items {
            let normal = normalize(&statement);
            match self.by_normal.get(&normal) {
                Some(&id) => ids.push(id),
                None => {
                    ids.push(self.add(statement, normal, text, provenance));
                    new += 1;
                }
            }
        }
        if new == 0 {
            return Ok(BatchOutcome::Accepted { ids, new });
        }
        self.saturate();
        let after = self.compute_violations();
        let fresh: Vec<Violation> = after.iter().filter(|v| !before.contains(&v.key())).cloned().collect();
        if fresh.is_empty() {
            self.undo.clear();
            self.violations = after;
            Ok(BatchOutcome::Accepted { ids, new })
        } else {
            self.rollback(checkpoint);
            Ok(BatchOutcome::Rejected(ConsistencyReport { violations: fresh }))
        }
    }

    /// Removes the statement with the same normal form and rebuilds the
    /// closure from the remaining statements.
    pub fn retract(&mut self, statement: &Statement) -> Result<ConsistencyReport, EngineError> {
        let id = self.find(statement).ok_or_else(|| EngineError::NotPresent(statement.to_string()))?;
        self.retract_ids(&[id])
    }

    pub fn retract_ids(&mut self, ids: &[StmtId]) -> Result<ConsistencyReport, EngineError> {
        if let Some(bad) = ids.iter().find(|&&id| id >= self.records.len()) {
            return Err(EngineError::NotPresent(format!("#{bad}")));
        }
        let drop: HashSet<StmtId> = ids.iter().copied().collect();
        let remaining: Vec<_> = std::mem::take(&mut self.records)
            .into_iter()
            .filter(|r| !drop.contains(&r.id))
            .map(|r| (r.statement, r.text, r.provenance))
            .collect();
        *self = FactBase::from_statements(remaining);
        Ok(self.check())
    }

    pub fn ask(&self, query: &Query) -> Result<AnswerSet, EngineError> {
        if !self.violations.is_empty() {
            return Err(EngineError::Inconsistent(self.violations.len()));
        }
        let store = &self.store;
        let Some(compiled) = store.try_compile(&query.body, &[query.answer.as_str()]) else {
            return Ok(AnswerSet::default());
        };
        let candidates: Vec<ConstId> = if compiled.atoms.is_empty() {
            store.universe()
        } else {
            let mut seen = BTreeSet::new();
            let mut binding = vec![None; compiled.var_names.len()];
            store.join(&compiled.atoms, &mut binding, store.len() as AtomId, None, &mut |b, _| {
                seen.insert(b[0].expect("answer variable is bound"));
                true
            });
            seen.into_iter().collect()
        };
        let count = match &query.counting {
            Some(c) => match (store.pred_id(&c.relation), store.pred_id(&c.filter)) {
                (Some(relation), Some(filter)) => {
                    Some(CountSpec { relation, inverse: c.inverse, filter, cmp: c.cmp, bound: c.bound })
                }
                // Nothing is related: every candidate counts zero.
                _ => Some(CountSpec { relation: PredId::MAX, inverse: c.inverse, filter: PredId::MAX, cmp: c.cmp, bound: c.bound }),
            },
            None => None,
        };
        let mut answers: Vec<String> = candidates
            .into_iter()
            .filter(|&x| match &count {
                Some(spec) => spec.cmp.holds(count_for(store, spec, x).len() as u64, spec.bound),
                None => true,
            })
            .map(|x| store.const_name(x).to_string())
            .collect();
        answers.sort();
        Ok(AnswerSet { answers })
    }

    fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            atoms: self.store.len(),
            records: self.records.len(),
            rules: self.rules.len(),
            constraints: self.constraints.len(),
            saturated_upto: self.saturated_upto,
            pending: self.pending_rules.len(),
            undo: self.undo.len(),
        }
    }

    fn rollback(&mut self, cp: Checkpoint) {
        while self.undo.len() > cp.undo {
            let (atom, origin) = self.undo.pop().expect("non-empty");
            self.origins[atom as usize] = origin;
        }
        self.store.truncate(cp.atoms);
        self.origins.truncate(cp.atoms);
        for r in self.records.drain(cp.records..) {
            self.by_normal.remove(&r.normal);
        }
        self.rules.truncate(cp.rules);
        self.constraints.truncate(cp.constraints);
        self.saturated_upto = cp.saturated_upto;
        self.pending_rules.truncate(cp.pending);
    }

    fn add(&mut self, statement: Statement, normal: Statement, text: Option<String>, provenance: Provenance) -> StmtId {
        let id = self.records.len();
        match &statement {
            Statement::Fact(atom) => {
                let (atom_id, new) = self.store.insert_atom(atom);
                if new {
                    self.origins.push(Origin::Asserted(id));
                } else if let Origin::Derived { .. } = self.origins[atom_id as usize] {
                    let old = std::mem::replace(&mut self.origins[atom_id as usize], Origin::Asserted(id));
                    self.undo.push((atom_id, old));
                }
            }
            Statement::Rule(Rule { body, head }) => {
                let compiled = self.store.compile(&[body.clone(), vec![head.clone()]].concat(), &[]);
                let mut atoms = compiled.atoms;
                let head = atoms.pop().expect("head atom");
                self.pending_rules.push(self.rules.len());
                self.rules.push(CompiledRule {
                    stmt: id,
                    body: Compiled { atoms, var_names: compiled.var_names },
                    head,
                });
            }
            Statement::Denial(body) => {
                let body = self.store.compile(body, &[]);
                self.constraints.push(Constraint::Denial { stmt: id, body });
            }
            Statement::Card(card) => {
                let (subject, subject_name, scope) = match &card.subject {
                    Term::Var(v) => (Slot::Var(0), v.clone(), self.store.compile(&card.scope, &[v.as_str()])),
                    Term::Const(c) => {
                        let cid = self.store.intern_const(c);
                        (Slot::Const(cid), c.clone(), self.store.compile(&card.scope, &[]))
                    }
                };
                let count = CountSpec {
                    relation: self.store.intern_pred(&card.counting.relation),
                    inverse: card.counting.inverse,
                    filter: self.store.intern_pred(&card.counting.filter),
                    cmp: card.counting.cmp,
                    bound: card.counting.bound,
                };
                self.constraints.push(Constraint::Card { stmt: id, subject, subject_name, scope, count });
            }
            Statement::Query(_) => unreachable!("queries are filtered before insertion"),
        }
        self.by_normal.insert(normal.clone(), id);
        self.records.push(StatementRecord { id, statement, normal, text, provenance });
        id
    }

    fn saturate(&mut self) {
        let mut derived: Vec<Derived> = Vec::new();
        let limit = self.store.len() as AtomId;
        for r in std::mem::take(&mut self.pending_rules) {
            let rule = &self.rules[r];
            self.fire(rule, limit, None, &mut derived);
        }
        self.flush(&mut derived);
        loop {
            let lo = self.saturated_upto as AtomId;
            let hi = self.store.len() as AtomId;
            if lo == hi {
                break;
            }
            for rule in &self.rules {
                for pos in 0..rule.body.atoms.len() {
                    let pred = rule.body.atoms[pos].pred;
                    let list = self.store.atoms_of(pred);
                    if list.last().is_none_or(|&last| last < lo) {
                        continue;
                    }
                    self.fire(rule, hi, Some((pos, lo..hi)), &mut derived);
                }
            }
            self.saturated_upto = hi as usize;
            self.flush(&mut derived);
        }
    }

    fn fire(
        &self,
        rule: &CompiledRule,
        limit: AtomId,
        delta: Option<(usize, std::ops::Range<AtomId>)>,
        out: &mut Vec<Derived>,
    ) {
        let mut binding = vec![None; rule.body.var_names.len()];
        let store = &self.store;
        store.join(&rule.body.atoms, &mut binding, limit, delta, &mut |b, matched| {
            let key = Store::ground(&rule.head, b);
            if store.find(key.0, key.1, key.2).is_none() {
                out.push((key, rule.stmt, matched.to_vec()));
            }
            true
        });
    }

    fn flush(&mut self, derived: &mut Vec<Derived>) {
        for ((pred, a, b), rule, premises) in derived.drain(..) {
            let (_, new) = self.store.insert(pred, a, b);
            if new {
                self.origins.push(Origin::Derived { rule, premises });
            }
        }
    }

    /// Asserted statements behind an atom, following recorded derivations.
    fn support_of(&self, atoms: &[AtomId], into: &mut BTreeSet<StmtId>) {
        let mut stack: Vec<AtomId> = atoms.to_vec();
        let mut seen: HashSet<AtomId> = HashSet::new();
        while let Some(a) = stack.pop() {
            if !seen.insert(a) {
                continue;
            }
            match &self.origins[a as usize] {
                Origin::Asserted(s) => {
                    into.insert(*s);
                }
                Origin::Derived { rule, premises } => {
                    into.insert(*rule);
                    stack.extend(premises);
                }
            }
        }
    }

    fn support_entries(&self, ids: BTreeSet<StmtId>) -> Vec<SupportEntry> {
        let mut entries: Vec<SupportEntry> = ids
            .into_iter()
            .map(|id| {
                let r = &self.records[id];
                SupportEntry { id, text: r.label(), provenance: r.provenance.clone() }
            })
            .collect();
        entries.sort_by_key(|e| (e.provenance.rank(), e.id));
        entries
    }

    fn compute_violations(&self) -> Vec<Violation> {
        let mut out = self.raw_violations();
        for v in &mut out {
            if self.is_monotone(v.statement) && v.support.len() > 2 {
                let ids = v.support.iter().map(|e| e.id).collect();
                v.support = self.support_entries(self.minimize(v.statement, &v.bindings, ids));
            }
        }
        out
    }

    /// Whether adding statements can only keep a violation of `stmt` alive.
    fn is_monotone(&self, stmt: StmtId) -> bool {
        match &self.records[stmt].statement {
            Statement::Denial(_) => true,
            Statement::Card(c) => matches!(c.counting.cmp, Comparator::AtMost | Comparator::MoreThan),
            _ => false,
        }
    }

    /// Greedy deletion: drops every supporting statement without which the
    /// same violation still arises in a base built from the rest.
    fn minimize(&self, stmt: StmtId, bindings: &[(String, String)], support: BTreeSet<StmtId>) -> BTreeSet<StmtId> {
        let mut keep: Vec<StmtId> = support.into_iter().collect();
        let candidates: Vec<StmtId> = keep.iter().rev().copied().filter(|&id| id != stmt).collect();
        for drop in candidates {
            let trial: Vec<StmtId> = keep.iter().copied().filter(|&id| id != drop).collect();
            let mut small = FactBase::new();
            for &id in &trial {
                let r = &self.records[id];
                small.add(r.statement.clone(), r.normal.clone(), None, r.provenance.clone());
            }
            small.saturate();
            let inner = trial.iter().position(|&id| id == stmt).expect("constraint kept");
            if small.raw_violations().iter().any(|v| v.statement == inner && v.bindings == bindings) {
                keep = trial;
            }
        }
        keep.into_iter().collect()
    }

    fn raw_violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let limit = self.store.len() as AtomId;
        for constraint in &self.constraints {
            match constraint {
                Constraint::Denial { stmt, body } => {
                    let mut binding = vec![None; body.var_names.len()];
                    let mut found: Vec<Match> = Vec::new();
                    let mut keys = HashSet::new();
                    self.store.join(&body.atoms, &mut binding, limit, None, &mut |b, matched| {
                        let bindings: Vec<(String, String)> = body
                            .var_names
                            .iter()
                            .zip(b)
                            .filter_map(|(n, v)| v.map(|v| (n.clone(), self.store.const_name(v).to_string())))
                            .collect();
                        if keys.insert(bindings.clone()) {
                            found.push((bindings, matched.to_vec()));
                        }
                        true
                    });
                    for (bindings, matched) in found {
                        let mut support = BTreeSet::from([*stmt]);
                        self.support_of(&matched, &mut support);
                        out.push(Violation {
                            statement: *stmt,
                            sentence: self.records[*stmt].label(),
                            bindings,
                            witnesses: vec![],
                            support: self.support_entries(support),
                        });
                    }
                }
                Constraint::Card { stmt, subject, subject_name, scope, count } => {
                    let subjects: BTreeMap<ConstId, Vec<AtomId>> = match subject {
                        Slot::Const(c) => BTreeMap::from([(*c, vec![])]),
                        Slot::Var(_) if !scope.atoms.is_empty() => {
                            let mut m = BTreeMap::new();
                            let mut binding = vec![None; scope.var_names.len()];
                            self.store.join(&scope.atoms, &mut binding, limit, None, &mut |b, matched| {
                                m.entry(b[0].expect("subject bound")).or_insert_with(|| matched.to_vec());
                                true
                            });
                            m
                        }
                        Slot::Var(_) if count.cmp == Comparator::AtMost => {
                            // Only subjects with at least one related constant can exceed a bound.
                            let mut m = BTreeMap::new();
                            for &id in self.store.atoms_of(count.relation) {
                                let (_, a, b) = self.store.key(id);
                                m.entry(if count.inverse { b } else { a }).or_insert_with(Vec::new);
                            }
                            m
                        }
                        Slot::Var(_) => self.store.universe().into_iter().map(|c| (c, vec![])).collect(),
                    };
                    for (x, scope_atoms) in subjects {
                        let counted = count_for(&self.store, count, x);
                        if count.cmp.holds(counted.len() as u64, count.bound) {
                            continue;
                        }
                        let mut support = BTreeSet::from([*stmt]);
                        self.support_of(&scope_atoms, &mut support);
                        let premises: Vec<AtomId> = counted.values().flatten().copied().collect();
                        self.support_of(&premises, &mut support);
                        let mut witnesses: Vec<String> =
                            counted.keys().map(|&y| self.store.const_name(y).to_string()).collect();
                        witnesses.sort();
                        out.push(Violation {
                            statement: *stmt,
                            sentence: self.records[*stmt].label(),
                            bindings: vec![(subject_name.clone(), self.store.const_name(x).to_string())],
                            witnesses,
                            support: self.support_entries(support),
                        });
                    }
                }
            }
        }
        out
    }
}

/// The distinct constants counted for subject `x`, with the atoms that
/// witness each.
fn count_for(store: &Store, spec: &CountSpec, x: ConstId) -> BTreeMap<ConstId, [AtomId; 2]> {
    let mut out = BTreeMap::new();
    if spec.relation == PredId::MAX {
        return out;
    }
    let related = if spec.inverse { store.with_second(spec.relation, x) } else { store.with_first(spec.relation, x) };
    for &id in related {
        let (_, a, b) = store.key(id);
        let y = if spec.inverse { a } else { b };
        if let Some(f) = store.find(spec.filter, y, ConstId::MAX) {
            out.entry(y).or_insert([id, f]);
        }
    }
    out
}

/// The least fixpoint of `rules` over `facts`.
pub fn saturate(facts: &[Atom], rules: &[Rule]) -> BTreeSet<Atom> {
    let items = facts
        .iter()
        .map(|a| Statement::Fact(a.clone()))
        .chain(rules.iter().map(|r| Statement::Rule(r.clone())))
        .map(|s| (s, None, Provenance::Interactive));
    FactBase::from_statements(items).closure().into_iter().collect()
}
