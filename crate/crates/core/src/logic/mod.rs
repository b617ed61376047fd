//! Logical forms: ground facts, Horn rules, denials, cardinality checks and
//! conjunctive queries with optional counting.

mod normalize;
mod translate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::cnl::lexicon::{Category, Forms, LexEntry};

pub use normalize::normalize;
pub use translate::translate;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(String),
    Var(String),
}

impl Term {
    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn var_name(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "?{v}"),
            Term::Const(c) if c.chars().all(|ch| ch.is_alphanumeric() || ch == '-' || ch == '_') => {
                f.write_str(c)
            }
            Term::Const(c) => write!(f, "\"{c}\""),
        }
    }
}

/// Which lexical category a predicate comes from. Nouns give unary
/// predicates, everything else binary ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PredKind {
    Concept,
    Relation,
    Of,
    Adjective,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Predicate {
    pub kind: PredKind,
    /// Noun singular, verb third-singular, "R of", or "adjective preposition".
    pub name: String,
}

impl Predicate {
    pub fn concept(name: &str) -> Predicate {
        Predicate { kind: PredKind::Concept, name: name.into() }
    }

    pub fn relation(name: &str) -> Predicate {
        Predicate { kind: PredKind::Relation, name: name.into() }
    }

    pub fn of(name: &str) -> Predicate {
        let name = if name.ends_with(" of") { name.to_string() } else { format!("{name} of") };
        Predicate { kind: PredKind::Of, name }
    }

    pub fn adjective(name: &str) -> Predicate {
        Predicate { kind: PredKind::Adjective, name: name.into() }
    }

    /// The predicate a lexicon entry stands for; `None` for proper names.
    pub fn from_entry(entry: &LexEntry) -> Option<Predicate> {
        Some(match &entry.forms {
            Forms::ProperName { .. } => return None,
            Forms::Noun { singular, .. } => Predicate::concept(singular),
            Forms::TransitiveVerb { third_singular, .. } => Predicate::relation(third_singular),
            Forms::OfConstruct { singular, .. } => Predicate::of(singular),
            Forms::AdjectivePreposition { adjective, preposition } => {
                Predicate::adjective(&format!("{adjective} {preposition}"))
            }
        })
    }

    pub fn category(&self) -> Category {
        match self.kind {
            PredKind::Concept => Category::Noun,
            PredKind::Relation => Category::TransitiveVerb,
            PredKind::Of => Category::OfConstruct,
            PredKind::Adjective => Category::AdjectivePreposition,
        }
    }

    pub fn arity(&self) -> usize {
        if self.kind == PredKind::Concept {
            1
        } else {
            2
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name.replace(' ', "-"))
    }
}

/// The constant a proper-name entry denotes.
pub fn constant_of(entry: &LexEntry) -> Option<Term> {
    match &entry.forms {
        Forms::ProperName { name } if entry.definite => Some(Term::Const(format!("The {name}"))),
        Forms::ProperName { name } => Some(Term::Const(name.clone())),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub pred: Predicate,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: Predicate, args: Vec<Term>) -> Atom {
        debug_assert_eq!(pred.arity(), args.len());
        Atom { pred, args }
    }

    pub fn unary(pred: Predicate, a: Term) -> Atom {
        Atom::new(pred, vec![a])
    }

    pub fn binary(pred: Predicate, a: Term, b: Term) -> Atom {
        Atom::new(pred, vec![a, b])
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_var())
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(Term::var_name)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.pred)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparator {
    AtMost,
    AtLeast,
    Exactly,
    MoreThan,
}

impl Comparator {
    pub fn from_words(words: &str) -> Option<Comparator> {
        Some(match words {
            "at most" => Comparator::AtMost,
            "at least" => Comparator::AtLeast,
            "exactly" => Comparator::Exactly,
            "more than" => Comparator::MoreThan,
            _ => return None,
        })
    }

    pub fn holds(self, count: u64, bound: u64) -> bool {
        match self {
            Comparator::AtMost => count <= bound,
            Comparator::AtLeast => count >= bound,
            Comparator::Exactly => count == bound,
            Comparator::MoreThan => count > bound,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Comparator::AtMost => "at-most",
            Comparator::AtLeast => "at-least",
            Comparator::Exactly => "exactly",
            Comparator::MoreThan => "more-than",
        }
    }
}

/// Counts the distinct constants `y` with `relation(x, y)` (or
/// `relation(y, x)` when `inverse`) and `filter(y)`, then compares.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Counting {
    pub relation: Predicate,
    pub inverse: bool,
    pub filter: Predicate,
    pub cmp: Comparator,
    pub bound: u64,
}

impl Counting {
    fn fmt_for(&self, subject: &Term, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = if self.inverse { ("_".to_string(), subject.to_string()) } else { (subject.to_string(), "_".into()) };
        write!(f, "count {}({a}, {b}) & {}(_) {} {}", self.relation, self.filter, self.cmp.label(), self.bound)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    pub body: Vec<Atom>,
    pub head: Atom,
}

/// Every constant the subject can denote (all of them when `subject` is a
/// variable not restricted by `scope`) must satisfy the counting condition.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CardinalityCheck {
    pub subject: Term,
    pub scope: Vec<Atom>,
    pub counting: Counting,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Query {
    pub answer: String,
    pub body: Vec<Atom>,
    pub counting: Option<Counting>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Statement {
    Fact(Atom),
    Rule(Rule),
    Denial(Vec<Atom>),
    Card(CardinalityCheck),
    Query(Query),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatementKind {
    Fact,
    Rule,
    Denial,
    Card,
    Query,
}

impl Statement {
    pub fn kind(&self) -> StatementKind {
        match self {
            Statement::Fact(_) => StatementKind::Fact,
            Statement::Rule(_) => StatementKind::Rule,
            Statement::Denial(_) => StatementKind::Denial,
            Statement::Card(_) => StatementKind::Card,
            Statement::Query(_) => StatementKind::Query,
        }
    }

    /// Checks the structural invariants: ground facts, safe rules and
    /// variable-connected denial and query bodies.
    pub fn validate(&self) -> Result<(), LogicError> {
        match self {
            Statement::Fact(atom) => {
                if let Some(v) = atom.vars().next() {
                    return Err(LogicError::ExistentialHead { variable: v.to_string() });
                }
            }
            Statement::Rule(rule) => {
                let bound: BTreeSet<&str> = rule.body.iter().flat_map(Atom::vars).collect();
                if let Some(v) = rule.head.vars().find(|v| !bound.contains(v)) {
                    return Err(LogicError::ExistentialHead { variable: v.to_string() });
                }
            }
            Statement::Denial(body) => {
                if body.is_empty() || !connected(body, None) {
                    return Err(LogicError::UnconnectedBody);
                }
            }
            Statement::Card(card) => {
                if !connected(&card.scope, card.subject.var_name()) {
                    return Err(LogicError::UnconnectedBody);
                }
            }
            Statement::Query(q) => {
                if (q.body.is_empty() && q.counting.is_none()) || !connected(&q.body, Some(&q.answer)) {
                    return Err(LogicError::UnconnectedBody);
                }
            }
        }
        Ok(())
    }

    /// The line used by the debug serialization and golden tests.
    pub fn debug_line(&self) -> String {
        self.to_string()
    }
}

fn connected(body: &[Atom], anchor: Option<&str>) -> bool {
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut ids: BTreeMap<&str, usize> = BTreeMap::new();
    for v in anchor.into_iter().chain(body.iter().flat_map(Atom::vars)) {
        let next = ids.len();
        ids.entry(v).or_insert(next);
    }
    let mut parent: Vec<usize> = (0..ids.len()).collect();
    for atom in body {
        let vs: Vec<usize> = atom.vars().map(|v| ids[v]).collect();
        for w in vs.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            parent[a] = b;
        }
    }
    let roots: BTreeSet<usize> = (0..parent.len()).map(|i| find(&mut parent, i)).collect();
    roots.len() <= 1
}

fn join_atoms(atoms: &[Atom]) -> String {
    atoms.iter().map(Atom::to_string).collect::<Vec<_>>().join(" & ")
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Fact(a) => write!(f, "FACT {a}"),
            Statement::Rule(r) => write!(f, "RULE {} -> {}", join_atoms(&r.body), r.head),
            Statement::Denial(body) => write!(f, "DENIAL {}", join_atoms(body)),
            Statement::Card(c) => {
                write!(f, "CARD {}", c.subject)?;
                if !c.scope.is_empty() {
                    write!(f, " where {}", join_atoms(&c.scope))?;
                }
                f.write_str(": ")?;
                c.counting.fmt_for(&c.subject, f)
            }
            Statement::Query(q) => {
                let answer = Term::Var(q.answer.clone());
                write!(f, "QUERY {answer}")?;
                if !q.body.is_empty() {
                    write!(f, " where {}", join_atoms(&q.body))?;
                }
                if let Some(c) = &q.counting {
                    f.write_str(": ")?;
                    c.fmt_for(&answer, f)?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LogicError {
    #[error("the consequent introduces variable `{variable}` that the antecedent does not bind")]
    ExistentialHead { variable: String },
    #[error("the sentence relates parts that share no variable")]
    UnconnectedBody,
    #[error("unexpected parse tree shape: {0}")]
    Malformed(String),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Term {
        Term::Var(n.into())
    }

    fn c(n: &str) -> Term {
        Term::Const(n.into())
    }

    #[test]
    fn display_forms() {
        let rule = Statement::Rule(Rule {
            body: vec![Atom::binary(Predicate::relation("belongs to"), v("X"), c("Simon Denier"))],
            head: Atom::unary(Predicate::concept("code element"), v("X")),
        });
        assert_eq!(rule.to_string(), "RULE belongs-to(?X, \"Simon Denier\") -> code-element(?X)");
        let q = Statement::Query(Query {
            answer: "v1".into(),
            body: vec![Atom::unary(Predicate::concept("method"), v("v1"))],
            counting: Some(Counting {
                relation: Predicate::relation("invokes"),
                inverse: true,
                filter: Predicate::concept("method"),
                cmp: Comparator::MoreThan,
                bound: 80,
            }),
        });
        assert_eq!(q.to_string(), "QUERY ?v1 where method(?v1): count invokes(_, ?v1) & method(_) more-than 80");
        assert_eq!(Predicate::of("subclass").to_string(), "subclass-of");
    }

    #[test]
    fn validation() {
        let unsafe_rule = Statement::Rule(Rule {
            body: vec![Atom::unary(Predicate::concept("class"), v("X"))],
            head: Atom::binary(Predicate::relation("defines"), v("X"), v("Y")),
        });
        assert_eq!(unsafe_rule.validate(), Err(LogicError::ExistentialHead { variable: "Y".into() }));
        let split = Statement::Denial(vec![
            Atom::unary(Predicate::concept("class"), v("X")),
            Atom::unary(Predicate::concept("method"), v("Y")),
        ]);
        assert_eq!(split.validate(), Err(LogicError::UnconnectedBody));
        let joined = Statement::Denial(vec![
            Atom::unary(Predicate::concept("class"), v("X")),
            Atom::binary(Predicate::relation("defines"), v("X"), v("Y")),
            Atom::unary(Predicate::concept("method"), v("Y")),
        ]);
        assert!(joined.validate().is_ok());
    }

    #[test]
    fn comparators() {
        assert!(Comparator::AtMost.holds(1, 1));
        assert!(!Comparator::AtMost.holds(2, 1));
        assert!(Comparator::MoreThan.holds(81, 80));
        assert!(!Comparator::MoreThan.holds(80, 80));
        assert!(Comparator::AtLeast.holds(3, 3));
        assert!(!Comparator::Exactly.holds(9, 10));
    }
}
