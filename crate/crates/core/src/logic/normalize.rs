//! Canonical forms, so that statements equal up to variable names and atom
//! order compare equal.

use std::collections::BTreeMap;

use super::{Atom, CardinalityCheck, Query, Rule, Statement, Term};

/// Above this many variables the exhaustive search gives way to a greedy
/// left-to-right renaming over a name-blind atom order.
const EXHAUSTIVE_LIMIT: usize = 6;

/// Renames variables to v1, v2, … and sorts body atoms. Among all
/// renamings the one with the smallest serialization wins, which makes the
/// result independent of the original names and order.
pub fn normalize(statement: &Statement) -> Statement {
    let vars = variables(statement);
    if vars.is_empty() {
        return rename(statement, &BTreeMap::new());
    }
    if vars.len() > EXHAUSTIVE_LIMIT {
        return greedy(statement);
    }
    let mut best: Option<(String, Statement)> = None;
    for perm in permutations(vars.len()) {
        let map: BTreeMap<&str, String> =
            vars.iter().zip(&perm).map(|(v, i)| (v.as_str(), format!("v{}", i + 1))).collect();
        let candidate = rename(statement, &map);
        let key = candidate.to_string();
        if best.as_ref().is_none_or(|(k, _)| key < *k) {
            best = Some((key, candidate));
        }
    }
    best.expect("at least one permutation").1
}

fn variables(statement: &Statement) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut push = |t: &Term| {
        if let Term::Var(v) = t {
            if !out.contains(v) {
                out.push(v.clone());
            }
        }
    };
    match statement {
        Statement::Fact(a) => a.args.iter().for_each(&mut push),
        Statement::Rule(r) => r.body.iter().chain([&r.head]).flat_map(|a| &a.args).for_each(&mut push),
        Statement::Denial(body) => body.iter().flat_map(|a| &a.args).for_each(&mut push),
        Statement::Card(c) => {
            push(&c.subject);
            c.scope.iter().flat_map(|a| &a.args).for_each(&mut push);
        }
        Statement::Query(q) => {
            push(&Term::Var(q.answer.clone()));
            q.body.iter().flat_map(|a| &a.args).for_each(&mut push);
        }
    }
    out
}

fn rename_term(t: &Term, map: &BTreeMap<&str, String>) -> Term {
    match t {
        Term::Var(v) => Term::Var(map.get(v.as_str()).cloned().unwrap_or_else(|| v.clone())),
        c => c.clone(),
    }
}

fn rename_atoms(atoms: &[Atom], map: &BTreeMap<&str, String>) -> Vec<Atom> {
    let mut out: Vec<Atom> = atoms
        .iter()
        .map(|a| Atom { pred: a.pred.clone(), args: a.args.iter().map(|t| rename_term(t, map)).collect() })
        .collect();
    out.sort();
    out.dedup();
    out
}

fn rename(statement: &Statement, map: &BTreeMap<&str, String>) -> Statement {
    match statement {
        Statement::Fact(a) => Statement::Fact(a.clone()),
        Statement::Rule(r) => Statement::Rule(Rule {
            body: rename_atoms(&r.body, map),
            head: rename_atoms(std::slice::from_ref(&r.head), map).remove(0),
        }),
        Statement::Denial(body) => Statement::Denial(rename_atoms(body, map)),
        Statement::Card(c) => Statement::Card(CardinalityCheck {
            subject: rename_term(&c.subject, map),
            scope: rename_atoms(&c.scope, map),
            counting: c.counting.clone(),
        }),
        Statement::Query(q) => Statement::Query(Query {
            answer: map.get(q.answer.as_str()).cloned().unwrap_or_else(|| q.answer.clone()),
            body: rename_atoms(&q.body, map),
            counting: q.counting.clone(),
        }),
    }
}

fn greedy(statement: &Statement) -> Statement {
    // Order atoms by predicate and argument shape, ignoring variable names,
    // then number variables by first occurrence.
    let shape = |a: &Atom| {
        let args: Vec<Option<String>> = a
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) => Some(c.clone()),
                Term::Var(_) => None,
            })
            .collect();
        (a.pred.clone(), args)
    };
    let mut ordered = statement.clone();
    match &mut ordered {
        Statement::Rule(r) => r.body.sort_by_key(shape),
        Statement::Denial(body) => body.sort_by_key(shape),
        Statement::Card(c) => c.scope.sort_by_key(shape),
        Statement::Query(q) => q.body.sort_by_key(shape),
        Statement::Fact(_) => {}
    }
    let vars = variables(&ordered);
    let map: BTreeMap<&str, String> =
        vars.iter().enumerate().map(|(i, v)| (v.as_str(), format!("v{}", i + 1))).collect();
    rename(&ordered, &map)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, a, out);
            let j = if k.is_multiple_of(2) { i } else { 0 };
            a.swap(j, k - 1);
        }
    }
    heap(n, &mut current, &mut out);
    out
}
