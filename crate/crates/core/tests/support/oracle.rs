//! Random rule bases and brute-force evaluation, shared by the engine
//! oracle tests and the acceptance run.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet};

use cnldoc::engine::{FactBase, Provenance};
use cnldoc::logic::{Atom, Comparator, Counting, Predicate, Query, Rule, Statement, Term};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const INSTANCES: u64 = 200;
pub const VARS: [&str; 4] = ["X", "Y", "Z", "W"];

pub struct Instance {
    pub constants: Vec<String>,
    pub facts: Vec<Atom>,
    pub rules: Vec<Rule>,
}

pub fn preds() -> (Vec<Predicate>, Vec<Predicate>) {
    let unary = (0..3).map(|i| Predicate::concept(&format!("c{i}"))).collect();
    let binary = (0..4).map(|i| Predicate::relation(&format!("r{i}"))).collect();
    (unary, binary)
}

pub fn konst(s: &str) -> Term {
    Term::Const(s.to_string())
}

pub fn var(s: &str) -> Term {
    Term::Var(s.to_string())
}

/// A connected conjunction: every atom after the first reuses a variable
/// already in play.
pub fn random_body(rng: &mut ChaCha8Rng, len: usize, max_vars: usize, constants: &[String]) -> Vec<Atom> {
    let (unary, binary) = preds();
    let mut used: Vec<&str> = vec![VARS[0]];
    let mut body = Vec::new();
    for i in 0..len {
        let anchor = var(used[rng.gen_range(0..used.len())]);
        if i > 0 && rng.gen_bool(0.25) {
            body.push(Atom::unary(unary.choose(rng).unwrap().clone(), anchor));
            continue;
        }
        let other = if rng.gen_bool(0.15) {
            konst(constants.choose(rng).unwrap())
        } else if used.len() < max_vars && rng.gen_bool(0.6) {
            used.push(VARS[used.len()]);
            var(used[used.len() - 1])
        } else {
            var(used[rng.gen_range(0..used.len())])
        };
        let pred = binary.choose(rng).unwrap().clone();
        body.push(if rng.gen_bool(0.5) { Atom::binary(pred, anchor, other) } else { Atom::binary(pred, other, anchor) });
    }
    body
}

pub fn body_vars(body: &[Atom]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for a in body {
        for v in a.vars() {
            if !out.iter().any(|o| o == v) {
                out.push(v.to_string());
            }
        }
    }
    out
}

pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (unary, binary) = preds();
    let constants: Vec<String> = (0..rng.gen_range(3..=30)).map(|i| format!("k{i}")).collect();
    let mut facts = Vec::new();
    for _ in 0..rng.gen_range(1..=80) {
        let atom = if rng.gen_bool(0.3) {
            Atom::unary(unary.choose(&mut rng).unwrap().clone(), konst(constants.choose(&mut rng).unwrap()))
        } else {
            Atom::binary(
                binary.choose(&mut rng).unwrap().clone(),
                konst(constants.choose(&mut rng).unwrap()),
                konst(constants.choose(&mut rng).unwrap()),
            )
        };
        facts.push(atom);
    }
    let mut rules = Vec::new();
    for _ in 0..rng.gen_range(0..=15) {
        let len = rng.gen_range(1..=3);
        let body = random_body(&mut rng, len, 3, &constants);
        let vars = body_vars(&body);
        let head = if rng.gen_bool(0.3) {
            Atom::unary(unary.choose(&mut rng).unwrap().clone(), var(vars.choose(&mut rng).unwrap()))
        } else {
            Atom::binary(
                binary.choose(&mut rng).unwrap().clone(),
                var(vars.choose(&mut rng).unwrap()),
                var(vars.choose(&mut rng).unwrap()),
            )
        };
        rules.push(Rule { body, head });
    }
    Instance { constants, facts, rules }
}

pub fn statements(inst: &Instance) -> Vec<(Statement, Option<String>, Provenance)> {
    inst.facts
        .iter()
        .map(|a| Statement::Fact(a.clone()))
        .chain(inst.rules.iter().map(|r| Statement::Rule(r.clone())))
        .map(|s| (s, None, Provenance::Interactive))
        .collect()
}


pub fn substitute(atom: &Atom, binding: &HashMap<String, String>) -> Atom {
    Atom {
        pred: atom.pred.clone(),
        args: atom
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => Term::Const(binding[v].clone()),
                c => c.clone(),
            })
            .collect(),
    }
}

/// Every total assignment of `vars` over `universe`, filtered by `body`.
pub fn all_bindings(
    vars: &[String],
    universe: &[String],
    body: &[Atom],
    facts: &HashSet<Atom>,
) -> Vec<HashMap<String, String>> {
    let mut out = Vec::new();
    let mut idx = vec![0usize; vars.len()];
    if universe.is_empty() && !vars.is_empty() {
        return out;
    }
    loop {
        let binding: HashMap<String, String> =
            vars.iter().cloned().zip(idx.iter().map(|&i| universe[i].clone())).collect();
        if body.iter().all(|a| facts.contains(&substitute(a, &binding))) {
            out.push(binding);
        }
        let mut k = 0;
        loop {
            if k == vars.len() {
                return out;
            }
            idx[k] += 1;
            if idx[k] < universe.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

pub fn universe_of(facts: &HashSet<Atom>) -> Vec<String> {
    let set: BTreeSet<String> = facts
        .iter()
        .flat_map(|a| a.args.iter())
        .filter_map(|t| match t {
            Term::Const(c) => Some(c.clone()),
            Term::Var(_) => None,
        })
        .collect();
    set.into_iter().collect()
}

/// Applies every rule to every assignment until nothing changes.
pub fn naive_fixpoint(inst: &Instance) -> BTreeSet<Atom> {
    let mut facts: HashSet<Atom> = inst.facts.iter().cloned().collect();
    loop {
        let universe = universe_of(&facts);
        let mut new = Vec::new();
        for rule in &inst.rules {
            for b in all_bindings(&body_vars(&rule.body), &universe, &rule.body, &facts) {
                let head = substitute(&rule.head, &b);
                if !facts.contains(&head) {
                    new.push(head);
                }
            }
        }
        if new.is_empty() {
            return facts.into_iter().collect();
        }
        facts.extend(new);
    }
}

pub fn oracle_answers(query: &Query, closure: &BTreeSet<Atom>) -> Vec<String> {
    let facts: HashSet<Atom> = closure.iter().cloned().collect();
    let universe = universe_of(&facts);
    let mut vars = vec![query.answer.clone()];
    for v in body_vars(&query.body) {
        if !vars.contains(&v) {
            vars.push(v);
        }
    }
    let mut answers: BTreeSet<String> =
        all_bindings(&vars, &universe, &query.body, &facts).into_iter().map(|b| b[&query.answer].clone()).collect();
    if let Some(c) = &query.counting {
        answers.retain(|x| {
            let n = universe
                .iter()
                .filter(|y| {
                    let (a, b) = if c.inverse { (y.as_str(), x.as_str()) } else { (x.as_str(), y.as_str()) };
                    facts.contains(&Atom::binary(c.relation.clone(), konst(a), konst(b)))
                        && facts.contains(&Atom::unary(c.filter.clone(), konst(y)))
                })
                .count() as u64;
            c.cmp.holds(n, c.bound)
        });
    }
    answers.into_iter().collect()
}


/// Three 3-atom queries for instance `seed`, the last one counting.
pub fn random_queries(seed: u64, inst: &Instance) -> Vec<Query> {
    let (unary, binary) = preds();
    let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
    (0..3)
        .map(|q| {
            let body = random_body(&mut rng, 3, 3, &inst.constants);
            let counting = (q == 2).then(|| Counting {
                relation: binary.choose(&mut rng).unwrap().clone(),
                inverse: rng.gen_bool(0.5),
                filter: unary.choose(&mut rng).unwrap().clone(),
                cmp: *[Comparator::MoreThan, Comparator::AtMost, Comparator::AtLeast, Comparator::Exactly]
                    .choose(&mut rng)
                    .unwrap(),
                bound: rng.gen_range(0..3),
            });
            Query { answer: VARS[0].to_string(), body, counting }
        })
        .collect()
}

/// Seeds whose closure differs from the naive fixpoint, and queries whose
/// answers differ from enumeration.
pub fn discrepancies(instances: u64) -> (Vec<u64>, Vec<(u64, String)>) {
    let mut closures = Vec::new();
    let mut queries = Vec::new();
    for seed in 0..instances {
        let inst = random_instance(seed);
        let fb = FactBase::from_statements(statements(&inst));
        let naive = naive_fixpoint(&inst);
        let got: BTreeSet<Atom> = fb.closure().into_iter().collect();
        if got != naive {
            closures.push(seed);
        }
        for query in random_queries(seed, &inst) {
            if fb.ask(&query).unwrap().answers != oracle_answers(&query, &naive) {
                queries.push((seed, Statement::Query(query).to_string()));
            }
        }
    }
    (closures, queries)
}
