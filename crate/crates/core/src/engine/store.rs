//! Interned atom store with per-predicate indexes, conjunctive joins and
//! semi-naive rule evaluation.

use std::collections::HashMap;
use std::ops::Range;

use crate::logic::{Atom, Predicate, Term};

pub type ConstId = u32;
pub type PredId = u32;
pub type AtomId = u32;
/// Called with the bindings and matched atoms of each join result; returns
/// false to stop.
pub type Visitor<'f> = dyn FnMut(&[Option<ConstId>], &[AtomId]) -> bool + 'f;

const NONE: ConstId = ConstId::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Var(usize),
    Const(ConstId),
}

/// An atom with variables numbered and names interned.
#[derive(Debug, Clone)]
pub struct CAtom {
    pub pred: PredId,
    pub args: Vec<Slot>,
}

#[derive(Debug, Clone)]
pub struct Compiled {
    pub atoms: Vec<CAtom>,
    pub var_names: Vec<String>,
}

#[derive(Debug, Default, Clone)]
struct Index {
    all: Vec<AtomId>,
    by_first: HashMap<ConstId, Vec<AtomId>>,
    by_second: HashMap<ConstId, Vec<AtomId>>,
}

#[derive(Debug, Default, Clone)]
pub struct Store {
    consts: Vec<String>,
    const_ids: HashMap<String, ConstId>,
    preds: Vec<Predicate>,
    pred_ids: HashMap<Predicate, PredId>,
    atoms: Vec<(PredId, ConstId, ConstId)>,
    lookup: HashMap<(PredId, ConstId, ConstId), AtomId>,
    index: Vec<Index>,
}

impl Store {
    pub fn intern_const(&mut self, name: &str) -> ConstId {
        if let Some(&id) = self.const_ids.get(name) {
            return id;
        }
        let id = self.consts.len() as ConstId;
        self.consts.push(name.to_string());
        self.const_ids.insert(name.to_string(), id);
        id
    }

    pub fn intern_pred(&mut self, pred: &Predicate) -> PredId {
        if let Some(&id) = self.pred_ids.get(pred) {
            return id;
        }
        let id = self.preds.len() as PredId;
        self.preds.push(pred.clone());
        self.pred_ids.insert(pred.clone(), id);
        self.index.push(Index::default());
        id
    }

    pub fn const_id(&self, name: &str) -> Option<ConstId> {
        self.const_ids.get(name).copied()
    }

    pub fn pred_id(&self, pred: &Predicate) -> Option<PredId> {
        self.pred_ids.get(pred).copied()
    }

    pub fn const_name(&self, id: ConstId) -> &str {
        &self.consts[id as usize]
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn key(&self, id: AtomId) -> (PredId, ConstId, ConstId) {
        self.atoms[id as usize]
    }

    pub fn find(&self, pred: PredId, a: ConstId, b: ConstId) -> Option<AtomId> {
        self.lookup.get(&(pred, a, b)).copied()
    }

    /// Looks up a ground atom without interning anything.
    pub fn find_atom(&self, atom: &Atom) -> Option<AtomId> {
        let pred = self.pred_id(&atom.pred)?;
        let mut ids = [NONE; 2];
        for (i, t) in atom.args.iter().enumerate() {
            match t {
                Term::Const(c) => ids[i] = self.const_id(c)?,
                Term::Var(_) => return None,
            }
        }
        self.find(pred, ids[0], ids[1])
    }

    /// Inserts a ground atom; returns its id and whether it was new.
    pub fn insert(&mut self, pred: PredId, a: ConstId, b: ConstId) -> (AtomId, bool) {
        if let Some(id) = self.find(pred, a, b) {
            return (id, false);
        }
        let id = self.atoms.len() as AtomId;
        self.atoms.push((pred, a, b));
        self.lookup.insert((pred, a, b), id);
        let index = &mut self.index[pred as usize];
        index.all.push(id);
        index.by_first.entry(a).or_default().push(id);
        if b != NONE {
            index.by_second.entry(b).or_default().push(id);
        }
        (id, true)
    }

    pub fn insert_atom(&mut self, atom: &Atom) -> (AtomId, bool) {
        let pred = self.intern_pred(&atom.pred);
        let mut ids = [NONE; 2];
        for (i, t) in atom.args.iter().enumerate() {
            match t {
                Term::Const(c) => ids[i] = self.intern_const(c),
                Term::Var(v) => panic!("non-ground atom with variable {v}"),
            }
        }
        self.insert(pred, ids[0], ids[1])
    }

    /// Drops every atom with id `len` or above.
    pub fn truncate(&mut self, len: usize) {
        while self.atoms.len() > len {
            let id = (self.atoms.len() - 1) as AtomId;
            let (pred, a, b) = self.atoms.pop().expect("non-empty");
            self.lookup.remove(&(pred, a, b));
            let index = &mut self.index[pred as usize];
            pop_if(&mut index.all, id);
            if let Some(list) = index.by_first.get_mut(&a) {
                pop_if(list, id);
            }
            if b != NONE {
                if let Some(list) = index.by_second.get_mut(&b) {
                    pop_if(list, id);
                }
            }
        }
    }

    pub fn atom(&self, id: AtomId) -> Atom {
        let (pred, a, b) = self.key(id);
        let pred = self.preds[pred as usize].clone();
        let mut args = vec![Term::Const(self.const_name(a).to_string())];
        if b != NONE {
            args.push(Term::Const(self.const_name(b).to_string()));
        }
        Atom { pred, args }
    }

    pub fn atoms_of(&self, pred: PredId) -> &[AtomId] {
        &self.index[pred as usize].all
    }

    pub fn with_first(&self, pred: PredId, a: ConstId) -> &[AtomId] {
        self.index[pred as usize].by_first.get(&a).map_or(&[], Vec::as_slice)
    }

    pub fn with_second(&self, pred: PredId, b: ConstId) -> &[AtomId] {
        self.index[pred as usize].by_second.get(&b).map_or(&[], Vec::as_slice)
    }

    /// Constants that occur in some atom.
    pub fn universe(&self) -> Vec<ConstId> {
        let mut seen = vec![false; self.consts.len()];
        for &(_, a, b) in &self.atoms {
            seen[a as usize] = true;
            if b != NONE {
                seen[b as usize] = true;
            }
        }
        (0..self.consts.len() as ConstId).filter(|&c| seen[c as usize]).collect()
    }

    /// Numbers variables in order of appearance and interns names.
    pub fn compile(&mut self, atoms: &[Atom], extra_vars: &[&str]) -> Compiled {
        let mut var_names: Vec<String> = extra_vars.iter().map(|v| v.to_string()).collect();
        let mut out = Vec::with_capacity(atoms.len());
        for atom in atoms {
            let pred = self.intern_pred(&atom.pred);
            let args = atom
                .args
                .iter()
                .map(|t| match t {
                    Term::Const(c) => Slot::Const(self.intern_const(c)),
                    Term::Var(v) => Slot::Var(match var_names.iter().position(|n| n == v) {
                        Some(i) => i,
                        None => {
                            var_names.push(v.clone());
                            var_names.len() - 1
                        }
                    }),
                })
                .collect();
            out.push(CAtom { pred, args });
        }
        Compiled { atoms: out, var_names }
    }

    /// Like [`Store::compile`] but read-only; `None` when a predicate or
    /// constant is unknown, in which case nothing can match.
    pub fn try_compile(&self, atoms: &[Atom], extra_vars: &[&str]) -> Option<Compiled> {
        let mut var_names: Vec<String> = extra_vars.iter().map(|v| v.to_string()).collect();
        let mut out = Vec::with_capacity(atoms.len());
        for atom in atoms {
            let pred = self.pred_id(&atom.pred)?;
            let mut args = Vec::with_capacity(atom.args.len());
            for t in &atom.args {
                args.push(match t {
                    Term::Const(c) => Slot::Const(self.const_id(c)?),
                    Term::Var(v) => Slot::Var(match var_names.iter().position(|n| n == v) {
                        Some(i) => i,
                        None => {
                            var_names.push(v.clone());
                            var_names.len() - 1
                        }
                    }),
                });
            }
            out.push(CAtom { pred, args });
        }
        Some(Compiled { atoms: out, var_names })
    }

    fn candidates(&self, atom: &CAtom, binding: &[Option<ConstId>]) -> &[AtomId] {
        let value = |s: &Slot| match s {
            Slot::Const(c) => Some(*c),
            Slot::Var(v) => binding[*v],
        };
        if let Some(a) = value(&atom.args[0]) {
            return self.with_first(atom.pred, a);
        }
        if let Some(b) = atom.args.get(1).and_then(value) {
            return self.with_second(atom.pred, b);
        }
        self.atoms_of(atom.pred)
    }

    /// Enumerates the bindings satisfying `atoms`. Atoms with ids at or above
    /// `limit` are ignored; the atom at `delta.0` only matches ids in `delta.1`.
    /// The callback receives the binding and the matched atom ids (in the
    /// order of `atoms`) and returns `false` to stop.
    pub fn join(
        &self,
        atoms: &[CAtom],
        binding: &mut Vec<Option<ConstId>>,
        limit: AtomId,
        delta: Option<(usize, Range<AtomId>)>,
        f: &mut Visitor<'_>,
    ) -> bool {
        let mut matched = vec![AtomId::MAX; atoms.len()];
        let mut done = vec![false; atoms.len()];
        self.join_rec(atoms, binding, &mut matched, &mut done, limit, &delta, f)
    }

    #[allow(clippy::too_many_arguments)]
    fn join_rec(
        &self,
        atoms: &[CAtom],
        binding: &mut Vec<Option<ConstId>>,
        matched: &mut Vec<AtomId>,
        done: &mut Vec<bool>,
        limit: AtomId,
        delta: &Option<(usize, Range<AtomId>)>,
        f: &mut Visitor<'_>,
    ) -> bool {
        // The delta atom goes first; after that the atom with the fewest
        // candidates under the current binding.
        let next = match delta {
            Some((d, _)) if !done[*d] => Some(*d),
            _ => (0..atoms.len())
                .filter(|&i| !done[i])
                .min_by_key(|&i| self.candidates(&atoms[i], binding).len()),
        };
        let Some(i) = next else {
            return f(binding, matched);
        };
        let atom = &atoms[i];
        let range = match delta {
            Some((d, r)) if *d == i => r.clone(),
            _ => 0..limit,
        };
        done[i] = true;
        let cands = self.candidates(atom, binding);
        // Index lists are in id order, so the range bounds can be searched.
        let lo = cands.partition_point(|&id| id < range.start);
        let hi = cands.partition_point(|&id| id < range.end);
        for &id in &cands[lo..hi] {
            let (_, a, b) = self.atoms[id as usize];
            let mut newly: [Option<usize>; 2] = [None, None];
            let mut ok = true;
            for (k, value) in [a, b].into_iter().enumerate().take(atom.args.len()) {
                match atom.args[k] {
                    Slot::Const(c) => ok &= c == value,
                    Slot::Var(v) => match binding[v] {
                        Some(bound) => ok &= bound == value,
                        None => {
                            binding[v] = Some(value);
                            newly[k] = Some(v);
                        }
                    },
                }
                if !ok {
                    break;
                }
            }
            let keep_going = if ok {
                matched[i] = id;
                self.join_rec(atoms, binding, matched, done, limit, delta, f)
            } else {
                true
            };
            for v in newly.into_iter().flatten() {
                binding[v] = None;
            }
            if !keep_going {
                done[i] = false;
                return false;
            }
        }
        done[i] = false;
        true
    }

    /// Instantiates `head` under `binding`.
    pub fn ground(head: &CAtom, binding: &[Option<ConstId>]) -> (PredId, ConstId, ConstId) {
        let value = |s: &Slot| match s {
            Slot::Const(c) => *c,
            Slot::Var(v) => binding[*v].expect("safe rule binds every head variable"),
        };
        let a = value(&head.args[0]);
        let b = head.args.get(1).map_or(NONE, value);
        (head.pred, a, b)
    }
}

fn pop_if(list: &mut Vec<AtomId>, id: AtomId) {
    if list.last() == Some(&id) {
        list.pop();
    }
}
