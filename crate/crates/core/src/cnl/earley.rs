//! Earley recognizer over [`Grammar`], with unique-tree extraction and
//! next-terminal prediction.

use std::collections::{HashMap, HashSet};

use super::grammar::{Grammar, NtId, ProdId, Symbol, Tag, Terminal};
use super::lexicon::{FormSlot, Lexicon};
use super::token::{Reading, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Item {
    prod: ProdId,
    dot: usize,
    origin: usize,
}

/// Matches one token against one terminal, returning the reading used.
pub fn matches(terminal: Terminal, token: &Token, lexicon: &Lexicon) -> Option<Reading> {
    token.readings.iter().copied().find(|reading| match (terminal, reading) {
        (Terminal::Word(word), Reading::Function(f)) => word == *f,
        (Terminal::Article, Reading::Function(f)) => matches!(*f, "a" | "an"),
        (Terminal::Comparator, Reading::Function(f)) => {
            matches!(*f, "more than" | "at most" | "at least" | "exactly")
        }
        (Terminal::Variable, Reading::Variable) => true,
        (Terminal::One, Reading::Number(n)) => *n == 1,
        (Terminal::Many, Reading::Number(n)) => *n != 1,
        (Terminal::Period, Reading::Period) => true,
        (Terminal::QuestionMark, Reading::QuestionMark) => true,
        (terminal, Reading::Lexical { entry, slot }) => match terminal.lexical_slot() {
            Some((category, want)) => {
                let e = lexicon.entry(*entry);
                e.category() == category
                    && *slot == want
                    && (want != FormSlot::PastParticiple || e.passive_allowed)
            }
            None => false,
        },
        _ => false,
    })
}

pub(crate) struct Chart<'g> {
    grammar: &'g Grammar,
    sets: Vec<Vec<Item>>,
    /// Index of the first token that could not be scanned, if any.
    pub stuck_at: Option<usize>,
}

impl<'g> Chart<'g> {
    pub fn build(grammar: &'g Grammar, tokens: &[Token], lexicon: &Lexicon) -> Chart<'g> {
        let n = tokens.len();
        let mut sets: Vec<Vec<Item>> = vec![Vec::new(); n + 1];
        let mut seen: Vec<HashSet<Item>> = vec![HashSet::new(); n + 1];
        let mut stuck_at = None;

        for &prod in grammar.alternatives(grammar.start()) {
            let item = Item { prod, dot: 0, origin: 0 };
            if seen[0].insert(item) {
                sets[0].push(item);
            }
        }

        for k in 0..=n {
            let mut predicted: HashSet<NtId> = HashSet::new();
            let mut i = 0;
            while i < sets[k].len() {
                let item = sets[k][i];
                i += 1;
                let prod = grammar.production(item.prod);
                match prod.rhs.get(item.dot) {
                    None => {
                        // Completion; origin < k because there are no empty productions.
                        let lhs = prod.lhs;
                        let mut j = 0;
                        while j < sets[item.origin].len() {
                            let parent = sets[item.origin][j];
                            j += 1;
                            let pp = grammar.production(parent.prod);
                            if pp.rhs.get(parent.dot) == Some(&Symbol::N(lhs)) {
                                let next = Item { dot: parent.dot + 1, ..parent };
                                if seen[k].insert(next) {
                                    sets[k].push(next);
                                }
                            }
                        }
                    }
                    Some(Symbol::N(nt)) => {
                        if predicted.insert(*nt) {
                            for &p in grammar.alternatives(*nt) {
                                let next = Item { prod: p, dot: 0, origin: k };
                                if seen[k].insert(next) {
                                    sets[k].push(next);
                                }
                            }
                        }
                    }
                    Some(Symbol::T(term)) => {
                        if k < n && matches(*term, &tokens[k], lexicon).is_some() {
                            let next = Item { dot: item.dot + 1, ..item };
                            if seen[k + 1].insert(next) {
                                sets[k + 1].push(next);
                            }
                        }
                    }
                }
            }
            if k < n && sets[k + 1].is_empty() {
                stuck_at = Some(k);
                break;
            }
        }
        Chart { grammar, sets, stuck_at }
    }

    pub fn accepted(&self) -> bool {
        let n = self.sets.len() - 1;
        self.stuck_at.is_none()
            && self.sets[n].iter().any(|it| {
                let p = self.grammar.production(it.prod);
                it.origin == 0 && p.lhs == self.grammar.start() && it.dot == p.rhs.len()
            })
    }

    /// Terminals that may follow the full token sequence.
    pub fn expected(&self) -> Vec<Terminal> {
        if self.stuck_at.is_some() {
            return Vec::new();
        }
        let last = self.sets.last().expect("chart has at least one set");
        let mut out: Vec<Terminal> = last
            .iter()
            .filter_map(|it| match self.grammar.production(it.prod).rhs.get(it.dot) {
                Some(Symbol::T(term)) => Some(*term),
                _ => None,
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Fewest further tokens needed to complete a sentence, or `None` when
    /// the prefix is dead.
    pub fn min_to_finish(&self) -> Option<usize> {
        if self.stuck_at.is_some() {
            return None;
        }
        let g = self.grammar;
        // Cost of finishing everything above an item once the item is complete.
        let mut ctx: Vec<HashMap<Item, usize>> = self
            .sets
            .iter()
            .map(|set| set.iter().map(|it| (*it, usize::MAX)).collect())
            .collect();
        for it in &self.sets[0] {
            if it.origin == 0 && g.production(it.prod).lhs == g.start() {
                ctx[0].insert(*it, 0);
            }
        }
        loop {
            let mut changed = false;
            for k in 0..self.sets.len() {
                for it in &self.sets[k] {
                    let lhs = g.production(it.prod).lhs;
                    let mut best = ctx[k][it];
                    if it.origin == 0 && lhs == g.start() {
                        best = 0;
                    }
                    for parent in &self.sets[it.origin] {
                        let pp = g.production(parent.prod);
                        if pp.rhs.get(parent.dot) == Some(&Symbol::N(lhs)) {
                            let above = ctx[it.origin][parent];
                            if above != usize::MAX {
                                let cost = g.min_len_of(&pp.rhs[parent.dot + 1..]).saturating_add(above);
                                best = best.min(cost);
                            }
                        }
                    }
                    if best < ctx[k][it] {
                        ctx[k].insert(*it, best);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let n = self.sets.len() - 1;
        self.sets[n]
            .iter()
            .filter_map(|it| {
                let c = ctx[n][it];
                (c != usize::MAX)
                    .then(|| g.min_len_of(&g.production(it.prod).rhs[it.dot..]).saturating_add(c))
            })
            .min()
    }

    /// Spans (nonterminal, start, end) recognised by completed items.
    fn completed_spans(&self) -> HashSet<(NtId, usize, usize)> {
        let mut spans = HashSet::new();
        for (k, set) in self.sets.iter().enumerate() {
            for it in set {
                let p = self.grammar.production(it.prod);
                if it.dot == p.rhs.len() {
                    spans.insert((p.lhs, it.origin, k));
                }
            }
        }
        spans
    }
}

/// A leaf: the token together with the terminal and reading it filled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Leaf {
    pub token: Token,
    pub terminal: Terminal,
    pub reading: Reading,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseChild {
    Node(ParseNode),
    Leaf(Leaf),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseNode {
    pub tag: Tag,
    pub children: Vec<ParseChild>,
}

impl ParseNode {
    pub fn nodes(&self) -> impl Iterator<Item = &ParseNode> {
        self.children.iter().filter_map(|c| match c {
            ParseChild::Node(n) => Some(n),
            ParseChild::Leaf(_) => None,
        })
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Leaf> {
        self.children.iter().filter_map(|c| match c {
            ParseChild::Leaf(l) => Some(l),
            ParseChild::Node(_) => None,
        })
    }

    pub fn child_with_tag(&self, tag: Tag) -> Option<&ParseNode> {
        self.nodes().find(|n| n.tag == tag)
    }

    /// Every token below this node, left to right.
    pub fn tokens(&self) -> Vec<&Token> {
        let mut out = Vec::new();
        self.collect_tokens(&mut out);
        out
    }

    fn collect_tokens<'a>(&'a self, out: &mut Vec<&'a Token>) {
        for c in &self.children {
            match c {
                ParseChild::Leaf(l) => out.push(&l.token),
                ParseChild::Node(n) => n.collect_tokens(out),
            }
        }
    }

    /// Bracketed rendering used in diagnostics and golden tests.
    pub fn render(&self) -> String {
        let inner: Vec<String> = self
            .children
            .iter()
            .map(|c| match c {
                ParseChild::Leaf(l) => l.token.surface.clone(),
                ParseChild::Node(n) => n.render(),
            })
            .collect();
        format!("[{:?} {}]", self.tag, inner.join(" "))
    }
}

/// At most this many trees are built per span; two are enough to prove
/// ambiguity.
const TREE_CAP: usize = 2;

pub(crate) struct TreeBuilder<'a> {
    grammar: &'a Grammar,
    tokens: &'a [Token],
    lexicon: &'a Lexicon,
    spans: HashSet<(NtId, usize, usize)>,
    memo: HashMap<(NtId, usize, usize), Vec<ParseNode>>,
}

impl<'a> TreeBuilder<'a> {
    pub fn new(chart: &Chart<'a>, tokens: &'a [Token], lexicon: &'a Lexicon) -> TreeBuilder<'a> {
        TreeBuilder {
            grammar: chart.grammar,
            tokens,
            lexicon,
            spans: chart.completed_spans(),
            memo: HashMap::new(),
        }
    }

    /// Up to [`TREE_CAP`] distinct trees for the whole input.
    pub fn trees(&mut self) -> Vec<ParseNode> {
        let start = self.grammar.start();
        self.derive(start, 0, self.tokens.len())
    }

    fn derive(&mut self, nt: NtId, i: usize, j: usize) -> Vec<ParseNode> {
        if let Some(hit) = self.memo.get(&(nt, i, j)) {
            return hit.clone();
        }
        let mut out = Vec::new();
        for &prod in self.grammar.alternatives(nt) {
            let p = self.grammar.production(prod);
            let tag = p.tag;
            let rhs = p.rhs.clone();
            for children in self.match_rhs(&rhs, i, j) {
                out.push(ParseNode { tag, children });
                if out.len() >= TREE_CAP {
                    break;
                }
            }
            if out.len() >= TREE_CAP {
                break;
            }
        }
        self.memo.insert((nt, i, j), out.clone());
        out
    }

    fn match_rhs(&mut self, rhs: &[Symbol], pos: usize, end: usize) -> Vec<Vec<ParseChild>> {
        let Some((first, rest)) = rhs.split_first() else {
            return if pos == end { vec![Vec::new()] } else { Vec::new() };
        };
        let rest_min = self.grammar.min_len_of(rest);
        if pos >= end || end - pos < rest_min.saturating_add(1) {
            return Vec::new();
        }
        let mut out = Vec::new();
        match first {
            Symbol::T(term) => {
                if let Some(reading) = matches(*term, &self.tokens[pos], self.lexicon) {
                    let leaf = ParseChild::Leaf(Leaf {
                        token: self.tokens[pos].clone(),
                        terminal: *term,
                        reading,
                    });
                    for mut tail in self.match_rhs(rest, pos + 1, end) {
                        tail.insert(0, leaf.clone());
                        out.push(tail);
                        if out.len() >= TREE_CAP {
                            break;
                        }
                    }
                }
            }
            Symbol::N(nt) => {
                for mid in pos + 1..=end - rest_min {
                    if !self.spans.contains(&(*nt, pos, mid)) {
                        continue;
                    }
                    let heads = self.derive(*nt, pos, mid);
                    if heads.is_empty() {
                        continue;
                    }
                    let tails = self.match_rhs(rest, mid, end);
                    for head in &heads {
                        for tail in &tails {
                            let mut seq = Vec::with_capacity(tail.len() + 1);
                            seq.push(ParseChild::Node(head.clone()));
                            seq.extend(tail.iter().cloned());
                            out.push(seq);
                            if out.len() >= TREE_CAP {
                                return out;
                            }
                        }
                    }
                }
            }
        }
        out
    }
}
