//! Compositional mapping from parse trees to statements.

use crate::cnl::earley::{Leaf, ParseChild, ParseNode};
use crate::cnl::grammar::{Tag, Terminal};
use crate::cnl::lexicon::Lexicon;
use crate::cnl::token::Reading;
use crate::cnl::ParseTree;

use super::{
    constant_of, Atom, CardinalityCheck, Comparator, Counting, LogicError, Predicate, Query, Rule,
    Statement, Term,
};

/// Translates a parse tree into one or more statements. Conjoined
/// consequents and declarative verb-phrase lists yield one statement each.
pub fn translate(tree: &ParseTree, lexicon: &Lexicon) -> Result<Vec<Statement>, LogicError> {
    let mut tx = Translator { lexicon, fresh: 0 };
    let statements = tx.sentence(&tree.root)?;
    for s in &statements {
        s.validate()?;
    }
    Ok(statements)
}

struct Translator<'a> {
    lexicon: &'a Lexicon,
    fresh: usize,
}

fn malformed(node: &ParseNode) -> LogicError {
    LogicError::Malformed(node.render())
}

fn children(node: &ParseNode) -> (Vec<&Leaf>, Vec<&ParseNode>) {
    (node.leaves().collect(), node.nodes().collect())
}

fn leaf_with(node: &ParseNode, pred: impl Fn(Terminal) -> bool) -> Option<&Leaf> {
    node.leaves().find(|l| pred(l.terminal))
}

impl Translator<'_> {
    fn fresh_var(&mut self) -> Term {
        self.fresh += 1;
        Term::Var(format!("v{}", self.fresh))
    }

    fn predicate(&self, leaf: &Leaf) -> Result<Predicate, LogicError> {
        match leaf.reading {
            Reading::Lexical { entry, .. } => Predicate::from_entry(self.lexicon.entry(entry))
                .ok_or_else(|| LogicError::Malformed(format!("`{}` is not a predicate", leaf.token.surface))),
            _ => Err(LogicError::Malformed(format!("`{}` is not a content word", leaf.token.surface))),
        }
    }

    fn leaf_term(&self, leaf: &Leaf) -> Result<Term, LogicError> {
        match leaf.reading {
            Reading::Lexical { entry, .. } => constant_of(self.lexicon.entry(entry))
                .ok_or_else(|| LogicError::Malformed(format!("`{}` is not a name", leaf.token.surface))),
            Reading::Variable => Ok(Term::Var(leaf.token.surface.clone())),
            _ => Err(LogicError::Malformed(format!("`{}` is not a term", leaf.token.surface))),
        }
    }

    fn sentence(&mut self, root: &ParseNode) -> Result<Vec<Statement>, LogicError> {
        let (leaves, nodes) = children(root);
        match root.tag {
            Tag::FactSentence => {
                let subject = self.leaf_term(leaves[0])?;
                let mut out = Vec::new();
                for vp in conjuncts(nodes[0]) {
                    out.extend(self.declarative(vp, &subject)?);
                }
                Ok(out)
            }
            Tag::OfFactSentence => {
                let of = leaf_with(root, |t| t == Terminal::OfSingular).ok_or_else(|| malformed(root))?;
                let names: Vec<&Leaf> = root.leaves().filter(|l| l.terminal == Terminal::Name).collect();
                let (owner, value) = (self.leaf_term(names[0])?, self.leaf_term(names[1])?);
                Ok(vec![Statement::Fact(Atom::binary(self.predicate(of)?, value, owner))])
            }
            Tag::EverySentence | Tag::NoSentence => {
                let x = self.fresh_var();
                let mut body = Vec::new();
                self.noun_bar(nodes[0], &x, &mut body)?;
                let mut rest = &nodes[1..];
                if let Some(rel) = rest.first().filter(|n| n.tag == Tag::RelClause) {
                    self.rel(rel, &x, &mut body)?;
                    rest = &rest[1..];
                }
                let vps = conjuncts(rest[0]);
                if root.tag == Tag::NoSentence {
                    for vp in vps {
                        self.vp(vp, &x, &mut body)?;
                    }
                    return Ok(vec![Statement::Denial(body)]);
                }
                self.rules(body, &x, &vps)
            }
            Tag::IfSentence => {
                let subject = self.subject(nodes[0])?;
                let mut body = subject.1;
                for vp in conjuncts(nodes[1]) {
                    self.vp(vp, &subject.0, &mut body)?;
                }
                let (then_subject, extra) = self.subject(nodes[2])?;
                if !extra.is_empty() {
                    return Err(malformed(root));
                }
                self.rules(body, &then_subject, &conjuncts(nodes[3]))
            }
            Tag::EverythingSentence => {
                let verb = leaf_with(root, |t| t == Terminal::VerbSingular).ok_or_else(|| malformed(root))?;
                let counting = self.counting(root, nodes[0], verb, false)?;
                Ok(vec![Statement::Card(CardinalityCheck { subject: self.fresh_var(), scope: vec![], counting })])
            }
            Tag::WhichQuestion | Tag::WhatQuestion => {
                let x = self.fresh_var();
                let mut body = Vec::new();
                let mut rest = &nodes[..];
                if root.tag == Tag::WhichQuestion {
                    self.noun_bar(rest[0], &x, &mut body)?;
                    rest = &rest[1..];
                    if let Some(rel) = rest.first().filter(|n| n.tag == Tag::RelClause) {
                        self.rel(rel, &x, &mut body)?;
                        rest = &rest[1..];
                    }
                }
                let mut counting = None;
                for vp in conjuncts(rest[0]) {
                    match vp.tag {
                        Tag::VpCountActive | Tag::VpCountPassive => counting = Some(self.count_vp(vp)?),
                        _ => self.vp(vp, &x, &mut body)?,
                    }
                }
                let answer = x.var_name().expect("fresh variable").to_string();
                Ok(vec![Statement::Query(Query { answer, body, counting })])
            }
            _ => Err(malformed(root)),
        }
    }

    /// One rule per consequent atom, all sharing `body`.
    fn rules(&mut self, body: Vec<Atom>, subject: &Term, vps: &[&ParseNode]) -> Result<Vec<Statement>, LogicError> {
        let mut heads = Vec::new();
        for vp in vps {
            self.vp(vp, subject, &mut heads)?;
        }
        Ok(heads.into_iter().map(|head| Statement::Rule(Rule { body: body.clone(), head })).collect())
    }

    /// A conjunct of a declarative sentence about a named subject.
    fn declarative(&mut self, vp: &ParseNode, subject: &Term) -> Result<Vec<Statement>, LogicError> {
        match vp.tag {
            Tag::VpCountActive | Tag::VpCountPassive => {
                let counting = self.count_vp(vp)?;
                Ok(vec![Statement::Card(CardinalityCheck { subject: subject.clone(), scope: vec![], counting })])
            }
            Tag::VpEveryObject => {
                let verb = leaf_with(vp, |t| t == Terminal::VerbSingular).ok_or_else(|| malformed(vp))?;
                let y = self.fresh_var();
                let mut body = Vec::new();
                let nodes: Vec<&ParseNode> = vp.nodes().collect();
                self.noun_bar(nodes[0], &y, &mut body)?;
                if let Some(rel) = nodes.get(1) {
                    self.rel(rel, &y, &mut body)?;
                }
                let head = Atom::binary(self.predicate(verb)?, subject.clone(), y);
                Ok(vec![Statement::Rule(Rule { body, head })])
            }
            _ => {
                let mut atoms = Vec::new();
                self.vp(vp, subject, &mut atoms)?;
                Ok(atoms.into_iter().map(Statement::Fact).collect())
            }
        }
    }

    /// IFSUBJ / THENSUBJ: a variable or "something".
    fn subject(&mut self, node: &ParseNode) -> Result<(Term, Vec<Atom>), LogicError> {
        let mut atoms = Vec::new();
        let term = self.np(node, &mut atoms)?;
        Ok((term, atoms))
    }

    fn noun_bar(&mut self, node: &ParseNode, x: &Term, out: &mut Vec<Atom>) -> Result<(), LogicError> {
        let leaf = node.leaves().next().ok_or_else(|| malformed(node))?;
        let pred = self.predicate(leaf)?;
        match node.tag {
            Tag::NounBar => out.push(Atom::unary(pred, x.clone())),
            Tag::OfBar => {
                let reference = node.nodes().next().ok_or_else(|| malformed(node))?;
                let owner = self.np(reference, out)?;
                out.push(Atom::binary(pred, x.clone(), owner));
            }
            _ => return Err(malformed(node)),
        }
        Ok(())
    }

    fn rel(&mut self, node: &ParseNode, x: &Term, out: &mut Vec<Atom>) -> Result<(), LogicError> {
        let vp = node.nodes().next().ok_or_else(|| malformed(node))?;
        self.vp(vp, x, out)
    }

    fn np(&mut self, node: &ParseNode, out: &mut Vec<Atom>) -> Result<Term, LogicError> {
        match node.tag {
            Tag::NpName | Tag::NpVariable => self.leaf_term(node.leaves().next().ok_or_else(|| malformed(node))?),
            Tag::NpIndefinite | Tag::NpSomething => {
                let v = self.fresh_var();
                let nodes: Vec<&ParseNode> = node.nodes().collect();
                for n in nodes {
                    match n.tag {
                        Tag::RelClause => self.rel(n, &v, out)?,
                        _ => self.noun_bar(n, &v, out)?,
                    }
                }
                Ok(v)
            }
            _ => Err(malformed(node)),
        }
    }

    fn vp(&mut self, node: &ParseNode, subject: &Term, out: &mut Vec<Atom>) -> Result<(), LogicError> {
        let nodes: Vec<&ParseNode> = node.nodes().collect();
        match node.tag {
            Tag::VpIsA => {
                self.noun_bar(nodes[0], subject, out)?;
                if let Some(rel) = nodes.get(1) {
                    self.rel(rel, subject, out)?;
                }
            }
            Tag::VpActive | Tag::VpPassive | Tag::VpAdjective => {
                let content = node
                    .leaves()
                    .find(|l| matches!(l.reading, Reading::Lexical { .. }))
                    .ok_or_else(|| malformed(node))?;
                let pred = self.predicate(content)?;
                let mut inner = Vec::new();
                let object = self.np(nodes[0], &mut inner)?;
                let atom = if node.tag == Tag::VpPassive {
                    Atom::binary(pred, object, subject.clone())
                } else {
                    Atom::binary(pred, subject.clone(), object)
                };
                out.push(atom);
                out.extend(inner);
            }
            _ => return Err(malformed(node)),
        }
        Ok(())
    }

    fn count_vp(&mut self, vp: &ParseNode) -> Result<Counting, LogicError> {
        let verb = vp
            .leaves()
            .find(|l| matches!(l.terminal, Terminal::VerbSingular | Terminal::VerbPlural | Terminal::VerbPassive))
            .ok_or_else(|| malformed(vp))?;
        let count = vp.nodes().next().ok_or_else(|| malformed(vp))?;
        self.counting(vp, count, verb, vp.tag == Tag::VpCountPassive)
    }

    fn counting(&self, parent: &ParseNode, count: &ParseNode, verb: &Leaf, inverse: bool) -> Result<Counting, LogicError> {
        let cmp = parent
            .leaves()
            .find_map(|l| match l.reading {
                Reading::Function(w) => Comparator::from_words(w),
                _ => None,
            })
            .ok_or_else(|| malformed(parent))?;
        let mut bound = None;
        let mut filter = None;
        for leaf in count.leaves() {
            match (leaf.terminal, leaf.reading) {
                (Terminal::One, _) => bound = Some(1),
                (Terminal::Many, Reading::Number(n)) => bound = Some(n),
                (Terminal::NounSingular | Terminal::NounPlural, _) => filter = Some(self.predicate(leaf)?),
                _ => {}
            }
        }
        Ok(Counting {
            relation: self.predicate(verb)?,
            inverse,
            filter: filter.ok_or_else(|| malformed(count))?,
            cmp,
            bound: bound.ok_or_else(|| malformed(count))?,
        })
    }
}

/// The verb phrases of a (possibly nested) "and" list, left to right.
fn conjuncts(node: &ParseNode) -> Vec<&ParseNode> {
    let mut out = Vec::new();
    fn walk<'n>(node: &'n ParseNode, out: &mut Vec<&'n ParseNode>) {
        if node.tag == Tag::VpList {
            for c in &node.children {
                if let ParseChild::Node(n) = c {
                    walk(n, out);
                }
            }
        } else {
            out.push(node);
        }
    }
    walk(node, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnl::Cnl;

    fn cnl() -> Cnl {
        Cnl::new(
            Lexicon::parse(
                "noun | class | classes\nnoun | method | methods\nnoun | component | components\n\
                 noun | code element | code elements\nnoun | improvement | improvements\n\
                 proper-name | Handler\nproper-name | EventHandler\nproper-name | Group-A\nproper-name | Core\n\
                 proper-name | ResultsCache\nproper-name | performance improvement\nproper-name | MySystem\n\
                 proper-name | The Medical Database\nnoun | patient record | patient records\n\
                 noun | module | modules\ntransitive-verb | contains | contain | contained\n\
                 transitive-verb | stores | store | stored\n\
                 transitive-verb | defines | define | defined\ntransitive-verb | invokes | invoke | invoked\n\
                 transitive-verb | maintains | maintain | maintained\ntransitive-verb | uses | use | used\n\
                 transitive-verb | belongs to | belong to | belonged to\n\
                 of-construct | subclass of | subclasses of\nof-construct | member of | members of\n\
                 of-construct | method of | methods of\nof-construct | purpose of | purposes of\n\
                 adjective-preposition | related | to\n",
            )
            .unwrap(),
        )
    }

    fn lines(text: &str) -> Vec<String> {
        let c = cnl();
        let tree = c.parse_text(text).unwrap_or_else(|e| panic!("{text}: {e}"));
        translate(&tree, c.lexicon()).unwrap().iter().map(Statement::to_string).collect()
    }

    fn error(text: &str) -> LogicError {
        let c = cnl();
        translate(&c.parse_text(text).unwrap(), c.lexicon()).unwrap_err()
    }

    #[test]
    fn taxonomy_and_disjointness() {
        assert_eq!(lines("Every class is a code element."), ["RULE class(?v1) -> code-element(?v1)"]);
        assert_eq!(lines("No class is a method."), ["DENIAL class(?v1) & method(?v1)"]);
    }

    #[test]
    fn rule_with_something_and_passive() {
        assert_eq!(
            lines("If X is defined by something that belongs to Y then X is a method of Y."),
            ["RULE defines(?v1, ?X) & belongs-to(?v1, ?Y) -> method-of(?X, ?Y)"]
        );
    }

    #[test]
    fn denial_with_nested_of_constructs() {
        assert_eq!(
            lines("No subclass of Handler is maintained by a member of Group-A."),
            ["DENIAL subclass-of(?v1, Handler) & maintains(?v2, ?v1) & member-of(?v2, Group-A)"]
        );
    }

    #[test]
    fn counting_query_and_cardinality_checks() {
        assert_eq!(
            lines("Which methods are invoked by more than 80 methods?"),
            ["QUERY ?v1 where method(?v1): count invokes(_, ?v1) & method(_) more-than 80"]
        );
        assert_eq!(
            lines("Everything belongs to at most 1 component."),
            ["CARD ?v1: count belongs-to(?v1, _) & component(_) at-most 1"]
        );
        assert_eq!(
            lines("MySystem contains exactly 10 modules."),
            ["CARD MySystem: count contains(MySystem, _) & module(_) exactly 10"]
        );
    }

    #[test]
    fn conjoined_declarative_splits() {
        assert_eq!(
            lines("EventHandler is a class and is a subclass of Handler."),
            ["FACT class(EventHandler)", "FACT subclass-of(EventHandler, Handler)"]
        );
        assert_eq!(
            lines("If X belongs to Y and uses Z then Y uses Z."),
            ["RULE belongs-to(?X, ?Y) & uses(?X, ?Z) -> uses(?Y, ?Z)"]
        );
    }

    #[test]
    fn of_fact_and_every_object() {
        assert_eq!(
            lines("A purpose of ResultsCache is performance improvement."),
            ["FACT purpose-of(\"performance improvement\", ResultsCache)"]
        );
        assert_eq!(
            lines("The Medical Database stores every patient record."),
            ["RULE patient-record(?v1) -> stores(\"The Medical Database\", ?v1)"]
        );
    }

    #[test]
    fn passive_equals_active() {
        assert_eq!(lines("Core is used by EventHandler."), lines("EventHandler uses Core."));
    }

    #[test]
    fn questions() {
        assert_eq!(lines("What belongs to Core?"), ["QUERY ?v1 where belongs-to(?v1, Core)"]);
        assert_eq!(
            lines("Which component is used by Core?"),
            ["QUERY ?v1 where component(?v1) & uses(Core, ?v1)"]
        );
    }

    #[test]
    fn existential_heads_are_rejected() {
        assert_eq!(error("Every class defines a method."), LogicError::ExistentialHead { variable: "v2".into() });
        assert_eq!(error("Core uses something."), LogicError::ExistentialHead { variable: "v1".into() });
        assert!(matches!(error("If X is a class then Y is a method."), LogicError::ExistentialHead { .. }));
    }
}
