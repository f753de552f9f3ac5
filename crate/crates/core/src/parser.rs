//! Agenda-driven chart parser.
//!
//! Items are triples `[X, i, j]`. Words seed `[X, i, i+1]`, empty-string
//! entries seed `[X, i, i]` at every position. The agenda is FIFO, so the
//! first backpointer recorded for an item belongs to one of its lowest
//! derivations. Outputs whose arity exceeds the cap are dropped and the
//! result records that this happened.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use thiserror::Error;

use crate::category::{Category, Slash};
use crate::derivation::Derivation;
use crate::grammar::{Grammar, GrammarError, Schema};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ParseConfig {
    /// Largest arity an item may have; defaults to [`default_arity_cap`].
    pub arity_cap: Option<usize>,
    /// Abort once this many items have been created.
    pub max_items: Option<usize>,
    /// Record every way an item was built, not only the first.
    pub keep_alternatives: bool,
}

impl ParseConfig {
    pub fn with_cap(cap: usize) -> ParseConfig {
        ParseConfig {
            arity_cap: Some(cap),
            ..ParseConfig::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseResult {
    pub accepted: bool,
    pub items_created: usize,
    pub derivation: Option<Derivation>,
    /// Some combination was dropped because of the arity cap.
    pub cap_hit: bool,
    /// The cap that was in force.
    pub arity_cap: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("token `{token}` at position {position} is not in the vocabulary")]
    UnknownToken { position: usize, token: String },
    #[error("item budget of {limit} exhausted")]
    BudgetExhausted { limit: usize },
}

/// `γ + d·max(n−1, 0)`: the arity bound for derivations of ε-free grammars.
pub fn default_arity_cap(g: &Grammar, n: usize) -> Result<usize, GrammarError> {
    let s = g.stats()?;
    Ok(s.gamma + s.dmax * n.saturating_sub(1))
}

/// How an item was built: from a lexicon entry, or by a rule from two
/// chart items.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Back {
    Lexical(usize),
    Combined { left: usize, right: usize, rule: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Item {
    pub category: Category,
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Side {
    Start,
    End,
}

type PrimaryKey = (usize, Side, Slash, Category);
type SecondaryKey = (usize, Side, usize, Category);

/// A saturated chart. Item ids follow creation order.
#[derive(Debug)]
pub struct Chart {
    items: Vec<(Item, Back)>,
    alternatives: Vec<Vec<Back>>,
    len: usize,
    goal: Option<usize>,
    cap_hit: bool,
    arity_cap: usize,
    lexicon: Vec<crate::grammar::LexEntry>,
}

impl Chart {
    pub fn items(&self) -> impl Iterator<Item = &Item> {
        self.items.iter().map(|(item, _)| item)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn input_len(&self) -> usize {
        self.len
    }

    pub fn accepted(&self) -> bool {
        self.goal.is_some()
    }

    pub fn cap_hit(&self) -> bool {
        self.cap_hit
    }

    pub fn arity_cap(&self) -> usize {
        self.arity_cap
    }

    pub fn item(&self, id: usize) -> &Item {
        &self.items[id].0
    }

    pub fn goal(&self) -> Option<usize> {
        self.goal
    }

    /// Every recorded way of building item `id`, first one first. Only the
    /// first is recorded unless alternatives were requested.
    pub fn backpointers(&self, id: usize) -> &[Back] {
        match self.alternatives.get(id) {
            Some(all) => all,
            None => std::slice::from_ref(&self.items[id].1),
        }
    }

    /// The derivation of item `id` following `pick` at every item. `pick`
    /// must not lead back to an item already on the path.
    pub fn derivation_by(&self, id: usize, pick: &dyn Fn(usize) -> Back) -> Derivation {
        let mut memo: HashMap<usize, Arc<Derivation>> = HashMap::new();
        let root = self.build(id, pick, &mut memo);
        Arc::try_unwrap(root).unwrap_or_else(|shared| (*shared).clone())
    }

    /// The derivation of item `id` reconstructed from first backpointers.
    pub fn derivation(&self, id: usize) -> Derivation {
        self.derivation_by(id, &|i| self.items[i].1)
    }

    fn build(
        &self,
        id: usize,
        pick: &dyn Fn(usize) -> Back,
        memo: &mut HashMap<usize, Arc<Derivation>>,
    ) -> Arc<Derivation> {
        if let Some(t) = memo.get(&id) {
            return t.clone();
        }
        let item = &self.items[id].0;
        let t = match pick(id) {
            Back::Lexical(e) => Arc::new(Derivation::Leaf(self.lexicon[e].clone())),
            Back::Combined { left, right, rule } => {
                let left = self.build(left, pick, memo);
                let right = self.build(right, pick, memo);
                Arc::new(Derivation::Node {
                    category: item.category.clone(),
                    rule,
                    left,
                    right,
                })
            }
        };
        memo.insert(id, t.clone());
        t
    }

    pub fn goal_derivation(&self) -> Option<Derivation> {
        self.goal.map(|id| self.derivation(id))
    }
}

struct Builder<'g> {
    g: &'g Grammar,
    cap: usize,
    max_items: Option<usize>,
    items: Vec<(Item, Back)>,
    alternatives: Option<Vec<Vec<Back>>>,
    known: HashMap<(Category, usize, usize), usize>,
    agenda: VecDeque<usize>,
    primary: HashMap<PrimaryKey, Vec<usize>>,
    secondary: HashMap<SecondaryKey, Vec<usize>>,
    fwd_degrees: Vec<usize>,
    bwd_degrees: Vec<usize>,
    cap_hit: bool,
}

impl Builder<'_> {
    fn add(&mut self, category: Category, start: usize, end: usize, back: Back) -> Result<(), ParseError> {
        if category.arity() > self.cap {
            self.cap_hit = true;
            return Ok(());
        }
        let key = (category, start, end);
        if let Some(&id) = self.known.get(&key) {
            if let Some(all) = &mut self.alternatives {
                all[id].push(back);
            }
            return Ok(());
        }
        if let Some(limit) = self.max_items {
            if self.items.len() >= limit {
                return Err(ParseError::BudgetExhausted { limit });
            }
        }
        let id = self.items.len();
        let (category, start, end) = key;
        self.known.insert((category.clone(), start, end), id);
        self.items.push((Item { category, start, end }, back));
        if let Some(all) = &mut self.alternatives {
            all.push(vec![back]);
        }
        self.agenda.push_back(id);
        Ok(())
    }

    fn index(&mut self, id: usize) {
        let item = &self.items[id].0;
        let c = &item.category;
        for (pos, side) in [(item.start, Side::Start), (item.end, Side::End)] {
            if let Some(top) = c.top() {
                self.primary
                    .entry((pos, side, top.slash, top.category.clone()))
                    .or_default()
                    .push(id);
            }
            for d in self.fwd_degrees.iter().chain(&self.bwd_degrees) {
                if let Some((y, _)) = c.split_top(*d) {
                    let list = self.secondary.entry((pos, side, *d, y)).or_default();
                    if list.last() != Some(&id) {
                        list.push(id);
                    }
                }
            }
        }
    }

    /// Chart partners of `id`, as (left, right) pairs.
    fn partners(&self, id: usize) -> BTreeSet<(usize, usize)> {
        let item = &self.items[id].0;
        let c = &item.category;
        let mut pairs = BTreeSet::new();
        let none = Vec::new();
        let primary = |pos, side, slash, y: &Category| {
            self.primary.get(&(pos, side, slash, y.clone())).unwrap_or(&none)
        };
        let secondary = |pos, side, d, y: &Category| {
            self.secondary.get(&(pos, side, d, y.clone())).unwrap_or(&none)
        };
        // As the left input.
        if let Some(top) = c.top().filter(|t| t.slash == Slash::Forward) {
            for &d in &self.fwd_degrees {
                for &r in secondary(item.end, Side::Start, d, &top.category) {
                    pairs.insert((id, r));
                }
            }
        }
        for &d in &self.bwd_degrees {
            if let Some((y, _)) = c.split_top(d) {
                for &r in primary(item.end, Side::Start, Slash::Backward, &y) {
                    pairs.insert((id, r));
                }
            }
        }
        // As the right input.
        for &d in &self.fwd_degrees {
            if let Some((y, _)) = c.split_top(d) {
                for &l in primary(item.start, Side::End, Slash::Forward, &y) {
                    pairs.insert((l, id));
                }
            }
        }
        if let Some(top) = c.top().filter(|t| t.slash == Slash::Backward) {
            for &d in &self.bwd_degrees {
                for &l in secondary(item.start, Side::End, d, &top.category) {
                    pairs.insert((l, id));
                }
            }
        }
        pairs
    }

    fn run(&mut self) -> Result<(), ParseError> {
        while let Some(id) = self.agenda.pop_front() {
            self.index(id);
            let mut outputs = Vec::new();
            for (l, r) in self.partners(id) {
                let (left, right) = (&self.items[l].0, &self.items[r].0);
                for (rule, out) in self.g.combine(&left.category, &right.category) {
                    outputs.push(((left.start, left.end, rule, l, r), out, left.start, right.end));
                }
            }
            outputs.sort_by(|a, b| a.0.cmp(&b.0));
            for ((_, _, rule, left, right), out, start, end) in outputs {
                self.add(out, start, end, Back::Combined { left, right, rule })?;
            }
        }
        Ok(())
    }
}

fn distinct_degrees(g: &Grammar, schema: Schema) -> Vec<usize> {
    let set: BTreeSet<usize> = g.rules().iter().filter(|r| r.schema == schema).map(|r| r.degree).collect();
    set.into_iter().collect()
}

/// Saturates the chart for `w` and returns it.
pub fn parse_chart(g: &Grammar, w: &[&str], cfg: &ParseConfig) -> Result<Chart, ParseError> {
    for (position, token) in w.iter().enumerate() {
        if !g.vocabulary().contains(*token) {
            return Err(ParseError::UnknownToken {
                position,
                token: token.to_string(),
            });
        }
    }
    let cap = match cfg.arity_cap {
        Some(cap) => cap,
        None => default_arity_cap(g, w.len()).unwrap_or(0),
    };
    let mut b = Builder {
        g,
        cap,
        max_items: cfg.max_items,
        items: Vec::new(),
        alternatives: cfg.keep_alternatives.then(Vec::new),
        known: HashMap::new(),
        agenda: VecDeque::new(),
        primary: HashMap::new(),
        secondary: HashMap::new(),
        fwd_degrees: distinct_degrees(g, Schema::Forward),
        bwd_degrees: distinct_degrees(g, Schema::Backward),
        cap_hit: false,
    };
    for i in 0..=w.len() {
        for &e in g.epsilon_entries() {
            b.add(g.lexicon()[e].category.clone(), i, i, Back::Lexical(e))?;
        }
        if let Some(token) = w.get(i) {
            for &e in g.entries_for(token) {
                b.add(g.lexicon()[e].category.clone(), i, i + 1, Back::Lexical(e))?;
            }
        }
    }
    b.run()?;
    let goal = b.known.get(&(g.start_category(), 0, w.len())).copied();
    Ok(Chart {
        items: b.items,
        alternatives: b.alternatives.unwrap_or_default(),
        len: w.len(),
        goal,
        cap_hit: b.cap_hit,
        arity_cap: cap,
        lexicon: g.lexicon().to_vec(),
    })
}

fn result(chart: &Chart, with_derivation: bool) -> ParseResult {
    ParseResult {
        accepted: chart.accepted(),
        items_created: chart.len(),
        derivation: if with_derivation { chart.goal_derivation() } else { None },
        cap_hit: chart.cap_hit(),
        arity_cap: chart.arity_cap(),
    }
}

/// Decides membership of `w` without building a derivation.
pub fn recognize(g: &Grammar, w: &[&str], cfg: &ParseConfig) -> Result<ParseResult, ParseError> {
    Ok(result(&parse_chart(g, w, cfg)?, false))
}

/// Like [`recognize`], also returning a derivation when `w` is accepted.
pub fn parse(g: &Grammar, w: &[&str], cfg: &ParseConfig) -> Result<ParseResult, ParseError> {
    Ok(result(&parse_chart(g, w, cfg)?, true))
}

/// Categories derivable from the empty string under the cap.
pub fn saturate_empty(g: &Grammar, cfg: &ParseConfig) -> Result<BTreeSet<Category>, ParseError> {
    let chart = parse_chart(g, &[], cfg)?;
    Ok(chart.items().map(|item| item.category.clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::category::cat;
    use crate::derivation::{check_certificate, enumerate_derivations};
    use crate::fixtures;

    fn words(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn default_caps() {
        assert_eq!(default_arity_cap(&fixtures::figure1(), 4), Ok(2));
        assert_eq!(default_arity_cap(&fixtures::figure1(), 1), Ok(2));
        assert_eq!(default_arity_cap(&fixtures::example33(), 4), Ok(12));
        assert_eq!(default_arity_cap(&fixtures::example33(), 0), Ok(3));
        let empty = Grammar::parse("start S").unwrap();
        assert!(default_arity_cap(&empty, 3).is_err());
    }

    #[test]
    fn figure1_sentence() {
        let g = fixtures::figure1();
        let w = words("We prove two theorems");
        let r = parse(&g, &w, &ParseConfig::default()).unwrap();
        assert!(r.accepted);
        assert!(!r.cap_hit);
        let t = r.derivation.unwrap();
        assert_eq!(check_certificate(&g, &t, &w), Ok(()));
        assert_eq!(enumerate_derivations(&g, &w, 7), vec![t]);

        let r = parse(&g, &words("prove We"), &ParseConfig::default()).unwrap();
        assert!(!r.accepted);
        assert!(r.derivation.is_none());
    }

    #[test]
    fn unknown_token() {
        let g = fixtures::figure1();
        let err = recognize(&g, &words("We prove lemmas"), &ParseConfig::default()).unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownToken {
                position: 2,
                token: "lemmas".into()
            }
        );
    }

    #[test]
    fn budget_is_reported() {
        let g = fixtures::figure1();
        let cfg = ParseConfig {
            arity_cap: None,
            max_items: Some(3),
            ..ParseConfig::default()
        };
        let err = recognize(&g, &words("We prove two theorems"), &cfg).unwrap_err();
        assert_eq!(err, ParseError::BudgetExhausted { limit: 3 });
    }

    #[test]
    fn example33_language() {
        let g = fixtures::example33();
        for s in ["", "a b", "a a b b", "a b a b", "a a a b b b", "a b a b a b"] {
            let w = words(s);
            let cfg = ParseConfig::with_cap(12);
            let r = parse(&g, &w, &cfg).unwrap();
            assert!(r.accepted, "{s:?}");
            assert_eq!(check_certificate(&g, r.derivation.as_ref().unwrap(), &w), Ok(()));
        }
        for s in ["a", "b", "b a", "a a b"] {
            let r = recognize(&g, &words(s), &ParseConfig::with_cap(12)).unwrap();
            assert!(!r.accepted, "{s:?}");
        }
    }

    #[test]
    fn empty_string_prefers_earliest_seed() {
        let g = fixtures::example33();
        let r = parse(&g, &[], &ParseConfig::default()).unwrap();
        let t = r.derivation.unwrap();
        assert_eq!(t, Derivation::leaf(crate::grammar::LexEntry::epsilon(cat("S"))));
    }

    #[test]
    fn saturate_empty_examples() {
        let set = saturate_empty(&fixtures::example33(), &ParseConfig::with_cap(12)).unwrap();
        assert!(set.contains(&cat("S")) && set.contains(&cat("Shat")));
        assert!(saturate_empty(&fixtures::figure1(), &ParseConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn cap_suppression_is_flagged() {
        let g = Grammar::parse(
            "start A\nlex x := A/B\nlex y := B/B\nlex z := B\nrule fwd deg=0\nrule fwd deg=1 slashes=/\n",
        )
        .unwrap();
        let w = words("x y z");
        let full = recognize(&g, &w, &ParseConfig::default()).unwrap();
        assert!(full.accepted);
        let low = recognize(&g, &w, &ParseConfig::with_cap(0)).unwrap();
        assert!(!low.accepted);
        assert!(low.cap_hit);
    }

    #[test]
    fn runs_are_deterministic() {
        let g = fixtures::example33();
        let w = words("a a b b");
        let a = parse_chart(&g, &w, &ParseConfig::with_cap(12)).unwrap();
        let b = parse_chart(&g, &w, &ParseConfig::with_cap(12)).unwrap();
        assert!(a.items().eq(b.items()));
        assert_eq!(a.goal_derivation(), b.goal_derivation());
    }
}
