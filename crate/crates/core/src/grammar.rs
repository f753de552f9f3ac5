//! Grammars: a lexicon (possibly with empty-string entries), a list of
//! restricted combinatory rules and a distinguished atom.
//!
//! The line-oriented text format is
//!
//! ```text
//! # comment
//! start S
//! atoms S NP N            (optional; inferred from use otherwise)
//! lex prove := (S\NP)/NP
//! lex EPS := S            (entry for the empty string)
//! rule fwd deg=0
//! rule bwd deg=1 slashes=/ Y={S\NP} target={S}
//! rule fwd deg=2 slashes=// Y={cent} Z1={v1T} Z2={cent}
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::category::{is_atom_token, Argument, Atom, Category, CategoryError, Slash};

/// Word used in grammar files for lexicon entries of the empty string.
pub const EPSILON_WORD: &str = "EPS";

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LexEntry {
    /// `None` is the empty string.
    pub word: Option<String>,
    pub category: Category,
}

impl LexEntry {
    pub fn new(word: &str, category: Category) -> LexEntry {
        LexEntry {
            word: Some(word.to_string()),
            category,
        }
    }

    pub fn epsilon(category: Category) -> LexEntry {
        LexEntry {
            word: None,
            category,
        }
    }

    pub fn is_epsilon(&self) -> bool {
        self.word.is_none()
    }
}

/// Which input is the functor: forward rules take the primary on the left,
/// backward rules on the right.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Schema {
    Forward,
    Backward,
}

impl Schema {
    pub fn slash(self) -> Slash {
        match self {
            Schema::Forward => Slash::Forward,
            Schema::Backward => Slash::Backward,
        }
    }

    fn keyword(self) -> &'static str {
        match self {
            Schema::Forward => "fwd",
            Schema::Backward => "bwd",
        }
    }
}

/// A combinatory rule: an instance of the forward or backward schema of some
/// degree, with optional restrictions on the target of the primary input,
/// on `Y` and on each `Z_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub schema: Schema,
    pub degree: usize,
    /// Slash of each `Z_i`, bottom to top.
    pub arg_slashes: Vec<Slash>,
    pub target: Option<Vec<Atom>>,
    pub y: Option<Vec<Category>>,
    pub z: Vec<Option<Vec<Category>>>,
}

impl Rule {
    /// An unrestricted rule with the given `Z` slashes; its degree is the
    /// number of slashes.
    pub fn new(schema: Schema, arg_slashes: Vec<Slash>) -> Rule {
        Rule {
            schema,
            degree: arg_slashes.len(),
            z: vec![None; arg_slashes.len()],
            arg_slashes,
            target: None,
            y: None,
        }
    }

    pub fn application(schema: Schema) -> Rule {
        Rule::new(schema, Vec::new())
    }

    /// A forward rule whose `Z` slashes are all forward.
    pub fn forward_composition(degree: usize) -> Rule {
        Rule::new(Schema::Forward, vec![Slash::Forward; degree])
    }

    pub fn with_target<I: IntoIterator<Item = Atom>>(mut self, atoms: I) -> Rule {
        self.target = Some(atoms.into_iter().collect());
        self
    }

    pub fn with_y<I: IntoIterator<Item = Category>>(mut self, cats: I) -> Rule {
        self.y = Some(cats.into_iter().collect());
        self
    }

    /// Restricts `Z_{position}`; positions are 1-based.
    pub fn with_z<I: IntoIterator<Item = Category>>(mut self, position: usize, cats: I) -> Rule {
        self.z[position - 1] = Some(cats.into_iter().collect());
        self
    }

    /// Applies the rule to a primary and a secondary input, returning the
    /// output of the ground instance if there is one.
    pub fn apply(&self, primary: &Category, secondary: &Category) -> Option<Category> {
        let top = primary.top()?;
        if top.slash != self.schema.slash() {
            return None;
        }
        let (y, zs) = secondary.split_top(self.degree)?;
        if top.category != y {
            return None;
        }
        self.admits(primary, &y, zs)?;
        let below = &primary.args()[..primary.arity() - 1];
        Some(primary.with_args(below.iter().chain(zs).cloned().collect()))
    }

    /// Checks the restrictions for a candidate whose `Y` already matches.
    pub(crate) fn admits(&self, primary: &Category, y: &Category, zs: &[Argument]) -> Option<()> {
        if zs.len() != self.degree {
            return None;
        }
        for (arg, &slash) in zs.iter().zip(&self.arg_slashes) {
            if arg.slash != slash {
                return None;
            }
        }
        if let Some(targets) = &self.target {
            if !targets.contains(&primary.target()) {
                return None;
            }
        }
        if let Some(ys) = &self.y {
            if !ys.contains(y) {
                return None;
            }
        }
        for (arg, allowed) in zs.iter().zip(&self.z) {
            if let Some(allowed) = allowed {
                if !allowed.contains(&arg.category) {
                    return None;
                }
            }
        }
        Some(())
    }

    /// Orders a (left, right) pair as (primary, secondary).
    pub fn orient<'a>(&self, left: &'a Category, right: &'a Category) -> (&'a Category, &'a Category) {
        match self.schema {
            Schema::Forward => (left, right),
            Schema::Backward => (right, left),
        }
    }

    fn atoms(&self, out: &mut Vec<Atom>) {
        if let Some(targets) = &self.target {
            out.extend(targets.iter().copied());
        }
        for set in self.y.iter().chain(self.z.iter().flatten()) {
            for cat in set {
                cat.atoms(out);
            }
        }
    }
}

fn write_set<T: fmt::Display>(f: &mut fmt::Formatter<'_>, key: &str, items: &[T]) -> fmt::Result {
    write!(f, " {key}={{")?;
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_char(',')?;
        }
        write!(f, "{item}")?;
    }
    f.write_char('}')
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule {} deg={}", self.schema.keyword(), self.degree)?;
        if self.degree > 0 {
            let slashes: String = self.arg_slashes.iter().map(|s| s.as_char()).collect();
            write!(f, " slashes={slashes}")?;
        }
        if let Some(targets) = &self.target {
            write_set(f, "target", targets)?;
        }
        if let Some(ys) = &self.y {
            write_set(f, "Y", ys)?;
        }
        for (i, z) in self.z.iter().enumerate() {
            if let Some(z) = z {
                write_set(f, &format!("Z{}", i + 1), z)?;
            }
        }
        Ok(())
    }
}

/// Maxima over the lexicon and rule set that bound derivation size.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GrammarStats {
    /// Largest size of a lexicon category.
    pub lambda: usize,
    /// Largest arity of a lexicon category.
    pub gamma: usize,
    /// Largest size of an argument of a lexicon category.
    pub alpha: usize,
    /// Largest rule degree.
    pub dmax: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid grammar: {0}")]
    Invalid(String),
    #[error("grammar has an empty lexicon")]
    EmptyLexicon,
}

fn syntax(line: usize, message: impl Into<String>) -> GrammarError {
    GrammarError::Syntax {
        line,
        message: message.into(),
    }
}

#[derive(Clone, Debug)]
pub struct Grammar {
    vocabulary: BTreeSet<String>,
    atoms: BTreeSet<Atom>,
    lexicon: Vec<LexEntry>,
    rules: Vec<Rule>,
    start: Atom,
    by_word: BTreeMap<String, Vec<usize>>,
    epsilon: Vec<usize>,
}

impl Grammar {
    /// Builds a grammar whose vocabulary and atom set are inferred from the
    /// lexicon, the rules and the start atom.
    pub fn new(start: Atom, lexicon: Vec<LexEntry>, rules: Vec<Rule>) -> Result<Grammar, GrammarError> {
        Grammar::build(start, None, lexicon, rules)
    }

    /// Like [`Grammar::new`] but with an explicit atom set that every used
    /// atom must belong to.
    pub fn with_atoms(
        start: Atom,
        atoms: BTreeSet<Atom>,
        lexicon: Vec<LexEntry>,
        rules: Vec<Rule>,
    ) -> Result<Grammar, GrammarError> {
        Grammar::build(start, Some(atoms), lexicon, rules)
    }

    fn build(
        start: Atom,
        declared: Option<BTreeSet<Atom>>,
        lexicon: Vec<LexEntry>,
        rules: Vec<Rule>,
    ) -> Result<Grammar, GrammarError> {
        let mut used = Vec::new();
        for entry in &lexicon {
            entry.category.atoms(&mut used);
            if let Some(word) = &entry.word {
                if word.is_empty() || word == EPSILON_WORD || word.chars().any(char::is_whitespace) {
                    return Err(GrammarError::Invalid(format!("illegal word `{word}`")));
                }
            }
        }
        for (id, rule) in rules.iter().enumerate() {
            if rule.arg_slashes.len() != rule.degree || rule.z.len() != rule.degree {
                return Err(GrammarError::Invalid(format!(
                    "rule {id}: degree {} does not match its slash count",
                    rule.degree
                )));
            }
            let empty_target = rule.target.as_ref().is_some_and(|t| t.is_empty());
            let empty_y = rule.y.as_ref().is_some_and(|y| y.is_empty());
            if empty_target || empty_y || rule.z.iter().flatten().any(|z| z.is_empty()) {
                return Err(GrammarError::Invalid(format!("rule {id}: empty constraint set")));
            }
            rule.atoms(&mut used);
        }
        let atoms = match declared {
            Some(atoms) => {
                if !atoms.contains(&start) {
                    return Err(GrammarError::Invalid(format!("unknown start atom `{start}`")));
                }
                if let Some(atom) = used.iter().find(|a| !atoms.contains(a)) {
                    return Err(GrammarError::Invalid(format!("undeclared atom `{atom}`")));
                }
                atoms
            }
            None => used.into_iter().chain([start]).collect(),
        };
        let mut by_word: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        let mut epsilon = Vec::new();
        for (i, entry) in lexicon.iter().enumerate() {
            match &entry.word {
                Some(word) => by_word.entry(word.clone()).or_default().push(i),
                None => epsilon.push(i),
            }
        }
        Ok(Grammar {
            vocabulary: by_word.keys().cloned().collect(),
            atoms,
            lexicon,
            rules,
            start,
            by_word,
            epsilon,
        })
    }

    /// Parses the grammar file format.
    pub fn parse(text: &str) -> Result<Grammar, GrammarError> {
        let mut start = None;
        let mut declared: Option<BTreeSet<Atom>> = None;
        let mut lexicon = Vec::new();
        let mut rules = Vec::new();
        for (index, raw) in text.lines().enumerate() {
            let line_no = index + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (keyword, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim();
            match keyword {
                "start" => {
                    if start.is_some() {
                        return Err(syntax(line_no, "duplicate `start`"));
                    }
                    start = Some(parse_atom(rest, line_no)?);
                }
                "atoms" => {
                    let set = declared.get_or_insert_with(BTreeSet::new);
                    for name in rest.split_whitespace() {
                        set.insert(parse_atom(name, line_no)?);
                    }
                }
                "lex" => lexicon.push(parse_lex(rest, line_no)?),
                "rule" => rules.push(parse_rule(rest, line_no)?),
                other => return Err(syntax(line_no, format!("unknown directive `{other}`"))),
            }
        }
        let start = start.ok_or_else(|| GrammarError::Invalid("missing `start` line".into()))?;
        Grammar::build(start, declared, lexicon, rules)
    }

    /// Renders the grammar in the file format; `parse(to_text())` yields an
    /// equivalent grammar with the same rule ids.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "start {}", self.start).unwrap();
        for entry in &self.lexicon {
            let word = entry.word.as_deref().unwrap_or(EPSILON_WORD);
            writeln!(out, "lex {word} := {}", entry.category).unwrap();
        }
        for rule in &self.rules {
            writeln!(out, "{rule}").unwrap();
        }
        out
    }

    pub fn start(&self) -> Atom {
        self.start
    }

    pub fn start_category(&self) -> Category {
        Category::atomic(self.start)
    }

    pub fn vocabulary(&self) -> &BTreeSet<String> {
        &self.vocabulary
    }

    pub fn atoms(&self) -> &BTreeSet<Atom> {
        &self.atoms
    }

    pub fn lexicon(&self) -> &[LexEntry] {
        &self.lexicon
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, id: usize) -> Option<&Rule> {
        self.rules.get(id)
    }

    /// Lexicon indices of the entries for `word`.
    pub fn entries_for(&self, word: &str) -> &[usize] {
        self.by_word.get(word).map_or(&[], Vec::as_slice)
    }

    /// Lexicon indices of the empty-string entries.
    pub fn epsilon_entries(&self) -> &[usize] {
        &self.epsilon
    }

    pub fn has_entry(&self, entry: &LexEntry) -> bool {
        let candidates = match &entry.word {
            Some(word) => self.entries_for(word),
            None => &self.epsilon,
        };
        candidates.iter().any(|&i| self.lexicon[i].category == entry.category)
    }

    pub fn is_epsilon_free(&self) -> bool {
        self.epsilon.is_empty()
    }

    pub fn stats(&self) -> Result<GrammarStats, GrammarError> {
        if self.lexicon.is_empty() {
            return Err(GrammarError::EmptyLexicon);
        }
        let cats = self.lexicon.iter().map(|e| &e.category);
        Ok(GrammarStats {
            lambda: cats.clone().map(Category::size).max().unwrap_or(0),
            gamma: cats.clone().map(Category::arity).max().unwrap_or(0),
            alpha: cats.flat_map(|c| c.args().iter().map(Argument::size)).max().unwrap_or(0),
            dmax: self.rules.iter().map(|r| r.degree).max().unwrap_or(0),
        })
    }

    /// All (rule id, output) pairs for two adjacent categories, in rule order.
    pub fn combine(&self, left: &Category, right: &Category) -> Vec<(usize, Category)> {
        self.rules
            .iter()
            .enumerate()
            .filter_map(|(id, rule)| {
                let (primary, secondary) = rule.orient(left, right);
                rule.apply(primary, secondary).map(|out| (id, out))
            })
            .collect()
    }
}

/// Output of `rule` on the given inputs, or `None` if it does not apply.
pub fn match_rule(rule: &Rule, primary: &Category, secondary: &Category) -> Option<Category> {
    rule.apply(primary, secondary)
}

/// Whether `primary secondary => output` is a ground instance of `rule`.
pub fn ground_instances_check(rule: &Rule, primary: &Category, secondary: &Category, output: &Category) -> bool {
    rule.apply(primary, secondary).as_ref() == Some(output)
}

pub fn applicable_combinations(grammar: &Grammar, left: &Category, right: &Category) -> Vec<(usize, Category)> {
    grammar.combine(left, right)
}

fn parse_atom(text: &str, line: usize) -> Result<Atom, GrammarError> {
    if !is_atom_token(text) {
        return Err(syntax(line, format!("illegal atom `{text}`")));
    }
    Ok(Atom::intern(text))
}

fn parse_cat(text: &str, line: usize) -> Result<Category, GrammarError> {
    Category::parse(text).map_err(|e: CategoryError| syntax(line, e.to_string()))
}

fn parse_lex(rest: &str, line: usize) -> Result<LexEntry, GrammarError> {
    let (word, cat) = rest
        .split_once(":=")
        .ok_or_else(|| syntax(line, "expected `lex <word> := <category>`"))?;
    let word = word.trim();
    if word.is_empty() || word.chars().any(char::is_whitespace) {
        return Err(syntax(line, format!("bad word `{word}`")));
    }
    let category = parse_cat(cat, line)?;
    Ok(if word == EPSILON_WORD {
        LexEntry::epsilon(category)
    } else {
        LexEntry::new(word, category)
    })
}

/// Splits `key=value` fields; braced values may contain whitespace.
fn rule_fields(text: &str, line: usize) -> Result<Vec<(String, String)>, GrammarError> {
    let mut fields = Vec::new();
    let mut rest = text.trim_start();
    while !rest.is_empty() {
        let eq = rest
            .find('=')
            .ok_or_else(|| syntax(line, format!("expected `key=value`, found `{rest}`")))?;
        let key = rest[..eq].trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(syntax(line, format!("bad field name `{key}`")));
        }
        let after = &rest[eq + 1..];
        let (value, remaining) = if let Some(inner) = after.strip_prefix('{') {
            let close = inner.find('}').ok_or_else(|| syntax(line, "unterminated `{`"))?;
            (&inner[..close], &inner[close + 1..])
        } else {
            let end = after.find(char::is_whitespace).unwrap_or(after.len());
            (&after[..end], &after[end..])
        };
        fields.push((key.to_string(), value.to_string()));
        rest = remaining.trim_start();
    }
    Ok(fields)
}

fn parse_set(value: &str, line: usize) -> Result<Vec<Category>, GrammarError> {
    let mut out: Vec<Category> = Vec::new();
    for item in value.split(',') {
        if item.trim().is_empty() {
            return Err(syntax(line, "empty constraint set or element"));
        }
        let cat = parse_cat(item, line)?;
        if !out.contains(&cat) {
            out.push(cat);
        }
    }
    Ok(out)
}

fn parse_rule(rest: &str, line: usize) -> Result<Rule, GrammarError> {
    let (kind, fields) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
    let schema = match kind {
        "fwd" => Schema::Forward,
        "bwd" => Schema::Backward,
        other => return Err(syntax(line, format!("unknown schema `{other}`"))),
    };
    let mut degree = None;
    let mut slashes = None;
    let mut target = None;
    let mut y = None;
    let mut zs: Vec<(usize, Vec<Category>)> = Vec::new();
    for (key, value) in rule_fields(fields, line)? {
        match key.as_str() {
            "deg" => {
                degree = Some(value.parse::<usize>().map_err(|_| syntax(line, format!("bad degree `{value}`")))?)
            }
            "slashes" => {
                let parsed: Option<Vec<Slash>> = value.chars().map(Slash::from_char).collect();
                slashes = Some(parsed.ok_or_else(|| syntax(line, format!("bad slashes `{value}`")))?);
            }
            "target" => {
                if value.trim().is_empty() {
                    return Err(syntax(line, "empty constraint set"));
                }
                let atoms = value
                    .split(',')
                    .map(|a| parse_atom(a.trim(), line))
                    .collect::<Result<Vec<_>, _>>()?;
                target = Some(atoms);
            }
            "Y" => y = Some(parse_set(&value, line)?),
            z if z.starts_with('Z') => {
                let pos: usize = z[1..].parse().map_err(|_| syntax(line, format!("bad field `{z}`")))?;
                zs.push((pos, parse_set(&value, line)?));
            }
            other => return Err(syntax(line, format!("unknown field `{other}`"))),
        }
    }
    let degree = degree.ok_or_else(|| syntax(line, "missing `deg=`"))?;
    let slashes = match slashes {
        Some(s) => s,
        None if degree == 0 => Vec::new(),
        None => return Err(syntax(line, "`slashes=` is required when deg >= 1")),
    };
    if slashes.len() != degree {
        return Err(syntax(
            line,
            format!("deg={degree} but {} slashes given", slashes.len()),
        ));
    }
    let mut rule = Rule::new(schema, slashes);
    rule.target = target;
    rule.y = y;
    for (pos, set) in zs {
        if pos == 0 || pos > degree {
            return Err(syntax(line, format!("Z{pos} out of range for deg={degree}")));
        }
        rule.z[pos - 1] = Some(set);
    }
    Ok(rule)
}
