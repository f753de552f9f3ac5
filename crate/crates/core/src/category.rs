//! Categories viewed as stacks: an atomic target plus an ordered sequence of
//! slash/category arguments, bottom first.
//!
//! Both atoms and categories are interned in process-wide tables, so equality
//! and hashing are pointer operations. Interned values are never freed; the
//! number of distinct categories a run creates is bounded by the chart.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, LazyLock, RwLock};

use dashmap::DashMap;
use thiserror::Error;

/// An interned atomic category name.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Atom(u32);

#[derive(Default)]
struct AtomTable {
    names: Vec<Arc<str>>,
    ids: HashMap<Arc<str>, u32>,
}

static ATOMS: LazyLock<RwLock<AtomTable>> = LazyLock::new(Default::default);

/// Returns true if `name` is a legal atom token: `[A-Za-z][A-Za-z0-9_.+;-]*`.
pub fn is_atom_token(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => chars.all(is_atom_char),
        _ => false,
    }
}

fn is_atom_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '+' | ';' | '-')
}

impl Atom {
    /// Interns `name`, which must be a legal atom token.
    pub fn new(name: &str) -> Result<Atom, CategoryError> {
        if !is_atom_token(name) {
            return Err(CategoryError::BadAtom(name.to_string()));
        }
        Ok(Atom::intern(name))
    }

    pub(crate) fn intern(name: &str) -> Atom {
        if let Some(&id) = ATOMS.read().unwrap().ids.get(name) {
            return Atom(id);
        }
        let mut table = ATOMS.write().unwrap();
        if let Some(&id) = table.ids.get(name) {
            return Atom(id);
        }
        let id = table.names.len() as u32;
        let name: Arc<str> = Arc::from(name);
        table.names.push(name.clone());
        table.ids.insert(name, id);
        Atom(id)
    }

    pub fn name(&self) -> Arc<str> {
        ATOMS.read().unwrap().names[self.0 as usize].clone()
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Atom({})", self.name())
    }
}

// Interning ids depend on insertion order, so order by name for determinism.
impl Ord for Atom {
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        self.name().cmp(&other.name())
    }
}

impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slash {
    Forward,
    Backward,
}

impl Slash {
    pub fn as_char(self) -> char {
        match self {
            Slash::Forward => '/',
            Slash::Backward => '\\',
        }
    }

    pub fn from_char(c: char) -> Option<Slash> {
        match c {
            '/' => Some(Slash::Forward),
            '\\' => Some(Slash::Backward),
            _ => None,
        }
    }
}

/// A slash/category pair on a category's stack.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Argument {
    pub slash: Slash,
    pub category: Category,
}

impl Argument {
    pub fn new(slash: Slash, category: Category) -> Argument {
        Argument { slash, category }
    }

    pub fn forward(category: Category) -> Argument {
        Argument::new(Slash::Forward, category)
    }

    pub fn backward(category: Category) -> Argument {
        Argument::new(Slash::Backward, category)
    }

    /// The slash plus the size of the argument category.
    pub fn size(&self) -> usize {
        1 + self.category.size()
    }
}

impl fmt::Debug for Argument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.slash.as_char())?;
        write_argument(f, &self.category)
    }
}

// Hash and Eq are shallow: child categories are already interned, so
// comparing them by pointer is structural comparison.
#[derive(PartialEq, Eq, Hash)]
struct CatNode {
    target: Atom,
    args: Box<[Argument]>,
}

static CATEGORIES: LazyLock<DashMap<Arc<CatNode>, ()>> = LazyLock::new(DashMap::new);

/// An interned category.
#[derive(Clone)]
pub struct Category(Arc<CatNode>);

impl Category {
    pub fn new(target: Atom, args: Vec<Argument>) -> Category {
        let node = CatNode {
            target,
            args: args.into_boxed_slice(),
        };
        if let Some(entry) = CATEGORIES.get(&node) {
            return Category(entry.key().clone());
        }
        let node = Arc::new(node);
        let entry = CATEGORIES.entry(node.clone()).or_insert(());
        Category(entry.key().clone())
    }

    pub fn atomic(target: Atom) -> Category {
        Category::new(target, Vec::new())
    }

    /// Parses a category expression; slashes associate to the left.
    pub fn parse(text: &str) -> Result<Category, CategoryError> {
        CategoryParser::new(text).parse_complete()
    }

    pub fn target(&self) -> Atom {
        self.0.target
    }

    pub fn args(&self) -> &[Argument] {
        &self.0.args
    }

    pub fn arity(&self) -> usize {
        self.0.args.len()
    }

    pub fn is_atomic(&self) -> bool {
        self.0.args.is_empty()
    }

    /// The topmost argument, if any.
    pub fn top(&self) -> Option<&Argument> {
        self.0.args.last()
    }

    /// Node count of the syntax tree: every atom and every slash counts one.
    pub fn size(&self) -> usize {
        1 + self.0.args.iter().map(Argument::size).sum::<usize>()
    }

    /// Splits off the top `degree` arguments, returned bottom-to-top.
    pub fn split_top(&self, degree: usize) -> Option<(Category, &[Argument])> {
        let arity = self.arity();
        if arity < degree {
            return None;
        }
        let (below, top) = self.0.args.split_at(arity - degree);
        Some((self.with_args(below.to_vec()), top))
    }

    /// The category with its bottom `len` arguments kept.
    pub fn truncate(&self, len: usize) -> Category {
        if len >= self.arity() {
            return self.clone();
        }
        self.with_args(self.0.args[..len].to_vec())
    }

    /// The same target with a replaced argument stack.
    pub fn with_args(&self, args: Vec<Argument>) -> Category {
        Category::new(self.0.target, args)
    }

    /// Pushes arguments on top of the stack.
    pub fn extend<I: IntoIterator<Item = Argument>>(&self, args: I) -> Category {
        let mut stack = self.0.args.to_vec();
        stack.extend(args);
        self.with_args(stack)
    }

    /// Every atom occurring anywhere in the category.
    pub fn atoms(&self, out: &mut Vec<Atom>) {
        out.push(self.0.target);
        for arg in self.args() {
            arg.category.atoms(out);
        }
    }
}

impl PartialEq for Category {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for Category {}

impl Hash for Category {
    fn hash<H: Hasher>(&self, state: &mut H) {
        (Arc::as_ptr(&self.0) as usize).hash(state);
    }
}

impl Ord for Category {
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        self.target()
            .cmp(&other.target())
            .then_with(|| self.args().cmp(other.args()))
    }
}

impl PartialOrd for Category {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn write_argument(f: &mut fmt::Formatter<'_>, cat: &Category) -> fmt::Result {
    if cat.is_atomic() {
        write!(f, "{}", cat.target())
    } else {
        write!(f, "({})", cat)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.target())?;
        for arg in self.args() {
            write!(f, "{}", arg.slash.as_char())?;
            write_argument(f, &arg.category)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Category({})", self)
    }
}

impl std::str::FromStr for Category {
    type Err = CategoryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::parse(s)
    }
}

impl serde::Serialize for Category {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Category {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Category::parse(&text).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CategoryError {
    #[error("illegal atom `{0}`")]
    BadAtom(String),
    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },
}

struct CategoryParser<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    text: &'a str,
}

impl<'a> CategoryParser<'a> {
    fn new(text: &'a str) -> Self {
        CategoryParser {
            chars: text.char_indices().filter(|(_, c)| !c.is_whitespace()).collect(),
            pos: 0,
            text,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn offset(&self) -> usize {
        self.chars.get(self.pos).map_or(self.text.len(), |&(i, _)| i)
    }

    fn error(&self, message: impl Into<String>) -> CategoryError {
        CategoryError::Syntax {
            pos: self.offset(),
            message: message.into(),
        }
    }

    fn parse_complete(mut self) -> Result<Category, CategoryError> {
        let cat = self.parse_category()?;
        match self.peek() {
            None => Ok(cat),
            Some(')') => Err(self.error("unbalanced `)`")),
            Some(c) => Err(self.error(format!("unexpected `{c}`"))),
        }
    }

    fn parse_category(&mut self) -> Result<Category, CategoryError> {
        let head = self.parse_primary()?;
        let mut args = head.args().to_vec();
        while let Some(slash) = self.peek().and_then(Slash::from_char) {
            self.pos += 1;
            let arg = self.parse_primary()?;
            args.push(Argument::new(slash, arg));
        }
        Ok(head.with_args(args))
    }

    fn parse_primary(&mut self) -> Result<Category, CategoryError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                if self.peek() == Some(')') {
                    return Err(self.error("empty parentheses"));
                }
                let inner = self.parse_category()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_alphabetic() => {
                // Atoms end at the first non-token character; whitespace was
                // stripped, so look at the raw text to keep `A B` illegal.
                let start = self.offset();
                let rest = &self.text[start..];
                let len = rest
                    .char_indices()
                    .find(|&(_, c)| !is_atom_char(c))
                    .map_or(rest.len(), |(i, _)| i);
                let name = &rest[..len];
                self.pos += name.chars().count();
                Ok(Category::atomic(Atom::intern(name)))
            }
            Some(c) => Err(self.error(format!("expected atom or `(`, found `{c}`"))),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

/// Shorthand for tests and fixtures; panics on malformed input.
pub fn cat(text: &str) -> Category {
    Category::parse(text).unwrap_or_else(|e| panic!("bad category `{text}`: {e}"))
}
