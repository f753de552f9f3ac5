//! Derivation trees: the certificates produced by the parser, their checker,
//! a JSON document format and a brute-force enumerator used as a test oracle.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::sync::Arc;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::category::Category;
use crate::grammar::{Grammar, LexEntry};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Derivation {
    Leaf(LexEntry),
    Node {
        category: Category,
        rule: usize,
        left: Arc<Derivation>,
        right: Arc<Derivation>,
    },
}

impl Derivation {
    pub fn leaf(entry: LexEntry) -> Derivation {
        Derivation::Leaf(entry)
    }

    pub fn node(category: Category, rule: usize, left: Derivation, right: Derivation) -> Derivation {
        Derivation::Node {
            category,
            rule,
            left: Arc::new(left),
            right: Arc::new(right),
        }
    }

    /// Category at the root.
    pub fn top(&self) -> &Category {
        match self {
            Derivation::Leaf(entry) => &entry.category,
            Derivation::Node { category, .. } => category,
        }
    }

    /// Words at the leaves, left to right; empty-string leaves contribute nothing.
    pub fn yield_words(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.visit_leaves(&mut |entry| {
            if let Some(word) = &entry.word {
                out.push(word.as_str());
            }
        });
        out
    }

    pub fn leaves(&self) -> Vec<&LexEntry> {
        let mut out = Vec::new();
        self.visit_leaves(&mut |entry| out.push(entry));
        out
    }

    fn visit_leaves<'a>(&'a self, f: &mut dyn FnMut(&'a LexEntry)) {
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            match t {
                Derivation::Leaf(entry) => f(entry),
                Derivation::Node { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
    }

    /// Total number of nodes, leaves included.
    pub fn node_count(&self) -> usize {
        match self {
            Derivation::Leaf(_) => 1,
            Derivation::Node { left, right, .. } => 1 + left.node_count() + right.node_count(),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Derivation::Leaf(_) => 1,
            Derivation::Node { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    pub fn height(&self) -> usize {
        match self {
            Derivation::Leaf(_) => 0,
            Derivation::Node { left, right, .. } => 1 + left.height().max(right.height()),
        }
    }

    /// The subtree at `path` (0 = left child, 1 = right child).
    pub fn at(&self, path: &[u8]) -> Option<&Derivation> {
        let mut t = self;
        for &step in path {
            t = match (t, step) {
                (Derivation::Node { left, .. }, 0) => left,
                (Derivation::Node { right, .. }, 1) => right,
                _ => return None,
            };
        }
        Some(t)
    }

    /// Copy of the tree with the subtree at `path` replaced.
    pub fn replace_at(&self, path: &[u8], replacement: Derivation) -> Option<Derivation> {
        let Some((&step, rest)) = path.split_first() else {
            return Some(replacement);
        };
        match self {
            Derivation::Leaf(_) => None,
            Derivation::Node {
                category,
                rule,
                left,
                right,
            } => {
                let (left, right) = match step {
                    0 => (Arc::new(left.replace_at(rest, replacement)?), right.clone()),
                    1 => (left.clone(), Arc::new(right.replace_at(rest, replacement)?)),
                    _ => return None,
                };
                Some(Derivation::Node {
                    category: category.clone(),
                    rule: *rule,
                    left,
                    right,
                })
            }
        }
    }

    /// Paths of all nodes in pre-order.
    pub fn paths(&self) -> Vec<Vec<u8>> {
        let mut out = Vec::new();
        let mut stack = vec![(self, Vec::new())];
        while let Some((t, path)) = stack.pop() {
            if let Derivation::Node { left, right, .. } = t {
                let mut r = path.clone();
                r.push(1);
                stack.push((right, r));
                let mut l = path.clone();
                l.push(0);
                stack.push((left, l));
            }
            out.push(path);
        }
        out
    }

    pub fn to_json(&self) -> Value {
        match self {
            Derivation::Leaf(entry) => json!({
                "word": entry.word,
                "cat": entry.category.to_string(),
            }),
            Derivation::Node {
                category,
                rule,
                left,
                right,
            } => json!({
                "cat": category.to_string(),
                "rule": rule,
                "children": [left.to_json(), right.to_json()],
            }),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("json values always serialize")
    }

    pub fn from_json(value: &Value) -> Result<Derivation, DocumentError> {
        from_value(value, &mut Vec::new())
    }

    pub fn from_json_str(text: &str) -> Result<Derivation, DocumentError> {
        let mut de = serde_json::Deserializer::from_str(text);
        de.disable_recursion_limit();
        let value = serde::Deserialize::deserialize(&mut de).map_err(|e| DocumentError {
            path: String::new(),
            message: e.to_string(),
        })?;
        de.end().map_err(|e| DocumentError {
            path: String::new(),
            message: e.to_string(),
        })?;
        Derivation::from_json(&value)
    }

    /// One node per line, children indented under their parent.
    pub fn to_indented_text(&self) -> String {
        let mut out = String::new();
        let mut stack = vec![(self, 0usize)];
        while let Some((t, depth)) = stack.pop() {
            let indent = "  ".repeat(depth);
            match t {
                Derivation::Leaf(entry) => {
                    let word = entry.word.as_deref().unwrap_or("ε");
                    writeln!(out, "{indent}{word} := {}", entry.category).unwrap();
                }
                Derivation::Node {
                    category,
                    rule,
                    left,
                    right,
                } => {
                    writeln!(out, "{indent}{category}  [rule {rule}]").unwrap();
                    stack.push((right, depth + 1));
                    stack.push((left, depth + 1));
                }
            }
        }
        out
    }

    /// Graphviz rendering; leaves show the word under the category.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph derivation {\n  node [shape=plaintext];\n");
        let mut next = 0usize;
        let mut stack: Vec<(&Derivation, Option<usize>)> = vec![(self, None)];
        while let Some((t, parent)) = stack.pop() {
            let id = next;
            next += 1;
            let label = match t {
                Derivation::Leaf(entry) => {
                    format!("{}\\n{}", entry.category, entry.word.as_deref().unwrap_or("ε"))
                }
                Derivation::Node { category, rule, .. } => format!("{category}\\n(rule {rule})"),
            };
            let label = label.replace('"', "\\\"");
            writeln!(out, "  n{id} [label=\"{label}\"];").unwrap();
            if let Some(p) = parent {
                writeln!(out, "  n{p} -> n{id};").unwrap();
            }
            if let Derivation::Node { left, right, .. } = t {
                stack.push((right, Some(id)));
                stack.push((left, Some(id)));
            }
        }
        out.push_str("}\n");
        out
    }
}

fn path_string(path: &[u8]) -> String {
    let mut s = String::from("root");
    for step in path {
        s.push_str(if *step == 0 { ".0" } else { ".1" });
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed derivation document at {path}: {message}")]
pub struct DocumentError {
    pub path: String,
    pub message: String,
}

fn from_value(value: &Value, path: &mut Vec<u8>) -> Result<Derivation, DocumentError> {
    let fail = |path: &[u8], message: String| DocumentError {
        path: path_string(path),
        message,
    };
    let obj: &Map<String, Value> = value
        .as_object()
        .ok_or_else(|| fail(path, "expected an object".into()))?;
    let category = match obj.get("cat") {
        Some(Value::String(text)) => Category::parse(text).map_err(|e| fail(path, e.to_string()))?,
        _ => return Err(fail(path, "missing string field `cat`".into())),
    };
    if obj.contains_key("children") {
        if obj.len() != 3 {
            return Err(fail(path, "node must have exactly `cat`, `rule`, `children`".into()));
        }
        let rule = obj
            .get("rule")
            .and_then(Value::as_u64)
            .ok_or_else(|| fail(path, "missing integer field `rule`".into()))?;
        let children = match obj.get("children") {
            Some(Value::Array(c)) if c.len() == 2 => c,
            _ => return Err(fail(path, "`children` must hold exactly two trees".into())),
        };
        path.push(0);
        let left = from_value(&children[0], path)?;
        path.pop();
        path.push(1);
        let right = from_value(&children[1], path)?;
        path.pop();
        Ok(Derivation::node(category, rule as usize, left, right))
    } else {
        if obj.len() != 2 {
            return Err(fail(path, "leaf must have exactly `word` and `cat`".into()));
        }
        let word = match obj.get("word") {
            Some(Value::Null) => None,
            Some(Value::String(w)) if !w.is_empty() => Some(w.clone()),
            _ => return Err(fail(path, "`word` must be a non-empty string or null".into())),
        };
        Ok(Derivation::Leaf(LexEntry { word, category }))
    }
}

/// The first offending node found by the checker.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {message}")]
pub struct Violation {
    /// `root` followed by `.0`/`.1` steps.
    pub path: String,
    pub message: String,
}

/// Checks, in pre-order, that every leaf is a lexicon entry and every inner
/// node is the output of its rule on its children's categories.
pub fn check_derivation(g: &Grammar, t: &Derivation) -> Result<(), Violation> {
    let mut stack = vec![(t, Vec::<u8>::new())];
    while let Some((t, path)) = stack.pop() {
        let fail = |message: String| Violation {
            path: path_string(&path),
            message,
        };
        match t {
            Derivation::Leaf(entry) => {
                if !g.has_entry(entry) {
                    let word = entry.word.as_deref().unwrap_or("EPS");
                    return Err(fail(format!("`{word} := {}` is not in the lexicon", entry.category)));
                }
            }
            Derivation::Node {
                category,
                rule,
                left,
                right,
            } => {
                let r = g.rule(*rule).ok_or_else(|| fail(format!("unknown rule id {rule}")))?;
                let (primary, secondary) = r.orient(left.top(), right.top());
                match r.apply(primary, secondary) {
                    Some(out) if out == *category => {}
                    Some(out) => {
                        return Err(fail(format!("rule {rule} yields {out}, node claims {category}")));
                    }
                    None => {
                        return Err(fail(format!(
                            "rule {rule} does not apply to {} and {}",
                            left.top(),
                            right.top()
                        )))
                    }
                }
                let mut r = path.clone();
                r.push(1);
                let mut l = path;
                l.push(0);
                stack.push((right, r));
                stack.push((left, l));
            }
        }
    }
    Ok(())
}

/// Full certificate check for membership of `w`: the tree is valid, its yield
/// is `w` and its root is the start category.
pub fn check_certificate(g: &Grammar, t: &Derivation, w: &[&str]) -> Result<(), Violation> {
    check_derivation(g, t)?;
    let root = |message: String| Violation {
        path: "root".into(),
        message,
    };
    if t.yield_words() != w {
        return Err(root(format!("yield `{}` differs from the input", t.yield_words().join(" "))));
    }
    if *t.top() != g.start_category() {
        return Err(root(format!("root category {} is not the start category", t.top())));
    }
    Ok(())
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_indented_text())
    }
}

/// Every derivation of `w` rooted in the start category with at most
/// `node_cap` nodes. Exponential; meant for short inputs only.
pub fn enumerate_derivations(g: &Grammar, w: &[&str], node_cap: usize) -> Vec<Derivation> {
    let mut e = Enumerator {
        g,
        w,
        memo: HashMap::new(),
    };
    let start = g.start_category();
    let mut out = Vec::new();
    let mut c = 1;
    while c <= node_cap {
        for t in e.exact(0, w.len(), c).iter() {
            if *t.top() == start {
                out.push((**t).clone());
            }
        }
        c += 2;
    }
    out
}

struct Enumerator<'a> {
    g: &'a Grammar,
    w: &'a [&'a str],
    memo: HashMap<(usize, usize, usize), Arc<Vec<Arc<Derivation>>>>,
}

impl Enumerator<'_> {
    /// All derivations of `w[i..j]` with exactly `c` nodes.
    fn exact(&mut self, i: usize, j: usize, c: usize) -> Arc<Vec<Arc<Derivation>>> {
        if let Some(hit) = self.memo.get(&(i, j, c)) {
            return hit.clone();
        }
        let mut out = Vec::new();
        if c == 1 {
            let entries = if j == i {
                self.g.epsilon_entries()
            } else if j == i + 1 {
                self.g.entries_for(self.w[i])
            } else {
                &[]
            };
            for &e in entries {
                out.push(Arc::new(Derivation::Leaf(self.g.lexicon()[e].clone())));
            }
        } else if c % 2 == 1 {
            for k in i..=j {
                let mut c1 = 1;
                while c1 + 1 < c {
                    let c2 = c - 1 - c1;
                    let lefts = self.exact(i, k, c1);
                    if !lefts.is_empty() {
                        let rights = self.exact(k, j, c2);
                        for l in lefts.iter() {
                            for r in rights.iter() {
                                for (rule, category) in self.g.combine(l.top(), r.top()) {
                                    out.push(Arc::new(Derivation::Node {
                                        category,
                                        rule,
                                        left: l.clone(),
                                        right: r.clone(),
                                    }));
                                }
                            }
                        }
                    }
                    c1 += 2;
                }
            }
        }
        let out = Arc::new(out);
        self.memo.insert((i, j, c), out.clone());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::category::cat;
    use crate::fixtures;

    fn leaf(word: &str, c: &str) -> Derivation {
        Derivation::leaf(LexEntry::new(word, cat(c)))
    }

    fn eps(c: &str) -> Derivation {
        Derivation::leaf(LexEntry::epsilon(cat(c)))
    }

    fn node(c: &str, rule: usize, l: Derivation, r: Derivation) -> Derivation {
        Derivation::node(cat(c), rule, l, r)
    }

    pub(crate) fn figure1_tree() -> Derivation {
        node(
            "S",
            1,
            leaf("We", "NP"),
            node(
                "S\\NP",
                0,
                leaf("prove", "(S\\NP)/NP"),
                node("NP", 0, leaf("two", "NP/N"), leaf("theorems", "N")),
            ),
        )
    }

    /// Upper derivation for `a a b b`.
    fn figure4_upper() -> Derivation {
        let inner = node("S\\A/Shat", 0, eps("S\\A/Shat/B"), leaf("b", "B"));
        let composed = node("S\\A\\A/Shat/B", 13, inner, eps("Shat\\A/Shat/B"));
        let with_b = node("S\\A\\A/Shat", 0, composed, leaf("b", "B"));
        let with_hat = node("S\\A\\A", 2, with_b, eps("Shat"));
        let one = node("S\\A", 1, leaf("a", "A"), with_hat);
        node("S", 1, leaf("a", "A"), one)
    }

    #[test]
    fn top_and_yield() {
        let t = figure1_tree();
        assert_eq!(*t.top(), cat("S"));
        assert_eq!(t.yield_words(), ["We", "prove", "two", "theorems"]);
        assert_eq!(*leaf("theorems", "N").top(), cat("N"));
        assert_eq!(*eps("Shat").top(), cat("Shat"));
        assert!(eps("Shat").yield_words().is_empty());
        assert_eq!(figure4_upper().yield_words(), ["a", "a", "b", "b"]);
    }

    #[test]
    fn checker_accepts_fixture_trees() {
        assert_eq!(check_derivation(&fixtures::figure1(), &figure1_tree()), Ok(()));
        let g = fixtures::example33();
        assert_eq!(g.rules()[13].to_string(), "rule fwd deg=3 slashes=\\// Y={Shat,Ahat,Bhat}");
        assert_eq!(check_derivation(&g, &figure4_upper()), Ok(()));
        assert_eq!(check_certificate(&g, &figure4_upper(), &["a", "a", "b", "b"]), Ok(()));
    }

    #[test]
    fn checker_names_offending_node() {
        let g = fixtures::figure1();
        let t = figure1_tree();
        let bad_root = match t.clone() {
            Derivation::Node { rule, left, right, .. } => Derivation::Node {
                category: cat("NP"),
                rule,
                left,
                right,
            },
            _ => unreachable!(),
        };
        assert_eq!(check_derivation(&g, &bad_root).unwrap_err().path, "root");
        let bad_leaf = t.replace_at(&[1, 1, 1], leaf("theorems", "NP")).unwrap();
        assert_eq!(check_derivation(&g, &bad_leaf).unwrap_err().path, "root.1.1");
        let bad_word = t.replace_at(&[0], leaf("They", "NP")).unwrap();
        assert_eq!(check_derivation(&g, &bad_word).unwrap_err().path, "root.0");
        let bad_rule = match t {
            Derivation::Node { category, left, right, .. } => Derivation::Node {
                category,
                rule: 7,
                left,
                right,
            },
            _ => unreachable!(),
        };
        assert!(check_derivation(&g, &bad_rule).unwrap_err().message.contains("unknown rule"));
    }

    #[test]
    fn json_round_trip() {
        for t in [figure1_tree(), figure4_upper(), eps("S")] {
            let text = t.to_json_string();
            assert_eq!(Derivation::from_json_str(&text).unwrap(), t);
        }
        let text = eps("S").to_json().to_string();
        assert_eq!(text, r#"{"cat":"S","word":null}"#);
    }

    #[test]
    fn malformed_documents() {
        for text in [
            "",
            "{",
            r#"{"cat":"S"}"#,
            r#"{"cat":"S","rule":0,"children":[{"word":"a","cat":"A"}]}"#,
            r#"{"cat":"S/","word":"a"}"#,
            r#"{"cat":"S","word":""}"#,
            r#"{"cat":"S","rule":-1,"children":[{"word":"a","cat":"A"},{"word":"a","cat":"A"}]}"#,
        ] {
            assert!(Derivation::from_json_str(text).is_err(), "{text}");
        }
    }

    #[test]
    fn enumeration_examples() {
        let g = fixtures::figure1();
        let trees = enumerate_derivations(&g, &["We", "prove", "two", "theorems"], 7);
        assert_eq!(trees, vec![figure1_tree()]);
        assert!(enumerate_derivations(&g, &["prove", "We"], 3).is_empty());
        assert!(enumerate_derivations(&g, &["nonsense"], 1).is_empty());

        let g = fixtures::example33();
        let trees = enumerate_derivations(&g, &[], 1);
        assert_eq!(trees, vec![eps("S")]);
        let trees = enumerate_derivations(&g, &["a", "a", "b", "b"], 13);
        assert!(trees.contains(&figure4_upper()));
        for t in &trees {
            assert_eq!(check_certificate(&g, t, &["a", "a", "b", "b"]), Ok(()));
        }
    }

    #[test]
    fn counts_and_paths() {
        let t = figure1_tree();
        assert_eq!(t.node_count(), 7);
        assert_eq!(t.leaf_count(), 4);
        assert_eq!(t.height(), 3);
        let paths = t.paths();
        assert_eq!(paths.len(), 7);
        assert_eq!(paths[0], Vec::<u8>::new());
        assert_eq!(paths[1], vec![0]);
        assert!(t.at(&[1, 1, 0]).is_some());
        assert!(t.at(&[0, 0]).is_none());
    }

    #[test]
    fn text_exports() {
        let t = figure1_tree();
        let text = t.to_indented_text();
        assert!(text.starts_with("S  [rule 1]\n  We := NP\n"));
        let dot = t.to_dot();
        assert_eq!(dot.matches("->").count(), 6);
    }
}
